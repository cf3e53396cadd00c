#pragma once

// Document format and table rendering.
//
// Networks travel as JSON with explicit frame-label references (never raw
// bitmask integers), so files stay readable next to the tables they encode
// and survive any change of internal encoding.  Two document kinds:
//
//   {"format": "enc-network",  "version": 1, "variables": [...],
//    "edges": [...], "priors": [...], "evidence": [...]}
//   {"format": "enc-evidence", "version": 1, "evidence": [...]}
//
// A mass assignment is a list of {"focal": [labels...], "mass": number};
// an edge carries {"parent", "child", "table": {parent-label: assignment}}.
// Files are validated strictly and rejected with field context on any
// structural problem — never silently repaired.  Saving is canonical (frame
// order for labels, mask order for focal sets), so load -> save -> load is a
// fixed point byte for byte.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "enc/network.hpp"

namespace enc::io {

using OrderedJson = nlohmann::ordered_json;

namespace detail {

inline const OrderedJson& field(const OrderedJson& obj, const char* key,
                                const std::string& where) {
    if (!obj.is_object())
        throw ParseError(where + ": expected an object");
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ParseError(where + ": missing field '" + key + "'");
    return *it;
}

inline void only_fields(const OrderedJson& obj, std::initializer_list<const char*> allowed,
                        const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ParseError(where + ": unknown field '" + key + "'");
    }
}

inline std::string as_string(const OrderedJson& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where + ": expected a string");
    return j.get<std::string>();
}

inline double as_number(const OrderedJson& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where + ": expected a number");
    return j.get<double>();
}

inline const OrderedJson& as_array(const OrderedJson& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array");
    return j;
}

// One mass assignment on a single-variable scope.
inline MassFunction parse_masses(const OrderedJson& arr, const Scope& s,
                                 const std::string& where) {
    as_array(arr, where);
    if (arr.empty()) throw ParseError(where + ": empty mass assignment");
    const VarPtr& var = s.variables().front();
    std::vector<std::pair<ConfigSet, double>> entries;
    std::vector<Bitset> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string row = where + "[" + std::to_string(i) + "]";
        const OrderedJson& item = arr[i];
        only_fields(item, {"focal", "mass"}, row);
        const OrderedJson& focal = as_array(field(item, "focal", row), row + ".focal");
        Bitset bits(var->frame_size());
        for (const auto& l : focal) {
            const std::string label = as_string(l, row + ".focal");
            std::size_t idx = 0;
            try {
                idx = var->label_index(label);
            } catch (const Error&) {
                throw ParseError(row + ".focal: unknown label '" + label + "' for variable '" +
                                 var->name() + "'");
            }
            if (bits.test(idx))
                throw ParseError(row + ".focal: label '" + label + "' listed twice");
            bits.set(idx);
        }
        for (const auto& b : seen)
            if (b == bits)
                throw ParseError(row + ".focal: duplicate focal set " +
                                 ConfigSet(s, bits).to_string());
        seen.push_back(bits);
        const double mass = as_number(field(item, "mass", row), row + ".mass");
        if (mass <= 0.0)
            throw ParseError(row + ".mass: mass must be positive, got " + std::to_string(mass));
        entries.emplace_back(ConfigSet(s, bits), mass);
    }
    try {
        return MassFunction::from_input(s, entries);
    } catch (const MassError& e) {
        throw ParseError(where + ": " + e.what());
    }
}

inline VarPtr find_variable(const EvidentialNetwork& net, const std::string& name,
                            const std::string& where) {
    try {
        return net.variable(name);
    } catch (const ValidationError&) {
        throw ParseError(where + ": unknown variable '" + name + "'");
    }
}

inline void check_header(const OrderedJson& doc, const char* expected_format,
                         const std::string& where) {
    if (!doc.is_object()) throw ParseError(where + ": expected a JSON object");
    const std::string format = as_string(field(doc, "format", where), where + ".format");
    if (format != expected_format)
        throw ParseError(where + ".format: expected '" + std::string(expected_format) +
                         "', got '" + format + "'");
    const OrderedJson& version = field(doc, "version", where);
    if (!version.is_number_integer() || version.get<int>() != 1)
        throw ParseError(where + ".version: only version 1 is understood");
}

// Shared by network priors/evidence and standalone evidence documents.
inline std::pair<VarPtr, MassFunction> parse_block(const OrderedJson& block,
                                                   const EvidentialNetwork& net,
                                                   const std::string& where) {
    only_fields(block, {"variable", "masses"}, where);
    const std::string name =
        as_string(field(block, "variable", where), where + ".variable");
    const VarPtr var = find_variable(net, name, where + ".variable");
    return {var, parse_masses(field(block, "masses", where), Scope::single(var),
                              where + ".masses")};
}

inline void parse_evidence_array(const OrderedJson& arr, EvidentialNetwork& net,
                                 const std::string& where) {
    as_array(arr, where);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        auto [var, m] = parse_block(arr[i], net, where + "[" + std::to_string(i) + "]");
        net.add_evidence(var, std::move(m));
    }
}

} // namespace detail

inline EvidentialNetwork load_network(const OrderedJson& doc) {
    using namespace detail;
    check_header(doc, "enc-network", "document");
    only_fields(doc, {"format", "version", "variables", "edges", "priors", "evidence"},
                "document");

    EvidentialNetwork net;
    const OrderedJson& vars = as_array(field(doc, "variables", "document"),
                                       "document.variables");
    if (vars.empty()) throw ParseError("document.variables: no variables");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const std::string where = "variables[" + std::to_string(i) + "]";
        const OrderedJson& v = vars[i];
        only_fields(v, {"name", "frame"}, where);
        const std::string name = as_string(field(v, "name", where), where + ".name");
        const OrderedJson& frame = as_array(field(v, "frame", where), where + ".frame");
        if (frame.empty()) throw ParseError(where + ".frame: empty frame");
        std::vector<std::string> labels;
        for (const auto& l : frame) labels.push_back(as_string(l, where + ".frame"));
        try {
            net.add_variable(make_variable(name, labels));
        } catch (const Error& e) {
            throw ParseError(where + ": " + e.what());
        }
    }

    if (doc.contains("edges")) {
        const OrderedJson& edges = as_array(doc["edges"], "document.edges");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const std::string where = "edges[" + std::to_string(i) + "]";
            const OrderedJson& e = edges[i];
            only_fields(e, {"parent", "child", "table"}, where);
            const VarPtr parent = find_variable(
                net, as_string(field(e, "parent", where), where + ".parent"),
                where + ".parent");
            const VarPtr child = find_variable(
                net, as_string(field(e, "child", where), where + ".child"), where + ".child");
            const OrderedJson& table = field(e, "table", where);
            if (!table.is_object()) throw ParseError(where + ".table: expected an object");
            for (const auto& [key, value] : table.items())
                if (!parent->has_label(key))
                    throw ParseError(where + ".table: '" + key +
                                     "' is not an element of variable '" + parent->name() + "'");
            std::vector<MassFunction> entries;
            for (const auto& label : parent->labels()) {
                const auto it = table.find(label);
                if (it == table.end())
                    throw ParseError(where + ".table: missing column for element '" + label +
                                     "'");
                entries.push_back(parse_masses(*it, Scope::single(child),
                                               where + ".table." + label));
            }
            try {
                net.add_edge(parent, child,
                             ConditionalBeliefFamily(Scope::single(parent), Scope::single(child),
                                                     std::move(entries)));
            } catch (const Error& e2) {
                throw ParseError(where + ": " + e2.what());
            }
        }
    }

    if (doc.contains("priors")) {
        const OrderedJson& priors = as_array(doc["priors"], "document.priors");
        std::vector<std::uint64_t> assigned;
        for (std::size_t i = 0; i < priors.size(); ++i) {
            const std::string where = "priors[" + std::to_string(i) + "]";
            auto [var, m] = parse_block(priors[i], net, where);
            for (const auto s : assigned)
                if (s == var->serial())
                    throw ParseError(where + ": variable '" + var->name() +
                                     "' already has a prior");
            assigned.push_back(var->serial());
            net.set_prior(var, std::move(m));
        }
    }

    if (doc.contains("evidence"))
        detail::parse_evidence_array(doc["evidence"], net, "document.evidence");
    return net;
}

inline void merge_evidence(EvidentialNetwork& net, const OrderedJson& doc) {
    using namespace detail;
    check_header(doc, "enc-evidence", "document");
    only_fields(doc, {"format", "version", "evidence"}, "document");
    parse_evidence_array(field(doc, "evidence", "document"), net, "document.evidence");
}

namespace detail {

inline OrderedJson parse_text(const std::string& text, const std::string& origin) {
    try {
        return OrderedJson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

inline OrderedJson masses_to_json(const MassFunction& m) {
    const Scope& s = m.scope();
    const VarPtr& var = s.variables().front();
    OrderedJson rows = OrderedJson::array();
    for (const auto& [bits, mass] : m.focal()) {
        OrderedJson focal = OrderedJson::array();
        bits.for_each([&](std::size_t i) { focal.push_back(var->labels()[i]); });
        rows.push_back({{"focal", std::move(focal)}, {"mass", mass}});
    }
    return rows;
}

} // namespace detail

inline EvidentialNetwork load_network_file(const std::string& path) {
    return load_network(detail::parse_text(detail::read_file(path), path));
}

inline void merge_evidence_file(EvidentialNetwork& net, const std::string& path) {
    merge_evidence(net, detail::parse_text(detail::read_file(path), path));
}

inline OrderedJson save_network(const EvidentialNetwork& net) {
    OrderedJson doc;
    doc["format"] = "enc-network";
    doc["version"] = 1;
    doc["variables"] = OrderedJson::array();
    for (const auto& v : net.variables())
        doc["variables"].push_back({{"name", v->name()}, {"frame", v->labels()}});
    doc["edges"] = OrderedJson::array();
    for (const auto& e : net.edges()) {
        OrderedJson table;
        for (std::size_t i = 0; i < e.family->parent_size(); ++i)
            table[e.parent->labels()[i]] = detail::masses_to_json(e.family->entry(i));
        doc["edges"].push_back({{"parent", e.parent->name()},
                                {"child", e.child->name()},
                                {"table", std::move(table)}});
    }
    OrderedJson priors = OrderedJson::array();
    for (const auto& v : net.variables()) {
        const MassFunction p = net.prior(v);
        if (!p.is_vacuous())
            priors.push_back({{"variable", v->name()},
                              {"masses", detail::masses_to_json(p)}});
    }
    if (!priors.empty()) doc["priors"] = std::move(priors);
    OrderedJson evidence = OrderedJson::array();
    for (const auto& v : net.variables())
        for (const auto& piece : net.evidence(v))
            evidence.push_back({{"variable", v->name()},
                                {"masses", detail::masses_to_json(piece)}});
    if (!evidence.empty()) doc["evidence"] = std::move(evidence);
    return doc;
}

inline std::string save_network_text(const EvidentialNetwork& net) {
    return save_network(net).dump(2) + "\n";
}

// Fixed-width table of a mass function's focal sets with the three other
// one-point representations, rows in mask order.
inline std::string render_table(const MassFunction& m) {
    const Scope& s = m.scope();
    std::vector<std::string> names;
    std::size_t width = std::string("focal set").size();
    for (const auto& [bits, mass] : m.focal()) {
        names.push_back(ConfigSet(s, bits).to_string());
        width = std::max(width, names.back().size());
    }
    std::string out = "focal set";
    out.append(width - 9, ' ');
    out += "         m       bel        pl         q\n";
    std::size_t row = 0;
    for (const auto& [bits, mass] : m.focal()) {
        char num[64];
        out += names[row];
        out.append(width - names[row].size(), ' ');
        std::snprintf(num, sizeof num, "  %8.6f  %8.6f  %8.6f  %8.6f", mass, m.bel(bits),
                      m.pl(bits), m.q(bits));
        out += num;
        out += '\n';
        ++row;
    }
    return out;
}

} // namespace enc::io
