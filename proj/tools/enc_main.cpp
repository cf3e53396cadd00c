// Command-line front end: validate network documents, query marginals by any
// of the computation paths, cross-check everything against the brute-force
// joint, and point at the bundled worked-example fixtures.
//
// Exit codes: 0 ok, 1 validation failure, 2 numeric mismatch, 3 resource cap.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enc/enc.hpp"

namespace {

using namespace enc;

constexpr double kCheckBand = 1e-9;

Limits limits_from_env() {
    Limits lim = default_limits();
    if (const char* s = std::getenv("ENC_MAX_CONFIGS")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 10);
        if (end == s || *end != '\0' || v == 0) {
            std::fprintf(stderr, "ENC_MAX_CONFIGS must be a positive integer, got '%s'\n", s);
            std::exit(1);
        }
        lim.max_configs = v;
    }
    return lim;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ResourceError& e) {
        std::fprintf(stderr, "resource cap: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

EvidentialNetwork load_with_evidence(const std::string& network_path,
                                     const std::string& evidence_path) {
    EvidentialNetwork net = io::load_network_file(network_path);
    if (!evidence_path.empty()) io::merge_evidence_file(net, evidence_path);
    return net;
}

int cmd_validate(const std::string& path, const Limits& lim) {
    const EvidentialNetwork net = io::load_network_file(path);
    const NetworkReport rep = validate(net, lim);
    for (const auto& p : rep.problems) std::printf("problem: %s\n", p.c_str());
    for (const auto& n : rep.notes) std::printf("note: %s\n", n.c_str());
    std::printf("%s: %zu variable(s), %zu edge(s), %s, %s\n", rep.ok ? "OK" : "INVALID",
                net.variables().size(), net.edges().size(),
                rep.dag ? "acyclic" : "cyclic",
                rep.polytree ? "polytree skeleton" : "loopy skeleton");
    return rep.ok ? 0 : 1;
}

// The marginal of one variable by the requested method.  A method whose
// preconditions fail says so on stderr and names the route used instead.
MassFunction query_marginal(const EvidentialNetwork& net, const VarPtr& target,
                            std::string method, std::string& used, const Limits& lim) {
    if (method == "partition") {
        try {
            const auto out = partition_optimize(net, target, lim);
            used = "partition";
            return out.hub_marginal;
        } catch (const ValidationError& e) {
            std::fprintf(stderr,
                         "method 'partition' is not applicable here (%s); "
                         "falling back to 'auto'\n",
                         e.what());
            method = "auto";
        }
    }
    if (method == "oracle") {
        used = "oracle";
        return oracle_marginals(net, lim).marginals.at(target->serial());
    }
    if (method == "polytree" || method == "auto") {
        try {
            const auto res = propagate_polytree(net, lim);
            used = "polytree";
            return res.marginals.at(target->serial());
        } catch (const LoopError& e) {
            if (method == "polytree")
                std::fprintf(stderr,
                             "method 'polytree' is not applicable here (%s); "
                             "falling back to 'merged'\n",
                             e.what());
        }
    }
    const auto res = propagate_merged(merge_loops(net, lim), lim);
    used = "merged";
    return res.marginals.at(target->serial());
}

int cmd_query(const std::string& path, const std::string& evidence_path,
              const std::string& target_name, const std::string& method, bool normalize_out,
              const Limits& lim) {
    const EvidentialNetwork net = load_with_evidence(path, evidence_path);
    const VarPtr target = net.variable(target_name);
    std::string used;
    MassFunction marginal = query_marginal(net, target, method, used, lim);
    if (normalize_out) marginal = normalize(marginal);
    std::printf("BEL(%s) via %s%s\n", target->name().c_str(), used.c_str(),
                normalize_out ? ", normalized" : "");
    std::fputs(io::render_table(marginal).c_str(), stdout);
    return 0;
}

struct CheckStats {
    double worst = 0.0;
    std::string worst_variable;
    bool capped = false;

    void fold(const std::string& var, double dev) {
        if (dev > worst) {
            worst = dev;
            worst_variable = var;
        }
    }
};

// Compare every applicable propagation path against the brute-force joint.
CheckStats check_network(const EvidentialNetwork& net, const std::string& perturb,
                         const Limits& lim, bool print) {
    const OracleResult oracle = oracle_marginals(net, lim);
    CheckStats stats;

    std::unordered_map<std::uint64_t, MassFunction> engine;
    std::string engine_method = "polytree";
    try {
        engine = propagate_polytree(net, lim).marginals;
    } catch (const LoopError&) {
        engine = propagate_merged(merge_loops(net, lim), lim).marginals;
        engine_method = "merged";
    }

    if (!perturb.empty()) {
        const VarPtr v = net.variable(perturb); // unknown name -> validation error
        const Scope s = Scope::single(v);
        MassFunction& m = engine.at(v->serial());
        MassMixture mixed(s);
        if (m.is_vacuous()) {
            mixed.add_point(0.5, Bitset::full(v->frame_size()));
            Bitset first(v->frame_size());
            first.set(0);
            mixed.add_point(0.5, first);
        } else {
            mixed.add(0.9, m);
            mixed.add_point(0.1, Bitset::full(v->frame_size()));
        }
        m = std::move(mixed).finish();
        if (print) std::printf("perturbation injected into the '%s' marginal\n", perturb.c_str());
    }

    std::vector<std::pair<std::string, double>> rows;
    for (const auto& v : net.variables()) {
        const double dev =
            max_mass_difference(engine.at(v->serial()), oracle.marginals.at(v->serial()));
        rows.emplace_back(v->name(), dev);
        stats.fold(v->name(), dev);
    }

    std::size_t hubs = 0;
    for (const auto& v : net.variables()) {
        if (!net.parents_of(v).empty() || net.children_of(v).size() < 2) continue;
        try {
            const auto part = partition_optimize(net, v, lim);
            const double dev =
                max_mass_difference(part.hub_marginal, oracle.marginals.at(v->serial()));
            stats.fold(v->name() + " (partition)", dev);
            ++hubs;
        } catch (const ValidationError&) {
            // not an eligible hub after all; the direct methods cover it
        } catch (const LoopError&) {
            // loopy skeleton; the merged route above already covers it
        }
    }

    if (print) {
        std::printf("method %s vs oracle, %zu variable(s), %zu partition hub(s)\n",
                    engine_method.c_str(), net.variables().size(), hubs);
        for (const auto& [name, dev] : rows) std::printf("%-12s %.3e\n", name.c_str(), dev);
    }
    return stats;
}

int cmd_oracle_check(const std::string& path, const std::string& evidence_path,
                     const std::string& perturb, unsigned trials, std::uint64_t seed,
                     const Limits& lim) {
    if (!path.empty()) {
        const EvidentialNetwork net = load_with_evidence(path, evidence_path);
        const CheckStats stats = check_network(net, perturb, lim, true);
        if (stats.worst > kCheckBand) {
            std::printf("FAIL: deviation %.3e on variable '%s' exceeds %.0e\n", stats.worst,
                        stats.worst_variable.c_str(), kCheckBand);
            return 2;
        }
        std::printf("PASS (worst deviation %.3e)\n", stats.worst);
        if (trials == 0) return 0;
    }

    Rng rng(seed);
    const char* const shapes[] = {"polytree", "triangle", "diamond", "hub"};
    unsigned passed = 0, failed = 0, skipped = 0;
    for (unsigned t = 0; t < trials; ++t) {
        const unsigned kind = t % 4;
        try {
            EvidentialNetwork net;
            switch (kind) {
            case 0: net = random_polytree(rng); break;
            case 1: net = random_single_loop(rng, false); break;
            case 2: net = random_single_loop(rng, true); break;
            default: net = random_hub_spokes(rng, 2 + t % 2, 1 + t % 2); break;
            }
            const CheckStats stats = check_network(net, "", lim, false);
            if (stats.worst > kCheckBand) {
                ++failed;
                std::printf("trial %03u %-8s FAIL (%.3e on '%s')\n", t, shapes[kind], stats.worst,
                            stats.worst_variable.c_str());
            } else {
                ++passed;
                std::printf("trial %03u %-8s PASS (worst %.3e)\n", t, shapes[kind], stats.worst);
            }
        } catch (const ResourceError& e) {
            ++skipped;
            std::printf("trial %03u %-8s SKIP (cap: %s)\n", t, shapes[kind], e.what());
        }
    }
    if (trials > 0)
        std::printf("%u trial(s): %u passed, %u failed, %u skipped (seed %llu)\n", trials, passed,
                    failed, skipped, static_cast<unsigned long long>(seed));
    return failed > 0 ? 2 : 0;
}

int cmd_example3() {
    std::printf("network:  %s/example3_network.json\n", ENC_DATA_DIR);
    std::printf("evidence: %s/example3_evidence.json\n", ENC_DATA_DIR);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Belief-function inference over evidential networks"};
    app.require_subcommand(1);
    const Limits lim = limits_from_env();

    std::string path, evidence_path, target, method = "auto", perturb;
    bool normalize_out = false;
    unsigned trials = 0;
    std::uint64_t seed = 42;

    CLI::App* validate_cmd = app.add_subcommand("validate", "Check a network document");
    validate_cmd->add_option("network", path, "network document (JSON)")->required();

    CLI::App* query_cmd = app.add_subcommand("query", "Print one variable's marginal belief");
    query_cmd->add_option("network", path, "network document (JSON)")->required();
    query_cmd->add_option("--target", target, "variable to query")->required();
    query_cmd->add_option("--evidence", evidence_path, "evidence document to merge");
    query_cmd->add_option("--method", method, "computation path")
        ->check(CLI::IsMember({"auto", "polytree", "merged", "partition", "oracle"}));
    query_cmd->add_flag("--normalize", normalize_out,
                        "apply Dempster normalization to the output");

    CLI::App* check_cmd = app.add_subcommand(
        "oracle-check", "Compare every propagation path against the brute-force joint");
    check_cmd->add_option("network", path, "network document (JSON)");
    check_cmd->add_option("--evidence", evidence_path, "evidence document to merge");
    check_cmd->add_option("--trials", trials, "additionally check N random networks");
    check_cmd->add_option("--seed", seed, "seed for the random networks");
    check_cmd->add_option("--perturb", perturb,
                          "testing aid: corrupt this variable's computed marginal");

    CLI::App* example_cmd =
        app.add_subcommand("example3", "Print the bundled worked-example fixture paths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (validate_cmd->parsed()) return guarded([&] { return cmd_validate(path, lim); });
    if (query_cmd->parsed())
        return guarded(
            [&] { return cmd_query(path, evidence_path, target, method, normalize_out, lim); });
    if (check_cmd->parsed()) {
        if (path.empty() && trials == 0) {
            std::fprintf(stderr, "oracle-check needs a network document or --trials\n");
            return 1;
        }
        return guarded(
            [&] { return cmd_oracle_check(path, evidence_path, perturb, trials, seed, lim); });
    }
    if (example_cmd->parsed()) return cmd_example3();
    return 1;
}
