#pragma once

// Evidential networks: directed acyclic graphs whose edges carry conditional
// belief families.  Marginals come from message passing over the undirected
// skeleton.  Networks whose skeleton has loops are first linearized by merging
// nodes (merge_loops); hub-and-spokes topologies can instead be coarsened per
// child branch (partition_optimize).  oracle.hpp holds the brute-force joint
// construction that pins down the semantics of every path implemented here.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "enc/conditional.hpp"

namespace enc {

// ---------------------------------------------------------------------------
// EvidentialNetwork: variables, one family per directed edge, per-variable
// prior beliefs, and any number of evidence mass functions per variable.
// ---------------------------------------------------------------------------

struct NetworkEdge {
    VarPtr parent;
    VarPtr child;
    std::shared_ptr<const ConditionalBeliefFamily> family;
};

class EvidentialNetwork {
public:
    void add_variable(VarPtr v) {
        if (index_.count(v->serial()))
            throw ValidationError("variable '" + v->name() + "' added twice");
        index_[v->serial()] = vars_.size();
        vars_.push_back(std::move(v));
    }

    bool has_variable(const VarPtr& v) const { return index_.count(v->serial()) != 0; }

    // Name lookup for document loading and the command line.
    VarPtr variable(const std::string& name) const {
        for (const auto& v : vars_)
            if (v->name() == name) return v;
        throw ValidationError("unknown variable '" + name + "'");
    }

    void add_edge(const VarPtr& parent, const VarPtr& child, ConditionalBeliefFamily family) {
        require_known(parent);
        require_known(child);
        if (parent->serial() == child->serial())
            throw ValidationError("self-loop on variable '" + parent->name() + "'");
        if (edge_between(parent, child))
            throw ValidationError("duplicate edge " + parent->name() + " -> " + child->name());
        if (family.parent() != Scope::single(parent) || family.child() != Scope::single(child))
            throw ValidationError("family scopes do not match edge " + parent->name() + " -> " +
                                  child->name());
        edges_.push_back({parent, child,
                          std::make_shared<const ConditionalBeliefFamily>(std::move(family))});
    }

    void set_prior(const VarPtr& v, MassFunction m) {
        require_known(v);
        if (m.scope() != Scope::single(v))
            throw ScopeError("prior for '" + v->name() + "' lives on the wrong scope");
        priors_.insert_or_assign(v->serial(), std::move(m));
    }

    void add_evidence(const VarPtr& v, MassFunction m) {
        require_known(v);
        if (m.scope() != Scope::single(v))
            throw ScopeError("evidence for '" + v->name() + "' lives on the wrong scope");
        evidence_.emplace_back(v->serial(), std::move(m));
    }

    const std::vector<VarPtr>& variables() const { return vars_; }
    const std::vector<NetworkEdge>& edges() const { return edges_; }

    MassFunction prior(const VarPtr& v) const {
        const auto it = priors_.find(v->serial());
        return it == priors_.end() ? MassFunction::vacuous(Scope::single(v)) : it->second;
    }

    std::vector<MassFunction> evidence(const VarPtr& v) const {
        std::vector<MassFunction> out;
        for (const auto& [serial, m] : evidence_)
            if (serial == v->serial()) out.push_back(m);
        return out;
    }

    // Prior and evidence folded together: the node's local belief before any
    // messages arrive.
    MassFunction potential(const VarPtr& v, const Limits& limits = default_limits()) const {
        MassFunction out = prior(v);
        for (const auto& [serial, m] : evidence_)
            if (serial == v->serial()) out = conjunctive_combine(out, m, limits);
        return out;
    }

    const NetworkEdge* edge_between(const VarPtr& parent, const VarPtr& child) const {
        for (const auto& e : edges_)
            if (e.parent->serial() == parent->serial() && e.child->serial() == child->serial())
                return &e;
        return nullptr;
    }

    std::vector<VarPtr> parents_of(const VarPtr& v) const {
        std::vector<VarPtr> out;
        for (const auto& e : edges_)
            if (e.child->serial() == v->serial()) out.push_back(e.parent);
        return out;
    }

    std::vector<VarPtr> children_of(const VarPtr& v) const {
        std::vector<VarPtr> out;
        for (const auto& e : edges_)
            if (e.parent->serial() == v->serial()) out.push_back(e.child);
        return out;
    }

private:
    void require_known(const VarPtr& v) const {
        if (!has_variable(v))
            throw ValidationError("variable '" + v->name() + "' is not part of this network");
    }

    std::vector<VarPtr> vars_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::vector<NetworkEdge> edges_;
    std::map<std::uint64_t, MassFunction> priors_;
    std::vector<std::pair<std::uint64_t, MassFunction>> evidence_;
};

namespace detail {

// First directed cycle found in the variable graph, as names, or nothing.
inline std::optional<std::vector<std::string>> find_directed_cycle(const EvidentialNetwork& net) {
    const auto& vars = net.variables();
    std::unordered_map<std::uint64_t, std::size_t> pos;
    for (std::size_t i = 0; i < vars.size(); ++i) pos[vars[i]->serial()] = i;
    std::vector<std::vector<std::size_t>> out(vars.size());
    for (const auto& e : net.edges())
        out[pos[e.parent->serial()]].push_back(pos[e.child->serial()]);

    std::vector<int> color(vars.size(), 0); // 0 new, 1 on stack, 2 done
    std::vector<std::size_t> trail;
    std::optional<std::vector<std::string>> found;

    std::function<bool(std::size_t)> dfs = [&](std::size_t u) -> bool {
        color[u] = 1;
        trail.push_back(u);
        for (std::size_t w : out[u]) {
            if (color[w] == 1) {
                std::vector<std::string> names;
                auto it = std::find(trail.begin(), trail.end(), w);
                for (; it != trail.end(); ++it) names.push_back(vars[*it]->name());
                found = std::move(names);
                return true;
            }
            if (color[w] == 0 && dfs(w)) return true;
        }
        color[u] = 2;
        trail.pop_back();
        return false;
    };
    for (std::size_t i = 0; i < vars.size() && !found; ++i)
        if (color[i] == 0) dfs(i);
    return found;
}

} // namespace detail

// ---------------------------------------------------------------------------
// validate: structural report.  Violations land in `problems`; informational
// observations (relevance sets, interpretation choices) land in `notes`.
// ---------------------------------------------------------------------------

struct NetworkReport {
    bool ok = true;
    bool dag = true;
    bool polytree = true;
    std::vector<std::string> problems;
    std::vector<std::string> notes;
};

inline NetworkReport validate(const EvidentialNetwork& net,
                              const Limits& limits = default_limits()) {
    NetworkReport rep;

    if (auto cycle = detail::find_directed_cycle(net)) {
        rep.dag = false;
        std::string msg = "directed cycle through:";
        for (const auto& n : *cycle) msg += " " + n;
        rep.problems.push_back(std::move(msg));
    }

    // Undirected skeleton acyclicity, via union-find.
    {
        const auto& vars = net.variables();
        std::unordered_map<std::uint64_t, std::size_t> pos;
        for (std::size_t i = 0; i < vars.size(); ++i) pos[vars[i]->serial()] = i;
        std::vector<std::size_t> parent(vars.size());
        for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
        std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
            while (parent[i] != i) i = parent[i] = parent[parent[i]];
            return i;
        };
        for (const auto& e : net.edges()) {
            const auto a = find(pos[e.parent->serial()]);
            const auto b = find(pos[e.child->serial()]);
            if (a == b) {
                rep.polytree = false;
                rep.notes.push_back("undirected loop through edge " + e.parent->name() + " -> " +
                                    e.child->name() + "; propagate_polytree will refuse, use "
                                    "merge_loops");
            } else {
                parent[a] = b;
            }
        }
    }

    // Per-edge diagnostics: relevance sets and entry health.
    for (const auto& e : net.edges()) {
        const auto info = relevance(*e.family);
        rep.notes.push_back("edge " + e.parent->name() + " -> " + e.child->name() +
                            ": irrelevant parent elements " + info.irrelevant.to_string());
        for (std::size_t i = 0; i < e.family->parent_size(); ++i) {
            const double empty = e.family->entry(i).mass_of_empty();
            if (empty > tol::validity)
                rep.notes.push_back("edge " + e.parent->name() + " -> " + e.child->name() +
                                    ": entry for " + e.parent->labels()[i] +
                                    " is subnormal (mass " + std::to_string(empty) +
                                    " on the empty set)");
        }
    }

    // Multiple parents: each incoming family is kept separate and their
    // messages combine conjunctively at the child.
    for (const auto& v : net.variables()) {
        const auto ps = net.parents_of(v);
        if (ps.size() > 1)
            rep.notes.push_back("variable '" + v->name() + "' has " + std::to_string(ps.size()) +
                                " parents; incoming families are treated as separate edges and "
                                "combined conjunctively at the child");
    }

    // Evidence and prior scopes are enforced at insertion; report totals.
    for (const auto& v : net.variables()) {
        const auto pieces = net.evidence(v);
        if (!pieces.empty())
            rep.notes.push_back("variable '" + v->name() + "' carries " +
                                std::to_string(pieces.size()) + " evidence piece(s)");
    }

    (void)limits;
    rep.ok = rep.problems.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// EdgeRelation: everything known about the families crossing between two
// (possibly merged) nodes, with conditional queries in both directions.
//
// The reference semantics of a query is always: combine the joint extensions
// of every crossing family on the edge's full scope, condition on the source
// subset, and project onto the receiver.  Structured sources take cheaper
// routes that are proved (and property-tested) equal to the reference:
//   - all families pointing source->target, and the source's projection onto
//     the used parent variables factorizing per variable: per-variable
//     disjunctive folds of pointwise-combined entries;
//   - all families pointing target->source with one family per child
//     variable and a factorizing projection: per-family inversions.
// ---------------------------------------------------------------------------

struct Crossing {
    std::shared_ptr<const ConditionalBeliefFamily> family;
    VarPtr parent_var;
    VarPtr child_var;
};

class EdgeRelation {
public:
    EdgeRelation(Scope left, Scope right, std::vector<Crossing> crossings)
        : left_(std::move(left)), right_(std::move(right)), crossings_(std::move(crossings)) {
        for (const auto& c : crossings_) {
            const bool fwd = left_.contains(c.parent_var) && right_.contains(c.child_var);
            const bool bwd = right_.contains(c.parent_var) && left_.contains(c.child_var);
            if (!fwd && !bwd)
                throw ScopeError("crossing family " + c.parent_var->name() + " -> " +
                                 c.child_var->name() + " does not span the edge " + left_.name() +
                                 " -- " + right_.name());
        }
    }

    const Scope& left() const { return left_; }
    const Scope& right() const { return right_; }
    const std::vector<Crossing>& crossings() const { return crossings_; }

    // The conditional mass over the target node given that the source node's
    // value lies in `source` (a nonempty subset of the source frame).
    MassFunction query(bool toward_right, const Bitset& source,
                       const Limits& limits = default_limits()) const {
        const Scope& src = toward_right ? left_ : right_;
        if (source.none())
            throw ValidationError("conditioning subset on " + src.name() + " must be nonempty");

        std::vector<const Crossing*> fwd, bwd;
        for (const auto& c : crossings_)
            (src.contains(c.parent_var) ? fwd : bwd).push_back(&c);

        if (bwd.empty()) {
            if (auto fast = forward_fast(toward_right, source, fwd, limits)) return *std::move(fast);
        } else if (fwd.empty()) {
            if (auto fast = backward_fast(toward_right, source, bwd, limits)) return *std::move(fast);
        }
        return query_reference(toward_right, source, limits);
    }

    // Reference route: condition the combined joint extension, then project.
    MassFunction query_reference(bool toward_right, const Bitset& source,
                                 const Limits& limits = default_limits()) const {
        const Scope& src = toward_right ? left_ : right_;
        const Scope& tgt = toward_right ? right_ : left_;
        const MassFunction& j = reference_joint(limits);
        const ConfigSet lifted = cylinder_extend(ConfigSet(src, source), j.scope());
        return marginalize(condition(j, lifted), tgt);
    }

    const MassFunction& reference_joint(const Limits& limits = default_limits()) const {
        if (!joint_) {
            const Scope both = scope_union(left_, right_, limits);
            MassFunction j = MassFunction::vacuous(both);
            for (const auto& c : crossings_)
                j = conjunctive_combine(
                    j, vacuous_extend(ballooning_extension(*c.family, limits), both), limits);
            joint_ = std::move(j);
        }
        return *joint_;
    }

private:
    // Split a subset of `whole` into independent per-variable factors; empty
    // result means the subset does not factorize.
    static std::vector<Bitset> factorize(const ConfigSet& set, const Scope& whole) {
        std::vector<Bitset> factors;
        Bitset product = Bitset::full(static_cast<std::size_t>(whole.cardinality()));
        for (const auto& v : whole.variables()) {
            ConfigSet f = project(set, Scope::single(v));
            product = product & cylinder_extend(f, whole).bits();
            factors.push_back(f.bits());
        }
        if (!(product == set.bits())) factors.clear();
        return factors;
    }

    std::optional<MassFunction> forward_fast(bool toward_right, const Bitset& source,
                                             const std::vector<const Crossing*>& fwd,
                                             const Limits& limits) const {
        const Scope& src = toward_right ? left_ : right_;
        const Scope& tgt = toward_right ? right_ : left_;

        // Only the source's projection onto the parent variables actually read
        // by the families matters; unused coordinates integrate out.
        std::vector<VarPtr> used;
        for (const auto* c : fwd)
            if (std::none_of(used.begin(), used.end(), [&](const VarPtr& v) {
                    return v->serial() == c->parent_var->serial();
                }))
                used.push_back(c->parent_var);
        const Scope uscope(used);
        const ConfigSet q = project(ConfigSet(src, source), uscope);
        const auto factors = factorize(q, uscope);
        if (factors.empty()) return std::nullopt;

        MassFunction acc = MassFunction::vacuous(tgt);
        for (std::size_t k = 0; k < uscope.arity(); ++k) {
            const auto& p = uscope.variables()[k];
            std::vector<const Crossing*> group;
            for (const auto* c : fwd)
                if (c->parent_var->serial() == p->serial()) group.push_back(c);
            // Disjunctive fold over the factor's elements of the pointwise
            // conjunction of this parent variable's entries.
            MassFunction dp = MassFunction::certain(ConfigSet::empty_set(tgt));
            for (const std::size_t i : factors[k].members()) {
                MassFunction term = MassFunction::vacuous(tgt);
                for (const auto* c : group)
                    term = conjunctive_combine(term, vacuous_extend(c->family->entry(i), tgt),
                                               limits);
                dp = disjunctive_combine(dp, term, limits);
            }
            acc = conjunctive_combine(acc, dp, limits);
        }
        return acc;
    }

    std::optional<MassFunction> backward_fast(bool toward_right, const Bitset& source,
                                              const std::vector<const Crossing*>& bwd,
                                              const Limits& limits) const {
        const Scope& src = toward_right ? left_ : right_;
        const Scope& tgt = toward_right ? right_ : left_;

        // One family per observed child variable, or the inversions interact.
        std::vector<VarPtr> used;
        for (const auto* c : bwd) {
            if (std::any_of(used.begin(), used.end(), [&](const VarPtr& v) {
                    return v->serial() == c->child_var->serial();
                }))
                return std::nullopt;
            used.push_back(c->child_var);
        }
        const Scope uscope(used);
        const ConfigSet r = project(ConfigSet(src, source), uscope);
        const auto factors = factorize(r, uscope);
        if (factors.empty()) return std::nullopt;

        MassFunction acc = MassFunction::vacuous(tgt);
        for (const auto* c : bwd) {
            const std::size_t k = uscope.position_of(c->child_var);
            const ConfigSet obs(Scope::single(c->child_var), factors[k]);
            acc = conjunctive_combine(acc, vacuous_extend(gbt(*c->family, obs, limits), tgt),
                                      limits);
        }
        return acc;
    }

    Scope left_, right_;
    std::vector<Crossing> crossings_;
    mutable std::optional<MassFunction> joint_; // built on first reference query
};

// ---------------------------------------------------------------------------
// MergedNetwork: nodes holding one or more of the original variables, an
// internal relation per node (vacuous for singletons), and one EdgeRelation
// per pair of adjacent nodes.
// ---------------------------------------------------------------------------

struct MergedNode {
    Scope scope;
    MassFunction relation; // belief tying the node's own variables together
};

struct MergedEdge {
    std::size_t a, b; // node indices; relation.left() is node a's scope
    EdgeRelation relation;
};

class MergedNetwork {
public:
    static MergedNetwork trivial(const EvidentialNetwork& net,
                                 const Limits& limits = default_limits()) {
        (void)limits;
        MergedNetwork m;
        m.base_ = &net;
        for (const auto& v : net.variables()) {
            m.node_of_[v->serial()] = m.nodes_.size();
            const Scope s = Scope::single(v);
            m.nodes_.push_back({s, MassFunction::vacuous(s)});
        }
        for (const auto& e : net.edges()) {
            const std::size_t a = m.node_of_.at(e.parent->serial());
            const std::size_t b = m.node_of_.at(e.child->serial());
            m.edges_.push_back({a, b,
                                EdgeRelation(m.nodes_[a].scope, m.nodes_[b].scope,
                                             {Crossing{e.family, e.parent, e.child}})});
        }
        return m;
    }

    const EvidentialNetwork& base() const { return *base_; }
    const std::vector<MergedNode>& nodes() const { return nodes_; }
    const std::vector<MergedEdge>& edges() const { return edges_; }
    const std::vector<std::string>& merge_log() const { return log_; }

    std::size_t node_of(const VarPtr& v) const { return node_of_.at(v->serial()); }

    bool is_forest() const {
        std::vector<std::size_t> parent(nodes_.size());
        for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
        std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
            while (parent[i] != i) i = parent[i] = parent[parent[i]];
            return i;
        };
        for (const auto& e : edges_) {
            const auto a = find(e.a), b = find(e.b);
            if (a == b) return false;
            parent[a] = b;
        }
        return true;
    }

    // Nodes of one shortest undirected cycle, or empty when the skeleton is a
    // forest.  Found by dropping each edge in turn and asking for the shortest
    // remaining path between its endpoints.
    std::vector<std::size_t> find_shortest_cycle() const {
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nodes_.size());
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            adj[edges_[e].a].push_back({edges_[e].b, e});
            adj[edges_[e].b].push_back({edges_[e].a, e});
        }
        std::vector<std::size_t> best;
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const std::size_t s = edges_[e].a, t = edges_[e].b;
            std::vector<std::ptrdiff_t> prev(nodes_.size(), -2);
            std::deque<std::size_t> queue{s};
            prev[s] = -1;
            while (!queue.empty() && prev[t] == -2) {
                const std::size_t u = queue.front();
                queue.pop_front();
                for (const auto& [w, via] : adj[u]) {
                    if (via == e || prev[w] != -2) continue;
                    prev[w] = static_cast<std::ptrdiff_t>(u);
                    queue.push_back(w);
                }
            }
            if (prev[t] == -2) continue;
            std::vector<std::size_t> path;
            for (std::ptrdiff_t u = static_cast<std::ptrdiff_t>(t); u != -1; u = prev[u])
                path.push_back(static_cast<std::size_t>(u));
            if (best.empty() || path.size() < best.size()) best = std::move(path);
        }
        return best;
    }

    // Directed node-level arcs (parent node -> child node per crossing).
    std::vector<std::pair<std::size_t, std::size_t>> arcs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& e : edges_)
            for (const auto& c : e.relation.crossings()) {
                const bool fwd = nodes_[e.a].scope.contains(c.parent_var);
                out.emplace_back(fwd ? e.a : e.b, fwd ? e.b : e.a);
            }
        return out;
    }

    // A merge is "clean" when no directed path connects the pair through a
    // third node; contracting such a pair keeps the node graph acyclic.
    // Merges that fail this are still semantically sound (queries handle
    // mixed-direction crossings via the reference joint), so cleanliness is a
    // preference, not a requirement.
    bool merge_is_clean(std::size_t x, std::size_t y) const {
        const auto all = arcs();
        auto reaches = [&](std::size_t from, std::size_t to) {
            std::vector<bool> seen(nodes_.size(), false);
            std::deque<std::size_t> queue{from};
            seen[from] = true;
            while (!queue.empty()) {
                const std::size_t u = queue.front();
                queue.pop_front();
                for (const auto& [p, c] : all) {
                    const bool internal = (p == x && c == y) || (p == y && c == x);
                    if (internal || p != u || seen[c]) continue;
                    if (c == to) return true;
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
            return false;
        };
        return !reaches(x, y) && !reaches(y, x);
    }

    std::size_t common_parent_count(std::size_t x, std::size_t y) const {
        const auto all = arcs();
        std::size_t n = 0;
        for (std::size_t w = 0; w < nodes_.size(); ++w) {
            if (w == x || w == y) continue;
            bool wx = false, wy = false;
            for (const auto& [p, c] : all) {
                wx = wx || (p == w && c == x);
                wy = wy || (p == w && c == y);
            }
            if (wx && wy) ++n;
        }
        return n;
    }

    void merge_nodes(std::size_t x, std::size_t y, const Limits& limits = default_limits()) {
        if (x == y || x >= nodes_.size() || y >= nodes_.size())
            throw ValidationError("merge_nodes needs two distinct node indices");

        Scope merged;
        try {
            merged = scope_union(nodes_[x].scope, nodes_[y].scope, limits);
        } catch (const ResourceError& err) {
            throw ResourceError("cannot merge nodes {" + nodes_[x].scope.name() + "} and {" +
                                nodes_[y].scope.name() + "}: " + err.what());
        }

        MassFunction relation =
            conjunctive_combine(vacuous_extend(nodes_[x].relation, merged),
                                vacuous_extend(nodes_[y].relation, merged), limits);
        std::size_t absorbed = 0;
        for (const auto& e : edges_) {
            if (!((e.a == x && e.b == y) || (e.a == y && e.b == x))) continue;
            for (const auto& c : e.relation.crossings()) {
                relation = conjunctive_combine(
                    relation, vacuous_extend(ballooning_extension(*c.family, limits), merged),
                    limits);
                ++absorbed;
            }
        }

        log_.push_back("merged {" + nodes_[x].scope.name() + "} with {" + nodes_[y].scope.name() +
                       "}" + (absorbed ? " absorbing " + std::to_string(absorbed) +
                                             " direct relation(s)"
                                       : ""));

        // Rebuild the node list with the merged node at min(x, y)'s position.
        const std::size_t lo = std::min(x, y), hi = std::max(x, y);
        std::vector<MergedNode> nodes;
        std::vector<std::size_t> remap(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (i == hi) {
                remap[i] = remap[lo];
                continue;
            }
            remap[i] = nodes.size();
            if (i == lo)
                nodes.push_back({merged, relation});
            else
                nodes.push_back(std::move(nodes_[i]));
        }

        // Re-point edges; parallel edges between the same pair collapse.
        std::map<std::pair<std::size_t, std::size_t>, std::vector<Crossing>> grouped;
        for (const auto& e : edges_) {
            const std::size_t a = remap[e.a], b = remap[e.b];
            if (a == b) continue; // absorbed above
            auto& bucket = grouped[{std::min(a, b), std::max(a, b)}];
            for (const auto& c : e.relation.crossings()) bucket.push_back(c);
        }
        std::vector<MergedEdge> edges;
        for (auto& [key, crossings] : grouped)
            edges.push_back({key.first, key.second,
                             EdgeRelation(nodes[key.first].scope, nodes[key.second].scope,
                                          std::move(crossings))});

        nodes_ = std::move(nodes);
        edges_ = std::move(edges);
        for (auto& [serial, node] : node_of_) node = remap[node];
    }

private:
    MergedNetwork() = default;

    const EvidentialNetwork* base_ = nullptr;
    std::vector<MergedNode> nodes_;
    std::vector<MergedEdge> edges_;
    std::unordered_map<std::uint64_t, std::size_t> node_of_;
    std::vector<std::string> log_;
};

// Repeatedly pick a shortest undirected cycle and merge two of its nodes until
// the skeleton is a forest.  Pair choice: clean pairs (no directed bypass)
// ranked by smallest merged frame, then most shared parent nodes, then lowest
// variable serials; if no clean pair exists on the cycle, the same ranking
// over all its pairs.
inline MergedNetwork merge_loops(const EvidentialNetwork& net,
                                 const Limits& limits = default_limits()) {
    if (auto cycle = detail::find_directed_cycle(net)) {
        std::string msg = "network has a directed cycle:";
        for (const auto& n : *cycle) msg += " " + n;
        throw ValidationError(std::move(msg));
    }

    MergedNetwork merged = MergedNetwork::trivial(net, limits);
    while (true) {
        const auto cycle = merged.find_shortest_cycle();
        if (cycle.empty()) break;

        struct Candidate {
            std::uint64_t cardinality;
            std::size_t common_parents;
            std::uint64_t serial_lo, serial_hi;
            std::size_t x, y;
        };
        std::optional<Candidate> best;
        std::optional<ResourceError> capped;
        auto consider = [&](std::size_t x, std::size_t y, bool require_clean) {
            if (require_clean && !merged.merge_is_clean(x, y)) return;
            std::uint64_t card = 0;
            try {
                card = scope_union(merged.nodes()[x].scope, merged.nodes()[y].scope, limits)
                           .cardinality();
            } catch (const ResourceError&) {
                capped = ResourceError("cannot merge nodes {" + merged.nodes()[x].scope.name() +
                                       "} and {" + merged.nodes()[y].scope.name() +
                                       "}: merged frame exceeds the product-space cap");
                return;
            }
            Candidate c{card, merged.common_parent_count(x, y), 0, 0, x, y};
            const std::uint64_t sx = merged.nodes()[x].scope.variables().front()->serial();
            const std::uint64_t sy = merged.nodes()[y].scope.variables().front()->serial();
            c.serial_lo = std::min(sx, sy);
            c.serial_hi = std::max(sx, sy);
            const auto rank = [](const Candidate& k) {
                return std::make_tuple(k.cardinality, -static_cast<long long>(k.common_parents),
                                       k.serial_lo, k.serial_hi);
            };
            if (!best || rank(c) < rank(*best)) best = c;
        };

        for (std::size_t i = 0; i < cycle.size(); ++i)
            for (std::size_t j = i + 1; j < cycle.size(); ++j) consider(cycle[i], cycle[j], true);
        if (!best)
            for (std::size_t i = 0; i < cycle.size(); ++i)
                for (std::size_t j = i + 1; j < cycle.size(); ++j)
                    consider(cycle[i], cycle[j], false);
        if (!best) throw capped.value_or(ResourceError("no feasible merge on the cycle"));
        merged.merge_nodes(best->x, best->y, limits);
    }
    return merged;
}

// ---------------------------------------------------------------------------
// Message passing over a merged forest.
// ---------------------------------------------------------------------------

struct Message {
    std::string from; // sender node's scope name
    std::string to;
    MassFunction payload; // on the receiver's frame
};

struct PropagationResult {
    std::unordered_map<std::uint64_t, MassFunction> marginals; // variable serial -> belief
    std::vector<MassFunction> node_beliefs;                    // per node, messages-only belief
    std::vector<Message> messages;
};

namespace detail {

// Bounded cache of per-subset edge queries, least-recently-used eviction.
class QueryCache {
public:
    explicit QueryCache(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

    const MassFunction* find(std::size_t edge, bool toward_right, const Bitset& bits) {
        const auto it = index_.find(Key{edge, toward_right, bits});
        if (it == index_.end()) return nullptr;
        used_.splice(used_.begin(), used_, it->second);
        return &it->second->second;
    }

    const MassFunction& insert(std::size_t edge, bool toward_right, const Bitset& bits,
                               MassFunction value) {
        used_.emplace_front(Key{edge, toward_right, bits}, std::move(value));
        index_[used_.front().first] = used_.begin();
        if (index_.size() > capacity_) {
            index_.erase(used_.back().first);
            used_.pop_back();
        }
        return used_.front().second;
    }

private:
    struct Key {
        std::size_t edge;
        bool toward_right;
        Bitset bits;
        bool operator==(const Key& o) const {
            return edge == o.edge && toward_right == o.toward_right && bits == o.bits;
        }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = k.bits.hash();
            h ^= k.edge + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            return k.toward_right ? ~h : h;
        }
    };

    std::size_t capacity_;
    std::list<std::pair<Key, MassFunction>> used_;
    std::unordered_map<Key, std::list<std::pair<Key, MassFunction>>::iterator, KeyHash> index_;
};

} // namespace detail

class PropagationSession {
public:
    explicit PropagationSession(const MergedNetwork& net, Limits limits = default_limits())
        : net_(net), limits_(limits), cache_(limits.cond_cache_capacity),
          adjacency_(net.nodes().size()) {
        for (std::size_t e = 0; e < net_.edges().size(); ++e) {
            adjacency_[net_.edges()[e].a].push_back({net_.edges()[e].b, e});
            adjacency_[net_.edges()[e].b].push_back({net_.edges()[e].a, e});
        }
    }

    PropagationResult run() {
        PropagationResult out;
        const auto& nodes = net_.nodes();

        std::vector<MassFunction> posterior;
        posterior.reserve(nodes.size());
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            MassFunction belief = nodes[v].relation;
            for (const auto& [u, e] : adjacency_[v])
                belief = conjunctive_combine(belief, message(u, v), limits_);
            out.node_beliefs.push_back(belief);

            MassFunction post = belief;
            for (const auto& x : nodes[v].scope.variables())
                post = conjunctive_combine(
                    post, vacuous_extend(net_.base().potential(x, limits_), nodes[v].scope),
                    limits_);
            posterior.push_back(std::move(post));
        }

        // Conflict discovered in one skeleton component weighs on every
        // marginal: the global joint's empty-set mass is shared.  Combine each
        // variable's belief with the other components' conflict ratios.
        std::vector<std::size_t> component(nodes.size());
        for (std::size_t i = 0; i < component.size(); ++i) component[i] = i;
        std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
            while (component[i] != i) i = component[i] = component[component[i]];
            return i;
        };
        for (const auto& e : net_.edges()) component[find(e.a)] = find(e.b);
        std::map<std::size_t, double> conflict;
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            auto& c = conflict[find(v)];
            c = std::max(c, posterior[v].mass_of_empty());
        }

        for (std::size_t v = 0; v < nodes.size(); ++v) {
            double keep = 1.0;
            for (const auto& [root, k] : conflict)
                if (root != find(v)) keep *= 1.0 - k;
            for (const auto& x : nodes[v].scope.variables()) {
                MassFunction marginal = marginalize(posterior[v], Scope::single(x));
                if (keep < 1.0) {
                    typename MassFunction::FocalMap weights;
                    const auto n = static_cast<std::size_t>(marginal.scope().cardinality());
                    weights[Bitset(n)] = 1.0 - keep;
                    weights[Bitset::full(n)] = keep;
                    marginal = conjunctive_combine(
                        marginal, MassFunction::from_arithmetic(marginal.scope(), weights),
                        limits_);
                }
                out.marginals.insert_or_assign(x->serial(), std::move(marginal));
            }
        }

        for (const auto& [key, payload] : messages_)
            out.messages.push_back({nodes[key.first].scope.name(), nodes[key.second].scope.name(),
                                    payload});
        return out;
    }

private:
    const MassFunction& message(std::size_t from, std::size_t to) {
        const auto key = std::make_pair(from, to);
        if (const auto it = messages_.find(key); it != messages_.end()) return it->second;

        MassFunction inflow = net_.nodes()[from].relation;
        for (const auto& x : net_.nodes()[from].scope.variables())
            inflow = conjunctive_combine(
                inflow, vacuous_extend(net_.base().potential(x, limits_), inflow.scope()),
                limits_);
        std::optional<std::size_t> via;
        for (const auto& [u, e] : adjacency_[from]) {
            if (u == to) {
                via = e;
                continue;
            }
            inflow = conjunctive_combine(inflow, message(u, from), limits_);
        }
        if (!via) throw ValidationError("message requested between non-adjacent nodes");

        const MergedEdge& edge = net_.edges()[*via];
        const bool toward_right = (to == edge.b);
        const Scope& tgt = toward_right ? edge.relation.right() : edge.relation.left();
        MassMixture mix(tgt);
        for (const auto& [subset, weight] : inflow.focal()) {
            if (subset.none())
                mix.add_point(weight, Bitset(static_cast<std::size_t>(tgt.cardinality())));
            else
                mix.add(weight, query(*via, toward_right, subset));
        }
        return messages_.emplace(key, std::move(mix).finish()).first->second;
    }

    const MassFunction& query(std::size_t edge, bool toward_right, const Bitset& subset) {
        if (const auto* hit = cache_.find(edge, toward_right, subset)) return *hit;
        return cache_.insert(edge, toward_right, subset,
                             net_.edges()[edge].relation.query(toward_right, subset, limits_));
    }

    const MergedNetwork& net_;
    Limits limits_;
    detail::QueryCache cache_;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
    std::map<std::pair<std::size_t, std::size_t>, MassFunction> messages_;
};

inline PropagationResult propagate_merged(const MergedNetwork& mnet,
                                          const Limits& limits = default_limits()) {
    if (!mnet.is_forest())
        throw LoopError("merged network still has an undirected loop; merge further before "
                        "propagating");
    return PropagationSession(mnet, limits).run();
}

inline PropagationResult propagate_polytree(const EvidentialNetwork& net,
                                            const Limits& limits = default_limits()) {
    if (auto cycle = detail::find_directed_cycle(net)) {
        std::string msg = "network has a directed cycle:";
        for (const auto& n : *cycle) msg += " " + n;
        throw ValidationError(std::move(msg));
    }
    MergedNetwork flat = MergedNetwork::trivial(net, limits);
    if (!flat.is_forest())
        throw LoopError("network skeleton has an undirected loop; call merge_loops and "
                        "propagate_merged instead");
    return PropagationSession(flat, limits).run();
}

// ---------------------------------------------------------------------------
// partition_optimize: for a source variable ("hub") fanning out into several
// independent branches, each branch only distinguishes the hub elements its
// own families can tell apart.  Coarsening the rest into a single block makes
// each branch cheaper; refining the coarse beliefs back to the hub frame and
// combining them reproduces the exact marginal.
// ---------------------------------------------------------------------------

struct PartitionGroup {
    std::vector<std::string> members;       // branch variables, declaration order
    std::vector<std::string> direct_children;
    ConfigSet merged_block;                 // hub elements coarsened into one block
    bool coarsened = false;
    std::optional<Partition> partition;     // present when coarsened
    std::vector<std::pair<std::string, ConditionalBeliefFamily>> branch_families;
    MassFunction coarse_marginal;           // hub belief on the branch's (coarse) frame
    MassFunction refined;                   // the same, lifted back to the hub frame
};

struct PartitionOutcome {
    MassFunction hub_marginal;
    std::vector<PartitionGroup> groups;
};

inline PartitionOutcome partition_optimize(const EvidentialNetwork& net, const VarPtr& hub,
                                           const Limits& limits = default_limits()) {
    if (!net.has_variable(hub)) throw ValidationError("unknown hub variable '" + hub->name() + "'");
    if (!net.parents_of(hub).empty())
        throw ValidationError("partition_optimize needs a source variable; '" + hub->name() +
                              "' has parents");

    std::vector<const NetworkEdge*> spokes;
    for (const auto& e : net.edges())
        if (e.parent->serial() == hub->serial()) spokes.push_back(&e);
    if (spokes.size() < 2)
        throw ValidationError("partition_optimize needs at least two branches under '" +
                              hub->name() + "'");

    const MergedNetwork skeleton = MergedNetwork::trivial(net, limits);
    if (!skeleton.is_forest())
        throw LoopError("network skeleton has an undirected loop; call merge_loops and "
                        "propagate_merged instead");

    // Branches: connected components of the skeleton with the hub removed.
    const auto& vars = net.variables();
    std::unordered_map<std::uint64_t, std::size_t> pos;
    for (std::size_t i = 0; i < vars.size(); ++i) pos[vars[i]->serial()] = i;
    std::vector<std::ptrdiff_t> branch(vars.size(), -1);
    std::vector<std::vector<std::size_t>> adj(vars.size());
    for (const auto& e : net.edges()) {
        adj[pos[e.parent->serial()]].push_back(pos[e.child->serial()]);
        adj[pos[e.child->serial()]].push_back(pos[e.parent->serial()]);
    }
    const std::size_t hub_pos = pos[hub->serial()];
    for (std::size_t g = 0; g < spokes.size(); ++g) {
        std::deque<std::size_t> queue{pos[spokes[g]->child->serial()]};
        branch[queue.front()] = static_cast<std::ptrdiff_t>(g);
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (const std::size_t w : adj[u]) {
                if (w == hub_pos || branch[w] != -1) continue;
                branch[w] = branch[u];
                queue.push_back(w);
            }
        }
    }
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (i != hub_pos && branch[i] == -1)
            throw ValidationError("variable '" + vars[i]->name() +
                                  "' is not connected to hub '" + hub->name() + "'");

    PartitionOutcome out;
    MassFunction combined = net.potential(hub, limits);

    for (std::size_t g = 0; g < spokes.size(); ++g) {
        PartitionGroup group;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (branch[i] == static_cast<std::ptrdiff_t>(g)) group.members.push_back(vars[i]->name());

        // Hub elements every directly-conditioned family in the branch is
        // indifferent to; only one direct child per branch in a forest, but
        // the intersection form covers any grouping.
        Bitset s = Bitset::full(hub->frame_size());
        std::vector<const NetworkEdge*> direct;
        for (const auto* e : spokes)
            if (branch[pos[e->child->serial()]] == static_cast<std::ptrdiff_t>(g)) {
                direct.push_back(e);
                group.direct_children.push_back(e->child->name());
                s = s & relevance(*e->family).irrelevant.bits();
            }
        group.merged_block = ConfigSet(Scope::single(hub), s);
        group.coarsened = s.count() >= 2;

        VarPtr branch_hub = hub;
        if (group.coarsened) {
            std::vector<Bitset> blocks;
            for (std::size_t i = 0; i < hub->frame_size(); ++i)
                if (!s.test(i)) {
                    Bitset one(hub->frame_size());
                    one.set(i);
                    blocks.push_back(std::move(one));
                }
            blocks.push_back(s);
            std::sort(blocks.begin(), blocks.end(), [](const Bitset& a, const Bitset& b) {
                return a.members().front() < b.members().front();
            });
            std::vector<std::string> labels;
            for (const auto& blk : blocks) {
                if (blk.count() == 1) {
                    labels.push_back(hub->labels()[blk.members().front()]);
                } else {
                    std::string candidate = "s" + std::to_string(g + 1);
                    while (hub->has_label(candidate) ||
                           std::find(labels.begin(), labels.end(), candidate) != labels.end())
                        candidate += "'";
                    labels.push_back(std::move(candidate));
                }
            }
            group.partition = Partition(hub, blocks, labels, hub->name() + std::to_string(g + 1));
            branch_hub = group.partition->coarse();
        }

        // The branch's view of each direct family: original entries for the
        // kept elements, one disjunctively-extended entry for the block.
        EvidentialNetwork sub;
        sub.add_variable(branch_hub);
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (branch[i] == static_cast<std::ptrdiff_t>(g)) sub.add_variable(vars[i]);

        for (const auto* e : direct) {
            std::vector<MassFunction> entries;
            if (group.coarsened) {
                for (const auto& blk : group.partition->blocks())
                    entries.push_back(blk.count() == 1
                                          ? e->family->entry(blk.members().front())
                                          : drc_extend(*e->family, blk, limits));
            } else {
                for (std::size_t i = 0; i < hub->frame_size(); ++i)
                    entries.push_back(e->family->entry(i));
            }
            ConditionalBeliefFamily fam(Scope::single(branch_hub), Scope::single(e->child),
                                        std::move(entries));
            group.branch_families.emplace_back(e->child->name(), fam);
            sub.add_edge(branch_hub, e->child, std::move(fam));
        }
        for (const auto& e : net.edges()) {
            if (e.parent->serial() == hub->serial() || e.child->serial() == hub->serial()) continue;
            if (branch[pos[e.parent->serial()]] != static_cast<std::ptrdiff_t>(g)) continue;
            sub.add_edge(e.parent, e.child, *e.family);
        }
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (branch[i] != static_cast<std::ptrdiff_t>(g)) continue;
            sub.set_prior(vars[i], net.prior(vars[i]));
            for (const auto& m : net.evidence(vars[i])) sub.add_evidence(vars[i], m);
        }

        PropagationResult res = propagate_polytree(sub, limits);
        group.coarse_marginal = res.marginals.at(branch_hub->serial());
        group.refined = group.coarsened ? refine(group.coarse_marginal, *group.partition)
                                        : group.coarse_marginal;
        combined = conjunctive_combine(combined, group.refined, limits);
        out.groups.push_back(std::move(group));
    }

    out.hub_marginal = std::move(combined);
    return out;
}

// ---------------------------------------------------------------------------
// Independence diagnostics for two children of a shared parent, and the
// shortcuts they license.
// ---------------------------------------------------------------------------

// X and Y (both conditioned on A) cannot pass belief to each other through A
// when either (1) some parent element is irrelevant to both, or (2) the
// irrelevant sets split the frame exactly and at least one family is already
// uninformative across its entire relevant range.
inline bool unrelated(const EvidentialNetwork& net, const VarPtr& x, const VarPtr& y,
                      const VarPtr& a, const Limits& limits = default_limits()) {
    const NetworkEdge* ex = net.edge_between(a, x);
    const NetworkEdge* ey = net.edge_between(a, y);
    if (!ex) throw ValidationError("no family from '" + a->name() + "' to '" + x->name() + "'");
    if (!ey) throw ValidationError("no family from '" + a->name() + "' to '" + y->name() + "'");

    const Bitset phi_x = relevance(*ex->family).irrelevant.bits();
    const Bitset phi_y = relevance(*ey->family).irrelevant.bits();
    if (phi_x.none() || phi_y.none()) return false; // both families must ignore something

    if ((phi_x & phi_y).any()) return true;

    if ((phi_x | phi_y).is_full()) { // disjoint by the test above
        const Bitset comp_x = phi_x.complement(); // equals phi_y here
        const Bitset comp_y = phi_y.complement();
        const bool vac_x = comp_x.any() && drc_extend(*ex->family, comp_x, limits).is_vacuous();
        const bool vac_y = comp_y.any() && drc_extend(*ey->family, comp_y, limits).is_vacuous();
        if (vac_x || vac_y) return true;
    }
    return false;
}

// When X and Y are unrelated through A and every belief in the network except
// the evidence on X is vacuous, Y's marginal is vacuous with no propagation.
inline std::optional<MassFunction> lemma9_shortcut(const EvidentialNetwork& net, const VarPtr& x,
                                                   const VarPtr& y, const VarPtr& a,
                                                   const Limits& limits = default_limits()) {
    if (!unrelated(net, x, y, a, limits)) return std::nullopt;
    for (const auto& v : net.variables())
        if (v->serial() != x->serial() && !net.potential(v, limits).is_vacuous())
            return std::nullopt;
    for (const auto& e : net.edges())
        if (e.child->serial() == y->serial() && e.parent->serial() != a->serial())
            return std::nullopt;
    if (!net.children_of(y).empty()) return std::nullopt;
    return MassFunction::vacuous(Scope::single(y));
}

// Opened-loop evaluation of the three-variable network A->X, A->Y, X->Y with
// binary X: condition everything on each X element, push the evidence through,
// and mix.  Requires the loop to be breakable: X and Y unrelated through A,
// their informative ranges disjoint, the X->Y family uninformative across the
// whole of X's frame, and no belief anywhere except the evidence on X and an
// optional prior on A (combined last).  Returns nothing when any precondition
// fails; callers then fall back to merge_loops + propagate_merged.
inline std::optional<MassFunction> figure6_shortcut(const EvidentialNetwork& net, const VarPtr& x,
                                                    const VarPtr& y, const VarPtr& a,
                                                    const Limits& limits = default_limits()) {
    const NetworkEdge* eax = net.edge_between(a, x);
    const NetworkEdge* eay = net.edge_between(a, y);
    const NetworkEdge* exy = net.edge_between(x, y);
    if (!eax || !eay || !exy) return std::nullopt;
    if (x->frame_size() != 2) return std::nullopt;
    for (const auto& e : net.edges()) {
        const bool touches_xy = e.parent->serial() == x->serial() ||
                                e.child->serial() == x->serial() ||
                                e.parent->serial() == y->serial() ||
                                e.child->serial() == y->serial();
        if (touches_xy && &e != eax && &e != eay && &e != exy) return std::nullopt;
    }
    if (!unrelated(net, x, y, a, limits)) return std::nullopt;
    const Bitset informative_x = relevance(*eax->family).relevant.bits();
    const Bitset informative_y = relevance(*eay->family).relevant.bits();
    if ((informative_x & informative_y).any()) return std::nullopt;
    if (!drc_extend(*exy->family, Bitset::full(x->frame_size()), limits).is_vacuous())
        return std::nullopt;
    for (const auto& v : net.variables())
        if (v->serial() != x->serial() && v->serial() != a->serial() &&
            !net.potential(v, limits).is_vacuous())
            return std::nullopt;

    const Scope ascope = Scope::single(a);
    const MassFunction observed = net.potential(x, limits);

    std::vector<MassFunction> per_element;
    for (std::size_t i = 0; i < 2; ++i) {
        const MassFunction from_x = gbt(*eax->family, ConfigSet::of(Scope::single(x), {i}), limits);
        MassMixture through_y(ascope);
        for (const auto& [subset, weight] : exy->family->entry(i).focal()) {
            if (subset.none())
                through_y.add_point(weight, Bitset(a->frame_size()));
            else
                through_y.add(weight,
                              gbt(*eay->family, ConfigSet(Scope::single(y), subset), limits));
        }
        per_element.push_back(
            conjunctive_combine(from_x, std::move(through_y).finish(), limits));
    }

    MassMixture mixed(ascope);
    for (const auto& [subset, weight] : observed.focal()) {
        if (subset.none())
            mixed.add_point(weight, Bitset(a->frame_size()));
        else if (subset.count() == 1)
            mixed.add(weight, per_element[subset.members().front()]);
        else
            mixed.add(weight, MassFunction::vacuous(ascope)); // the full-frame remainder
    }
    MassFunction result = std::move(mixed).finish();

    const MassFunction prior_a = net.potential(a, limits);
    if (!prior_a.is_vacuous()) result = conjunctive_combine(result, prior_a, limits);
    return result;
}

} // namespace enc
