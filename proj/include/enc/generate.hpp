#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "enc/conditional.hpp"
#include "enc/mass.hpp"
#include "enc/network.hpp"

namespace enc {

// Deterministic random source for property tests and synthetic benchmarks.
// Every generator takes one of these; identical seeds replay identical cases.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
    }
    double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    bool chance(double p) { return unit() < p; }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

// Uniform nonempty subset (or any subset if allow_empty) of an n-element frame.
inline Bitset random_subset(Rng& rng, std::size_t nbits, bool allow_empty = false) {
    for (;;) {
        Bitset b(nbits);
        for (std::size_t i = 0; i < nbits; ++i)
            if (rng.chance(0.5)) b.set(i);
        if (allow_empty || b.any()) return b;
    }
}

// Random mass function with at most max_focals focal sets; weights are drawn
// from an exponential and normalized, so all masses are strictly positive.
inline MassFunction random_mass(Rng& rng, const Scope& s, std::size_t max_focals,
                                bool allow_empty_focal = false) {
    const auto n = static_cast<std::size_t>(s.cardinality());
    const std::size_t k = 1 + rng.below(max_focals);
    std::vector<Bitset> sets;
    std::vector<double> weights;
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sets.push_back(random_subset(rng, n, allow_empty_focal));
        const double w = -std::log1p(-rng.unit() * (1.0 - 1e-12));
        weights.push_back(w);
        sum += w;
    }
    MassFunction::FocalMap f;
    for (std::size_t i = 0; i < k; ++i) f[sets[i]] += weights[i] / sum;
    return MassFunction::from_arithmetic(s, std::move(f));
}

// Random conditional family; vacuous_chance controls how many parent elements
// say nothing (exercising relevance partitions and the vacuous shortcuts).
inline ConditionalBeliefFamily random_family(Rng& rng, const Scope& parent, const Scope& child,
                                             std::size_t max_focals,
                                             double vacuous_chance = 0.25) {
    std::vector<MassFunction> entries;
    const auto n = static_cast<std::size_t>(parent.cardinality());
    entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        entries.push_back(rng.chance(vacuous_chance) ? MassFunction::vacuous(child)
                                                     : random_mass(rng, child, max_focals));
    return ConditionalBeliefFamily(parent, child, std::move(entries));
}

// Knobs for the random network builders below; the defaults stay well inside
// the oracle's comfort zone.
struct NetworkShape {
    std::size_t variables = 5;
    std::size_t min_frame = 2, max_frame = 3;
    std::size_t max_focals = 4;
    double prior_chance = 0.3;
    double evidence_chance = 0.5;
    double vacuous_entry_chance = 0.25;
};

namespace detail {

inline VarPtr random_variable(Rng& rng, const std::string& name, const NetworkShape& shape) {
    const std::size_t size = shape.min_frame + rng.below(shape.max_frame - shape.min_frame + 1);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < size; ++i) labels.push_back(name + std::to_string(i + 1));
    return make_variable(name, std::move(labels));
}

inline void random_beliefs(Rng& rng, EvidentialNetwork& net, const NetworkShape& shape) {
    for (const auto& v : net.variables()) {
        if (rng.chance(shape.prior_chance))
            net.set_prior(v, random_mass(rng, Scope::single(v), shape.max_focals));
        if (rng.chance(shape.evidence_chance))
            net.add_evidence(v, random_mass(rng, Scope::single(v), shape.max_focals));
    }
}

} // namespace detail

// Random connected polytree: a random undirected tree with random edge
// orientations, random families, and sprinkled priors/evidence.
inline EvidentialNetwork random_polytree(Rng& rng, const NetworkShape& shape = {}) {
    EvidentialNetwork net;
    std::vector<VarPtr> vars;
    for (std::size_t i = 0; i < shape.variables; ++i) {
        vars.push_back(detail::random_variable(rng, "V" + std::to_string(i + 1), shape));
        net.add_variable(vars.back());
    }
    for (std::size_t i = 1; i < vars.size(); ++i) {
        const std::size_t j = rng.below(i);
        const bool down = rng.chance(0.5);
        const VarPtr& parent = down ? vars[j] : vars[i];
        const VarPtr& child = down ? vars[i] : vars[j];
        net.add_edge(parent, child,
                     random_family(rng, Scope::single(parent), Scope::single(child),
                                   shape.max_focals, shape.vacuous_entry_chance));
    }
    detail::random_beliefs(rng, net, shape);
    return net;
}

// Random single-loop network: a triangle (A->B, A->C, C->B) or a diamond
// (A->B, A->D, B->C, D->C), the two smallest shapes whose skeleton loops.
inline EvidentialNetwork random_single_loop(Rng& rng, bool diamond,
                                            const NetworkShape& shape = {}) {
    EvidentialNetwork net;
    const std::size_t count = diamond ? 4 : 3;
    std::vector<VarPtr> vars;
    for (std::size_t i = 0; i < count; ++i) {
        vars.push_back(detail::random_variable(rng, std::string(1, char('A' + i)), shape));
        net.add_variable(vars.back());
    }
    auto connect = [&](std::size_t p, std::size_t c) {
        net.add_edge(vars[p], vars[c],
                     random_family(rng, Scope::single(vars[p]), Scope::single(vars[c]),
                                   shape.max_focals, shape.vacuous_entry_chance));
    };
    if (diamond) {
        connect(0, 1); // A->B
        connect(0, 3); // A->D
        connect(1, 2); // B->C
        connect(3, 2); // D->C
    } else {
        connect(0, 1); // A->B
        connect(0, 2); // A->C
        connect(2, 1); // C->B
    }
    detail::random_beliefs(rng, net, shape);
    return net;
}

// Random hub-and-spokes network: one source fanning into `spokes` chains of
// the given depth, with vacuous-heavy families so the per-branch partitions
// have something to coarsen.  Priors and evidence land on branch variables
// and (optionally) the hub, never making the branches interact except
// through the hub.
inline EvidentialNetwork random_hub_spokes(Rng& rng, std::size_t spokes, std::size_t depth = 1,
                                           NetworkShape shape = {}) {
    shape.vacuous_entry_chance = std::max(shape.vacuous_entry_chance, 0.5);
    EvidentialNetwork net;
    const VarPtr hub = detail::random_variable(rng, "H", shape);
    net.add_variable(hub);
    for (std::size_t s = 0; s < spokes; ++s) {
        VarPtr up = hub;
        for (std::size_t d = 0; d < depth; ++d) {
            VarPtr v = detail::random_variable(
                rng, "S" + std::to_string(s + 1) + "_" + std::to_string(d + 1), shape);
            net.add_variable(v);
            net.add_edge(up, v,
                         random_family(rng, Scope::single(up), Scope::single(v), shape.max_focals,
                                       shape.vacuous_entry_chance));
            up = v;
        }
    }
    detail::random_beliefs(rng, net, shape);
    return net;
}

} // namespace enc
