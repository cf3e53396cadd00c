#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "enc/frame.hpp"
#include "enc/limits.hpp"

namespace enc {

// An (unnormalized) basic belief assignment over a scope's configuration space.
// Focal sets are kept sparse, keyed by bitmask in ascending mask order, which
// fixes iteration and print order once and for all. Mass on the empty set is
// legal and meaningful (open-world conflict); nothing here renormalizes unless
// normalize() is called explicitly.
//
// Numeric policy: user-supplied masses may miss 1.0 by up to tol::input_band
// and are rescaled; results of internal arithmetic drop crumbs below tol::drop
// and fold the deficit into the heaviest focal set, provided the total drift
// stays below tol::validity.
class MassFunction {
public:
    using FocalMap = std::map<Bitset, double>;

    MassFunction() = default;

    static MassFunction vacuous(const Scope& s) {
        FocalMap f;
        f.emplace(Bitset::full(static_cast<std::size_t>(s.cardinality())), 1.0);
        return MassFunction(s, std::move(f));
    }

    // All mass on one subset (which may be empty: total conflict).
    static MassFunction certain(const ConfigSet& a) {
        FocalMap f;
        f.emplace(a.bits(), 1.0);
        return MassFunction(a.scope(), std::move(f));
    }

    // Hand-typed input: validates and rescales within tol::input_band.
    static MassFunction from_input(const Scope& s,
                                   const std::vector<std::pair<ConfigSet, double>>& entries) {
        FocalMap f;
        double sum = 0.0;
        for (const auto& [set, mass] : entries) {
            if (set.scope() != s) throw ScopeError("focal set scope does not match the mass function's");
            if (mass < 0.0) throw MassError("negative mass " + std::to_string(mass));
            if (mass == 0.0) continue;
            f[set.bits()] += mass;
            sum += mass;
        }
        if (std::abs(sum - 1.0) > tol::input_band)
            throw MassError("masses sum to " + std::to_string(sum) +
                            ", outside the accepted band around 1");
        // Rescale only when the deviation is distinguishable from rounding, so
        // that reloading already-valid values is the identity on every byte.
        if (std::abs(sum - 1.0) > tol::identity)
            for (auto& [k, v] : f) v /= sum;
        return MassFunction(s, std::move(f));
    }

    // Result of internal arithmetic: drop dust, fold the deficit.
    static MassFunction from_arithmetic(const Scope& s, FocalMap f) {
        double sum = 0.0;
        for (auto it = f.begin(); it != f.end();) {
            if (it->second < tol::drop) {
                it = f.erase(it);
            } else {
                sum += it->second;
                ++it;
            }
        }
        const double deficit = 1.0 - sum;
        if (std::abs(deficit) > tol::validity)
            throw MassError("mass function drifted off 1 by " + std::to_string(deficit));
        if (f.empty()) {
            // Everything was dust; all that is expressible is total conflict.
            f.emplace(Bitset(static_cast<std::size_t>(s.cardinality())), 1.0);
        } else {
            auto heaviest = f.begin();
            for (auto it = f.begin(); it != f.end(); ++it)
                if (it->second > heaviest->second) heaviest = it;
            heaviest->second += deficit;
        }
        return MassFunction(s, std::move(f));
    }

    const Scope& scope() const { return scope_; }
    const FocalMap& focal() const { return focal_; }
    std::size_t focal_count() const { return focal_.size(); }

    double mass(const Bitset& b) const {
        auto it = focal_.find(b);
        return it == focal_.end() ? 0.0 : it->second;
    }
    double mass(const ConfigSet& a) const {
        if (a.scope() != scope_) throw ScopeError("queried subset lives on a different scope");
        return mass(a.bits());
    }
    double mass_of_empty() const {
        return mass(Bitset(static_cast<std::size_t>(scope_.cardinality())));
    }

    // bel(A) = sum of masses of nonempty subsets of A; bel({}) = 0.
    double bel(const Bitset& a) const {
        double sum = 0.0;
        for (const auto& [b, m] : focal_)
            if (b.any() && b.is_subset_of(a)) sum += m;
        return sum;
    }
    // pl(A) = bel(full) - bel(complement of A); equivalently the mass hitting A.
    double pl(const Bitset& a) const {
        double sum = 0.0;
        for (const auto& [b, m] : focal_)
            if (b.intersects(a)) sum += m;
        return sum;
    }
    // q(A) = sum of masses of supersets of A; q({}) = 1.
    double q(const Bitset& a) const {
        double sum = 0.0;
        for (const auto& [b, m] : focal_)
            if (a.is_subset_of(b)) sum += m;
        return sum;
    }
    double bel(const ConfigSet& a) const { return bel(checked(a)); }
    double pl(const ConfigSet& a) const { return pl(checked(a)); }
    double q(const ConfigSet& a) const { return q(checked(a)); }

    bool is_vacuous(double eps = tol::identity) const {
        return focal_.size() == 1 && focal_.begin()->first.is_full() &&
               std::abs(focal_.begin()->second - 1.0) <= eps;
    }
    bool is_normal() const { return mass_of_empty() == 0.0; }

    bool operator==(const MassFunction& o) const {
        return scope_ == o.scope_ && focal_ == o.focal_;
    }

private:
    MassFunction(Scope s, FocalMap f) : scope_(std::move(s)), focal_(std::move(f)) {}

    const Bitset& checked(const ConfigSet& a) const {
        if (a.scope() != scope_) throw ScopeError("queried subset lives on a different scope");
        return a.bits();
    }

    Scope scope_;
    FocalMap focal_;
};

// Largest absolute mass difference across the union of focal sets. The metric
// every "these two routes agree" test uses.
inline double max_mass_difference(const MassFunction& a, const MassFunction& b) {
    if (a.scope() != b.scope()) throw ScopeError("comparing mass functions on different scopes");
    double worst = 0.0;
    for (const auto& [k, v] : a.focal()) worst = std::max(worst, std::abs(v - b.mass(k)));
    for (const auto& [k, v] : b.focal()) worst = std::max(worst, std::abs(v - a.mass(k)));
    return worst;
}

inline bool almost_equal(const MassFunction& a, const MassFunction& b, double eps) {
    return max_mass_difference(a, b) <= eps;
}

// Weighted accumulation of mass functions (all weights must add to 1); the way
// every mixture in this library (Theorem-3 style transports) is evaluated.
class MassMixture {
public:
    explicit MassMixture(Scope s) : scope_(std::move(s)) {}

    void add(double weight, const MassFunction& m) {
        if (m.scope() != scope_) throw ScopeError("mixture component on a different scope");
        for (const auto& [k, v] : m.focal()) acc_[k] += weight * v;
    }
    // Weight that bypasses a component entirely and lands on one subset.
    void add_point(double weight, const Bitset& b) { acc_[b] += weight; }

    MassFunction finish() && { return MassFunction::from_arithmetic(scope_, std::move(acc_)); }

private:
    Scope scope_;
    MassFunction::FocalMap acc_;
};

// ---------------------------------------------------------------------------
// Dense subset-lattice transforms. Arrays are indexed by subset bitmask over a
// frame of n configurations (size 2^n), so they are only available beneath the
// configured lattice cap. All are the classic O(2^n * n) in-place passes.

namespace detail {

inline std::size_t lattice_exponent(const Scope& s, const Limits& limits) {
    const std::uint64_t n = s.cardinality();
    if (n >= 63 || (std::uint64_t{1} << n) > limits.dense_lattice_cap)
        throw ResourceError("frame of " + std::to_string(n) +
                            " configurations exceeds the dense lattice cap");
    return static_cast<std::size_t>(n);
}

inline void zeta_subsets(std::vector<double>& f, std::size_t n) {
    for (std::size_t e = 0; e < n; ++e)
        for (std::size_t mask = 0; mask < f.size(); ++mask)
            if (mask & (std::size_t{1} << e)) f[mask] += f[mask ^ (std::size_t{1} << e)];
}
inline void mobius_subsets(std::vector<double>& f, std::size_t n) {
    for (std::size_t e = 0; e < n; ++e)
        for (std::size_t mask = 0; mask < f.size(); ++mask)
            if (mask & (std::size_t{1} << e)) f[mask] -= f[mask ^ (std::size_t{1} << e)];
}
inline void zeta_supersets(std::vector<double>& f, std::size_t n) {
    for (std::size_t e = 0; e < n; ++e)
        for (std::size_t mask = 0; mask < f.size(); ++mask)
            if (!(mask & (std::size_t{1} << e))) f[mask] += f[mask | (std::size_t{1} << e)];
}
inline void mobius_supersets(std::vector<double>& f, std::size_t n) {
    for (std::size_t e = 0; e < n; ++e)
        for (std::size_t mask = 0; mask < f.size(); ++mask)
            if (!(mask & (std::size_t{1} << e))) f[mask] -= f[mask | (std::size_t{1} << e)];
}

inline std::size_t to_mask(const Bitset& b) {
    std::size_t mask = 0;
    b.for_each([&](std::size_t i) { mask |= std::size_t{1} << i; });
    return mask;
}
inline Bitset from_mask(std::size_t mask, std::size_t n) {
    Bitset b(n);
    for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::size_t{1} << i)) b.set(i);
    return b;
}

inline std::vector<double> mass_dense(const MassFunction& m, std::size_t n) {
    std::vector<double> f(std::size_t{1} << n, 0.0);
    for (const auto& [k, v] : m.focal()) f[to_mask(k)] += v;
    return f;
}

// Implicability b(A) = sum over all subsets of A including the empty set;
// bel(A) = b(A) - m({}) and pl(A) = 1 - b(complement A). The dense passes below
// work in b because it is the function whose Moebius transform is m.
inline std::vector<double> implicability_dense(const MassFunction& m, std::size_t n) {
    auto f = mass_dense(m, n);
    zeta_subsets(f, n);
    return f;
}

inline MassFunction mass_from_dense(const Scope& s, std::vector<double> f, std::size_t n,
                                    const char* what) {
    MassFunction::FocalMap focal;
    for (std::size_t mask = 0; mask < f.size(); ++mask) {
        const double v = f[mask];
        if (v > tol::drop) {
            focal.emplace(from_mask(mask, n), v);
        } else if (v < -tol::validity) {
            throw MassError(std::string(what) + " is not a belief function: inversion yields mass " +
                            std::to_string(v));
        }
    }
    return MassFunction::from_arithmetic(s, std::move(focal));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Views: bel/pl/q as functions over all subsets, lazily evaluated against the
// sparse focal map, with a dense() escape hatch for lattice-wide passes.

class BeliefView {
public:
    explicit BeliefView(MassFunction m) : m_(std::move(m)) {}
    double operator()(const ConfigSet& a) const { return m_.bel(a); }
    double at_bits(const Bitset& a) const { return m_.bel(a); }
    std::vector<double> dense(const Limits& limits = default_limits()) const {
        const std::size_t n = detail::lattice_exponent(m_.scope(), limits);
        auto f = detail::implicability_dense(m_, n);
        const double empty = f[0];
        for (auto& v : f) v -= empty; // b -> bel
        return f;
    }
    const MassFunction& mass() const { return m_; }

private:
    MassFunction m_;
};

class PlausibilityView {
public:
    explicit PlausibilityView(MassFunction m) : m_(std::move(m)) {}
    double operator()(const ConfigSet& a) const { return m_.pl(a); }
    double at_bits(const Bitset& a) const { return m_.pl(a); }
    std::vector<double> dense(const Limits& limits = default_limits()) const {
        const std::size_t n = detail::lattice_exponent(m_.scope(), limits);
        auto b = detail::implicability_dense(m_, n);
        std::vector<double> f(b.size());
        const std::size_t all = f.size() - 1;
        for (std::size_t mask = 0; mask < f.size(); ++mask) f[mask] = 1.0 - b[all ^ mask];
        return f;
    }
    const MassFunction& mass() const { return m_; }

private:
    MassFunction m_;
};

class CommonalityView {
public:
    explicit CommonalityView(MassFunction m) : m_(std::move(m)) {}
    double operator()(const ConfigSet& a) const { return m_.q(a); }
    double at_bits(const Bitset& a) const { return m_.q(a); }
    std::vector<double> dense(const Limits& limits = default_limits()) const {
        const std::size_t n = detail::lattice_exponent(m_.scope(), limits);
        auto f = detail::mass_dense(m_, n);
        detail::zeta_supersets(f, n);
        return f;
    }
    const MassFunction& mass() const { return m_; }

private:
    MassFunction m_;
};

inline BeliefView to_bel(const MassFunction& m) { return BeliefView(m); }
inline PlausibilityView to_pl(const MassFunction& m) { return PlausibilityView(m); }
inline CommonalityView to_q(const MassFunction& m) { return CommonalityView(m); }

// Inverses. Each takes the full dense vector (indexed by subset mask) and
// recovers the unique mass function, including any mass on the empty set:
// from bel via m({}) = 1 - bel(full), from pl via b(A) = 1 - pl(complement),
// from q via the superset Moebius transform.
inline MassFunction from_bel(const Scope& s, std::vector<double> bel,
                             const Limits& limits = default_limits()) {
    const std::size_t n = detail::lattice_exponent(s, limits);
    if (bel.size() != (std::size_t{1} << n))
        throw MassError("belief vector has the wrong lattice size");
    const double empty_mass = 1.0 - bel.back();
    for (auto& v : bel) v += empty_mass; // bel -> b
    detail::mobius_subsets(bel, n);
    return detail::mass_from_dense(s, std::move(bel), n, "bel");
}

inline MassFunction from_pl(const Scope& s, const std::vector<double>& pl,
                            const Limits& limits = default_limits()) {
    const std::size_t n = detail::lattice_exponent(s, limits);
    if (pl.size() != (std::size_t{1} << n))
        throw MassError("plausibility vector has the wrong lattice size");
    if (std::abs(pl[0]) > tol::validity)
        throw MassError("pl({}) must be 0, got " + std::to_string(pl[0]));
    std::vector<double> b(pl.size());
    const std::size_t all = pl.size() - 1;
    for (std::size_t mask = 0; mask < pl.size(); ++mask) b[mask] = 1.0 - pl[all ^ mask];
    detail::mobius_subsets(b, n);
    return detail::mass_from_dense(s, std::move(b), n, "pl");
}

inline MassFunction from_q(const Scope& s, std::vector<double> q,
                           const Limits& limits = default_limits()) {
    const std::size_t n = detail::lattice_exponent(s, limits);
    if (q.size() != (std::size_t{1} << n))
        throw MassError("commonality vector has the wrong lattice size");
    detail::mobius_supersets(q, n);
    return detail::mass_from_dense(s, std::move(q), n, "q");
}

// ---------------------------------------------------------------------------
// Core operations.

// Unnormalized conditioning: each focal set's mass moves to its intersection
// with `a`. Mass stranded on the empty set stays there.
inline MassFunction condition(const MassFunction& m, const ConfigSet& a) {
    if (a.scope() != m.scope()) throw ScopeError("conditioning set lives on a different scope");
    MassFunction::FocalMap f;
    for (const auto& [k, v] : m.focal()) f[k & a.bits()] += v;
    return MassFunction::from_arithmetic(m.scope(), std::move(f));
}

namespace detail {

inline bool prefer_dense(const MassFunction& a, const MassFunction& b, const Limits& limits) {
    const std::uint64_t n = a.scope().cardinality();
    if (n >= 63 || (std::uint64_t{1} << n) > limits.dense_lattice_cap) return false;
    const double lattice = static_cast<double>(std::uint64_t{1} << n);
    const double fa = static_cast<double>(a.focal_count());
    const double fb = static_cast<double>(b.focal_count());
    return fa * fa > lattice && fb * fb > lattice;
}

inline MassFunction conjunctive_sparse(const MassFunction& a, const MassFunction& b) {
    MassFunction::FocalMap f;
    for (const auto& [ka, va] : a.focal())
        for (const auto& [kb, vb] : b.focal()) f[ka & kb] += va * vb;
    return MassFunction::from_arithmetic(a.scope(), std::move(f));
}

// Commonalities multiply under the conjunctive rule.
inline MassFunction conjunctive_dense(const MassFunction& a, const MassFunction& b,
                                      const Limits& limits) {
    const std::size_t n = lattice_exponent(a.scope(), limits);
    auto qa = mass_dense(a, n);
    zeta_supersets(qa, n);
    auto qb = mass_dense(b, n);
    zeta_supersets(qb, n);
    for (std::size_t i = 0; i < qa.size(); ++i) qa[i] *= qb[i];
    mobius_supersets(qa, n);
    return mass_from_dense(a.scope(), std::move(qa), n, "conjunctive combination");
}

inline MassFunction disjunctive_sparse(const MassFunction& a, const MassFunction& b) {
    MassFunction::FocalMap f;
    for (const auto& [ka, va] : a.focal())
        for (const auto& [kb, vb] : b.focal()) f[ka | kb] += va * vb;
    return MassFunction::from_arithmetic(a.scope(), std::move(f));
}

// Implicabilities multiply under the disjunctive rule.
inline MassFunction disjunctive_dense(const MassFunction& a, const MassFunction& b,
                                      const Limits& limits) {
    const std::size_t n = lattice_exponent(a.scope(), limits);
    auto ba = implicability_dense(a, n);
    const auto bb = implicability_dense(b, n);
    for (std::size_t i = 0; i < ba.size(); ++i) ba[i] *= bb[i];
    mobius_subsets(ba, n);
    return mass_from_dense(a.scope(), std::move(ba), n, "disjunctive combination");
}

} // namespace detail

// Conjunctive rule (unnormalized Dempster): masses of intersections.
inline MassFunction conjunctive_combine(const MassFunction& a, const MassFunction& b,
                                        const Limits& limits = default_limits()) {
    if (a.scope() != b.scope()) throw ScopeError("combining mass functions on different scopes");
    return detail::prefer_dense(a, b, limits) ? detail::conjunctive_dense(a, b, limits)
                                              : detail::conjunctive_sparse(a, b);
}

// Disjunctive rule: masses of unions.
inline MassFunction disjunctive_combine(const MassFunction& a, const MassFunction& b,
                                        const Limits& limits = default_limits()) {
    if (a.scope() != b.scope()) throw ScopeError("combining mass functions on different scopes");
    return detail::prefer_dense(a, b, limits) ? detail::disjunctive_dense(a, b, limits)
                                              : detail::disjunctive_sparse(a, b);
}

inline MassFunction marginalize(const MassFunction& m, const Scope& sub) {
    if (m.scope() == sub) return m;
    IndexProjection pr(m.scope(), sub);
    MassFunction::FocalMap f;
    for (const auto& [k, v] : m.focal()) {
        Bitset out(static_cast<std::size_t>(sub.cardinality()));
        k.for_each([&](std::size_t i) { out.set(static_cast<std::size_t>(pr(i))); });
        f[out] += v;
    }
    return MassFunction::from_arithmetic(sub, std::move(f));
}

inline MassFunction vacuous_extend(const MassFunction& m, const Scope& sup) {
    if (m.scope() == sup) return m;
    MassFunction::FocalMap f;
    for (const auto& [k, v] : m.focal()) {
        f[cylinder_extend(ConfigSet(m.scope(), k), sup).bits()] += v;
    }
    return MassFunction::from_arithmetic(sup, std::move(f));
}

// Closed-world renormalization: drop the conflict mass and rescale by 1/(1-m({})).
inline MassFunction normalize(const MassFunction& m) {
    const double conflict = m.mass_of_empty();
    const double k = 1.0 - conflict;
    if (k <= tol::drop)
        throw ConflictError("total conflict: all mass sits on the empty set");
    MassFunction::FocalMap f;
    for (const auto& [key, v] : m.focal())
        if (key.any()) f[key] = v / k;
    return MassFunction::from_arithmetic(m.scope(), std::move(f));
}

// Carry a mass function across a frame coarsening (Lambda images of focal sets).
inline MassFunction coarsen(const MassFunction& m, const Partition& p) {
    const Scope coarse = Scope::single(p.coarse());
    if (m.scope().arity() != 1 || m.scope().variables()[0]->serial() != p.base()->serial())
        throw ScopeError("coarsen expects a mass function on the partition's base variable");
    MassFunction::FocalMap f;
    for (const auto& [k, v] : m.focal()) f[p.coarsen_subset(k)] += v;
    return MassFunction::from_arithmetic(coarse, std::move(f));
}

// ...and back: each coarse focal set becomes the union of its blocks.
inline MassFunction refine(const MassFunction& m, const Partition& p) {
    const Scope base = Scope::single(p.base());
    if (m.scope().arity() != 1 || m.scope().variables()[0]->serial() != p.coarse()->serial())
        throw ScopeError("refine expects a mass function on the partition's coarse variable");
    MassFunction::FocalMap f;
    for (const auto& [k, v] : m.focal()) f[p.refine_subset(k)] += v;
    return MassFunction::from_arithmetic(base, std::move(f));
}

} // namespace enc
