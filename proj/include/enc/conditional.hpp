#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "enc/mass.hpp"

namespace enc {

// What is known about a child scope, one mass function per configuration of a
// parent scope. This is the elementary representation: entries are the whole
// input, and anything conditioned on a *set* of parent configurations is
// derived from them (never stored independently).
class ConditionalBeliefFamily {
public:
    ConditionalBeliefFamily(Scope parent, Scope child, std::vector<MassFunction> entries)
        : parent_(std::move(parent)), child_(std::move(child)), entries_(std::move(entries)) {
        if (parent_.empty() || child_.empty())
            throw ScopeError("a conditional family needs nonempty parent and child scopes");
        if (!scopes_disjoint(parent_, child_))
            throw ScopeError("parent and child scopes of a conditional family overlap");
        if (entries_.size() != parent_.cardinality())
            throw ValidationError("family over " + parent_.name() + " needs " +
                                  std::to_string(parent_.cardinality()) + " entries, got " +
                                  std::to_string(entries_.size()));
        for (const auto& e : entries_)
            if (e.scope() != child_)
                throw ScopeError("family entry does not live on the child scope");
    }

    // Entries named by parent frame label; omitted labels default to vacuous
    // (the common shape of published tables, which list only informative columns).
    static ConditionalBeliefFamily from_labeled_entries(
        const VarPtr& parent, Scope child,
        const std::vector<std::pair<std::string, MassFunction>>& named) {
        std::vector<MassFunction> entries(parent->frame_size(), MassFunction::vacuous(child));
        for (const auto& [label, m] : named) entries[parent->label_index(label)] = m;
        return ConditionalBeliefFamily(Scope::single(parent), std::move(child),
                                       std::move(entries));
    }

    const Scope& parent() const { return parent_; }
    const Scope& child() const { return child_; }
    const MassFunction& entry(std::size_t parent_config) const { return entries_.at(parent_config); }
    const std::vector<MassFunction>& entries() const { return entries_; }
    std::size_t parent_size() const { return entries_.size(); }

private:
    Scope parent_;
    Scope child_;
    std::vector<MassFunction> entries_;
};

// ---------------------------------------------------------------------------
// Disjunctive extension: belief about the child given only that the parent lies
// somewhere in a set, built by disjunctively combining the member entries.

inline MassFunction drc_extend(const ConditionalBeliefFamily& f, const Bitset& theta,
                               const Limits& limits = default_limits()) {
    if (theta.size() != f.parent_size())
        throw ScopeError("conditioning set width does not match the parent frame");
    if (theta.none())
        throw ValidationError("no belief is defined conditional on the empty parent set");
    MassFunction acc;
    bool first = true;
    theta.for_each([&](std::size_t i) {
        acc = first ? f.entry(i) : disjunctive_combine(acc, f.entry(i), limits);
        first = false;
    });
    return acc;
}

inline MassFunction drc_extend(const ConditionalBeliefFamily& f, const ConfigSet& theta,
                               const Limits& limits = default_limits()) {
    if (theta.scope() != f.parent()) throw ScopeError("conditioning set is not on the parent scope");
    return drc_extend(f, theta.bits(), limits);
}

namespace detail {

// Same operator through plausibilities: pl(x|theta) is one minus the product of
// the per-entry complements. Kept as an independent route for cross-checking.
inline MassFunction drc_extend_via_pl(const ConditionalBeliefFamily& f, const Bitset& theta,
                                      const Limits& limits = default_limits()) {
    if (theta.none())
        throw ValidationError("no belief is defined conditional on the empty parent set");
    const std::size_t n = lattice_exponent(f.child(), limits);
    std::vector<double> pl(std::size_t{1} << n, 1.0);
    theta.for_each([&](std::size_t i) {
        auto pli = to_pl(f.entry(i)).dense(limits);
        for (std::size_t mask = 0; mask < pl.size(); ++mask) pl[mask] *= 1.0 - pli[mask];
    });
    for (auto& v : pl) v = 1.0 - v;
    return from_pl(f.child(), pl, limits);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Backward inference: belief about the parent from an observation on the child.
// pl(theta|x) = 1 - prod_{i in theta} (1 - pl(x|entry_i)); the full plausibility
// lattice is computed and inverted to masses in one pass.

inline MassFunction gbt(const ConditionalBeliefFamily& f, const ConfigSet& x,
                        const Limits& limits = default_limits()) {
    if (x.scope() != f.child()) throw ScopeError("observation is not on the child scope");
    if (x.empty()) throw ValidationError("no belief follows from an empty observation");
    const std::uint64_t n = f.parent().cardinality();
    if (n > limits.gbt_parent_cap)
        throw ResourceError("parent frame of " + std::to_string(n) +
                            " exceeds the backward-inference cap of " +
                            std::to_string(limits.gbt_parent_cap));

    std::vector<double> miss(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < miss.size(); ++i) miss[i] = 1.0 - f.entry(i).pl(x.bits());

    // complement-product over subsets by lowest set bit, then pl = 1 - product
    std::vector<double> pl(std::size_t{1} << n, 1.0);
    for (std::size_t mask = 1; mask < pl.size(); ++mask) {
        const std::size_t low = mask & (~mask + 1);
        const auto bit = static_cast<std::size_t>(std::countr_zero(low));
        pl[mask] = pl[mask ^ low] * miss[bit];
    }
    for (auto& v : pl) v = 1.0 - v;

    Limits raised = limits;
    raised.dense_lattice_cap =
        std::max<std::uint64_t>(raised.dense_lattice_cap, std::uint64_t{1} << n);
    return from_pl(f.parent(), pl, raised);
}

namespace detail {

// Closed form of the same posterior: each parent element is in or out of a
// focal set independently with weight pl(x|entry) / its complement.
inline MassFunction gbt_closed_form(const ConditionalBeliefFamily& f, const ConfigSet& x) {
    const auto n = static_cast<std::size_t>(f.parent().cardinality());
    std::vector<double> hit(n);
    for (std::size_t i = 0; i < n; ++i) hit[i] = f.entry(i).pl(x.bits());
    MassFunction::FocalMap out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) w *= (mask & (std::size_t{1} << i)) ? hit[i] : 1.0 - hit[i];
        if (w > 0.0) out[from_mask(mask, n)] += w;
    }
    return MassFunction::from_arithmetic(f.parent(), std::move(out));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Forward transport of a prior through a family: the mixture of disjunctive
// extensions weighted by the prior's masses. A prior focal set on the empty
// parent set (open-world conflict) transports to conflict on the child.

inline MassFunction forward_propagate(const MassFunction& prior, const ConditionalBeliefFamily& f,
                                      const Limits& limits = default_limits()) {
    if (prior.scope() != f.parent()) throw ScopeError("prior is not on the parent scope");
    MassMixture mix(f.child());
    for (const auto& [theta, w] : prior.focal()) {
        if (theta.none())
            mix.add_point(w, Bitset(static_cast<std::size_t>(f.child().cardinality())));
        else
            mix.add(w, drc_extend(f, theta, limits));
    }
    return std::move(mix).finish();
}

// ---------------------------------------------------------------------------
// Ballooning extension: the least-committed joint over parent-and-child whose
// conditionals reproduce the family. Focal sets are unions over parent elements
// of {element} x (one focal set of that element's entry); masses multiply.

inline MassFunction ballooning_extension(const ConditionalBeliefFamily& f,
                                         const Limits& limits = default_limits()) {
    const Scope joint = scope_union(f.parent(), f.child(), limits);
    const auto jn = static_cast<std::size_t>(joint.cardinality());
    const auto pn = static_cast<std::size_t>(f.parent().cardinality());

    std::uint64_t combos = 1;
    for (std::size_t i = 0; i < pn; ++i) {
        const std::uint64_t fc = f.entry(i).focal_count();
        if (combos > limits.balloon_focal_cap / fc)
            throw ResourceError("ballooning extension focal count exceeds the cap of " +
                                std::to_string(limits.balloon_focal_cap));
        combos *= fc;
    }

    // For each parent element and each focal set of its entry, the joint-index
    // bitmask of {element} x focal.
    IndexProjection to_parent(joint, f.parent());
    IndexProjection to_child(joint, f.child());
    std::vector<std::vector<std::pair<Bitset, double>>> choice(pn);
    {
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rows(pn);
        for (std::size_t k = 0; k < jn; ++k)
            rows[static_cast<std::size_t>(to_parent(k))].push_back(
                {k, static_cast<std::size_t>(to_child(k))});
        for (std::size_t i = 0; i < pn; ++i) {
            for (const auto& [y, w] : f.entry(i).focal()) {
                Bitset jb(jn);
                for (const auto& [k, ck] : rows[i])
                    if (y.test(ck)) jb.set(k);
                choice[i].push_back({std::move(jb), w});
            }
        }
    }

    MassFunction::FocalMap out;
    std::vector<std::size_t> idx(pn, 0);
    for (;;) {
        Bitset focal(jn);
        double w = 1.0;
        for (std::size_t i = 0; i < pn; ++i) {
            focal = focal | choice[i][idx[i]].first;
            w *= choice[i][idx[i]].second;
        }
        out[focal] += w;

        std::size_t d = 0;
        while (d < pn && ++idx[d] == choice[d].size()) idx[d++] = 0;
        if (d == pn) break;
    }
    return MassFunction::from_arithmetic(joint, std::move(out));
}

// ---------------------------------------------------------------------------
// The derived representation: one mass function on the child per subset of the
// parent configuration space (2^|parent frame| columns, the empty column fixed
// at total conflict, which is what conditioning on nothing yields).

class FullConditionalTable {
public:
    static FullConditionalTable from_family(const ConditionalBeliefFamily& f,
                                            const Limits& limits = default_limits()) {
        const std::size_t n = checked_parent(f.parent(), limits);
        std::vector<MassFunction> entries;
        entries.reserve(std::size_t{1} << n);
        entries.push_back(MassFunction::certain(ConfigSet::empty_set(f.child())));
        for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask)
            entries.push_back(drc_extend(f, detail::from_mask(mask, n), limits));
        return FullConditionalTable(f.parent(), f.child(), std::move(entries));
    }

    // The table of Dempsterian conditionings of one mass function: column B is
    // m conditioned on B. Here the "parent" and "child" scopes coincide.
    static FullConditionalTable conditioning_table(const MassFunction& m,
                                                   const Limits& limits = default_limits()) {
        const std::size_t n = checked_parent(m.scope(), limits);
        std::vector<MassFunction> entries;
        entries.reserve(std::size_t{1} << n);
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask)
            entries.push_back(condition(m, ConfigSet(m.scope(), detail::from_mask(mask, n))));
        return FullConditionalTable(m.scope(), m.scope(), std::move(entries));
    }

    FullConditionalTable(Scope parent, Scope child, std::vector<MassFunction> entries)
        : parent_(std::move(parent)), child_(std::move(child)), entries_(std::move(entries)) {
        const auto n = static_cast<std::size_t>(parent_.cardinality());
        if (entries_.size() != (std::size_t{1} << n))
            throw ValidationError("full table needs one entry per parent subset");
        for (const auto& e : entries_)
            if (e.scope() != child_) throw ScopeError("table entry does not live on the child scope");
    }

    const Scope& parent() const { return parent_; }
    const Scope& child() const { return child_; }
    std::size_t columns() const { return entries_.size(); }

    const MassFunction& entry(const ConfigSet& x) const {
        if (x.scope() != parent_) throw ScopeError("table queried with a foreign parent subset");
        if (x.empty()) throw ValidationError("the table maps nonempty parent subsets only");
        return entries_[detail::to_mask(x.bits())];
    }
    // Internal access including the empty column (used by mixtures).
    const MassFunction& entry_raw(std::size_t mask) const { return entries_[mask]; }

    // Transport a mass function on the parent through the table: the mixture of
    // columns weighted by the input masses. With a conditioning table this is
    // exactly conjunctive combination; with a family table it is forward
    // transport of a belief over parent subsets.
    MassFunction apply(const MassFunction& input) const {
        if (input.scope() != parent_) throw ScopeError("table applied to a foreign scope");
        MassMixture mix(child_);
        for (const auto& [b, w] : input.focal()) mix.add(w, entries_[detail::to_mask(b)]);
        return std::move(mix).finish();
    }

private:
    static std::size_t checked_parent(const Scope& parent, const Limits& limits) {
        const std::uint64_t n = parent.cardinality();
        if (n > limits.table_parent_cap)
            throw ResourceError("conditioner frame of " + std::to_string(n) +
                                " exceeds the full-table cap of " +
                                std::to_string(limits.table_parent_cap));
        return static_cast<std::size_t>(n);
    }

    Scope parent_;
    Scope child_;
    std::vector<MassFunction> entries_;
};

// Conjunctive combination routed through a conditioning table; provably equal
// to conjunctive_combine and kept as an independently testable path.
inline MassFunction conjunctive_via_conditional(const MassFunction& a, const MassFunction& b,
                                                const Limits& limits = default_limits()) {
    return FullConditionalTable::conditioning_table(a, limits).apply(b);
}

// Read a full conditional table off a joint: column x holds the joint
// conditioned on the parent lying in x, projected onto the child.
inline FullConditionalTable joint_to_conditional(const MassFunction& joint, const Scope& parent,
                                                 const Limits& limits = default_limits()) {
    if (!joint.scope().contains(parent) || parent.empty())
        throw ScopeError("parent scope must be a nonempty part of the joint scope");
    const Scope child = scope_minus(joint.scope(), parent);
    if (child.empty()) throw ScopeError("joint scope leaves no child variables");
    const std::uint64_t pn64 = parent.cardinality();
    if (pn64 > limits.table_parent_cap)
        throw ResourceError("conditioner frame of " + std::to_string(pn64) +
                            " exceeds the full-table cap of " +
                            std::to_string(limits.table_parent_cap));
    const auto pn = static_cast<std::size_t>(pn64);
    const auto jn = static_cast<std::size_t>(joint.scope().cardinality());

    // cylinder of each parent singleton, then of each subset by lowest bit
    std::vector<Bitset> cyl(std::size_t{1} << pn, Bitset(jn));
    {
        IndexProjection to_parent(joint.scope(), parent);
        std::vector<Bitset> single(pn, Bitset(jn));
        for (std::size_t k = 0; k < jn; ++k) single[static_cast<std::size_t>(to_parent(k))].set(k);
        for (std::size_t mask = 1; mask < cyl.size(); ++mask) {
            const std::size_t low = mask & (~mask + 1);
            cyl[mask] = cyl[mask ^ low] | single[static_cast<std::size_t>(std::countr_zero(low))];
        }
    }

    IndexProjection to_child(joint.scope(), child);
    const auto cn = static_cast<std::size_t>(child.cardinality());
    std::vector<MassFunction> entries;
    entries.reserve(cyl.size());
    for (std::size_t mask = 0; mask < cyl.size(); ++mask) {
        MassFunction::FocalMap col;
        for (const auto& [s, w] : joint.focal()) {
            Bitset y(cn);
            (s & cyl[mask]).for_each([&](std::size_t k) { y.set(static_cast<std::size_t>(to_child(k))); });
            col[y] += w;
        }
        entries.push_back(MassFunction::from_arithmetic(child, std::move(col)));
    }
    return FullConditionalTable(parent, child, std::move(entries));
}

// ---------------------------------------------------------------------------
// Diagnostics.

// A full table can be folded back into a joint belief only if plausibility
// never shrinks when the conditioning set grows. Checking covering pairs
// (x vs x plus one element) suffices, since inclusion chains factor into them.
struct ValidityReport {
    bool valid = true;
    ConfigSet child_set;    // witness y with pl(y|narrow) > pl(y|wide)
    ConfigSet narrow;       // x1
    ConfigSet wide;         // x2 = x1 + one element
    double violation = 0.0; // pl(y|x1) - pl(y|x2)
};

inline ValidityReport validity_check(const FullConditionalTable& t,
                                     const Limits& limits = default_limits()) {
    ValidityReport report;
    const auto pn = static_cast<std::size_t>(t.parent().cardinality());
    const std::size_t cn = detail::lattice_exponent(t.child(), limits);

    std::vector<std::vector<double>> pl(std::size_t{1} << pn);
    for (std::size_t mask = 0; mask < pl.size(); ++mask)
        pl[mask] = to_pl(t.entry_raw(mask)).dense(limits);

    for (std::size_t mask = 1; mask < pl.size(); ++mask) {
        for (std::size_t bit = 0; bit < pn; ++bit) {
            if (mask & (std::size_t{1} << bit)) continue;
            const std::size_t wide = mask | (std::size_t{1} << bit);
            for (std::size_t y = 0; y < (std::size_t{1} << cn); ++y) {
                const double gap = pl[mask][y] - pl[wide][y];
                if (gap > tol::validity && gap > report.violation) {
                    report.valid = false;
                    report.violation = gap;
                    report.child_set = ConfigSet(t.child(), detail::from_mask(y, cn));
                    report.narrow = ConfigSet(t.parent(), detail::from_mask(mask, pn));
                    report.wide = ConfigSet(t.parent(), detail::from_mask(wide, pn));
                }
            }
        }
    }
    return report;
}

// Which checks of "this source says nothing by itself" hold.
struct NonInformativeReport {
    bool over_parent = false; // every entry normalized: no evidence about the parent
    bool over_child = false;  // taken alone, no evidence about the child either
    std::string note;
};

inline NonInformativeReport non_informative_checks(const ConditionalBeliefFamily& f) {
    NonInformativeReport r;
    r.over_parent = true;
    for (const auto& e : f.entries())
        if (e.mass_of_empty() > tol::validity) r.over_parent = false;

    // For every proper child subset some entry must give it zero belief. The
    // full frame is excluded: bel(full) = 1 for any normalized entry, so the
    // literal all-subsets reading is unsatisfiable and the proper-subset
    // reading is the meaningful one.
    r.over_child = true;
    const auto cn = static_cast<std::size_t>(f.child().cardinality());
    if (cn > 20) throw ResourceError("child frame too large for the subset sweep");
    for (std::size_t y = 1; y + 1 < (std::size_t{1} << cn); ++y) {
        bool some_zero = false;
        const Bitset yb = detail::from_mask(y, cn);
        for (const auto& e : f.entries())
            if (e.bel(yb) <= tol::validity) { some_zero = true; break; }
        if (!some_zero) { r.over_child = false; break; }
    }
    r.note = "child check ranges over proper subsets of the child frame only";
    return r;
}

inline NonInformativeReport non_informative_checks(const FullConditionalTable& t) {
    NonInformativeReport r;
    r.over_parent = true;
    const auto pn = static_cast<std::size_t>(t.parent().cardinality());
    for (std::size_t i = 0; i < pn; ++i)
        if (t.entry_raw(std::size_t{1} << i).mass_of_empty() > tol::validity) r.over_parent = false;
    r.over_child = t.entry_raw((std::size_t{1} << pn) - 1).is_vacuous(tol::validity);
    r.note = "child check inspects the column conditioned on the full parent frame";
    return r;
}

inline NonInformativeReport non_informative_checks(const MassFunction& joint, const Scope& parent) {
    NonInformativeReport r;
    const Scope child = scope_minus(joint.scope(), parent);
    r.over_parent = marginalize(joint, parent).is_vacuous(tol::validity);
    r.over_child = marginalize(joint, child).is_vacuous(tol::validity);
    r.note = "joint check inspects both marginals";
    return r;
}

// Parent elements split by whether their entry carries any commitment at all.
struct RelevanceInfo {
    ConfigSet relevant;   // entries with m(child frame) < 1
    ConfigSet irrelevant; // vacuous entries
};

inline RelevanceInfo relevance(const ConditionalBeliefFamily& f) {
    const auto pn = static_cast<std::size_t>(f.parent().cardinality());
    Bitset rel(pn), irr(pn);
    for (std::size_t i = 0; i < pn; ++i)
        (f.entry(i).is_vacuous(tol::identity) ? irr : rel).set(i);
    return RelevanceInfo{ConfigSet(f.parent(), rel), ConfigSet(f.parent(), irr)};
}

} // namespace enc
