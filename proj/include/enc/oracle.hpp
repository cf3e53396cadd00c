#pragma once

// Brute-force reference semantics: build the belief over the product frame of
// every variable at once by combining the joint extension of each edge family
// with every prior and evidence piece, then read marginals off the joint.
// Slow on purpose — every propagation path is tested against this.

#include <chrono>
#include <cstdint>
#include <unordered_map>

#include "enc/network.hpp"

namespace enc {

struct OracleResult {
    Scope full;
    MassFunction joint;
    std::unordered_map<std::uint64_t, MassFunction> marginals; // variable serial -> belief
    std::size_t peak_focal_count = 0;
    double elapsed_ms = 0.0;
};

inline OracleResult oracle_marginals(const EvidentialNetwork& net,
                                     const Limits& limits = default_limits()) {
    const auto started = std::chrono::steady_clock::now();

    OracleResult out;
    out.full = Scope(net.variables(), limits);
    out.joint = MassFunction::vacuous(out.full);

    auto fold = [&](const MassFunction& piece) {
        out.joint = conjunctive_combine(out.joint, vacuous_extend(piece, out.full), limits);
        out.peak_focal_count = std::max(out.peak_focal_count, out.joint.focal_count());
    };

    for (const auto& e : net.edges()) fold(ballooning_extension(*e.family, limits));
    for (const auto& v : net.variables()) {
        const MassFunction p = net.prior(v);
        if (!p.is_vacuous()) fold(p);
        for (const auto& m : net.evidence(v)) fold(m);
    }

    for (const auto& v : net.variables())
        out.marginals.emplace(v->serial(), marginalize(out.joint, Scope::single(v)));

    out.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               started)
                         .count();
    return out;
}

// Dempster's rule written from scratch (plain double sum plus renormalization),
// kept textually independent of conjunctive_combine so the two can check each
// other.  Operands must be normal.
inline MassFunction dempster_reference(const MassFunction& a, const MassFunction& b) {
    if (a.scope() != b.scope())
        throw ScopeError("dempster_reference needs operands on one scope");
    if (a.mass_of_empty() > 0.0 || b.mass_of_empty() > 0.0)
        throw MassError("dempster_reference expects normal operands");

    double conflict = 0.0;
    std::map<Bitset, double> pooled;
    for (const auto& [sa, wa] : a.focal())
        for (const auto& [sb, wb] : b.focal()) {
            const Bitset meet = sa & sb;
            const double w = wa * wb;
            if (meet.none())
                conflict += w;
            else
                pooled[meet] += w;
        }

    if (conflict >= 1.0 - tol::drop)
        throw ConflictError("operands are totally conflicting");
    for (auto& [s, w] : pooled) w /= 1.0 - conflict;
    return MassFunction::from_arithmetic(a.scope(), std::move(pooled));
}

} // namespace enc
