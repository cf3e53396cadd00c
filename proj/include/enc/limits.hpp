#pragma once

#include <cstddef>
#include <cstdint>

namespace enc {

// Resource caps. Operations that could blow up check against these and throw
// ResourceError instead of allocating without bound.
struct Limits {
    // Largest product-space cardinality a Scope may have (number of configurations).
    std::uint64_t max_configs = std::uint64_t{1} << 20;
    // Largest dense subset-lattice (2^|frame|) the m/bel/pl/q transforms may allocate.
    std::uint64_t dense_lattice_cap = std::uint64_t{1} << 16;
    // Largest parent frame the GBT's all-subsets pass will handle (lattice 2^n).
    std::size_t gbt_parent_cap = 20;
    // Largest conditioner frame for a FullConditionalTable (2^n columns).
    std::size_t table_parent_cap = 16;
    // Cap on the focal-set product enumerated by the ballooning extension.
    std::uint64_t balloon_focal_cap = std::uint64_t{1} << 20;
    // Entries kept by a propagation session's conditional cache (LRU beyond this).
    std::size_t cond_cache_capacity = std::size_t{1} << 16;
};

// Process-wide defaults. The CLI overrides max_configs from the environment at
// startup; library code reads this unless handed an explicit Limits.
inline Limits& default_limits() {
    static Limits limits;
    return limits;
}

// Numeric policy, pinned in one place so tests and docs agree with the code.
namespace tol {
// Identities that should hold to rounding error only (transform roundtrips,
// commutativity, both DRC routes, ...).
inline constexpr double identity = 1e-12;
// Validity checks and cross-method agreement (propagation vs oracle).
inline constexpr double validity = 1e-9;
// Input masses may miss 1 by this much and are rescaled; beyond it they are rejected.
inline constexpr double input_band = 1e-6;
// Masses below this after arithmetic are dropped (deficit folded into the
// largest focal set, provided the total deviation stays below `validity`).
inline constexpr double drop = 1e-15;
} // namespace tol

} // namespace enc
