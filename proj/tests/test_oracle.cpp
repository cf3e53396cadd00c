#include <catch2/catch_amalgamated.hpp>

#include "enc/generate.hpp"
#include "enc/network.hpp"
#include "enc/oracle.hpp"

using namespace enc;

TEST_CASE("a single documented edge produces the documented joint") {
    auto A = make_variable("A", {"a", "~a"});
    auto B = make_variable("B", {"b", "~b"});
    const Scope sa = Scope::single(A), sb = Scope::single(B);
    ConditionalBeliefFamily fam(
        sa, sb,
        {MassFunction::from_input(sb, {{ConfigSet::from_labels(sb, {"b"}), 0.9},
                                       {ConfigSet::full_set(sb), 0.1}}),
         MassFunction::vacuous(sb)});

    EvidentialNetwork net;
    net.add_variable(A);
    net.add_variable(B);
    net.add_edge(A, B, fam);

    const auto out = oracle_marginals(net);
    CHECK(out.full.cardinality() == 4);
    CHECK(out.joint.scope() == out.full);
    // The deballooned conditional: "b if a, anything otherwise".
    CHECK(out.joint.mass(ConfigSet::from_configs(out.full, {{"a", "b"}, {"~a", "b"},
                                                            {"~a", "~b"}})) ==
          Catch::Approx(0.9).margin(1e-12));
    CHECK(out.joint.mass(ConfigSet::full_set(out.full)) == Catch::Approx(0.1).margin(1e-12));
    // Both projections of that joint are vacuous: conditionals alone carry no
    // marginal information.
    CHECK(out.marginals.at(A->serial()).is_vacuous());
    CHECK(out.marginals.at(B->serial()).is_vacuous());
    CHECK(out.peak_focal_count >= 2);
    CHECK(out.elapsed_ms >= 0.0);

    // Pinning the parent turns the conditional into its first entry.
    net.set_prior(A, MassFunction::certain(ConfigSet::from_labels(sa, {"a"})));
    const auto pinned = oracle_marginals(net);
    CHECK(pinned.marginals.at(B->serial()).mass(ConfigSet::from_labels(sb, {"b"})) ==
          Catch::Approx(0.9).margin(1e-12));
    CHECK(pinned.marginals.at(B->serial()).mass(ConfigSet::full_set(sb)) ==
          Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("a lone variable's marginal is its own potential") {
    Rng rng(5);
    auto A = make_variable("Solo", {"s1", "s2", "s3"});
    const auto prior = random_mass(rng, Scope::single(A), 4);
    EvidentialNetwork net;
    net.add_variable(A);
    net.set_prior(A, prior);
    const auto out = oracle_marginals(net);
    CHECK(almost_equal(out.joint, prior, tol::identity));
    CHECK(almost_equal(out.marginals.at(A->serial()), prior, tol::identity));
}

TEST_CASE("the oracle result does not depend on edge order") {
    Rng rng(7);
    auto A = make_variable("Ae", {"a1", "a2"});
    auto B = make_variable("Be", {"b1", "b2", "b3"});
    auto C = make_variable("Ce", {"c1", "c2"});
    auto D = make_variable("De", {"d1", "d2"});
    const auto fab = random_family(rng, Scope::single(A), Scope::single(B), 3, 0.2);
    const auto fbc = random_family(rng, Scope::single(B), Scope::single(C), 3, 0.2);
    const auto fbd = random_family(rng, Scope::single(B), Scope::single(D), 3, 0.2);
    const auto evC = random_mass(rng, Scope::single(C), 3);

    auto build = [&](int order) {
        EvidentialNetwork net;
        for (const auto& v : {A, B, C, D}) net.add_variable(v);
        if (order == 0) {
            net.add_edge(A, B, fab);
            net.add_edge(B, C, fbc);
            net.add_edge(B, D, fbd);
        } else {
            net.add_edge(B, D, fbd);
            net.add_edge(B, C, fbc);
            net.add_edge(A, B, fab);
        }
        net.add_evidence(C, evC);
        return net;
    };
    const auto r1 = oracle_marginals(build(0));
    const auto r2 = oracle_marginals(build(1));
    CHECK(max_mass_difference(r1.joint, r2.joint) < tol::identity);
    for (const auto& v : {A, B, C, D})
        CHECK(max_mass_difference(r1.marginals.at(v->serial()), r2.marginals.at(v->serial())) <
              tol::identity);
}

TEST_CASE("child evidence inverts through the joint exactly as through gbt") {
    Rng rng(11);
    auto A = make_variable("Ag", {"a1", "a2", "a3"});
    auto B = make_variable("Bg", {"b1", "b2", "b3"});
    const Scope sa = Scope::single(A), sb = Scope::single(B);
    for (int t = 0; t < 20; ++t) {
        const auto fam = random_family(rng, sa, sb, 3, 0.2);
        const auto ev = random_mass(rng, sb, 3);
        EvidentialNetwork net;
        net.add_variable(A);
        net.add_variable(B);
        net.add_edge(A, B, fam);
        net.add_evidence(B, ev);

        MassMixture inverted(sa);
        for (const auto& [subset, weight] : ev.focal())
            inverted.add(weight, gbt(fam, ConfigSet(sb, subset)));
        const auto out = oracle_marginals(net);
        CHECK(max_mass_difference(out.marginals.at(A->serial()),
                                  std::move(inverted).finish()) < 1e-9);
    }
}

TEST_CASE("dempster_reference reproduces the worked example") {
    auto A = make_variable("Ad", {"a", "~a"});
    const Scope sa = Scope::single(A);
    const auto m1 = MassFunction::from_input(sa, {{ConfigSet::from_labels(sa, {"a"}), 0.6},
                                                  {ConfigSet::full_set(sa), 0.4}});
    const auto m2 = MassFunction::from_input(sa, {{ConfigSet::from_labels(sa, {"~a"}), 0.5},
                                                  {ConfigSet::full_set(sa), 0.5}});
    const auto fused = dempster_reference(m1, m2);
    CHECK(fused.mass(ConfigSet::from_labels(sa, {"a"})) == Catch::Approx(0.3 / 0.7).margin(1e-12));
    CHECK(fused.mass(ConfigSet::from_labels(sa, {"~a"})) == Catch::Approx(0.2 / 0.7).margin(1e-12));
    CHECK(fused.mass(ConfigSet::full_set(sa)) == Catch::Approx(0.2 / 0.7).margin(1e-12));
    CHECK(fused.is_normal());
}

TEST_CASE("dempster_reference edge cases") {
    auto A = make_variable("Av", {"a", "~a"});
    const Scope sa = Scope::single(A);
    const auto m = MassFunction::from_input(sa, {{ConfigSet::from_labels(sa, {"a"}), 0.25},
                                                 {ConfigSet::full_set(sa), 0.75}});

    // The vacuous belief is the neutral element.
    CHECK(almost_equal(dempster_reference(MassFunction::vacuous(sa), m), m, tol::identity));

    // Total conflict has no defined result.
    const auto yes = MassFunction::certain(ConfigSet::from_labels(sa, {"a"}));
    const auto no = MassFunction::certain(ConfigSet::from_labels(sa, {"~a"}));
    CHECK_THROWS_AS(dempster_reference(yes, no), ConflictError);

    // Subnormal operands belong to the unnormalized calculus, not this rule.
    const auto sub = MassFunction::from_input(
        sa, {{ConfigSet(sa, Bitset(2)), 0.2}, {ConfigSet::full_set(sa), 0.8}});
    CHECK_THROWS_AS(dempster_reference(sub, m), MassError);

    // Scopes must match.
    auto B = make_variable("Bv", {"b", "~b"});
    CHECK_THROWS_AS(dempster_reference(m, MassFunction::vacuous(Scope::single(B))), ScopeError);
}

TEST_CASE("dempster_reference agrees with normalize over the conjunctive rule") {
    Rng rng(13);
    auto A = make_variable("Ar", {"r1", "r2", "r3"});
    const Scope sa = Scope::single(A);
    int compared = 0;
    for (int t = 0; t < 200; ++t) {
        const auto m1 = random_mass(rng, sa, 4);
        const auto m2 = random_mass(rng, sa, 4);
        try {
            const auto direct = dempster_reference(m1, m2);
            const auto via_tbm = normalize(conjunctive_combine(m1, m2));
            CHECK(max_mass_difference(direct, via_tbm) < tol::identity);
            ++compared;
        } catch (const ConflictError&) {
            CHECK_THROWS_AS(normalize(conjunctive_combine(m1, m2)), ConflictError);
        }
    }
    CHECK(compared > 150); // total conflict should be rare with these shapes
}
