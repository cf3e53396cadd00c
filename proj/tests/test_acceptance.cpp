// Acceptance gate: six end-to-end checks over the shipped fixtures and the
// library's algebraic core, one printed line per check.  Tolerances are pinned
// here rather than configurable: 1e-12 wherever an identity holds in exact
// arithmetic, 1e-9 across whole propagation pipelines.  The exit status is the
// number of failed checks, so a plain run doubles as a smoke test in scripts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "enc/enc.hpp"

using namespace enc;

namespace {

constexpr double kExact = 1e-12; // algebraic identities
constexpr double kPath = 1e-9;   // independent computation paths

int g_failed = 0;

struct Check {
    bool ok = true;
    std::size_t asserted = 0;
    std::string why;

    void expect(bool cond, const std::string& what) {
        ++asserted;
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    }
    void close(double got, double want, double tol, const std::string& what) {
        expect(std::abs(got - want) <= tol, what + " (got " + std::to_string(got) + ")");
    }
};

void report(int index, const std::string& name, const Check& c, const std::string& note = "") {
    std::string tail;
    if (c.ok) {
        if (!note.empty()) tail = "  (" + note + ")";
    } else {
        tail = "  [" + c.why + "]";
        ++g_failed;
    }
    std::printf("[%d] %-56s %s%s\n", index, name.c_str(), c.ok ? "PASS" : "FAIL", tail.c_str());
    std::fflush(stdout);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fixture_path(const char* name) {
    return std::string(ENC_DATA_DIR) + "/" + name;
}

// {+}/{-}/rest-on-the-frame entry used by the sensor fixtures.
MassFunction pm_entry(const Scope& s, double plus, double minus) {
    std::vector<std::pair<ConfigSet, double>> in;
    if (plus > 0) in.push_back({ConfigSet::from_labels(s, {"+"}), plus});
    if (minus > 0) in.push_back({ConfigSet::from_labels(s, {"-"}), minus});
    const double rest = 1.0 - plus - minus;
    if (rest > 1e-12) in.push_back({ConfigSet::full_set(s), rest});
    return MassFunction::from_input(s, in);
}

Bitset bits_of(std::size_t n, std::uint64_t mask) {
    Bitset b(n);
    for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::uint64_t{1} << i)) b.set(i);
    return b;
}

Scope fresh_frame(Rng& rng, const std::string& name, std::size_t n) {
    (void)rng;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("e" + std::to_string(i + 1));
    return Scope::single(make_variable(name, labels));
}

// --------------------------------------------------------------------------
// 1. A two-column family ballooned into its least-committed joint and
//    conditioned back must survive the roundtrip byte-for-byte.
// --------------------------------------------------------------------------
Check roundtrip_check(std::string& note) {
    Check c;
    auto a = make_variable("A", {"a", "~a"});
    auto b = make_variable("B", {"b", "~b"});
    Scope sa = Scope::single(a), sb = Scope::single(b);
    ConditionalBeliefFamily f(
        sa, sb,
        {MassFunction::from_input(sb, {{ConfigSet::from_labels(sb, {"b"}), 0.9},
                                       {ConfigSet::full_set(sb), 0.1}}),
         MassFunction::vacuous(sb)});

    MassFunction joint = ballooning_extension(f); // warm-up run, re-done under the clock
    FullConditionalTable table = joint_to_conditional(joint, sa);
    const auto t0 = std::chrono::steady_clock::now();
    joint = ballooning_extension(f);
    table = joint_to_conditional(joint, sa);
    const double elapsed = ms_since(t0);

    Scope ab = scope_union(sa, sb);
    c.expect(joint.focal_count() == 2, "the ballooned joint should carry two focal sets");
    c.close(joint.mass(ConfigSet::from_configs(ab, {{"a", "b"}, {"~a", "b"}, {"~a", "~b"}})), 0.9,
            kExact, "mass of the ballooned focal set");
    c.close(joint.mass(ConfigSet::full_set(ab)), 0.1, kExact, "mass of the full product set");
    c.expect(max_mass_difference(table.entry(ConfigSet::from_labels(sa, {"a"})), f.entry(0)) <=
                 kExact,
             "conditioning must recover the first column");
    c.expect(max_mass_difference(table.entry(ConfigSet::from_labels(sa, {"~a"})), f.entry(1)) <=
                 kExact,
             "conditioning must recover the second column");
    c.expect(table.entry(ConfigSet::full_set(sa)).is_vacuous(kExact),
             "the whole-frame column must be vacuous");
    c.expect(elapsed < 1.0, "roundtrip took " + std::to_string(elapsed) + " ms, budget is 1 ms");

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f ms < 1 ms, tol 1e-12", elapsed);
    note = buf;
    return c;
}

// --------------------------------------------------------------------------
// 2. Two visibly different joints must collapse to one shared conditional
//    table: the joint-to-table map forgets exactly the prior.
// --------------------------------------------------------------------------
Check shared_table_check() {
    Check c;
    auto a = make_variable("A", {"a", "~a"});
    auto b = make_variable("B", {"b", "~b"});
    Scope sa = Scope::single(a), sb = Scope::single(b);
    Scope ab({a, b}); // configurations: (a,b) (a,~b) (~a,b) (~a,~b)

    auto bel1 = MassFunction::from_input(ab, {
                                                 {ConfigSet::of(ab, {0, 3}), 0.1},
                                                 {ConfigSet::of(ab, {1, 2}), 0.1},
                                                 {ConfigSet::of(ab, {0, 1, 2}), 0.1},
                                                 {ConfigSet::of(ab, {0, 1, 3}), 0.1},
                                                 {ConfigSet::of(ab, {0, 2, 3}), 0.1},
                                                 {ConfigSet::of(ab, {1, 2, 3}), 0.1},
                                                 {ConfigSet::full_set(ab), 0.4},
                                             });
    auto bel2 = MassFunction::from_input(ab, {
                                                 {ConfigSet::of(ab, {1, 2}), 0.2},
                                                 {ConfigSet::of(ab, {0, 2, 3}), 0.2},
                                                 {ConfigSet::of(ab, {0, 1, 3}), 0.2},
                                                 {ConfigSet::full_set(ab), 0.4},
                                             });
    c.expect(max_mass_difference(bel1, bel2) > 0.05, "the two joints must genuinely differ");

    auto t1 = joint_to_conditional(bel1, sa);
    auto t2 = joint_to_conditional(bel2, sa);

    for (const auto* label : {"a", "~a"}) {
        auto col = t1.entry(ConfigSet::from_labels(sa, {label}));
        c.close(col.mass(ConfigSet::from_labels(sb, {"b"})), 0.2, kExact,
                std::string("m({b} | ") + label + ")");
        c.close(col.mass(ConfigSet::from_labels(sb, {"~b"})), 0.2, kExact,
                std::string("m({~b} | ") + label + ")");
        c.close(col.mass(ConfigSet::full_set(sb)), 0.6, kExact,
                std::string("m(frame | ") + label + ")");
    }
    c.expect(t1.entry(ConfigSet::full_set(sa)).is_vacuous(kExact),
             "the whole-frame column must be vacuous");
    for (std::size_t mask = 1; mask < t1.columns(); ++mask)
        c.expect(max_mass_difference(t1.entry_raw(mask), t2.entry_raw(mask)) <= kExact,
                 "both joints must induce the same table");
    return c;
}

// --------------------------------------------------------------------------
// 3. The bundled sensor network, loaded from disk with its evidence, run
//    through the coarsened-branch pipeline: branch frames, coarse tables,
//    per-branch beliefs, and the combined root belief all match the values
//    frozen from an independent joint construction.
// --------------------------------------------------------------------------
Check partition_check(const EvidentialNetwork& net, std::string& note) {
    Check c;
    const VarPtr A = net.variable("A");
    const Scope sa = Scope::single(A);
    const Scope sx = Scope::single(net.variable("X"));
    const Scope sy = Scope::single(net.variable("Y"));
    const Scope sz = Scope::single(net.variable("Z"));

    const auto t0 = std::chrono::steady_clock::now();
    const auto out = partition_optimize(net, A);
    const double elapsed = ms_since(t0);

    c.expect(out.groups.size() == 3, "expected one branch per sensor");
    if (!c.ok) return c;
    const auto& gx = out.groups[0];
    const auto& gy = out.groups[1];
    const auto& gz = out.groups[2];
    c.expect(gx.direct_children == std::vector<std::string>{"X"}, "first branch should hold X");
    c.expect(gy.direct_children == std::vector<std::string>{"Y"}, "second branch should hold Y");
    c.expect(gz.direct_children == std::vector<std::string>{"Z"}, "third branch should hold Z");
    c.expect(gx.coarsened && gy.coarsened && gz.coarsened, "every branch should coarsen");
    c.expect(gx.merged_block.to_string() == "{a3,a4,a5}", "X ignores a3..a5");
    c.expect(gy.merged_block.to_string() == "{a1,a5}", "Y ignores a1 and a5");
    c.expect(gz.merged_block.to_string() == "{a1,a2,a3}", "Z ignores a1..a3");
    if (!c.ok) return c;

    // Coarse conditional tables, addressed by label so frame order is free.
    const auto col = [](const PartitionGroup& g, const char* label) {
        return g.branch_families.at(0).second.entry(g.partition->coarse()->label_index(label));
    };
    c.expect(max_mass_difference(col(gx, "a1"), pm_entry(sx, .9, 0)) <= kPath, "X table at a1");
    c.expect(max_mass_difference(col(gx, "a2"), pm_entry(sx, .7, .3)) <= kPath, "X table at a2");
    c.expect(col(gx, "s1").is_vacuous(kPath), "X table at the merged block");
    c.expect(max_mass_difference(col(gy, "a2"), pm_entry(sy, .7, .3)) <= kPath, "Y table at a2");
    c.expect(max_mass_difference(col(gy, "a3"), pm_entry(sy, .2, .6)) <= kPath, "Y table at a3");
    c.expect(max_mass_difference(col(gy, "a4"), pm_entry(sy, .4, .1)) <= kPath, "Y table at a4");
    c.expect(col(gy, "s2").is_vacuous(kPath), "Y table at the merged block");
    c.expect(max_mass_difference(col(gz, "a4"), pm_entry(sz, .6, .3)) <= kPath, "Z table at a4");
    c.expect(max_mass_difference(col(gz, "a5"), pm_entry(sz, .9, 0)) <= kPath, "Z table at a5");
    c.expect(col(gz, "s3").is_vacuous(kPath), "Z table at the merged block");

    // Per-branch beliefs on the coarse frames.
    const auto& m1 = gx.coarse_marginal;
    const Scope c1 = m1.scope();
    c.close(m1.mass(ConfigSet::from_labels(c1, {"a1", "s1"})), .24, kPath, "branch X {a1,s1}");
    c.close(m1.mass(ConfigSet::full_set(c1)), .76, kPath, "branch X frame");
    c.expect(gy.coarse_marginal.is_vacuous(kPath), "branch Y must stay vacuous");
    const auto& m3 = gz.coarse_marginal;
    const Scope c3 = m3.scope();
    c.close(m3.mass(ConfigSet::from_labels(c3, {"s3"})), .54, kPath, "branch Z {s3}");
    c.close(m3.mass(ConfigSet::from_labels(c3, {"a4", "s3"})), .36, kPath, "branch Z {a4,s3}");
    c.close(m3.mass(ConfigSet::from_labels(c3, {"a5", "s3"})), .06, kPath, "branch Z {a5,s3}");
    c.close(m3.mass(ConfigSet::full_set(c3)), .04, kPath, "branch Z frame");

    // The combined root belief, frozen from an independent joint construction.
    const auto& bel = out.hub_marginal;
    c.close(bel.mass(ConfigSet::from_labels(sa, {"a1", "a3"})), .1296, kPath, "root {a1,a3}");
    c.close(bel.mass(ConfigSet::from_labels(sa, {"a1", "a2", "a3"})), .4104, kPath,
            "root {a1,a2,a3}");
    c.close(bel.mass(ConfigSet::from_labels(sa, {"a1", "a3", "a4"})), .0864, kPath,
            "root {a1,a3,a4}");
    c.close(bel.mass(ConfigSet::from_labels(sa, {"a1", "a2", "a3", "a4"})), .2736, kPath,
            "root {a1,a2,a3,a4}");
    c.close(bel.mass(ConfigSet::from_labels(sa, {"a1", "a3", "a5"})), .0144, kPath,
            "root {a1,a3,a5}");
    c.close(bel.mass(ConfigSet::from_labels(sa, {"a1", "a2", "a3", "a5"})), .0456, kPath,
            "root {a1,a2,a3,a5}");
    c.close(bel.mass(ConfigSet::from_labels(sa, {"a1", "a3", "a4", "a5"})), .0096, kPath,
            "root {a1,a3,a4,a5}");
    c.close(bel.mass(ConfigSet::full_set(sa)), .0304, kPath, "root frame");
    c.expect(elapsed < 100.0,
             "pipeline took " + std::to_string(elapsed) + " ms, budget is 100 ms");

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ms < 100 ms, tol 1e-9", elapsed);
    note = buf;
    return c;
}

// --------------------------------------------------------------------------
// 4. Three independent routes to the root belief of the sensor network —
//    message passing, coarsened branches, and the brute-force joint — agree.
// --------------------------------------------------------------------------
Check agreement_check(const EvidentialNetwork& net) {
    Check c;
    const VarPtr A = net.variable("A");
    const auto part = partition_optimize(net, A).hub_marginal;
    const auto poly = propagate_polytree(net).marginals.at(A->serial());
    const auto oracle = oracle_marginals(net).marginals.at(A->serial());
    c.expect(max_mass_difference(part, poly) <= kPath, "partition vs polytree");
    c.expect(max_mass_difference(poly, oracle) <= kPath, "polytree vs oracle");
    c.expect(max_mass_difference(part, oracle) <= kPath, "partition vs oracle");
    return c;
}

// --------------------------------------------------------------------------
// 5. Property suite.
// --------------------------------------------------------------------------
void check_roundtrips(Check& c, const MassFunction& m, const Scope& s) {
    c.expect(max_mass_difference(from_bel(s, to_bel(m).dense()), m) <= kExact,
             "bel roundtrip drifted");
    c.expect(max_mass_difference(from_pl(s, to_pl(m).dense()), m) <= kExact,
             "pl roundtrip drifted");
    c.expect(max_mass_difference(from_q(s, to_q(m).dense()), m) <= kExact, "q roundtrip drifted");
}

MassFunction informative_mass(Rng& rng, const Scope& s) {
    for (;;) {
        auto m = random_mass(rng, s, 3);
        if (!m.is_vacuous()) return m;
    }
}

Check property_check(std::string& note) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(8161);

    // (a) Transform roundtrips: every focal-set support on frames of one to
    // four elements with fixed rational masses, then a thousand random draws
    // on frames of up to eight elements.
    for (std::size_t n = 1; n <= 4; ++n) {
        Scope s = fresh_frame(rng, "T" + std::to_string(n), n);
        const std::size_t lattice = std::size_t{1} << n;
        for (std::uint64_t pick = 1; pick < (std::uint64_t{1} << lattice); ++pick) {
            MassFunction::FocalMap f;
            double sum = 0.0;
            std::size_t j = 0;
            for (std::size_t mask = 0; mask < lattice; ++mask)
                if (pick & (std::uint64_t{1} << mask)) {
                    const double w = static_cast<double>(++j);
                    f[bits_of(n, mask)] = w;
                    sum += w;
                }
            for (auto& [k, v] : f) v /= sum;
            check_roundtrips(c, MassFunction::from_arithmetic(s, std::move(f)), s);
        }
    }
    for (int t = 0; t < 1000; ++t) {
        Scope s = fresh_frame(rng, "R", 1 + rng.below(8));
        check_roundtrips(c, random_mass(rng, s, 8, t % 2 == 1), s);
    }

    // (b) Commutativity and associativity of both combination rules.
    for (int t = 0; t < 500; ++t) {
        Scope s = fresh_frame(rng, "L", 2 + rng.below(3));
        const auto a = random_mass(rng, s, 5, t % 3 == 0);
        const auto b = random_mass(rng, s, 5);
        const auto d = random_mass(rng, s, 5, t % 4 == 0);
        c.expect(max_mass_difference(conjunctive_combine(a, b), conjunctive_combine(b, a)) <=
                     kExact,
                 "conjunctive combination must commute");
        c.expect(max_mass_difference(disjunctive_combine(a, b), disjunctive_combine(b, a)) <=
                     kExact,
                 "disjunctive combination must commute");
        c.expect(max_mass_difference(conjunctive_combine(conjunctive_combine(a, b), d),
                                     conjunctive_combine(a, conjunctive_combine(b, d))) <= kExact,
                 "conjunctive combination must associate");
        c.expect(max_mass_difference(disjunctive_combine(disjunctive_combine(a, b), d),
                                     disjunctive_combine(a, disjunctive_combine(b, d))) <= kExact,
                 "disjunctive combination must associate");
    }

    // (c) The two routes to the disjunctive extension agree on every parent
    // subset, and extension/inversion are two views of one formula:
    // pl(theta | x) computed backward equals pl(x | theta) computed forward.
    for (int t = 0; t < 500; ++t) {
        const std::size_t pn = 2 + rng.below(3);
        const std::size_t cn = 2 + rng.below(2);
        Scope sp = fresh_frame(rng, "P", pn);
        Scope sc = fresh_frame(rng, "C", cn);
        const auto f = random_family(rng, sp, sc, 4);

        std::vector<MassFunction> ext;
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << pn); ++mask) {
            const Bitset theta = bits_of(pn, mask);
            ext.push_back(drc_extend(f, theta));
            c.expect(max_mass_difference(ext.back(), detail::drc_extend_via_pl(f, theta)) <=
                         kExact,
                     "mass and plausibility routes of the extension disagree");
        }
        const std::uint64_t xmask = 1 + rng.below((std::uint64_t{1} << cn) - 1);
        const ConfigSet x(sc, bits_of(cn, xmask));
        const auto post = gbt(f, x);
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << pn); ++mask)
            c.expect(std::abs(post.pl(bits_of(pn, mask)) - ext[mask - 1].pl(x.bits())) <= kExact,
                     "backward and forward plausibilities disagree");
    }

    // (d) Families with parent elements forced to carry vacuous columns:
    // extending across any set that touches an ignored element yields exact
    // vacuity, and every backward focal set keeps all ignored elements.
    for (int t = 0; t < 200; ++t) {
        const std::size_t pn = 3 + rng.below(3);
        const std::size_t cn = 2 + rng.below(2);
        Scope sp = fresh_frame(rng, "P", pn);
        Scope sc = fresh_frame(rng, "C", cn);
        std::vector<MassFunction> entries;
        for (std::size_t i = 0; i < pn; ++i)
            entries.push_back(rng.chance(0.5) ? MassFunction::vacuous(sc)
                                              : informative_mass(rng, sc));
        const std::size_t vac_at = rng.below(pn);
        std::size_t inf_at = rng.below(pn);
        while (inf_at == vac_at) inf_at = rng.below(pn);
        entries[vac_at] = MassFunction::vacuous(sc);
        entries[inf_at] = informative_mass(rng, sc);
        const ConditionalBeliefFamily f(sp, sc, entries);
        const Bitset ignored = relevance(f).irrelevant.bits();
        c.expect(ignored.any(), "the fixture must ignore at least one element");

        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << pn); ++mask) {
            const Bitset theta = bits_of(pn, mask);
            if (!theta.intersects(ignored)) continue;
            const auto e = drc_extend(f, theta);
            c.expect(e.focal_count() == 1 && e.is_vacuous(kExact),
                     "extension touching an ignored element must be vacuous");
        }
        for (std::uint64_t xmask = 1; xmask < (std::uint64_t{1} << cn); ++xmask) {
            const auto post = gbt(f, ConfigSet(sc, bits_of(cn, xmask)));
            for (const auto& [focal, w] : post.focal()) {
                (void)w;
                c.expect(ignored.is_subset_of(focal),
                         "backward focal sets must keep every ignored element");
            }
        }
    }

    // (e) Whole-network agreement with the brute-force joint: a hundred
    // seeded polytrees, then fifty single-loop skeletons of both shapes,
    // solved by merging the loop away.
    Rng nets(424242);
    const auto worst_against_oracle = [](const EvidentialNetwork& net,
                                         const PropagationResult& res) {
        const auto want = oracle_marginals(net);
        double worst = 0.0;
        for (const auto& v : net.variables())
            worst = std::max(worst, max_mass_difference(res.marginals.at(v->serial()),
                                                        want.marginals.at(v->serial())));
        return worst;
    };
    for (int t = 0; t < 100; ++t) {
        const auto net = random_polytree(nets);
        c.expect(worst_against_oracle(net, propagate_polytree(net)) <= kPath,
                 "a polytree marginal deviates from the oracle");
    }
    for (int t = 0; t < 50; ++t) {
        const auto net = random_single_loop(nets, t % 2 == 0);
        c.expect(worst_against_oracle(net, propagate_merged(merge_loops(net))) <= kPath,
                 "a merged-loop marginal deviates from the oracle");
    }

    const double secs = ms_since(t0) / 1000.0;
    c.expect(secs < 60.0, "suite took " + std::to_string(secs) + " s, budget is 60 s");

    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu assertions in %.1f s < 60 s", c.asserted, secs);
    note = buf;
    return c;
}

// --------------------------------------------------------------------------
// 6. Normalizing the conjunctive combination of normal operands is the
//    classical rule: compare against the independent direct implementation.
// --------------------------------------------------------------------------
Check dempster_check(std::string& note) {
    Check c;
    Rng rng(1912);
    int compared = 0, conflicting = 0, attempts = 0;
    while (compared < 500 && attempts < 5000) {
        ++attempts;
        Scope s = fresh_frame(rng, "D", 2 + rng.below(2));
        const auto a = random_mass(rng, s, 4);
        const auto b = random_mass(rng, s, 4);

        std::optional<MassFunction> ref;
        try {
            ref = dempster_reference(a, b);
        } catch (const ConflictError&) {
            ++conflicting;
            bool direct_threw = false;
            try {
                normalize(conjunctive_combine(a, b));
            } catch (const ConflictError&) {
                direct_threw = true;
            }
            c.expect(direct_threw, "one route rejected total conflict, the other accepted it");
            continue;
        }
        const auto direct = normalize(conjunctive_combine(a, b));
        c.expect(direct.is_normal(), "the normalized combination must be normal");
        c.expect(max_mass_difference(*ref, direct) <= kExact,
                 "normalized combination drifted from the reference");
        ++compared;
    }
    c.expect(compared == 500, "could not assemble 500 comparable pairs");

    char buf[96];
    std::snprintf(buf, sizeof buf, "500 pairs, %d total-conflict draws cross-checked, tol 1e-12",
                  conflicting);
    note = buf;
    return c;
}

} // namespace

int main() {
    std::printf("acceptance: tolerances pinned at 1e-12 (identities) and 1e-9 (pipelines)\n");
    try {
        std::string n1;
        report(1, "family -> ballooned joint -> family roundtrip", roundtrip_check(n1), n1);
        report(2, "two distinct joints share one conditional table", shared_table_check(),
               "tol 1e-12");

        EvidentialNetwork sensor = io::load_network_file(fixture_path("example3_network.json"));
        io::merge_evidence_file(sensor, fixture_path("example3_evidence.json"));
        std::string n3;
        report(3, "coarsened branches reproduce the frozen sensor run", partition_check(sensor, n3),
               n3);
        report(4, "polytree, partition, and oracle paths agree", agreement_check(sensor),
               "tol 1e-9");

        std::string n5;
        report(5, "properties: transforms, laws, duality, relevance, nets", property_check(n5),
               n5);
        std::string n6;
        report(6, "normalized combination matches the classical rule", dempster_check(n6), n6);
    } catch (const Error& e) {
        std::printf("unexpected library error: %s\n", e.what());
        return 99;
    } catch (const std::exception& e) {
        std::printf("unexpected error: %s\n", e.what());
        return 99;
    }
    if (g_failed)
        std::printf("%d of 6 checks FAILED\n", g_failed);
    else
        std::printf("all 6 checks passed\n");
    return g_failed;
}
