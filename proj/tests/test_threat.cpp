#include <gtest/gtest.h>

#include <numeric>

#include "cmtlab/threat.hpp"
#include "oracles.hpp"

using namespace cmtlab;

namespace {

Topology random_topology(Rng& rng, std::size_t max_sessions, std::size_t max_nodes) {
    Topology t;
    const std::size_t n = 1 + rng.uniform_below(max_sessions);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> s(1 + rng.uniform_below(max_nodes));
        for (double& p : s) {
            p = rng.uniform01();
        }
        t.sessions.push_back(s);
    }
    return t;
}

std::vector<std::size_t> all_sessions(const Topology& t) {
    std::vector<std::size_t> v(t.session_count());
    std::iota(v.begin(), v.end(), 0);
    return v;
}

AttackerSet on(std::initializer_list<NodeRef> nodes) { return AttackerSet{std::set<NodeRef>(nodes)}; }

}  // namespace

TEST(Intrusion, Examples) {
    EXPECT_EQ(intrusion_probability(Topology{{{0.0, 0.0}, {0.0}}}), 0.0);
    EXPECT_DOUBLE_EQ(intrusion_probability(Topology{{{0.37}}}), 0.37);
    EXPECT_DOUBLE_EQ(intrusion_probability(Topology{{{0.5}, {0.5}}}), 0.25);
}

TEST(Intrusion, RejectsBadTopology) {
    EXPECT_THROW(intrusion_probability(Topology{}), InvalidParams);
    EXPECT_THROW(intrusion_probability(Topology{{{1.5}}}), InvalidParams);
}

TEST(Intrusion, SessionWithoutNodesIsNeverAttacked) {
    Topology t;
    t.sessions = {{0.5}, {}};
    EXPECT_EQ(intrusion_probability(t), 0.0);
}

TEST(Intrusion, MatchesEnumeration) {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
        const auto topo = random_topology(rng, 4, 3);
        if (topo.node_count() > 12) {
            continue;
        }
        EXPECT_NEAR(intrusion_probability(topo), oracle::enumerate_intrusion(topo.sessions), 1e-12);
    }
}

TEST(Intrusion, MonotoneInEachNodeProbability) {
    Rng rng(32);
    for (int t = 0; t < 200; ++t) {
        auto topo = random_topology(rng, 4, 4);
        const double before = intrusion_probability(topo);
        const auto j = rng.uniform_below(topo.session_count());
        const auto i = rng.uniform_below(topo.sessions[j].size());
        auto& p = topo.sessions[j][i];
        p = p + (1.0 - p) * rng.uniform01();
        EXPECT_GE(intrusion_probability(topo), before - 1e-15);
    }
}

TEST(Intrusion, FirstTopologyWithinThreshold) {
    const std::vector<Topology> cands{Topology{{{0.9}}}, Topology{{{0.5}, {0.5}}}, Topology{{{0.5}, {0.5}, {0.5}}}};
    EXPECT_EQ(first_topology_within(cands, 0.3), std::optional<std::size_t>(1));
    EXPECT_EQ(first_topology_within(cands, 0.13), std::optional<std::size_t>(2));
    EXPECT_EQ(first_topology_within(cands, 0.1), std::nullopt);
}

TEST(AttackedCount, Examples) {
    const auto d = attacked_count_distribution(Topology{{{0.5}, {0.5}}});
    ASSERT_EQ(d.size(), 3U);
    EXPECT_DOUBLE_EQ(d[0], 0.25);
    EXPECT_DOUBLE_EQ(d[1], 0.5);
    EXPECT_DOUBLE_EQ(d[2], 0.25);
    const auto z = attacked_count_distribution(Topology{{{0.0, 0.0}, {0.0}}});
    EXPECT_EQ(z[0], 1.0);
}

TEST(AttackedCount, MatchesEnumerationAndSumsToOne) {
    Rng rng(33);
    for (int t = 0; t < 200; ++t) {
        const auto topo = random_topology(rng, 4, 4);
        const auto d = attacked_count_distribution(topo);
        EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-12);
        if (topo.node_count() <= 12) {
            const auto ref = oracle::enumerate_counts(topo.sessions);
            ASSERT_EQ(d.size(), ref.size());
            for (std::size_t m = 0; m < d.size(); ++m) {
                EXPECT_NEAR(d[m], ref[m], 1e-12);
            }
        }
    }
}

TEST(AttackedCount, MatchesNestedSumForm) {
    Rng rng(34);
    for (int t = 0; t < 100; ++t) {
        const std::size_t L = 1 + rng.uniform_below(4);
        std::vector<int> n;
        std::vector<double> p;
        Topology topo;
        for (std::size_t j = 0; j < L; ++j) {
            n.push_back(1 + static_cast<int>(rng.uniform_below(5)));
            p.push_back(rng.uniform01());
            topo.sessions.emplace_back(static_cast<std::size_t>(n.back()), p.back());
        }
        const auto d = attacked_count_distribution(topo);
        for (std::size_t m = 0; m < d.size(); ++m) {
            EXPECT_NEAR(d[m], oracle::nested_sum(n, p, static_cast<int>(m)), 1e-12);
        }
    }
}

TEST(SubsetAttack, Examples) {
    const Topology t{{{0.2, 0.3}, {0.4}}};
    const auto all = all_sessions(t);
    EXPECT_NEAR(subset_attack_probability(t, all, 0), 0.8 * 0.7 * 0.6, 1e-15);
    const Topology half{{{0.5}, {0.5}}};
    const std::vector<std::size_t> first{0};
    EXPECT_DOUBLE_EQ(subset_attack_probability(half, first, 1), 0.25);
}

TEST(SubsetAttack, RejectsBadArguments) {
    const Topology t{{{0.5}, {0.5}}};
    const std::vector<std::size_t> none;
    const std::vector<std::size_t> first{0};
    const std::vector<std::size_t> bogus{4};
    EXPECT_THROW(subset_attack_probability(t, none, 0), InvalidParams);
    EXPECT_THROW(subset_attack_probability(t, first, 2), InvalidParams);
    EXPECT_THROW(subset_attack_probability(t, bogus, 0), InvalidParams);
}

TEST(SubsetAttack, JointMatchesEnumeration) {
    // Joint event: exactly M compromised, all inside the subset.
    Rng rng(35);
    for (int t = 0; t < 100; ++t) {
        const auto topo = random_topology(rng, 3, 2);
        std::vector<std::size_t> subset;
        for (std::size_t j = 0; j < topo.session_count(); ++j) {
            if (rng.bernoulli(0.5)) {
                subset.push_back(j);
            }
        }
        if (subset.empty()) {
            subset.push_back(0);
        }
        std::vector<double> flat;
        std::vector<bool> inside;
        for (std::size_t j = 0; j < topo.session_count(); ++j) {
            const bool in = std::find(subset.begin(), subset.end(), j) != subset.end();
            for (double p : topo.sessions[j]) {
                flat.push_back(p);
                inside.push_back(in);
            }
        }
        std::vector<double> ref(flat.size() + 1, 0.0);
        for (std::uint64_t mask = 0; mask < (1ULL << flat.size()); ++mask) {
            double pr = 1.0;
            int m = 0;
            bool ok = true;
            for (std::size_t i = 0; i < flat.size(); ++i) {
                const bool hit = (mask >> i) & 1U;
                pr *= hit ? flat[i] : 1.0 - flat[i];
                m += hit ? 1 : 0;
                ok = ok && (!hit || inside[i]);
            }
            if (ok) {
                ref[static_cast<std::size_t>(m)] += pr;
            }
        }
        std::size_t in_nodes = 0;
        for (std::size_t j : subset) {
            in_nodes += topo.sessions[j].size();
        }
        for (std::size_t m = 0; m <= in_nodes; ++m) {
            EXPECT_NEAR(subset_attack_probability(topo, subset, m), ref[m], 1e-12);
        }
    }
}

TEST(SubsetAttack, DisjointCoverRecoversMarginal) {
    // Splitting M across a disjoint cover: convolving the subset count laws is
    // P[M]; summing products of the joint terms carries an extra P[0] factor.
    Rng rng(36);
    for (int t = 0; t < 100; ++t) {
        auto topo = random_topology(rng, 4, 2);
        if (topo.session_count() < 2) {
            topo.sessions.push_back({0.3});
        }
        std::vector<std::size_t> a;
        std::vector<std::size_t> b;
        for (std::size_t j = 0; j < topo.session_count(); ++j) {
            (j % 2 == 0 ? a : b).push_back(j);
        }
        const auto total = oracle::enumerate_counts(topo.sessions);
        const auto da = subset_count_distribution(topo, a);
        const auto db = subset_count_distribution(topo, b);
        for (std::size_t m = 0; m < total.size(); ++m) {
            double conv = 0.0;
            double joint = 0.0;
            for (std::size_t ma = 0; ma < da.size(); ++ma) {
                if (m >= ma && m - ma < db.size()) {
                    conv += da[ma] * db[m - ma];
                    joint += subset_attack_probability(topo, a, ma) * subset_attack_probability(topo, b, m - ma);
                }
            }
            EXPECT_NEAR(conv, total[m], 1e-12);
            EXPECT_NEAR(joint, total[m] * total[0], 1e-12);
        }
    }
}

TEST(SubsetAttack, ConditionalAndUndefinedCase) {
    const Topology t{{{0.5}, {0.5}}};
    const std::vector<std::size_t> first{0};
    EXPECT_DOUBLE_EQ(*conditional_subset_probability(t, first, 1), 0.5);
    const Topology certain{{{1.0}, {0.0}}};
    const std::vector<std::size_t> second{1};
    EXPECT_EQ(conditional_subset_probability(certain, second, 0), std::nullopt);
}

TEST(ValidateAttacker, Examples) {
    const Topology t{{{0.1, 0.1}, {0.1, 0.1, 0.1}}};
    EXPECT_FALSE(validate_attacker(on({{0, 0}, {1, 0}}), t));
    EXPECT_TRUE(validate_attacker(on({{1, 0}, {1, 2}}), t));
    EXPECT_FALSE(validate_attacker(AttackerSet{}, t));
    EXPECT_FALSE(validate_attacker(on({{1, 3}}), t));
    EXPECT_FALSE(validate_attacker(on({{2, 0}}), t));
}

TEST(MeasureLeak, AttackerOnIdleSession) {
    const Topology t{{{0.1}, {0.1}}};
    Rng rng(1);
    const auto blk = SourceBlock::random(0, 8, 64, rng);
    const auto coded = raptor_encode(blk, CodecParams::defaults(8, 1), 12);
    const std::vector<std::size_t> assign(12, 0);
    const auto r = measure_leak(coded, assign, on({{1, 0}}), t, 0.8);
    EXPECT_EQ(r.intercepted, 0U);
    EXPECT_EQ(r.recovered, 0U);
    EXPECT_TRUE(r.secure);
}

TEST(MeasureLeak, IdentityRowsOnOneSessionAreInsecure) {
    const Topology t{{{0.1}, {0.1}}};
    const CodedBlock cb{0, Gf2Matrix::identity(10), Gf2Matrix(10, 64)};
    const std::vector<std::size_t> assign(10, 1);
    const auto r = measure_leak(cb, assign, on({{1, 0}}), t, 0.8);
    EXPECT_EQ(r.intercepted, 10U);
    EXPECT_EQ(r.recovered, 10U);
    EXPECT_DOUBLE_EQ(r.ratio, 1.0);
    EXPECT_FALSE(r.secure);
}

TEST(MeasureLeak, HalfShareOfDenseRowsRevealsNothing) {
    const Topology t{{{0.1}, {0.1}}};
    Rng rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        Gf2Matrix gen(50, 50);
        for (std::size_t r = 0; r < 50; ++r) {
            for (std::size_t c = 0; c < 50; ++c) {
                gen.set(r, c, rng.bernoulli(0.5));
            }
        }
        std::vector<std::size_t> assign(50);
        for (std::size_t k = 0; k < 50; ++k) {
            assign[k] = k < 25 ? 0 : 1;
        }
        const auto r = measure_leak(CodedBlock{0, gen, Gf2Matrix(50, 8)}, assign, on({{0, 0}}), t, 0.8);
        ASSERT_EQ(r.intercepted, 25U);
        ASSERT_EQ(r.recovered, 0U);
    }
}

TEST(MeasureLeak, RaptorShareBelowBlockNeverFullyDecodes) {
    const Topology t{{{0.1}, {0.1}, {0.1}}};
    Rng rng(38);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto blk = SourceBlock::random(seed, 40, 64, rng);
        const auto coded = raptor_encode(blk, CodecParams::defaults(40, seed), 96);
        std::vector<std::size_t> assign(96);
        for (std::size_t k = 0; k < 96; ++k) {
            assign[k] = k % 3;
        }
        const auto r = measure_leak(coded, assign, on({{seed % 3, 0}}), t, 0.8);
        ASSERT_EQ(r.intercepted, 32U);
        ASSERT_LT(r.recovered, 40U);
        ASSERT_LE(r.ratio, 1.0);
        ASSERT_EQ(r.secure, r.ratio <= 0.8);
    }
}

TEST(MeasureLeak, RejectsCollusionAndLengthMismatch) {
    const Topology t{{{0.1}, {0.1}}};
    const CodedBlock cb{0, Gf2Matrix::identity(4), Gf2Matrix(4, 8)};
    const std::vector<std::size_t> assign(4, 0);
    EXPECT_THROW(measure_leak(cb, assign, on({{0, 0}, {1, 0}}), t, 0.8), InvalidParams);
    const std::vector<std::size_t> shortv(3, 0);
    EXPECT_THROW(measure_leak(cb, shortv, on({{0, 0}}), t, 0.8), StructuralError);
}
