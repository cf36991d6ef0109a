#include <gtest/gtest.h>

#include <cmath>

#include "cmtlab/scenario.hpp"
#include "cmtlab/slot_sim.hpp"
#include "toy_cmdp.hpp"

using namespace cmtlab;

namespace {

std::vector<SessionProfile> clean_sessions() {
    return {{0.001, 1e9, 1.0, 0.002, 0.0}, {0.001, 1e9, 1.0, 0.002, 0.0}, {0.001, 1e9, 1.0, 0.002, 0.0}};
}

// Arrivals of exactly g packets every slot and a policy that serves g
// whenever q >= g, so nearly every slot carries one generation of size g.
SimConfig steady(std::size_t g, std::vector<std::vector<double>> weights, std::vector<SessionProfile> sessions,
                 ReliabilityParams params, double cap) {
    SimConfig cfg;
    const std::size_t gran = 25;
    std::vector<double> probs(g / gran + 1, 0.0);
    probs.back() = 1.0;
    cfg.arrivals = ArrivalSpec::from_probabilities(probs, gran);
    cfg.catalog = ActionCatalog::build(QueueModel{300, 100, gran, 100}, std::move(weights), cap);
    cfg.policy.prob.assign(cfg.catalog.size(), 0.0);
    for (std::size_t k = 0; k < cfg.catalog.states(); ++k) {
        std::size_t best = SIZE_MAX;
        for (std::size_t i = cfg.catalog.state_begin[k]; i < cfg.catalog.state_begin[k + 1]; ++i) {
            const auto& a = cfg.catalog.actions[i];
            if (!a.allowed) {
                continue;
            }
            // Largest admissible block not above g, first weight.
            if (a.block <= g && (best == SIZE_MAX || a.block > cfg.catalog.actions[best].block)) {
                best = i;
            }
        }
        if (best == SIZE_MAX) {
            for (std::size_t i = cfg.catalog.state_begin[k]; i < cfg.catalog.state_begin[k + 1]; ++i) {
                if (cfg.catalog.actions[i].allowed) {
                    best = i;
                    break;
                }
            }
        }
        cfg.policy.prob[best] = 1.0;
    }
    cfg.sessions = std::move(sessions);
    cfg.params = params;
    return cfg;
}

SimConfig from_solution(const CmdpSpec& spec, const CmdpLp& m, const SolvedPolicy& sp, std::size_t slots,
                        std::uint64_t seed) {
    SimConfig cfg;
    cfg.arrivals = spec.arrivals;
    cfg.sessions = spec.sessions;
    cfg.params = spec.params;
    cfg.catalog = m.catalog;
    cfg.policy = sp.policy;
    cfg.slots = slots;
    cfg.seed = seed;
    cfg.reliability = m.reliability;
    return cfg;
}

}  // namespace

TEST(SlotSim, NoArrivalsMeansEmptyQueue) {
    auto cfg = steady(25, {{0.8, 0.8, 0.8}}, clean_sessions(), {}, 0.8);
    cfg.arrivals = ArrivalSpec::from_probabilities({1.0, 0.0}, 25);
    cfg.slots = 1000;
    const auto st = run(cfg);
    EXPECT_EQ(st.mean_queue, 0.0);
    EXPECT_EQ(st.attempted, 0U);
    EXPECT_FALSE(st.empirical_reliability.has_value());
    EXPECT_THROW(violation_probability(st, 1.0), InvalidParams);
}

TEST(SlotSim, SameSeedSameStats) {
    const auto spec = preset("e45").cmdp_spec();
    auto cfg = steady(50, {{0.8, 0.8, 0.8}}, spec.sessions, spec.params, 0.8);
    cfg.arrivals = spec.arrivals;
    cfg.slots = 20000;
    cfg.seed = 99;
    cfg.sample_every = 100;
    const auto a = run(cfg);
    const auto b = run(cfg);
    EXPECT_EQ(a.histogram, b.histogram);
    EXPECT_EQ(a.decoded, b.decoded);
    EXPECT_EQ(a.mean_queue, b.mean_queue);
    EXPECT_EQ(a.series.size(), 200U);
    cfg.seed = 100;
    EXPECT_NE(run(cfg).histogram, a.histogram);
}

TEST(SlotSim, LittlesLawBookkeeping) {
    const auto spec = preset("e45").cmdp_spec();
    auto cfg = steady(50, {{0.8, 0.8, 0.8}}, spec.sessions, spec.params, 0.8);
    cfg.arrivals = spec.arrivals;
    cfg.slots = 5000;
    const auto st = run(cfg);
    EXPECT_NEAR(st.mean_delay * st.mean_arrival, st.mean_queue, 1e-9);
    ASSERT_TRUE(st.empirical_reliability.has_value());
    EXPECT_GE(*st.empirical_reliability, 0.0);
    EXPECT_LE(*st.empirical_reliability, 1.0);
}

TEST(SlotSim, LosslessChannelsDecodeAlmostAlways) {
    ReliabilityParams p;
    auto cfg = steady(100, {{0.8, 0.8, 0.8}}, clean_sessions(), p, 0.8);
    cfg.mode = CodecMode::FullCodec;
    cfg.slots = 10000;
    const auto st = run(cfg);
    EXPECT_GE(st.attempted, 9999U);
    EXPECT_GE(*st.empirical_reliability, 0.99);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(st.session_erased[j], 0U);
    }
}

TEST(SlotSim, AnalyticAndFullCodecAgreeAtMatchedParameters) {
    // gamma_d = 1 and gamma_tau = 1.2 with weights 0.5: the indicator needs two
    // on-time sessions, which is exactly when 120 coded packets arrive.
    auto base = preset("e45");
    for (auto& s : base.sessions) {
        s.erasure = 0.0;
    }
    ReliabilityParams p;
    p.gamma_d = 1.0;
    p.gamma_tau = 1.2;
    auto cfg = steady(100, {{0.5, 0.5, 0.5}}, base.sessions, p, 0.8);
    cfg.slots = 10000;
    cfg.seed = 5;
    const auto analytic = run(cfg);
    cfg.mode = CodecMode::FullCodec;
    const auto full = run(cfg);
    const double pa = *analytic.empirical_reliability;
    const double pf = *full.empirical_reliability;
    const double se = std::sqrt(pa * (1 - pa) / static_cast<double>(analytic.attempted) +
                                pf * (1 - pf) / static_cast<double>(full.attempted));
    EXPECT_LE(std::abs(pa - pf), 3.0 * se + 1e-12) << "analytic " << pa << " full " << pf;
    EXPECT_GT(pa, 0.5);
    EXPECT_LT(pa, 0.999);
}

TEST(SlotSim, ErasureCountsTrackConfiguredRates) {
    auto sessions = clean_sessions();
    sessions[0].erasure = 0.1;
    sessions[1].erasure = 0.3;
    auto cfg = steady(100, {{0.8, 0.8, 0.8}}, sessions, {}, 0.8);
    cfg.mode = CodecMode::FullCodec;
    cfg.slots = 2000;
    const auto st = run(cfg);
    for (std::size_t j = 0; j < 3; ++j) {
        const double n = static_cast<double>(st.session_sent[j]);
        const double e = sessions[j].erasure;
        EXPECT_NEAR(static_cast<double>(st.session_erased[j]) / n, e, 4.0 * std::sqrt(e * (1 - e) / n) + 1e-12);
    }
}

TEST(SplitPackets, FloorsPlusRemainderOnWidestSession) {
    const auto s = preset("e45").sessions;
    const auto a = split_packets(100, {0.8, 0.8, 0.8}, s, 1.05);
    EXPECT_EQ(a, (std::vector<std::size_t>{84, 84, 84}));
    const auto b = split_packets(25, {0.35, 0.35, 0.35}, s, 1.05);
    // 9.1875 each -> 9, total ceil(27.5625) = 28, remainder to the 500 Mbit/s session.
    EXPECT_EQ(b, (std::vector<std::size_t>{10, 9, 9}));
}

TEST(ViolationProbability, EdgeThresholds) {
    const auto spec = preset("e45").cmdp_spec();
    auto cfg = steady(50, {{0.8, 0.8, 0.8}}, spec.sessions, spec.params, 0.8);
    cfg.arrivals = spec.arrivals;
    cfg.slots = 5000;
    const auto st = run(cfg);
    EXPECT_EQ(violation_probability(st, 0.0), 1.0);
    EXPECT_EQ(violation_probability(st, 1e9), 0.0);
}

TEST(ViolationProbability, MatchesStationaryTail) {
    // Z = 2, N = 1, B = 1 chain with pi = (0.16, 0.48, 0.36); mean arrival 0.6,
    // so d_th = 1 / 0.6 selects q >= 1. The kernel's second eigenvalue is 0.5,
    // which triples the variance of a slot average.
    SimConfig cfg;
    cfg.arrivals = ArrivalSpec::from_probabilities({0.4, 0.6}, 1);
    cfg.catalog = ActionCatalog::build(QueueModel{2, 1, 1, 1}, {{0.8, 0.4}}, 0.8);
    cfg.policy.prob = {1.0, 0.0, 0.5, 0.5, 0.0, 1.0};
    cfg.sessions = {{0.006, 2e6, 0.97, 0.002, 0.0}, {0.008, 3e6, 0.95, 0.002, 0.0}};
    cfg.slots = 100000;
    cfg.d_th = 1.0 / 0.6;
    const auto st = run(cfg);
    const double p = 0.84;
    const double band = 3.0 * std::sqrt(3.0 * p * (1 - p) / static_cast<double>(cfg.slots));
    EXPECT_NEAR(st.violation_prob, p, band);
    EXPECT_NEAR(static_cast<double>(st.histogram[0]) / 1e5, 0.16, 3.0 * std::sqrt(3.0 * 0.16 * 0.84 / 1e5));
}

TEST(SlotSim, ToyMeanDelayMatchesLp) {
    Rng rng(71);
    int checked = 0;
    for (int t = 0; t < 5; ++t) {
        const auto spec = toy::make(rng);
        const auto base = assemble_lp(spec);
        const auto m = toy::with_threshold(base, toy::interior_threshold(base, 0.5));
        const auto sp = solve_cmdp(m, &spec.params);
        ASSERT_TRUE(sp.feasible());
        if (sp.objective < 0.05) {
            continue;
        }
        const auto st = run(from_solution(spec, m, sp, 100000, 3 + static_cast<std::uint64_t>(t)));
        EXPECT_NEAR(st.mean_delay, sp.objective, 0.02 * sp.objective);
        ++checked;
    }
    EXPECT_GE(checked, 3);
}

TEST(SlotSim, HistogramConvergesToLpStationaryLaw) {
    auto spec = preset("e45").cmdp_spec();
    spec.r_th = 0.999;
    const auto m = assemble_lp(spec);
    const auto sp = solve_cmdp(m, &spec.params);
    ASSERT_TRUE(sp.feasible());
    const auto st = run(from_solution(spec, m, sp, 100000, 11));
    double tv = 0.0;
    for (std::size_t k = 0; k < st.histogram.size(); ++k) {
        tv += std::abs(static_cast<double>(st.histogram[k]) / 1e5 - sp.states[k].pi);
    }
    EXPECT_LE(0.5 * tv, 0.02);
    EXPECT_NEAR(st.mean_delay, sp.objective, 0.05 * sp.objective);
}

TEST(LeakAudit, CappedShareNeverFullyDecodes) {
    const auto spec = preset("e45").cmdp_spec();
    auto cfg = steady(100, {{0.8, 0.8, 0.8}}, spec.sessions, spec.params, 0.8);
    cfg.mode = CodecMode::FullCodec;
    cfg.slots = 10000;
    cfg.topology = Topology{{{0.1}, {0.1}, {0.1}}};
    cfg.attacker = AttackerSet{{NodeRef{1, 0}}};
    const auto st = run(cfg);
    EXPECT_EQ(st.leaks.size(), st.attempted);
    EXPECT_EQ(st.leaked_full_decodes, 0U);
    EXPECT_LT(st.max_leak_ratio, 1.0);
    for (const auto& r : st.leaks) {
        ASSERT_EQ(r.intercepted, 84U);
        ASSERT_LT(r.recovered, 100U);
    }
}

TEST(LeakAudit, OversizedShareIsFlagged) {
    ReliabilityParams p;
    auto cfg = steady(100, {{1.0, 0.5}}, {clean_sessions()[0], clean_sessions()[1]}, p, 1.0);
    cfg.mode = CodecMode::FullCodec;
    cfg.slots = 200;
    cfg.topology = Topology{{{0.1}, {0.1}}};
    cfg.attacker = AttackerSet{{NodeRef{0, 0}}};
    const auto leaks = leak_audit(cfg);
    ASSERT_FALSE(leaks.empty());
    std::size_t insecure = 0;
    for (const auto& r : leaks) {
        insecure += r.secure ? 0 : 1;
    }
    EXPECT_GT(insecure, leaks.size() * 9 / 10);
}

TEST(LeakAudit, NoAttackerNoReports) {
    auto cfg = steady(100, {{0.8, 0.8, 0.8}}, clean_sessions(), {}, 0.8);
    cfg.mode = CodecMode::FullCodec;
    cfg.slots = 10;
    EXPECT_TRUE(leak_audit(cfg).empty());
}

TEST(SlotSim, RejectsBadConfigurations) {
    auto cfg = steady(100, {{0.8, 0.8, 0.8}}, clean_sessions(), {}, 0.8);
    cfg.slots = 10;
    auto bad_policy = cfg;
    bad_policy.policy.prob.pop_back();
    EXPECT_THROW(run(bad_policy), StructuralError);
    auto two = cfg;
    two.sessions.pop_back();
    EXPECT_THROW(run(two), StructuralError);
    auto analytic_attack = cfg;
    analytic_attack.topology = Topology{{{0.1}, {0.1}, {0.1}}};
    analytic_attack.attacker = AttackerSet{{NodeRef{0, 0}}};
    EXPECT_THROW(run(analytic_attack), InvalidParams);
    auto collude = analytic_attack;
    collude.mode = CodecMode::FullCodec;
    collude.attacker = AttackerSet{{NodeRef{0, 0}, NodeRef{1, 0}}};
    EXPECT_THROW(run(collude), InvalidParams);
    auto zero = cfg;
    zero.slots = 0;
    EXPECT_THROW(run(zero), InvalidParams);
}
