#pragma once

// Timeslot simulator: arrivals, policy-driven service, per-session erasure
// channels, and receiver-side decoding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmtlab/cmdp.hpp"
#include "cmtlab/codec.hpp"
#include "cmtlab/error.hpp"
#include "cmtlab/reliability.hpp"
#include "cmtlab/rng.hpp"
#include "cmtlab/threat.hpp"

namespace cmtlab {

enum class CodecMode { Analytic, FullCodec };

inline const char* to_string(CodecMode m) noexcept {
    return m == CodecMode::Analytic ? "analytic" : "full-codec";
}

struct SimConfig {
    ArrivalSpec arrivals;
    std::vector<SessionProfile> sessions;
    ReliabilityParams params;
    ActionCatalog catalog;
    Policy policy;
    std::size_t slots = 100000;
    std::uint64_t seed = 1;
    CodecMode mode = CodecMode::Analytic;
    double d_th = 2.0;  // slots
    std::optional<AttackerSet> attacker;
    Topology topology;               // used to validate the attacker
    std::size_t payload_bits = 64;   // full-codec packet payload
    std::size_t sample_every = 0;    // time-series stride; 0 disables
    std::vector<double> reliability; // per catalog column (analytic); computed when empty
};

struct SlotSample {
    std::size_t slot = 0;
    std::size_t queue = 0;
    std::size_t block = 0;
    bool decoded = false;
};

struct SimStats {
    std::size_t slots = 0;
    double mean_queue = 0.0;        // packets, sampled at decision time
    double mean_arrival = 0.0;      // configured arrival mean, packets per slot
    double empirical_arrival = 0.0; // observed arrivals per slot
    double mean_delay = 0.0;        // mean_queue / mean_arrival, slots
    std::size_t attempted = 0;      // generations sent
    std::size_t decoded = 0;
    std::optional<double> empirical_reliability;
    double d_th = 0.0;
    double violation_prob = 0.0;
    std::vector<std::uint64_t> histogram;  // slot count per queue state (q = k * granularity)
    std::size_t granularity = 1;
    std::vector<std::uint64_t> session_sent;
    std::vector<std::uint64_t> session_erased;  // lost to erasure or lateness
    std::vector<LeakReport> leaks;
    double max_leak_ratio = 0.0;
    std::size_t leaked_full_decodes = 0;
    std::vector<SlotSample> series;
};

/// Fraction of recorded slots with q / mean_arrival >= d_th.
inline double violation_probability(const SimStats& s, double d_th) {
    if (!(s.mean_arrival > 0.0)) {
        throw InvalidParams("violation_probability: mean arrival is zero");
    }
    std::uint64_t total = 0;
    std::uint64_t over = 0;
    for (std::size_t k = 0; k < s.histogram.size(); ++k) {
        total += s.histogram[k];
        const double delay = static_cast<double>(k * s.granularity) / s.mean_arrival;
        if (delay >= d_th) {
            over += s.histogram[k];
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(over) / static_cast<double>(total);
}

/// Coded packets per session for a generation of g: floor(gamma_j * gamma_tau * g)
/// each, with the remainder up to ceil(sum_j gamma_j * gamma_tau * g) on the
/// highest-bandwidth session (lowest index on ties).
inline std::vector<std::size_t> split_packets(std::size_t g, const std::vector<double>& weights,
                                              const std::vector<SessionProfile>& sessions, double gamma_tau) {
    double total = 0.0;
    std::vector<std::size_t> out(weights.size());
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double share = weights[j] * gamma_tau * static_cast<double>(g);
        out[j] = static_cast<std::size_t>(std::floor(share + 1e-9));
        assigned += out[j];
        total += weights[j];
    }
    const auto n = static_cast<std::size_t>(std::ceil(total * gamma_tau * static_cast<double>(g) - 1e-9));
    std::size_t widest = 0;
    for (std::size_t j = 1; j < sessions.size(); ++j) {
        if (sessions[j].bandwidth > sessions[widest].bandwidth) {
            widest = j;
        }
    }
    if (n > assigned) {
        out[widest] += n - assigned;
    }
    return out;
}

inline SimStats run(const SimConfig& cfg) {
    const ActionCatalog& cat = cfg.catalog;
    cfg.policy.validate(cat);
    cfg.arrivals.validate();
    if (cfg.slots == 0) {
        throw InvalidParams("simulate: slot count must be >= 1");
    }
    if (cfg.arrivals.granularity != cat.model.granularity) {
        throw StructuralError("simulate: arrival and model granularity differ");
    }
    if (cfg.arrivals.max_arrival() > cat.model.max_arrival) {
        throw StructuralError("simulate: arrival support exceeds the model's N");
    }
    for (const auto& w : cat.weights) {
        if (w.size() != cfg.sessions.size()) {
            throw StructuralError("simulate: weight vectors do not match the session count");
        }
    }
    if (!cfg.reliability.empty() && cfg.reliability.size() != cat.size()) {
        throw StructuralError("simulate: reliability table does not match the catalog");
    }
    if (cfg.attacker) {
        if (cfg.mode != CodecMode::FullCodec) {
            throw InvalidParams("simulate: leak audit requires full-codec mode");
        }
        if (!validate_attacker(*cfg.attacker, cfg.topology)) {
            throw InvalidParams("simulate: attacker must be nonempty and confined to one session");
        }
        if (cfg.topology.session_count() != cfg.sessions.size()) {
            throw StructuralError("simulate: topology session count differs from profile count");
        }
    }

    std::vector<double> rel = cfg.reliability;
    if (rel.empty() && cfg.mode == CodecMode::Analytic) {
        rel.assign(cat.size(), 0.0);
        for (std::size_t i = 0; i < cat.size(); ++i) {
            const Action& a = cat.actions[i];
            if (a.block > 0 && cfg.policy.prob[i] > 0.0) {
                rel[i] = lp_reliability(static_cast<double>(a.block), cat.weights[static_cast<std::size_t>(a.weight)],
                                        cfg.sessions, cfg.params);
            }
        }
    }

    const std::size_t nl = cfg.sessions.size();
    Rng arrivals(cfg.seed, streams::kSimArrivals);
    Rng actions(cfg.seed, streams::kSimActions);
    Rng channel(cfg.seed, streams::kSimChannel);
    Rng source(cfg.seed, streams::kSimSource);

    SimStats st;
    st.slots = cfg.slots;
    st.mean_arrival = cfg.arrivals.mean;
    st.granularity = cat.model.granularity;
    st.histogram.assign(cat.states(), 0);
    st.session_sent.assign(nl, 0);
    st.session_erased.assign(nl, 0);
    st.d_th = cfg.d_th;

    std::vector<double> cdf(cfg.arrivals.probabilities.size());
    {
        double c = 0.0;
        for (std::size_t n = 0; n < cdf.size(); ++n) {
            c += cfg.arrivals.probabilities[n];
            cdf[n] = c;
        }
    }

    std::size_t q = 0;
    double queue_sum = 0.0;
    double arrival_sum = 0.0;
    std::uint64_t generation = 0;
    for (std::size_t t = 0; t < cfg.slots; ++t) {
        const std::size_t k = q / cat.model.granularity;
        ++st.histogram[k];
        queue_sum += static_cast<double>(q);

        // Draw an action from f(q, .).
        const std::size_t b = cat.state_begin[k];
        const std::size_t e = cat.state_begin[k + 1];
        const double u = actions.uniform01();
        double acc = 0.0;
        std::size_t pick = e;
        std::size_t last = e;
        for (std::size_t i = b; i < e; ++i) {
            if (cfg.policy.prob[i] <= 0.0) {
                continue;
            }
            last = i;
            acc += cfg.policy.prob[i];
            if (u < acc) {
                pick = i;
                break;
            }
        }
        if (pick == e) {
            pick = last;
        }
        const Action& a = cat.actions[pick];

        bool ok = false;
        if (a.block > 0) {
            ++st.attempted;
            const auto& w = cat.weights[static_cast<std::size_t>(a.weight)];
            if (cfg.mode == CodecMode::Analytic) {
                ok = channel.bernoulli(rel[pick]);
            } else {
                const std::size_t g = a.block;
                const bool cap_ok = std::ranges::all_of(w, [&](double x) { return x <= cfg.params.gamma_s + 1e-12; });
                const auto per = split_packets(g, w, cfg.sessions, cfg.params.gamma_tau);
                std::size_t n = 0;
                for (std::size_t c : per) {
                    n += c;
                }
                const std::uint64_t gen_seed = substream_state(cfg.seed, streams::kSimCodecBase + generation);
                SourceBlock blk = SourceBlock::random(generation, g, cfg.payload_bits, source);
                const CodedBlock coded = raptor_encode(blk, CodecParams::defaults(g, gen_seed), n);
                std::vector<std::size_t> assignment;
                std::vector<std::size_t> survivors;
                std::size_t idx = 0;
                for (std::size_t j = 0; j < nl; ++j) {
                    const bool on_time = channel.bernoulli(
                        session_cdf(cfg.sessions[j], w[j] * static_cast<double>(g), cfg.params.deadline,
                                    cfg.params.packet_bits));
                    for (std::size_t c = 0; c < per[j]; ++c, ++idx) {
                        assignment.push_back(j);
                        ++st.session_sent[j];
                        const bool lost = !on_time || channel.bernoulli(cfg.sessions[j].erasure);
                        if (lost) {
                            ++st.session_erased[j];
                        } else {
                            survivors.push_back(idx);
                        }
                    }
                }
                if (cap_ok) {
                    const auto res = ml_decode(coded.select(survivors), g);
                    if (const auto* full = std::get_if<FullDecode>(&res)) {
                        if (!(full->payloads == blk.payloads)) {
                            throw Error("simulate: decoder output differs from the source block");
                        }
                        ok = true;
                    }
                }
                if (cfg.attacker) {
                    LeakReport r = measure_leak(coded, assignment, *cfg.attacker, cfg.topology, cfg.params.gamma_s);
                    st.max_leak_ratio = std::max(st.max_leak_ratio, r.ratio);
                    st.leaked_full_decodes += r.recovered == r.block_size ? 1 : 0;
                    st.leaks.push_back(r);
                }
            }
            ++generation;
            st.decoded += ok ? 1 : 0;
        }

        const double v = arrivals.uniform01();
        std::size_t n = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), v) - cdf.begin());
        n = std::min(n, cdf.size() - 1);
        const std::size_t in = n * cfg.arrivals.granularity;
        arrival_sum += static_cast<double>(in);

        if (cfg.sample_every > 0 && t % cfg.sample_every == 0) {
            st.series.push_back({t, q, a.block, ok});
        }
        q = queue_step(q, a.block, in, cat.model.capacity);
    }

    const auto slots = static_cast<double>(cfg.slots);
    st.mean_queue = queue_sum / slots;
    st.empirical_arrival = arrival_sum / slots;
    st.mean_delay = st.mean_arrival > 0.0 ? st.mean_queue / st.mean_arrival : 0.0;
    if (st.attempted > 0) {
        st.empirical_reliability = static_cast<double>(st.decoded) / static_cast<double>(st.attempted);
    }
    if (st.mean_arrival > 0.0) {
        st.violation_prob = violation_probability(st, cfg.d_th);
    }
    return st;
}

/// Per-generation leak reports of a full-codec run; empty without an attacker.
inline std::vector<LeakReport> leak_audit(const SimConfig& cfg) {
    if (!cfg.attacker) {
        return {};
    }
    return run(cfg).leaks;
}

}  // namespace cmtlab
