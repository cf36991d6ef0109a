#pragma once

// Latency-reliability-security function over parallel sessions.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cmtlab/error.hpp"

namespace cmtlab {

struct SessionProfile {
    double propagation_delay = 0.0;  // t_p, seconds
    double bandwidth = 1.0;          // W, bit/s
    double ceiling = 1.0;            // asymptotic delivery probability
    double sigma = 0.002;            // seconds
    double erasure = 0.0;            // per-packet loss probability

    void validate(const std::string& where = "session") const {
        if (!(propagation_delay >= 0.0) || !std::isfinite(propagation_delay)) {
            throw InvalidParams(where + ".t_p must be finite and >= 0");
        }
        if (!(bandwidth > 0.0)) {
            throw InvalidParams(where + ".bandwidth must be > 0");
        }
        if (!(ceiling >= 0.0 && ceiling <= 1.0)) {
            throw InvalidParams(where + ".ceiling must lie in [0, 1]");
        }
        if (!(sigma > 0.0)) {
            throw InvalidParams(where + ".sigma must be > 0");
        }
        if (!(erasure >= 0.0 && erasure <= 1.0)) {
            throw InvalidParams(where + ".erasure must lie in [0, 1]");
        }
    }
};

struct ReliabilityParams {
    double gamma_d = 0.7;
    double gamma_s = 0.8;
    double gamma_tau = 1.05;
    double packet_bits = 12000.0;  // phi
    double deadline = 0.020;       // T, seconds (one slot)
    double grid_rate = 1000.0;     // weight grid step is 1 / (grid_rate * deadline)

    void validate(std::size_t session_count) const {
        if (!(gamma_s > 0.0 && gamma_s <= 1.0)) {
            throw InvalidParams("params.gamma_s must lie in (0, 1]");
        }
        if (!(gamma_d > 0.0) || gamma_d > static_cast<double>(session_count) * gamma_s + 1e-12) {
            throw InvalidParams("params.gamma_d must lie in (0, N_L * gamma_s]");
        }
        if (!(gamma_tau > 0.0)) {
            throw InvalidParams("params.gamma_tau must be > 0");
        }
        if (!(packet_bits > 0.0)) {
            throw InvalidParams("params.packet_bits must be > 0");
        }
        if (!(deadline > 0.0) || !std::isfinite(deadline)) {
            throw InvalidParams("params.deadline must be finite and > 0");
        }
        grid_levels();
    }

    /// K such that weights live on {1/K, 2/K, ..., 1}.
    std::size_t grid_levels() const {
        const double k = grid_rate * deadline;
        const double r = std::round(k);
        if (!(r >= 1.0) || std::abs(k - r) > 1e-9 * std::max(1.0, k)) {
            throw InvalidParams("params: grid_rate * deadline = " + std::to_string(k) +
                                " must be a positive integer");
        }
        return static_cast<std::size_t>(r);
    }
};

/// F_j(T): ceiling * Phi((T - mu) / sigma) for T >= t_p, else 0, with
/// mu = t_p + payload_packets * packet_bits / W.
inline double session_cdf(const SessionProfile& s, double payload_packets, double t, double packet_bits) {
    if (t < s.propagation_delay) {
        return 0.0;
    }
    const double mu = s.propagation_delay + payload_packets * packet_bits / s.bandwidth;
    const double z = (t - mu) / s.sigma;
    return s.ceiling * 0.5 * std::erfc(-z / std::sqrt(2.0));
}

inline constexpr std::size_t kMaxSessions = 16;

/// All 2^N_L delivery patterns; bit j of entry i says whether session j arrived.
inline std::vector<std::uint32_t> success_patterns(std::size_t n) {
    if (n < 1 || n > kMaxSessions) {
        throw InvalidParams("success_patterns: session count " + std::to_string(n) + " outside [1, " +
                            std::to_string(kMaxSessions) + "]");
    }
    std::vector<std::uint32_t> out(std::size_t{1} << n);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint32_t>(i);
    }
    return out;
}

/// 1 iff the sessions in `pattern` carry enough surviving weight to decode and
/// no session exceeds the security cap. Surviving weight of session j is
/// gamma_j * gamma_tau * (1 - erasure_j); an empty `erasure` means no loss.
inline int pattern_indicator(std::uint32_t pattern, std::span<const double> weights, const ReliabilityParams& p,
                             std::span<const double> erasure = {}) {
    if (!erasure.empty() && erasure.size() != weights.size()) {
        throw StructuralError("pattern_indicator: erasure and weight lengths differ");
    }
    double delivered = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] > p.gamma_s + 1e-12) {
            return 0;
        }
        if ((pattern >> j) & 1U) {
            const double keep = erasure.empty() ? 1.0 : 1.0 - erasure[j];
            delivered += weights[j] * p.gamma_tau * keep;
        }
    }
    return delivered >= p.gamma_d - 1e-12 ? 1 : 0;
}

/// Probability that a generation of g packets split by `weights` is
/// decodable and secure by time t.
inline double f_scler(double t, std::span<const double> weights, double g, std::span<const SessionProfile> sessions,
                      const ReliabilityParams& p) {
    if (weights.size() != sessions.size()) {
        throw StructuralError("f_scler: " + std::to_string(weights.size()) + " weights for " +
                              std::to_string(sessions.size()) + " sessions");
    }
    if (!(g >= 1.0)) {
        throw InvalidParams("f_scler: block length must be >= 1");
    }
    const std::size_t n = sessions.size();
    std::vector<double> f(n);
    std::vector<double> eps(n);
    for (std::size_t j = 0; j < n; ++j) {
        f[j] = session_cdf(sessions[j], weights[j] * g, t, p.packet_bits);
        eps[j] = sessions[j].erasure;
    }
    double total = 0.0;
    for (std::uint32_t c : success_patterns(n)) {
        if (pattern_indicator(c, weights, p, eps) == 0) {
            continue;
        }
        double prob = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            prob *= ((c >> j) & 1U) ? f[j] : 1.0 - f[j];
        }
        total += prob;
    }
    return total;
}

/// Per-action reliability coefficient: f_scler at the slot deadline.
inline double lp_reliability(double g, std::span<const double> weights, std::span<const SessionProfile> sessions,
                             const ReliabilityParams& p) {
    return f_scler(p.deadline, weights, g, sessions, p);
}

/// 1 - prod_j (1 - ceiling_j): the supremum of f_scler.
inline double reliability_ceiling(std::span<const SessionProfile> sessions) {
    double miss = 1.0;
    for (const auto& s : sessions) {
        miss *= 1.0 - s.ceiling;
    }
    return 1.0 - miss;
}

/// Weight vectors on the grid {k / K}, each entry <= gamma_s, total in
/// [1, N_L) (total = 1 allowed when N_L = 1). With `full == false` only the
/// componentwise maximal vectors are returned.
inline std::vector<std::vector<double>> weight_grid(std::size_t n, const ReliabilityParams& p, bool full = false) {
    if (n < 1 || n > kMaxSessions) {
        throw InvalidParams("weight_grid: session count out of range");
    }
    const std::size_t k_levels = p.grid_levels();
    const auto cap = static_cast<std::size_t>(std::floor(p.gamma_s * static_cast<double>(k_levels) + 1e-9));
    if (cap == 0) {
        throw InvalidParams("weight_grid: no grid level at or below gamma_s");
    }
    const auto admissible = [&](const std::vector<std::size_t>& lv) {
        std::size_t s = 0;
        for (std::size_t v : lv) {
            s += v;
        }
        return s >= k_levels && (n == 1 || s < n * k_levels);
    };
    const auto to_weights = [&](const std::vector<std::size_t>& lv) {
        std::vector<double> w(n);
        for (std::size_t j = 0; j < n; ++j) {
            w[j] = static_cast<double>(lv[j]) / static_cast<double>(k_levels);
        }
        return w;
    };
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> lv(n, 1);
    for (;;) {
        if (admissible(lv)) {
            bool maximal = true;
            if (!full) {
                for (std::size_t j = 0; j < n && maximal; ++j) {
                    if (lv[j] < cap) {
                        ++lv[j];
                        maximal = !admissible(lv);
                        --lv[j];
                    }
                }
            }
            if (maximal) {
                out.push_back(to_weights(lv));
            }
        }
        std::size_t j = 0;
        while (j < n && lv[j] == cap) {
            lv[j] = 1;
            ++j;
        }
        if (j == n) {
            break;
        }
        ++lv[j];
    }
    if (out.empty()) {
        throw InvalidParams("weight_grid: no admissible weight vector under gamma_s");
    }
    return out;
}

struct CurveSample {
    double t = 0.0;
    double value = 0.0;
};

/// f_scler sampled at each deadline in `times` (seconds).
inline std::vector<CurveSample> fscler_curve(std::span<const double> times, std::span<const double> weights, double g,
                                             std::span<const SessionProfile> sessions, const ReliabilityParams& p) {
    std::vector<CurveSample> out;
    out.reserve(times.size());
    for (double t : times) {
        out.push_back({t, f_scler(t, weights, g, sessions, p)});
    }
    return out;
}

}  // namespace cmtlab
