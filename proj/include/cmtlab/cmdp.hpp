#pragma once

// Queue-aware constrained MDP solved as a linear program over occupation measures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmtlab/error.hpp"
#include "cmtlab/markov.hpp"
#include "cmtlab/reliability.hpp"
#include "cmtlab/simplex.hpp"

namespace cmtlab {

/// Per-slot arrival law on {0, gran, 2 gran, ..., N gran} packets.
struct ArrivalSpec {
    std::size_t granularity = 25;
    std::vector<double> probabilities;  // index n -> n * granularity packets
    double mean = 0.0;                  // packets per slot
    double variance = 0.0;              // in granularity^2 units

    std::size_t max_steps() const noexcept { return probabilities.empty() ? 0 : probabilities.size() - 1; }
    std::size_t max_arrival() const noexcept { return max_steps() * granularity; }

    /// Fills mean and variance from the probabilities.
    void recompute() {
        double m1 = 0.0;
        double m2 = 0.0;
        for (std::size_t n = 0; n < probabilities.size(); ++n) {
            const double v = static_cast<double>(n);
            m1 += v * probabilities[n];
            m2 += v * v * probabilities[n];
        }
        mean = m1 * static_cast<double>(granularity);
        variance = m2 - m1 * m1;
    }

    void validate() const {
        if (granularity == 0) {
            throw InvalidParams("arrivals.granularity must be >= 1");
        }
        if (probabilities.empty()) {
            throw InvalidParams("arrivals.probabilities must be nonempty");
        }
        double s = 0.0;
        for (std::size_t n = 0; n < probabilities.size(); ++n) {
            if (!(probabilities[n] >= 0.0)) {
                throw InvalidParams("arrivals.probabilities[" + std::to_string(n) + "] is negative");
            }
            s += probabilities[n];
        }
        if (std::abs(s - 1.0) > 1e-12) {
            throw InvalidParams("arrivals.probabilities sum to " + std::to_string(s));
        }
    }

    static ArrivalSpec from_probabilities(std::vector<double> probs, std::size_t granularity) {
        ArrivalSpec a{granularity, std::move(probs), 0.0, 0.0};
        a.validate();
        a.recompute();
        return a;
    }
};

/// Table-style row [lambda_1, ..., lambda_N]; lambda_0 takes the remaining mass.
inline ArrivalSpec arrival_from_table(const std::vector<double>& row, std::size_t granularity = 25) {
    double s = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!(row[i] >= 0.0)) {
            throw InvalidParams("arrival row entry " + std::to_string(i + 1) + " is negative");
        }
        s += row[i];
    }
    if (s > 1.0 + 1e-12) {
        throw InvalidParams("arrival row sums to " + std::to_string(s) + " > 1");
    }
    std::vector<double> probs;
    probs.reserve(row.size() + 1);
    probs.push_back(std::max(0.0, 1.0 - s));
    probs.insert(probs.end(), row.begin(), row.end());
    ArrivalSpec a{granularity, std::move(probs), 0.0, 0.0};
    a.recompute();
    return a;
}

/// Buffer dynamics; all quantities in packets and multiples of the granularity.
struct QueueModel {
    std::size_t capacity = 300;  // Z
    std::size_t max_block = 100;  // B
    std::size_t granularity = 25;
    std::size_t max_arrival = 100;  // N

    std::size_t states() const noexcept { return capacity / granularity + 1; }
    std::size_t queue_of(std::size_t state) const noexcept { return state * granularity; }

    void validate() const {
        if (granularity == 0) {
            throw InvalidParams("model.granularity must be >= 1");
        }
        if (capacity % granularity || max_block % granularity || max_arrival % granularity) {
            throw InvalidParams("model: Z, B and N must be multiples of the granularity");
        }
        if (capacity < max_arrival) {
            throw InvalidParams("model: Z = " + std::to_string(capacity) + " is below N = " + std::to_string(max_arrival));
        }
        if (max_block > capacity) {
            throw InvalidParams("model: B = " + std::to_string(max_block) + " exceeds Z = " + std::to_string(capacity));
        }
    }
};

/// q' = min((q - g)^+ + arrivals, Z)
inline std::size_t queue_step(std::size_t q, std::size_t g, std::size_t arrivals, std::size_t capacity) noexcept {
    const std::size_t left = q > g ? q - g : 0;
    return std::min(left + arrivals, capacity);
}

struct Action {
    std::size_t queue = 0;  // q, packets
    std::size_t block = 0;  // g, packets
    int weight = -1;        // index into the weight list; -1 for the null action (g = 0)
    bool allowed = true;    // false: structural zero (buffer would under- or overflow)
};

/// Admissible (g, weight) pairs in queue state q: 0 <= q - g <= Z - N, weights
/// within gamma_s, and g = 0 paired only with the null weight.
inline std::vector<Action> feasible_actions(std::size_t q, const QueueModel& model,
                                            const std::vector<std::vector<double>>& weights, double gamma_s) {
    std::vector<Action> out;
    for (std::size_t g = 0; g <= model.max_block; g += model.granularity) {
        if (g > q || q - g > model.capacity - model.max_arrival) {
            continue;
        }
        if (g == 0) {
            out.push_back({q, 0, -1, true});
            continue;
        }
        for (std::size_t w = 0; w < weights.size(); ++w) {
            if (std::ranges::all_of(weights[w], [&](double x) { return x <= gamma_s + 1e-12; })) {
                out.push_back({q, g, static_cast<int>(w), true});
            }
        }
    }
    return out;
}

/// Every (q, g, weight) combination with g <= B, ordered by q, g, weight;
/// `allowed` marks the admissible ones.
struct ActionCatalog {
    QueueModel model;
    std::vector<std::vector<double>> weights;
    std::vector<Action> actions;
    std::vector<std::size_t> state_begin;  // actions of state k: [state_begin[k], state_begin[k+1])

    std::size_t size() const noexcept { return actions.size(); }
    std::size_t states() const noexcept { return model.states(); }

    static ActionCatalog build(const QueueModel& model, std::vector<std::vector<double>> weights, double gamma_s) {
        model.validate();
        ActionCatalog c{model, std::move(weights), {}, {}};
        for (std::size_t k = 0; k < model.states(); ++k) {
            c.state_begin.push_back(c.actions.size());
            const std::size_t q = model.queue_of(k);
            const auto ok = feasible_actions(q, model, c.weights, gamma_s);
            const auto is_ok = [&](std::size_t g, int w) {
                return std::ranges::any_of(ok, [&](const Action& a) { return a.block == g && a.weight == w; });
            };
            for (std::size_t g = 0; g <= model.max_block; g += model.granularity) {
                if (g == 0) {
                    c.actions.push_back({q, 0, -1, is_ok(0, -1)});
                    continue;
                }
                for (std::size_t w = 0; w < c.weights.size(); ++w) {
                    c.actions.push_back({q, g, static_cast<int>(w), is_ok(g, static_cast<int>(w))});
                }
            }
        }
        c.state_begin.push_back(c.actions.size());
        return c;
    }

    std::string name(std::size_t col) const {
        const Action& a = actions[col];
        return "x[q=" + std::to_string(a.queue) + ",g=" + std::to_string(a.block) + ",w=" + std::to_string(a.weight) + "]";
    }
};

/// f(q, g, weight), aligned with ActionCatalog::actions.
struct Policy {
    std::vector<double> prob;

    void validate(const ActionCatalog& cat, double tol = 1e-9) const {
        if (prob.size() != cat.size()) {
            throw StructuralError("policy: " + std::to_string(prob.size()) + " entries for a catalog of " +
                                  std::to_string(cat.size()));
        }
        for (std::size_t k = 0; k < cat.states(); ++k) {
            double s = 0.0;
            for (std::size_t i = cat.state_begin[k]; i < cat.state_begin[k + 1]; ++i) {
                if (prob[i] < -tol) {
                    throw StructuralError("policy: negative probability at " + cat.name(i));
                }
                if (!cat.actions[i].allowed && prob[i] > tol) {
                    throw StructuralError("policy: mass on inadmissible action " + cat.name(i));
                }
                s += prob[i];
            }
            if (std::abs(s - 1.0) > tol) {
                throw StructuralError("policy: row for q=" + std::to_string(cat.model.queue_of(k)) + " sums to " +
                                      std::to_string(s));
            }
        }
    }
};

/// Row-stochastic kernel P(k, k') over queue states (indices k = q / gran).
inline Eigen::MatrixXd transition_kernel(const ActionCatalog& cat, const Policy& policy, const ArrivalSpec& arr) {
    policy.validate(cat);
    if (arr.granularity != cat.model.granularity) {
        throw StructuralError("transition_kernel: arrival and model granularity differ");
    }
    const auto s = static_cast<Eigen::Index>(cat.states());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s, s);
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const double f = policy.prob[i];
        if (f == 0.0) {
            continue;
        }
        const Action& a = cat.actions[i];
        const auto from = static_cast<Eigen::Index>(a.queue / cat.model.granularity);
        for (std::size_t n = 0; n < arr.probabilities.size(); ++n) {
            const std::size_t q2 = queue_step(a.queue, a.block, n * arr.granularity, cat.model.capacity);
            p(from, static_cast<Eigen::Index>(q2 / cat.model.granularity)) += f * arr.probabilities[n];
        }
    }
    return p;
}

/// H_S: row k' holds, for every column (q, g, w), the inflow probability
/// into k' minus the indicator that q is k'. H_S x = 0 is stationarity.
inline Eigen::MatrixXd build_constraint_matrix(const ActionCatalog& cat, const ArrivalSpec& arr) {
    if (arr.granularity != cat.model.granularity) {
        throw StructuralError("build_constraint_matrix: arrival and model granularity differ");
    }
    const auto s = static_cast<Eigen::Index>(cat.states());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(s, static_cast<Eigen::Index>(cat.size()));
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const Action& a = cat.actions[i];
        const auto col = static_cast<Eigen::Index>(i);
        for (std::size_t n = 0; n < arr.probabilities.size(); ++n) {
            const std::size_t q2 = queue_step(a.queue, a.block, n * arr.granularity, cat.model.capacity);
            h(static_cast<Eigen::Index>(q2 / cat.model.granularity), col) += arr.probabilities[n];
        }
        h(static_cast<Eigen::Index>(a.queue / cat.model.granularity), col) -= 1.0;
    }
    return h;
}

/// x(q, g, w) = pi(q) f(q, g, w) for the stationary law of the policy's chain.
inline std::vector<double> occupation_measure(const ActionCatalog& cat, const Policy& policy, const ArrivalSpec& arr) {
    const Eigen::VectorXd pi = stationary_distribution(transition_kernel(cat, policy, arr));
    std::vector<double> x(cat.size());
    for (std::size_t i = 0; i < cat.size(); ++i) {
        x[i] = pi(static_cast<Eigen::Index>(cat.actions[i].queue / cat.model.granularity)) * policy.prob[i];
    }
    return x;
}

struct CmdpSpec {
    ArrivalSpec arrivals;
    QueueModel model;
    std::vector<SessionProfile> sessions;
    ReliabilityParams params;
    double r_th = 0.0;
    std::vector<double> w_th;  // per session, bit/s; empty or inf = unconstrained
    bool full_grid = false;
    /// Explicit weight vectors; when empty the grid from `params` is used.
    std::vector<std::vector<double>> weights;
};

struct CmdpLp {
    ActionCatalog catalog;
    std::vector<double> reliability;             // F(g, w) per column, 0 for g = 0
    std::vector<std::vector<double>> bandwidth;  // [session][column], bit/s
    double mean_arrival = 0.0;                   // packets per slot
    double r_th = 0.0;
    LpProblem lp;
};

/// Weight vectors of `spec` (explicit or from the grid).
inline std::vector<std::vector<double>> spec_weights(const CmdpSpec& spec) {
    if (!spec.weights.empty()) {
        for (const auto& w : spec.weights) {
            if (w.size() != spec.sessions.size()) {
                throw InvalidParams("weights: vector length differs from session count");
            }
        }
        return spec.weights;
    }
    return weight_grid(spec.sessions.size(), spec.params, spec.full_grid);
}

/// Builds the occupation-measure LP:
///   min (1/mean) sum q x
///   H_S x = 0, sum x = 1,
///   sum_{g>0} (F(g,w) - r_th) x >= 0,
///   sum W_j(g,w) x <= W_j^th,
///   x >= 0, x = 0 on inadmissible columns.
/// The reliability row constrains the decode probability per attempted generation.
inline CmdpLp assemble_lp(const CmdpSpec& spec) {
    spec.arrivals.validate();
    spec.model.validate();
    if (spec.sessions.empty()) {
        throw InvalidParams("sessions: at least one session required");
    }
    for (std::size_t j = 0; j < spec.sessions.size(); ++j) {
        spec.sessions[j].validate("sessions[" + std::to_string(j) + "]");
    }
    spec.params.validate(spec.sessions.size());
    if (spec.arrivals.granularity != spec.model.granularity) {
        throw InvalidParams("arrivals.granularity differs from model.granularity");
    }
    if (spec.arrivals.max_arrival() > spec.model.max_arrival) {
        throw InvalidParams("arrivals: support reaches " + std::to_string(spec.arrivals.max_arrival()) +
                            " packets, above model N = " + std::to_string(spec.model.max_arrival));
    }
    if (!spec.w_th.empty() && spec.w_th.size() != spec.sessions.size()) {
        throw InvalidParams("thresholds.w_th: one entry per session required");
    }
    if (!(spec.r_th >= 0.0)) {
        throw InvalidParams("thresholds.r_th must be >= 0");
    }

    CmdpLp out;
    out.r_th = spec.r_th;
    out.catalog = ActionCatalog::build(spec.model, spec_weights(spec), spec.params.gamma_s);
    const ActionCatalog& cat = out.catalog;
    for (std::size_t k = 0; k < cat.states(); ++k) {
        bool any = false;
        for (std::size_t i = cat.state_begin[k]; i < cat.state_begin[k + 1]; ++i) {
            any = any || cat.actions[i].allowed;
        }
        if (!any) {
            throw InfeasibleProblem("no admissible block length in state q=" + std::to_string(cat.model.queue_of(k)) +
                                    " (need q - g <= Z - N with g <= B; B = " + std::to_string(cat.model.max_block) +
                                    ", N = " + std::to_string(cat.model.max_arrival) + ")");
        }
    }
    out.mean_arrival = spec.arrivals.mean;
    if (!(out.mean_arrival > 0.0)) {
        throw InvalidParams("arrivals: mean arrival is zero, so mean delay is undefined");
    }

    const std::size_t ncol = cat.size();
    const std::size_t nl = spec.sessions.size();
    out.reliability.assign(ncol, 0.0);
    out.bandwidth.assign(nl, std::vector<double>(ncol, 0.0));
    std::vector<std::vector<double>> f_cache(spec.model.max_block / spec.model.granularity + 1,
                                             std::vector<double>(cat.weights.size(), -1.0));
    for (std::size_t i = 0; i < ncol; ++i) {
        const Action& a = cat.actions[i];
        if (a.block == 0) {
            continue;
        }
        const auto w = static_cast<std::size_t>(a.weight);
        double& f = f_cache[a.block / spec.model.granularity][w];
        if (f < 0.0) {
            f = lp_reliability(static_cast<double>(a.block), cat.weights[w], spec.sessions, spec.params);
        }
        out.reliability[i] = f;
        for (std::size_t j = 0; j < nl; ++j) {
            out.bandwidth[j][i] =
                cat.weights[w][j] * static_cast<double>(a.block) * spec.params.packet_bits / spec.params.deadline;
        }
    }

    LpProblem& lp = out.lp;
    lp.objective.resize(ncol);
    lp.upper.resize(ncol);
    lp.names.resize(ncol);
    for (std::size_t i = 0; i < ncol; ++i) {
        lp.objective[i] = static_cast<double>(cat.actions[i].queue) / out.mean_arrival;
        lp.upper[i] = cat.actions[i].allowed ? std::numeric_limits<double>::infinity() : 0.0;
        lp.names[i] = cat.name(i);
    }
    const Eigen::MatrixXd h = build_constraint_matrix(cat, spec.arrivals);
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
        lp.eq_rows.emplace_back(ncol, 0.0);
        for (std::size_t i = 0; i < ncol; ++i) {
            lp.eq_rows.back()[i] = h(r, static_cast<Eigen::Index>(i));
        }
        lp.eq_rhs.push_back(0.0);
    }
    lp.eq_rows.emplace_back(ncol, 1.0);
    lp.eq_rhs.push_back(1.0);

    std::vector<double> rel(ncol, 0.0);
    for (std::size_t i = 0; i < ncol; ++i) {
        if (cat.actions[i].block > 0) {
            rel[i] = spec.r_th - out.reliability[i];
        }
    }
    lp.le_rows.push_back(std::move(rel));
    lp.le_rhs.push_back(0.0);
    for (std::size_t j = 0; j < nl; ++j) {
        if (!spec.w_th.empty() && std::isfinite(spec.w_th[j])) {
            lp.le_rows.push_back(out.bandwidth[j]);
            lp.le_rhs.push_back(spec.w_th[j]);
        }
    }
    return out;
}

struct StateSummary {
    std::size_t queue = 0;
    double pi = 0.0;
    std::vector<std::size_t> blocks;  // supported g, ascending
    std::size_t g_min = 0;
    std::size_t g_max = 0;
    std::size_t supported_actions = 0;
};

struct ThresholdSummary {
    std::optional<std::size_t> threshold;  // smallest randomized q
    double mix_probability = 0.0;          // mass on g_max at the threshold state
    std::size_t randomized_states = 0;
    std::size_t max_blocks_per_state = 0;
    bool threshold_structure = true;  // <= 1 randomized state and <= 2 blocks per state
    bool weights_saturated = true;    // every supported weight vector is grid-maximal
};

struct PolicyMetrics {
    double mean_queue = 0.0;                       // packets
    std::optional<double> mean_delay;              // slots; empty when mean arrival is zero
    std::vector<double> bandwidth;                 // per session, bit/s
    std::optional<double> reliability;             // per attempted generation; empty if no generation is sent
    double attempt_rate = 0.0;                     // P(g > 0)
};

struct SolvedPolicy {
    LpStatus status = LpStatus::Infeasible;
    std::string reason;
    std::vector<double> x;
    std::vector<double> pi;
    Policy policy;
    double objective = std::numeric_limits<double>::infinity();
    ThresholdSummary summary;
    std::vector<StateSummary> states;
    PolicyMetrics metrics;
    std::vector<double> farkas;
    std::size_t iterations = 0;
    double max_violation = 0.0;

    bool feasible() const noexcept { return status == LpStatus::Optimal; }
};

/// Occupation-measure metrics for an arbitrary x over the catalog of `m`.
inline PolicyMetrics policy_metrics(const CmdpLp& m, const std::vector<double>& x) {
    PolicyMetrics pm;
    const auto& cat = m.catalog;
    pm.bandwidth.assign(m.bandwidth.size(), 0.0);
    double attempted = 0.0;
    double decoded = 0.0;
    for (std::size_t i = 0; i < cat.size(); ++i) {
        pm.mean_queue += static_cast<double>(cat.actions[i].queue) * x[i];
        for (std::size_t j = 0; j < m.bandwidth.size(); ++j) {
            pm.bandwidth[j] += m.bandwidth[j][i] * x[i];
        }
        if (cat.actions[i].block > 0) {
            attempted += x[i];
            decoded += m.reliability[i] * x[i];
        }
    }
    if (m.mean_arrival > 0.0) {
        pm.mean_delay = pm.mean_queue / m.mean_arrival;
    }
    pm.attempt_rate = attempted;
    if (attempted > 0.0) {
        pm.reliability = decoded / attempted;
    }
    return pm;
}

/// Policy from an occupation measure: f = x / pi where pi > 0, otherwise a
/// point mass on the largest admissible block (highest-reliability weight,
/// lowest index on ties).
inline SolvedPolicy extract_policy(const CmdpLp& m, const std::vector<double>& x, const ReliabilityParams* params = nullptr,
                                   double support_tol = 1e-9) {
    const auto& cat = m.catalog;
    if (x.size() != cat.size()) {
        throw StructuralError("extract_policy: x length differs from catalog");
    }
    SolvedPolicy sp;
    sp.status = LpStatus::Optimal;
    sp.x = x;
    sp.pi.assign(cat.states(), 0.0);
    sp.policy.prob.assign(cat.size(), 0.0);
    std::vector<std::vector<double>> maximal;
    if (params != nullptr && !cat.weights.empty()) {
        try {
            maximal = weight_grid(cat.weights.front().size(), *params, false);
        } catch (const InvalidParams&) {
            maximal.clear();
        }
    }
    for (std::size_t k = 0; k < cat.states(); ++k) {
        const std::size_t b = cat.state_begin[k];
        const std::size_t e = cat.state_begin[k + 1];
        double pi = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            pi += std::max(0.0, x[i]);
        }
        sp.pi[k] = pi;
        StateSummary st;
        st.queue = cat.model.queue_of(k);
        st.pi = pi;
        if (pi > support_tol) {
            for (std::size_t i = b; i < e; ++i) {
                sp.policy.prob[i] = std::max(0.0, x[i]) / pi;
            }
        } else {
            std::size_t best = e;
            for (std::size_t i = b; i < e; ++i) {
                if (!cat.actions[i].allowed) {
                    continue;
                }
                if (best == e || cat.actions[i].block > cat.actions[best].block ||
                    (cat.actions[i].block == cat.actions[best].block && m.reliability[i] > m.reliability[best])) {
                    best = i;
                }
            }
            sp.policy.prob[best] = 1.0;
        }
        // Drop numerically negligible mass so reported support is clean.
        double kept = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            if (sp.policy.prob[i] <= support_tol) {
                sp.policy.prob[i] = 0.0;
            }
            kept += sp.policy.prob[i];
        }
        for (std::size_t i = b; i < e; ++i) {
            sp.policy.prob[i] /= kept;
            if (sp.policy.prob[i] > 0.0) {
                ++st.supported_actions;
                if (st.blocks.empty() || st.blocks.back() != cat.actions[i].block) {
                    st.blocks.push_back(cat.actions[i].block);
                }
                if (cat.actions[i].block > 0 && !maximal.empty() && pi > support_tol) {
                    const auto& w = cat.weights[static_cast<std::size_t>(cat.actions[i].weight)];
                    const bool is_max = std::ranges::any_of(maximal, [&](const std::vector<double>& v) {
                        for (std::size_t j = 0; j < v.size(); ++j) {
                            if (std::abs(v[j] - w[j]) > 1e-9) {
                                return false;
                            }
                        }
                        return true;
                    });
                    sp.summary.weights_saturated = sp.summary.weights_saturated && is_max;
                }
            }
        }
        st.g_min = st.blocks.front();
        st.g_max = st.blocks.back();
        sp.summary.max_blocks_per_state = std::max(sp.summary.max_blocks_per_state, st.blocks.size());
        if (st.supported_actions > 1) {
            ++sp.summary.randomized_states;
            if (!sp.summary.threshold) {
                sp.summary.threshold = st.queue;
                double mass = 0.0;
                for (std::size_t i = b; i < e; ++i) {
                    if (cat.actions[i].block == st.g_max) {
                        mass += sp.policy.prob[i];
                    }
                }
                sp.summary.mix_probability = mass;
            }
        }
        sp.states.push_back(std::move(st));
    }
    sp.summary.threshold_structure = sp.summary.randomized_states <= 1 && sp.summary.max_blocks_per_state <= 2;
    sp.metrics = policy_metrics(m, x);
    sp.objective = sp.metrics.mean_delay.value_or(std::numeric_limits<double>::infinity());
    return sp;
}

/// Solves an assembled CMDP LP and extracts its policy.
inline SolvedPolicy solve_cmdp(const CmdpLp& m, const ReliabilityParams* params = nullptr) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.catalog.size(); ++i) {
        if (m.catalog.actions[i].allowed && m.catalog.actions[i].block > 0) {
            best = std::max(best, m.reliability[i]);
        }
    }
    if (m.r_th > 0.0 && m.r_th > best) {
        SolvedPolicy sp;
        sp.status = LpStatus::Infeasible;
        sp.reason = "r_th = " + std::to_string(m.r_th) + " exceeds the best per-action reliability " +
                    std::to_string(best);
        return sp;
    }
    const auto res = solve_lp<double>(m.lp);
    if (res.status != LpStatus::Optimal) {
        SolvedPolicy sp;
        sp.status = res.status;
        sp.reason = std::string("linear program ") + to_string(res.status);
        sp.farkas = res.farkas;
        sp.iterations = res.iterations;
        return sp;
    }
    SolvedPolicy sp = extract_policy(m, res.x, params);
    sp.iterations = res.iterations;
    sp.max_violation = res.max_violation;
    sp.objective = res.objective;
    return sp;
}

inline SolvedPolicy solve_cmdp(const CmdpSpec& spec) {
    return solve_cmdp(assemble_lp(spec), &spec.params);
}

struct TradeoffPoint {
    double r_th = 0.0;
    bool feasible = false;
    double mean_delay = std::numeric_limits<double>::infinity();
    std::vector<double> bandwidth;
    std::optional<double> reliability;
    std::optional<std::size_t> threshold;
    double mix_probability = 0.0;
    std::string reason;
};

/// LP optimum at each r_th; infeasible points are kept and flagged.
inline std::vector<TradeoffPoint> tradeoff_curve(const CmdpSpec& spec, const std::vector<double>& r_values,
                                                 bool parallel = true) {
    if (r_values.empty()) {
        throw InvalidParams("tradeoff: r_th sweep is empty");
    }
    CmdpLp base = assemble_lp(spec);
    const auto point = [&base, &spec](double r) {
        CmdpLp m = base;
        m.r_th = r;
        auto& row = m.lp.le_rows.front();
        for (std::size_t i = 0; i < row.size(); ++i) {
            row[i] = m.catalog.actions[i].block > 0 ? r - m.reliability[i] : 0.0;
        }
        const SolvedPolicy sp = solve_cmdp(m, &spec.params);
        TradeoffPoint tp;
        tp.r_th = r;
        tp.feasible = sp.feasible();
        tp.reason = sp.reason;
        if (tp.feasible) {
            tp.mean_delay = sp.objective;
            tp.bandwidth = sp.metrics.bandwidth;
            tp.reliability = sp.metrics.reliability;
            tp.threshold = sp.summary.threshold;
            tp.mix_probability = sp.summary.mix_probability;
        }
        return tp;
    };
    std::vector<TradeoffPoint> out;
    out.reserve(r_values.size());
    if (parallel && r_values.size() > 1) {
        std::vector<std::future<TradeoffPoint>> jobs;
        for (double r : r_values) {
            jobs.push_back(std::async(std::launch::async, point, r));
        }
        for (auto& j : jobs) {
            out.push_back(j.get());
        }
    } else {
        for (double r : r_values) {
            out.push_back(point(r));
        }
    }
    return out;
}

}  // namespace cmtlab
