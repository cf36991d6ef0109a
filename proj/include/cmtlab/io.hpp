#pragma once

// JSON and CSV renderings of results.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmtlab/cmdp.hpp"
#include "cmtlab/codec.hpp"
#include "cmtlab/reliability.hpp"
#include "cmtlab/scenario.hpp"
#include "cmtlab/slot_sim.hpp"
#include "cmtlab/threat.hpp"

namespace cmtlab {

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline std::string fmt(double v) {
    if (!std::isfinite(v)) {
        return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    }
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

}  // namespace detail

inline json to_json(const LeakReport& r) {
    return {{"intercepted", r.intercepted}, {"recovered", r.recovered}, {"block_size", r.block_size},
            {"ratio", r.ratio},             {"cap", r.cap},             {"secure", r.secure}};
}

inline json to_json(const PolicyMetrics& m) {
    return {{"mean_queue", m.mean_queue},
            {"mean_delay", detail::optional_json(m.mean_delay)},
            {"bandwidth_bps", m.bandwidth},
            {"reliability", detail::optional_json(m.reliability)},
            {"attempt_rate", m.attempt_rate}};
}

inline json to_json(const SolvedPolicy& sp, const ActionCatalog& cat) {
    json j;
    j["status"] = to_string(sp.status);
    if (!sp.reason.empty()) {
        j["reason"] = sp.reason;
    }
    if (!sp.feasible()) {
        if (!sp.farkas.empty()) {
            j["farkas"] = sp.farkas;
        }
        return j;
    }
    j["objective"] = sp.objective;
    j["weights"] = cat.weights;
    json actions = json::array();
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const Action& a = cat.actions[i];
        if (!a.allowed) {
            continue;
        }
        actions.push_back({{"q", a.queue}, {"g", a.block}, {"w", a.weight}, {"x", sp.x[i]}, {"f", sp.policy.prob[i]}});
    }
    j["actions"] = actions;
    json states = json::array();
    for (const auto& s : sp.states) {
        states.push_back({{"q", s.queue}, {"pi", s.pi}, {"blocks", s.blocks}, {"g_min", s.g_min}, {"g_max", s.g_max}});
    }
    j["states"] = states;
    j["threshold_summary"] = {{"threshold_q", detail::optional_json(sp.summary.threshold)},
                              {"mix_probability", sp.summary.mix_probability},
                              {"randomized_states", sp.summary.randomized_states},
                              {"max_blocks_per_state", sp.summary.max_blocks_per_state},
                              {"threshold_structure", sp.summary.threshold_structure},
                              {"weights_saturated", sp.summary.weights_saturated}};
    j["metrics"] = to_json(sp.metrics);
    j["lp"] = {{"iterations", sp.iterations}, {"max_violation", sp.max_violation}};
    return j;
}

/// Policy over `cat` from the "actions" array written by to_json(SolvedPolicy).
/// Entries are matched on (q, g, weight vector); absent entries get zero.
inline Policy policy_from_json(const json& j, const ActionCatalog& cat) {
    if (!j.contains("actions") || !j.at("actions").is_array() || !j.contains("weights")) {
        throw InvalidParams("policy: expected 'weights' and 'actions' fields");
    }
    const json& wj = j.at("weights");
    std::vector<std::vector<double>> file_weights;
    for (std::size_t i = 0; i < wj.size(); ++i) {
        file_weights.push_back(detail::get_numbers(wj[i], "policy.weights[" + std::to_string(i) + "]"));
    }
    const auto weight_index = [&](int w) -> int {
        if (w < 0) {
            return -1;
        }
        if (static_cast<std::size_t>(w) >= file_weights.size()) {
            throw InvalidParams("policy.actions: weight index " + std::to_string(w) + " out of range");
        }
        const auto& v = file_weights[static_cast<std::size_t>(w)];
        for (std::size_t k = 0; k < cat.weights.size(); ++k) {
            const auto& c = cat.weights[k];
            if (c.size() != v.size()) {
                continue;
            }
            bool same = true;
            for (std::size_t d = 0; d < c.size(); ++d) {
                same = same && std::abs(c[d] - v[d]) <= 1e-9;
            }
            if (same) {
                return static_cast<int>(k);
            }
        }
        throw InvalidParams("policy: weight vector " + std::to_string(w) + " is not in the scenario's catalog");
    };
    Policy p;
    p.prob.assign(cat.size(), 0.0);
    const json& acts = j.at("actions");
    for (std::size_t i = 0; i < acts.size(); ++i) {
        const std::string path = "policy.actions[" + std::to_string(i) + "]";
        const json& a = acts[i];
        const auto q = detail::get_unsigned(a.at("q"), path + ".q");
        const auto g = detail::get_unsigned(a.at("g"), path + ".g");
        const int w = weight_index(a.at("w").get<int>());
        const double f = detail::get_number(a.at("f"), path + ".f");
        if (q % cat.model.granularity != 0 || q > cat.model.capacity) {
            throw InvalidParams(path + ": queue length " + std::to_string(q) + " is not a model state");
        }
        const std::size_t k = q / cat.model.granularity;
        bool found = false;
        for (std::size_t c = cat.state_begin[k]; c < cat.state_begin[k + 1]; ++c) {
            if (cat.actions[c].block == g && cat.actions[c].weight == w) {
                p.prob[c] = f;
                found = true;
            }
        }
        if (!found) {
            throw InvalidParams(path + ": action (q=" + std::to_string(q) + ", g=" + std::to_string(g) +
                                ") is not in the scenario's catalog");
        }
    }
    p.validate(cat, 1e-6);
    return p;
}

inline json to_json(const SimStats& s, CodecMode mode) {
    json j;
    j["mode"] = to_string(mode);
    j["slots"] = s.slots;
    j["mean_queue"] = s.mean_queue;
    j["mean_arrival"] = s.mean_arrival;
    j["empirical_arrival"] = s.empirical_arrival;
    j["mean_delay"] = s.mean_delay;
    j["attempted"] = s.attempted;
    j["decoded"] = s.decoded;
    j["empirical_reliability"] = detail::optional_json(s.empirical_reliability);
    j["d_th"] = s.d_th;
    j["violation_prob"] = s.violation_prob;
    j["session_sent"] = s.session_sent;
    j["session_erased"] = s.session_erased;
    if (!s.leaks.empty()) {
        j["leak_generations"] = s.leaks.size();
        j["max_leak_ratio"] = s.max_leak_ratio;
        j["leaked_full_decodes"] = s.leaked_full_decodes;
        bool secure = true;
        for (const auto& r : s.leaks) {
            secure = secure && r.secure;
        }
        j["all_secure"] = secure;
    }
    return j;
}

inline void write_histogram_csv(std::ostream& os, const SimStats& s) {
    os << "q,count\n";
    for (std::size_t k = 0; k < s.histogram.size(); ++k) {
        os << k * s.granularity << ',' << s.histogram[k] << '\n';
    }
}

inline void write_series_csv(std::ostream& os, const SimStats& s) {
    os << "slot,q,g,decoded\n";
    for (const auto& r : s.series) {
        os << r.slot << ',' << r.queue << ',' << r.block << ',' << (r.decoded ? 1 : 0) << '\n';
    }
}

inline void write_tradeoff_csv(std::ostream& os, const std::vector<TradeoffPoint>& pts, std::size_t sessions) {
    os << "r_th,mean_delay";
    for (std::size_t j = 0; j < sessions; ++j) {
        os << ",bandwidth_" << j + 1;
    }
    os << ",feasible\n";
    for (const auto& p : pts) {
        os << detail::fmt(p.r_th) << ',' << detail::fmt(p.mean_delay);
        for (std::size_t j = 0; j < sessions; ++j) {
            os << ',' << (j < p.bandwidth.size() ? detail::fmt(p.bandwidth[j]) : std::string("nan"));
        }
        os << ',' << (p.feasible ? 1 : 0) << '\n';
    }
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve) {
    os << "received,mean_recovered,decode_prob\n";
    for (const auto& c : curve) {
        os << c.received << ',' << detail::fmt(c.mean_recovered) << ',' << detail::fmt(c.decode_probability) << '\n';
    }
}

inline void write_fscler_csv(std::ostream& os, const std::vector<CurveSample>& samples) {
    os << "T_ms,f_scler\n";
    for (const auto& s : samples) {
        os << detail::fmt(s.t * 1e3) << ',' << detail::fmt(s.value) << '\n';
    }
}

/// Writes `content` to dir/name, creating dir.
inline void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) {
        throw Error("cannot write " + (dir / name).string());
    }
    out << content;
}

}  // namespace cmtlab
