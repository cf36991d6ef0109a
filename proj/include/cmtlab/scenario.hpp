#pragma once

// Scenario configuration: defaults, named presets, and JSON ingestion with
// field-path diagnostics.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmtlab/cmdp.hpp"
#include "cmtlab/error.hpp"
#include "cmtlab/reliability.hpp"
#include "cmtlab/threat.hpp"

namespace cmtlab {

using json = nlohmann::json;

struct ScenarioConfig {
    std::string name = "e45";
    std::vector<double> arrival_row{0.34, 0.27, 0.16, 0.11};  // [lambda_gran .. lambda_N gran]
    std::size_t granularity = 25;
    std::vector<SessionProfile> sessions{
        {0.009927, 500e6, 0.90, 0.002, 0.06},
        {0.012, 100e6, 0.92, 0.002, 0.14},
        {0.00625, 200e6, 0.95, 0.002, 0.10},
    };
    std::size_t capacity = 300;   // Z
    std::size_t max_block = 100;  // B
    std::optional<std::size_t> max_arrival;  // N; defaults to the arrival support
    ReliabilityParams params;
    double r_th = 0.999;
    std::vector<double> w_th;  // bit/s per session; empty = unconstrained
    double d_th = 2.0;         // slots
    std::optional<Topology> topology;
    std::uint64_t seed = 1;
    std::size_t slots = 100000;
    bool full_grid = false;

    ArrivalSpec arrivals() const { return arrival_from_table(arrival_row, granularity); }

    QueueModel model() const {
        const auto a = arrivals();
        return {capacity, max_block, granularity, max_arrival.value_or(a.max_arrival())};
    }

    /// Cross-field checks; throws InvalidParams naming the offending field.
    void validate() const {
        const auto a = arrivals();
        if (sessions.empty()) {
            throw InvalidParams("sessions: at least one session required");
        }
        if (sessions.size() > kMaxSessions) {
            throw InvalidParams("sessions: at most " + std::to_string(kMaxSessions) + " sessions supported");
        }
        for (std::size_t j = 0; j < sessions.size(); ++j) {
            sessions[j].validate("sessions[" + std::to_string(j) + "]");
        }
        model().validate();
        if (a.max_arrival() > model().max_arrival) {
            throw InvalidParams("model.N: arrival support reaches " + std::to_string(a.max_arrival()) + " packets");
        }
        params.validate(sessions.size());
        weight_grid(sessions.size(), params, false);
        if (!(r_th >= 0.0 && r_th <= 1.0)) {
            throw InvalidParams("thresholds.r_th must lie in [0, 1]");
        }
        if (!w_th.empty() && w_th.size() != sessions.size()) {
            throw InvalidParams("thresholds.w_th_mbps: one entry per session required");
        }
        if (!(d_th >= 0.0)) {
            throw InvalidParams("thresholds.d_th must be >= 0");
        }
        if (topology) {
            topology->validate();
        }
        if (slots == 0) {
            throw InvalidParams("slots must be >= 1");
        }
    }

    CmdpSpec cmdp_spec() const {
        CmdpSpec s;
        s.arrivals = arrivals();
        s.model = model();
        s.sessions = sessions;
        s.params = params;
        s.r_th = r_th;
        s.w_th = w_th;
        s.full_grid = full_grid;
        return s;
    }
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"e25", "e45", "e60", "var078", "var116", "var138",
                                                "eps-a", "eps-b", "eps-c"};
    return names;
}

/// Arrival rows and erasure levels of the reference scenarios. Unless the
/// preset varies it, erasure is [6, 14, 10] % and the arrival row is the E = 45 one.
inline ScenarioConfig preset(const std::string& name) {
    ScenarioConfig c;
    c.name = name;
    const auto set_eps = [&](std::initializer_list<double> e) {
        std::size_t j = 0;
        for (double v : e) {
            c.sessions[j++].erasure = v;
        }
    };
    if (name == "e25") {
        c.arrival_row = {0.24, 0.10, 0.12, 0.05};
    } else if (name == "e45" || name == "var138" || name == "eps-c") {
        c.arrival_row = {0.34, 0.27, 0.16, 0.11};
    } else if (name == "e60") {
        c.arrival_row = {0.16, 0.30, 0.20, 0.26};
    } else if (name == "var078") {
        c.arrival_row = {0.39, 0.42, 0.11, 0.06};
    } else if (name == "var116") {
        c.arrival_row = {0.39, 0.31, 0.13, 0.10};
    } else if (name == "eps-a") {
        set_eps({0.22, 0.25, 0.25});
    } else if (name == "eps-b") {
        set_eps({0.09, 0.22, 0.10});
    } else {
        throw InvalidParams("unknown preset '" + name + "'");
    }
    return c;
}

namespace detail {

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw InvalidParams((path.empty() ? std::string("config") : path) + ": expected an object");
    }
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed) {
            ok = ok || item.key() == k;
        }
        if (!ok) {
            throw InvalidParams((path.empty() ? "" : path + ".") + item.key() + ": unknown field");
        }
    }
}

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        throw InvalidParams(path + ": expected a number");
    }
    return j.get<double>();
}

inline std::uint64_t get_unsigned(const json& j, const std::string& path) {
    if (j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0)) {
        return j.get<std::uint64_t>();
    }
    throw InvalidParams(path + ": expected a nonnegative integer");
}

inline bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) {
        throw InvalidParams(path + ": expected true or false");
    }
    return j.get<bool>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) {
        throw InvalidParams(path + ": expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

template <class F>
void maybe(const json& j, const char* key, F&& f) {
    if (j.contains(key)) {
        f(j.at(key));
    }
}

}  // namespace detail

/// Overlays the fields present in `j` onto `base`. Times are in ms and
/// bandwidths in Mbit/s in the file. A top-level "preset" key selects the base.
inline ScenarioConfig apply_config(const json& j, ScenarioConfig base) {
    using namespace detail;
    check_keys(j, "", {"name", "preset", "arrivals", "sessions", "model", "params", "thresholds", "topology", "seed",
                       "slots", "full_grid"});
    if (j.contains("preset")) {
        if (!j.at("preset").is_string()) {
            throw InvalidParams("preset: expected a string");
        }
        base = preset(j.at("preset").get<std::string>());
    }
    ScenarioConfig c = std::move(base);
    maybe(j, "name", [&](const json& v) {
        if (!v.is_string()) {
            throw InvalidParams("name: expected a string");
        }
        c.name = v.get<std::string>();
    });
    maybe(j, "arrivals", [&](const json& a) {
        check_keys(a, "arrivals", {"granularity", "table", "probabilities"});
        maybe(a, "granularity", [&](const json& v) { c.granularity = get_unsigned(v, "arrivals.granularity"); });
        if (a.contains("table") && a.contains("probabilities")) {
            throw InvalidParams("arrivals: give either table or probabilities, not both");
        }
        maybe(a, "table", [&](const json& v) { c.arrival_row = get_numbers(v, "arrivals.table"); });
        maybe(a, "probabilities", [&](const json& v) {
            auto p = get_numbers(v, "arrivals.probabilities");
            if (p.empty()) {
                throw InvalidParams("arrivals.probabilities: must be nonempty");
            }
            double s = 0.0;
            for (double x : p) {
                s += x;
            }
            if (std::abs(s - 1.0) > 1e-12) {
                throw InvalidParams("arrivals.probabilities: entries sum to " + std::to_string(s));
            }
            c.arrival_row.assign(p.begin() + 1, p.end());
        });
        for (std::size_t i = 0; i < c.arrival_row.size(); ++i) {
            if (!(c.arrival_row[i] >= 0.0)) {
                throw InvalidParams("arrivals: entry " + std::to_string(i + 1) + " is negative");
            }
        }
        double s = 0.0;
        for (double x : c.arrival_row) {
            s += x;
        }
        if (s > 1.0 + 1e-12) {
            throw InvalidParams("arrivals.table: entries sum to " + std::to_string(s) + " > 1");
        }
    });
    maybe(j, "sessions", [&](const json& ss) {
        if (!ss.is_array() || ss.empty()) {
            throw InvalidParams("sessions: expected a nonempty array");
        }
        std::vector<SessionProfile> out;
        for (std::size_t i = 0; i < ss.size(); ++i) {
            const std::string p = "sessions[" + std::to_string(i) + "]";
            const json& s = ss[i];
            check_keys(s, p, {"t_p_ms", "bandwidth_mbps", "ceiling", "sigma_ms", "erasure"});
            SessionProfile sp = i < c.sessions.size() ? c.sessions[i] : SessionProfile{};
            maybe(s, "t_p_ms", [&](const json& v) { sp.propagation_delay = get_number(v, p + ".t_p_ms") * 1e-3; });
            maybe(s, "bandwidth_mbps", [&](const json& v) { sp.bandwidth = get_number(v, p + ".bandwidth_mbps") * 1e6; });
            maybe(s, "ceiling", [&](const json& v) { sp.ceiling = get_number(v, p + ".ceiling"); });
            maybe(s, "sigma_ms", [&](const json& v) { sp.sigma = get_number(v, p + ".sigma_ms") * 1e-3; });
            maybe(s, "erasure", [&](const json& v) { sp.erasure = get_number(v, p + ".erasure"); });
            sp.validate(p);
            out.push_back(sp);
        }
        c.sessions = std::move(out);
    });
    maybe(j, "model", [&](const json& m) {
        check_keys(m, "model", {"Z", "B", "N"});
        maybe(m, "Z", [&](const json& v) { c.capacity = get_unsigned(v, "model.Z"); });
        maybe(m, "B", [&](const json& v) { c.max_block = get_unsigned(v, "model.B"); });
        maybe(m, "N", [&](const json& v) { c.max_arrival = get_unsigned(v, "model.N"); });
    });
    maybe(j, "params", [&](const json& p) {
        check_keys(p, "params", {"gamma_d", "gamma_s", "gamma_tau", "packet_bits", "deadline_ms", "grid_rate"});
        maybe(p, "gamma_d", [&](const json& v) { c.params.gamma_d = get_number(v, "params.gamma_d"); });
        maybe(p, "gamma_s", [&](const json& v) { c.params.gamma_s = get_number(v, "params.gamma_s"); });
        maybe(p, "gamma_tau", [&](const json& v) { c.params.gamma_tau = get_number(v, "params.gamma_tau"); });
        maybe(p, "packet_bits", [&](const json& v) { c.params.packet_bits = get_number(v, "params.packet_bits"); });
        maybe(p, "deadline_ms", [&](const json& v) { c.params.deadline = get_number(v, "params.deadline_ms") * 1e-3; });
        maybe(p, "grid_rate", [&](const json& v) { c.params.grid_rate = get_number(v, "params.grid_rate"); });
    });
    maybe(j, "thresholds", [&](const json& t) {
        check_keys(t, "thresholds", {"r_th", "w_th_mbps", "d_th"});
        maybe(t, "r_th", [&](const json& v) { c.r_th = get_number(v, "thresholds.r_th"); });
        maybe(t, "d_th", [&](const json& v) { c.d_th = get_number(v, "thresholds.d_th"); });
        maybe(t, "w_th_mbps", [&](const json& v) {
            if (!v.is_array()) {
                throw InvalidParams("thresholds.w_th_mbps: expected an array (null = unconstrained)");
            }
            c.w_th.clear();
            for (std::size_t i = 0; i < v.size(); ++i) {
                c.w_th.push_back(v[i].is_null() ? std::numeric_limits<double>::infinity()
                                                : get_number(v[i], "thresholds.w_th_mbps[" + std::to_string(i) + "]") * 1e6);
            }
        });
    });
    maybe(j, "topology", [&](const json& t) {
        check_keys(t, "topology", {"sessions"});
        if (!t.contains("sessions") || !t.at("sessions").is_array()) {
            throw InvalidParams("topology.sessions: expected an array of arrays");
        }
        Topology topo;
        for (std::size_t i = 0; i < t.at("sessions").size(); ++i) {
            topo.sessions.push_back(get_numbers(t.at("sessions")[i], "topology.sessions[" + std::to_string(i) + "]"));
        }
        topo.validate();
        c.topology = std::move(topo);
    });
    maybe(j, "seed", [&](const json& v) { c.seed = get_unsigned(v, "seed"); });
    maybe(j, "slots", [&](const json& v) { c.slots = get_unsigned(v, "slots"); });
    maybe(j, "full_grid", [&](const json& v) { c.full_grid = get_bool(v, "full_grid"); });
    return c;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidParams(path + ": cannot open");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidParams(path + ": " + e.what());
    }
}

inline ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {}) {
    return apply_config(read_json_file(path), std::move(base));
}

/// Fully resolved configuration in the file format (round-trips through apply_config).
inline json to_json(const ScenarioConfig& c) {
    json j;
    j["name"] = c.name;
    j["arrivals"] = {{"granularity", c.granularity}, {"table", c.arrival_row}};
    json ss = json::array();
    for (const auto& s : c.sessions) {
        ss.push_back({{"t_p_ms", s.propagation_delay * 1e3},
                      {"bandwidth_mbps", s.bandwidth / 1e6},
                      {"ceiling", s.ceiling},
                      {"sigma_ms", s.sigma * 1e3},
                      {"erasure", s.erasure}});
    }
    j["sessions"] = ss;
    j["model"] = {{"Z", c.capacity}, {"B", c.max_block}, {"N", c.model().max_arrival}};
    j["params"] = {{"gamma_d", c.params.gamma_d},         {"gamma_s", c.params.gamma_s},
                   {"gamma_tau", c.params.gamma_tau},     {"packet_bits", c.params.packet_bits},
                   {"deadline_ms", c.params.deadline * 1e3}, {"grid_rate", c.params.grid_rate}};
    json w = json::array();
    for (double x : c.w_th) {
        w.push_back(std::isfinite(x) ? json(x / 1e6) : json(nullptr));
    }
    j["thresholds"] = {{"r_th", c.r_th}, {"w_th_mbps", w}, {"d_th", c.d_th}};
    if (c.topology) {
        j["topology"] = {{"sessions", c.topology->sessions}};
    }
    j["seed"] = c.seed;
    j["slots"] = c.slots;
    j["full_grid"] = c.full_grid;
    return j;
}

}  // namespace cmtlab
