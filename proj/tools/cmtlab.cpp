// cmtlab command-line runner.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmtlab/cmdp.hpp"
#include "cmtlab/codec.hpp"
#include "cmtlab/io.hpp"
#include "cmtlab/reliability.hpp"
#include "cmtlab/scenario.hpp"
#include "cmtlab/slot_sim.hpp"
#include "cmtlab/threat.hpp"

namespace {

using namespace cmtlab;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInfeasible = 2;

struct Common {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool full_grid = false;
    std::string mode = "analytic";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "scenario JSON file");
    cmd->add_option("--preset", c.preset, "named scenario (e25 e45 e60 var078 var116 var138 eps-a eps-b eps-c)");
    cmd->add_option("--seed", c.seed, "master seed");
    cmd->add_option("--out", c.out, "output directory (default: stdout)");
    cmd->add_flag("--full-grid", c.full_grid, "use every grid weight vector instead of the maximal ones");
    cmd->add_option("--mode", c.mode, "analytic | full-codec")->check(CLI::IsMember({"analytic", "full-codec"}));
}

ScenarioConfig resolve(const Common& c) {
    ScenarioConfig s = c.preset.empty() ? ScenarioConfig{} : preset(c.preset);
    if (!c.config.empty()) {
        s = load_config(c.config, s);
    }
    if (c.seed) {
        s.seed = *c.seed;
    }
    if (c.full_grid) {
        s.full_grid = true;
    }
    s.validate();
    return s;
}

std::string csv_header(const ScenarioConfig& s) {
    return "# config: " + to_json(s).dump() + "\n# seed: " + std::to_string(s.seed) + "\n";
}

void emit(const Common& c, const std::string& name, const std::string& content) {
    if (c.out.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') {
            std::cout << '\n';
        }
    } else {
        write_file(c.out, name, content);
        std::cout << "wrote " << (std::filesystem::path(c.out) / name).string() << '\n';
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw InvalidParams("'" + item + "' is not a number");
        }
    }
    return out;
}

int cmd_tradeoff(const Common& c, const std::string& rth_list) {
    const ScenarioConfig s = resolve(c);
    const auto rs = parse_list(rth_list);
    if (rs.empty()) {
        throw InvalidParams("--rth: empty sweep");
    }
    const auto pts = tradeoff_curve(s.cmdp_spec(), rs);
    std::ostringstream os;
    os << csv_header(s);
    write_tradeoff_csv(os, pts, s.sessions.size());
    emit(c, "tradeoff.csv", os.str());
    bool all = true;
    for (const auto& p : pts) {
        all = all && p.feasible;
        if (!p.feasible) {
            std::cerr << "r_th=" << p.r_th << " infeasible: " << p.reason << '\n';
        }
    }
    return all ? kExitOk : kExitInfeasible;
}

int cmd_policy(const Common& c, std::optional<double> rth) {
    ScenarioConfig s = resolve(c);
    if (rth) {
        s.r_th = *rth;
        s.validate();
    }
    const CmdpLp lp = assemble_lp(s.cmdp_spec());
    const SolvedPolicy sp = solve_cmdp(lp, &s.params);
    json j;
    j["config"] = to_json(s);
    j["seed"] = s.seed;
    j["policy"] = to_json(sp, lp.catalog);
    emit(c, "policy.json", j.dump(2));
    if (!sp.feasible()) {
        std::cerr << "infeasible: " << sp.reason << '\n';
        return kExitInfeasible;
    }
    if (!c.out.empty()) {
        std::cout << "mean delay " << sp.objective << " slots; randomized states " << sp.summary.randomized_states;
        if (sp.summary.threshold) {
            std::cout << "; threshold q=" << *sp.summary.threshold << " mix " << sp.summary.mix_probability;
        }
        std::cout << '\n';
    }
    return kExitOk;
}

int cmd_simulate(const Common& c, const std::string& policy_path, std::optional<std::size_t> slots,
                 std::size_t sample_every, std::optional<std::size_t> attack_session) {
    ScenarioConfig s = resolve(c);
    if (slots) {
        s.slots = *slots;
        s.validate();
    }
    const CmdpLp lp = assemble_lp(s.cmdp_spec());
    Policy policy;
    double lp_delay = std::numeric_limits<double>::quiet_NaN();
    if (policy_path.empty()) {
        const SolvedPolicy sp = solve_cmdp(lp, &s.params);
        if (!sp.feasible()) {
            std::cerr << "infeasible: " << sp.reason << '\n';
            return kExitInfeasible;
        }
        policy = sp.policy;
        lp_delay = sp.objective;
    } else {
        json pj = read_json_file(policy_path);
        if (pj.contains("policy")) {
            pj = pj.at("policy");
        }
        policy = policy_from_json(pj, lp.catalog);
    }
    SimConfig cfg;
    cfg.arrivals = s.arrivals();
    cfg.sessions = s.sessions;
    cfg.params = s.params;
    cfg.catalog = lp.catalog;
    cfg.policy = policy;
    cfg.slots = s.slots;
    cfg.seed = s.seed;
    cfg.mode = c.mode == "full-codec" ? CodecMode::FullCodec : CodecMode::Analytic;
    cfg.d_th = s.d_th;
    cfg.sample_every = sample_every;
    if (cfg.mode == CodecMode::Analytic) {
        cfg.reliability = lp.reliability;
    }
    if (attack_session) {
        Topology topo = s.topology.value_or(Topology{std::vector<std::vector<double>>(s.sessions.size(), {0.0})});
        if (*attack_session >= topo.session_count() || topo.sessions[*attack_session].empty()) {
            throw InvalidParams("--attack-session: no such session with nodes");
        }
        AttackerSet att;
        for (std::size_t i = 0; i < topo.sessions[*attack_session].size(); ++i) {
            att.nodes.insert({*attack_session, i});
        }
        cfg.topology = topo;
        cfg.attacker = att;
    }
    const SimStats st = run(cfg);
    json j;
    j["config"] = to_json(s);
    j["seed"] = s.seed;
    j["stats"] = to_json(st, cfg.mode);
    if (std::isfinite(lp_delay)) {
        j["lp_mean_delay"] = lp_delay;
    }
    std::ostringstream hist;
    hist << csv_header(s);
    write_histogram_csv(hist, st);
    if (c.out.empty()) {
        std::cout << j.dump(2) << '\n' << hist.str();
    } else {
        emit(c, "simulate.json", j.dump(2));
        emit(c, "histogram.csv", hist.str());
        if (sample_every > 0) {
            std::ostringstream ts;
            ts << csv_header(s);
            write_series_csv(ts, st);
            emit(c, "series.csv", ts.str());
        }
        std::cout << "mean delay " << st.mean_delay << " slots over " << st.slots << " slots\n";
    }
    return kExitOk;
}

int cmd_codec_curve(const Common& c, std::size_t g, std::optional<std::size_t> m, std::size_t trials,
                    std::optional<std::size_t> max_received) {
    const std::uint64_t seed = c.seed.value_or(1);
    CodecParams p = CodecParams::defaults(g, seed);
    if (m) {
        p.intermediate_count = *m;
        p.distribution = DegreeDistribution::robust_soliton(*m);
    }
    p.validate();
    const std::size_t k = max_received.value_or(g + g / 5);
    const auto curve = decode_curve(p, k, trials);
    std::ostringstream os;
    json cfg{{"g", g}, {"m", p.intermediate_count}, {"degree_law", "robust_soliton(m, c=0.1, delta=0.5)"},
             {"trials", trials}, {"max_received", k}};
    os << "# config: " << cfg.dump() << "\n# seed: " << seed << '\n';
    write_curve_csv(os, curve);
    emit(c, "codec_curve.csv", os.str());
    return kExitOk;
}

int cmd_threat(const Common& c, const std::string& topo_path, const std::string& subset, std::optional<std::size_t> m) {
    Topology topo;
    json echo;
    if (!topo_path.empty()) {
        const json j = read_json_file(topo_path);
        const json& t = j.contains("topology") ? j.at("topology") : j;
        ScenarioConfig tmp = apply_config(json{{"topology", t}}, ScenarioConfig{});
        topo = *tmp.topology;
    } else {
        const ScenarioConfig s = resolve(c);
        if (!s.topology) {
            throw InvalidParams("threat: no topology (use --topology or a config with a topology section)");
        }
        topo = *s.topology;
    }
    echo = {{"sessions", topo.sessions}};
    json out;
    out["topology"] = echo;
    out["intrusion_probability"] = intrusion_probability(topo);
    out["attacked_count_distribution"] = attacked_count_distribution(topo);
    if (!subset.empty()) {
        std::vector<std::size_t> idx;
        for (double v : parse_list(subset)) {
            if (v < 0 || v != std::floor(v)) {
                throw InvalidParams("--subset: session indices must be nonnegative integers");
            }
            idx.push_back(static_cast<std::size_t>(v));
        }
        json q{{"subset", idx}};
        const std::size_t mm = m.value_or(1);
        q["M"] = mm;
        q["joint"] = subset_attack_probability(topo, idx, mm);
        q["conditional"] = detail::optional_json(conditional_subset_probability(topo, idx, mm));
        out["subset_query"] = q;
    }
    emit(c, "threat.json", out.dump(2));
    return kExitOk;
}

int cmd_fscler_curve(const Common& c, const std::string& weights, double g, double t_max_ms, std::size_t points) {
    const ScenarioConfig s = resolve(c);
    const auto w = weights.empty() ? weight_grid(s.sessions.size(), s.params).front() : parse_list(weights);
    if (w.size() != s.sessions.size()) {
        throw InvalidParams("--weights: one weight per session required");
    }
    if (points < 2 || !(t_max_ms > 0)) {
        throw InvalidParams("fscler-curve: need --points >= 2 and --t-max-ms > 0");
    }
    std::vector<double> ts;
    for (std::size_t i = 0; i < points; ++i) {
        ts.push_back(t_max_ms * 1e-3 * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    const auto samples = fscler_curve(ts, w, g, s.sessions, s.params);
    std::ostringstream os;
    os << csv_header(s) << "# weights: " << json(w).dump() << " g: " << g << '\n';
    write_fscler_csv(os, samples);
    emit(c, "fscler_curve.csv", os.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cmtlab: coded multipath transfer scheduling toolkit"};
    app.require_subcommand(1);

    Common tc, pc, sc, cc, thc, fc;

    std::string rth_list = "0.99,0.995,0.997,0.998,0.999,0.9993,0.9995,0.9996";
    auto* tradeoff = app.add_subcommand("tradeoff", "delay-reliability tradeoff curve (CSV)");
    add_common(tradeoff, tc);
    tradeoff->add_option("--rth", rth_list, "comma-separated r_th sweep");

    std::optional<double> rth;
    auto* policy = app.add_subcommand("policy", "solve the CMDP and emit the optimal policy (JSON)");
    add_common(policy, pc);
    policy->add_option("--rth", rth, "reliability threshold (default: config)");

    std::string policy_path;
    std::optional<std::size_t> slots;
    std::size_t sample_every = 0;
    std::optional<std::size_t> attack_session;
    auto* simulate = app.add_subcommand("simulate", "timeslot simulation (JSON + histogram CSV)");
    add_common(simulate, sc);
    simulate->add_option("--policy", policy_path, "policy JSON from 'policy' (default: solve the LP)");
    simulate->add_option("--slots", slots, "number of slots");
    simulate->add_option("--sample-every", sample_every, "record a time series every k slots");
    simulate->add_option("--attack-session", attack_session, "eavesdrop on every node of this session (full-codec)");

    std::size_t g = 100;
    std::optional<std::size_t> m;
    std::size_t trials = 1000;
    std::optional<std::size_t> max_received;
    auto* codec = app.add_subcommand("codec-curve", "decoded versus received packets (CSV)");
    add_common(codec, cc);
    codec->add_option("--g", g, "source block length");
    codec->add_option("--m", m, "intermediate symbols (default 4g)");
    codec->add_option("--trials", trials, "Monte Carlo trials");
    codec->add_option("--max-received", max_received, "largest received count (default 1.2 g)");

    std::string topo_path, subset;
    std::optional<std::size_t> subset_m;
    auto* threat = app.add_subcommand("threat", "intrusion and attacked-node statistics (JSON)");
    add_common(threat, thc);
    threat->add_option("--topology", topo_path, "topology JSON {\"sessions\": [[p, ...], ...]}");
    threat->add_option("--subset", subset, "comma-separated session indices for a subset query");
    threat->add_option("--M", subset_m, "attacked-node count for the subset query (default 1)");

    std::string weights;
    double fg = 100;
    double t_max_ms = 40;
    std::size_t points = 201;
    auto* fscler = app.add_subcommand("fscler-curve", "reliability function versus deadline (CSV)");
    add_common(fscler, fc);
    fscler->add_option("--weights", weights, "comma-separated weights (default: first maximal grid vector)");
    fscler->add_option("--g", fg, "block length");
    fscler->add_option("--t-max-ms", t_max_ms, "largest deadline in ms");
    fscler->add_option("--points", points, "number of samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*tradeoff) return cmd_tradeoff(tc, rth_list);
        if (*policy) return cmd_policy(pc, rth);
        if (*simulate) return cmd_simulate(sc, policy_path, slots, sample_every, attack_session);
        if (*codec) return cmd_codec_curve(cc, g, m, trials, max_received);
        if (*threat) return cmd_threat(thc, topo_path, subset, subset_m);
        if (*fscler) return cmd_fscler_curve(fc, weights, fg, t_max_ms, points);
    } catch (const InfeasibleProblem& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}
