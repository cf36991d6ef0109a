#pragma once

// Eavesdropping calculus over multi-session topologies and leak measurement.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmtlab/codec.hpp"
#include "cmtlab/error.hpp"

namespace cmtlab {

/// sessions[j][i] = probability that node i on session j is compromised.
struct Topology {
    std::vector<std::vector<double>> sessions;

    std::size_t session_count() const noexcept { return sessions.size(); }

    std::size_t node_count() const noexcept {
        std::size_t n = 0;
        for (const auto& s : sessions) {
            n += s.size();
        }
        return n;
    }

    void validate() const {
        if (sessions.empty()) {
            throw InvalidParams("topology: at least one session required");
        }
        for (std::size_t j = 0; j < sessions.size(); ++j) {
            for (std::size_t i = 0; i < sessions[j].size(); ++i) {
                const double p = sessions[j][i];
                if (!(p >= 0.0 && p <= 1.0)) {
                    throw InvalidParams("topology: sessions[" + std::to_string(j) + "][" + std::to_string(i) +
                                        "] = " + std::to_string(p) + " is not a probability");
                }
            }
        }
    }
};

struct NodeRef {
    std::size_t session = 0;
    std::size_t node = 0;
    auto operator<=>(const NodeRef&) const = default;
};

struct AttackerSet {
    std::set<NodeRef> nodes;
};

/// Probability that every session has at least one compromised node.
inline double intrusion_probability(const Topology& topo) {
    topo.validate();
    double prod = 1.0;
    for (const auto& s : topo.sessions) {
        double clean = 1.0;
        for (double p : s) {
            clean *= 1.0 - p;
        }
        prod *= 1.0 - clean;
    }
    return prod;
}

/// Distribution of the number of successes among independent Bernoulli(p_i).
inline std::vector<double> poisson_binomial(std::span<const double> ps) {
    std::vector<double> dist{1.0};
    dist.reserve(ps.size() + 1);
    for (double p : ps) {
        dist.push_back(0.0);
        for (std::size_t m = dist.size() - 1; m > 0; --m) {
            dist[m] = dist[m] * (1.0 - p) + dist[m - 1] * p;
        }
        dist[0] *= 1.0 - p;
    }
    return dist;
}

namespace detail {

inline std::vector<double> gather(const Topology& topo, std::span<const std::size_t> subset) {
    std::vector<double> ps;
    for (std::size_t j : subset) {
        if (j >= topo.session_count()) {
            throw InvalidParams("threat: session index " + std::to_string(j) + " out of range");
        }
        ps.insert(ps.end(), topo.sessions[j].begin(), topo.sessions[j].end());
    }
    return ps;
}

inline std::vector<std::size_t> complement(const Topology& topo, std::span<const std::size_t> subset) {
    std::vector<bool> in(topo.session_count(), false);
    for (std::size_t j : subset) {
        if (j >= in.size()) {
            throw InvalidParams("threat: session index " + std::to_string(j) + " out of range");
        }
        if (in[j]) {
            throw InvalidParams("threat: session index " + std::to_string(j) + " repeated in subset");
        }
        in[j] = true;
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < in.size(); ++j) {
        if (!in[j]) {
            out.push_back(j);
        }
    }
    return out;
}

}  // namespace detail

/// P[M] for M = 0..node_count(): law of the total number of compromised nodes.
inline std::vector<double> attacked_count_distribution(const Topology& topo) {
    topo.validate();
    std::vector<double> ps;
    for (const auto& s : topo.sessions) {
        ps.insert(ps.end(), s.begin(), s.end());
    }
    return poisson_binomial(ps);
}

/// Law of the compromised-node count restricted to the sessions in `subset`.
inline std::vector<double> subset_count_distribution(const Topology& topo, std::span<const std::size_t> subset) {
    topo.validate();
    detail::complement(topo, subset);
    return poisson_binomial(detail::gather(topo, subset));
}

/// Joint probability that exactly M nodes are compromised, all of them inside
/// the sessions of `subset`, with every node outside the subset clean.
inline double subset_attack_probability(const Topology& topo, std::span<const std::size_t> subset, std::size_t m) {
    topo.validate();
    if (subset.empty()) {
        throw InvalidParams("subset_attack_probability: subset must be nonempty");
    }
    const auto rest = detail::complement(topo, subset);
    const auto inside = poisson_binomial(detail::gather(topo, subset));
    if (m >= inside.size()) {
        throw InvalidParams("subset_attack_probability: M = " + std::to_string(m) + " exceeds the " +
                            std::to_string(inside.size() - 1) + " nodes in the subset");
    }
    double clean = 1.0;
    for (double p : detail::gather(topo, rest)) {
        clean *= 1.0 - p;
    }
    return inside[m] * clean;
}

/// P[subset | M]; std::nullopt when P[M] = 0.
inline std::optional<double> conditional_subset_probability(const Topology& topo,
                                                            std::span<const std::size_t> subset, std::size_t m) {
    const double joint = subset_attack_probability(topo, subset, m);
    const auto total = attacked_count_distribution(topo);
    if (m >= total.size() || total[m] == 0.0) {
        return std::nullopt;
    }
    return joint / total[m];
}

/// Index of the first candidate whose intrusion probability is at most
/// `threshold`, or nullopt if none qualifies.
inline std::optional<std::size_t> first_topology_within(std::span<const Topology> candidates, double threshold) {
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (intrusion_probability(candidates[k]) <= threshold) {
            return k;
        }
    }
    return std::nullopt;
}

/// True iff the attacker is nonempty, references existing nodes, and stays
/// inside a single session (non-cooperative eavesdropper).
inline bool validate_attacker(const AttackerSet& attacker, const Topology& topo) {
    if (attacker.nodes.empty()) {
        return false;
    }
    const std::size_t s = attacker.nodes.begin()->session;
    for (const auto& n : attacker.nodes) {
        if (n.session != s || n.session >= topo.session_count() || n.node >= topo.sessions[n.session].size()) {
            return false;
        }
    }
    return true;
}

struct LeakReport {
    std::size_t intercepted = 0;  // U
    std::size_t recovered = 0;    // S
    std::size_t block_size = 0;   // g
    double ratio = 0.0;
    double cap = 0.0;  // gamma_s
    bool secure = true;
};

/// What an eavesdropper on the attacker's session learns from `coded`.
/// `session_assignment[k]` is the session carrying coded packet k.
inline LeakReport measure_leak(const CodedBlock& coded, std::span<const std::size_t> session_assignment,
                               const AttackerSet& attacker, const Topology& topo, double gamma_s) {
    if (!validate_attacker(attacker, topo)) {
        throw InvalidParams("measure_leak: attacker must be nonempty and confined to one session");
    }
    if (session_assignment.size() != coded.size()) {
        throw StructuralError("measure_leak: session assignment length " + std::to_string(session_assignment.size()) +
                              " differs from " + std::to_string(coded.size()) + " coded packets");
    }
    const std::size_t target = attacker.nodes.begin()->session;
    std::vector<std::size_t> seen;
    for (std::size_t k = 0; k < session_assignment.size(); ++k) {
        if (session_assignment[k] == target) {
            seen.push_back(k);
        }
    }
    const std::size_t g = coded.generator_rows.cols();
    LeakReport r;
    r.intercepted = seen.size();
    r.recovered = seen.empty() ? 0 : recoverable_count(coded.generator_rows.select_rows(seen), g);
    r.block_size = g;
    r.ratio = g == 0 ? 0.0 : static_cast<double>(r.recovered) / static_cast<double>(g);
    r.cap = gamma_s;
    r.secure = r.ratio <= gamma_s;
    return r;
}

}  // namespace cmtlab
