#pragma once

// Finite Markov chains: closed communicating classes and stationary laws.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmtlab/error.hpp"

namespace cmtlab {

/// Closed (recurrent) communicating classes of the graph {i -> j : P(i, j) > 0},
/// each sorted, ordered by smallest member.
inline std::vector<std::vector<std::size_t>> closed_classes(const Eigen::MatrixXd& p) {
    const auto n = static_cast<std::size_t>(p.rows());
    // Tarjan, iterative.
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    int counter = 0;
    int ncomp = 0;
    struct Frame {
        std::size_t v;
        std::size_t next;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] >= 0) {
            continue;
        }
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            const std::size_t v = f.v;
            if (f.next < n) {
                const std::size_t w = f.next++;
                if (p(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) <= 0.0) {
                    continue;
                }
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                for (;;) {
                    const std::size_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                    if (w == v) {
                        break;
                    }
                }
                ++ncomp;
            }
            call.pop_back();
            if (!call.empty()) {
                const std::size_t u = call.back().v;
                low[u] = std::min(low[u], low[v]);
            }
        }
    }
    std::vector<bool> closed(static_cast<std::size_t>(ncomp), true);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0 && comp[i] != comp[j]) {
                closed[static_cast<std::size_t>(comp[i])] = false;
            }
        }
    }
    std::vector<std::vector<std::size_t>> out;
    std::vector<int> slot(static_cast<std::size_t>(ncomp), -1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(comp[i]);
        if (!closed[c]) {
            continue;
        }
        if (slot[c] < 0) {
            slot[c] = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[static_cast<std::size_t>(slot[c])].push_back(i);
    }
    return out;
}

inline void check_stochastic(const Eigen::MatrixXd& p, double tol = 1e-9) {
    if (p.rows() != p.cols() || p.rows() == 0) {
        throw StructuralError("transition matrix must be square and nonempty");
    }
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        if ((p.row(i).array() < -tol).any()) {
            throw StructuralError("transition matrix row " + std::to_string(i) + " has a negative entry");
        }
        const double s = p.row(i).sum();
        if (std::abs(s - 1.0) > tol) {
            throw StructuralError("transition matrix row " + std::to_string(i) + " sums to " + std::to_string(s));
        }
    }
}

/// Row vector pi with pi P = pi, sum 1, for a row-stochastic P
/// (P(i, j) = probability of moving from i to j).
///
/// Requires exactly one closed class; otherwise AmbiguousChain lists them.
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p) {
    check_stochastic(p);
    const auto classes = closed_classes(p);
    if (classes.size() != 1) {
        std::string msg = "chain has " + std::to_string(classes.size()) + " closed classes:";
        for (const auto& c : classes) {
            msg += " {";
            for (std::size_t k = 0; k < c.size(); ++k) {
                msg += (k ? "," : "") + std::to_string(c[k]);
            }
            msg += "}";
        }
        throw AmbiguousChain(msg);
    }
    const Eigen::Index n = p.rows();
    Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::VectorXd pi = a.fullPivLu().solve(b);
    pi = pi.cwiseMax(0.0);
    pi /= pi.sum();
    const double residual = (pi.transpose() * p - pi.transpose()).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-10)) {
        throw Error("stationary_distribution: residual " + std::to_string(residual) + " exceeds 1e-10");
    }
    return pi;
}

}  // namespace cmtlab
