#pragma once

// Reference implementations used only as test oracles. They share no code
// with the library and favour obviousness over speed.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using u64 = std::uint64_t;

// SplitMix64 written out from its published definition.
struct SplitMix {
    u64 s;
    u64 next() {
        s += 0x9E3779B97F4A7C15ULL;
        u64 z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

inline u64 finalize(u64 z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline SplitMix stream(u64 seed, u64 id) { return {finalize(seed ^ finalize(id + 0x632BE59BD9B4E019ULL))}; }

using Bits = std::vector<std::vector<int>>;  // row-major 0/1 entries

inline int rank(Bits m) {
    int r = 0;
    const std::size_t cols = m.empty() ? 0 : m[0].size();
    for (std::size_t c = 0; c < cols && r < static_cast<int>(m.size()); ++c) {
        std::size_t p = static_cast<std::size_t>(r);
        while (p < m.size() && m[p][c] == 0) {
            ++p;
        }
        if (p == m.size()) {
            continue;
        }
        std::swap(m[p], m[static_cast<std::size_t>(r)]);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i != static_cast<std::size_t>(r) && m[i][c]) {
                for (std::size_t k = 0; k < cols; ++k) {
                    m[i][k] ^= m[static_cast<std::size_t>(r)][k];
                }
            }
        }
        ++r;
    }
    return r;
}

/// v in rowspace(m)  <=>  rank([m; v]) == rank(m)
inline bool in_span(const Bits& m, const std::vector<int>& v) {
    Bits aug = m;
    aug.push_back(v);
    return rank(aug) == rank(m);
}

inline int unit_count(const Bits& m, std::size_t g) {
    int n = 0;
    for (std::size_t i = 0; i < g; ++i) {
        std::vector<int> e(g, 0);
        e[i] = 1;
        n += m.empty() ? 0 : (in_span(m, e) ? 1 : 0);
    }
    return n;
}

inline Bits multiply(const Bits& a, const Bits& b) {
    const std::size_t n = a.size();
    const std::size_t k = b.size();
    const std::size_t w = k ? b[0].size() : 0;
    Bits out(n, std::vector<int>(w, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            int s = 0;
            for (std::size_t t = 0; t < k; ++t) {
                s ^= a[i][t] & b[t][j];
            }
            out[i][j] = s;
        }
    }
    return out;
}

/// Law of the number of compromised nodes by walking all 2^N compromise patterns.
inline std::vector<double> enumerate_counts(const std::vector<std::vector<double>>& sessions) {
    std::vector<double> p;
    for (const auto& s : sessions) {
        p.insert(p.end(), s.begin(), s.end());
    }
    std::vector<double> out(p.size() + 1, 0.0);
    for (u64 mask = 0; mask < (u64{1} << p.size()); ++mask) {
        double pr = 1.0;
        int m = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if ((mask >> i) & 1U) {
                pr *= p[i];
                ++m;
            } else {
                pr *= 1.0 - p[i];
            }
        }
        out[static_cast<std::size_t>(m)] += pr;
    }
    return out;
}

/// P(every session has a compromised node) by walking all 2^N patterns.
inline double enumerate_intrusion(const std::vector<std::vector<double>>& sessions) {
    std::vector<double> p;
    std::vector<std::size_t> owner;
    for (std::size_t j = 0; j < sessions.size(); ++j) {
        for (double x : sessions[j]) {
            p.push_back(x);
            owner.push_back(j);
        }
    }
    double total = 0.0;
    for (u64 mask = 0; mask < (u64{1} << p.size()); ++mask) {
        double pr = 1.0;
        std::vector<bool> hit(sessions.size(), false);
        for (std::size_t i = 0; i < p.size(); ++i) {
            if ((mask >> i) & 1U) {
                pr *= p[i];
                hit[owner[i]] = true;
            } else {
                pr *= 1.0 - p[i];
            }
        }
        bool all = true;
        for (bool h : hit) {
            all = all && h;
        }
        total += all ? pr : 0.0;
    }
    return total;
}

inline double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

/// The nested-sum form for sessions with a common per-node probability:
/// sum over (w_1, ..., w_{L-1}) with w_L = M - sum, each factor
/// C(N_j, w_j) p_j^w_j (1 - p_j)^(N_j - w_j), and the step u(N_L - w_L).
inline double nested_sum(const std::vector<int>& n, const std::vector<double>& p, int m) {
    const std::size_t L = n.size();
    std::function<double(std::size_t, int)> rec = [&](std::size_t j, int left) -> double {
        if (j + 1 == L) {
            const int w = left;
            if (w < 0 || n[j] - w < 0) {
                return 0.0;  // u(N_L - w_L) = 0
            }
            return binom(n[j], w) * std::pow(p[j], w) * std::pow(1.0 - p[j], n[j] - w);
        }
        double s = 0.0;
        for (int w = 0; w <= std::min(n[j], left); ++w) {
            s += binom(n[j], w) * std::pow(p[j], w) * std::pow(1.0 - p[j], n[j] - w) * rec(j + 1, left - w);
        }
        return s;
    };
    return rec(0, m);
}

/// Left stationary vector by repeated multiplication (row-stochastic p).
inline std::vector<double> power_iteration(const std::vector<std::vector<double>>& p, int iters = 200000) {
    const std::size_t n = p.size();
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < iters; ++it) {
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                y[j] += x[i] * p[i][j];
            }
        }
        // Lazy averaging defeats periodicity.
        double diff = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = 0.5 * (x[j] + y[j]);
            diff = std::max(diff, std::abs(v - x[j]));
            x[j] = v;
        }
        if (diff < 1e-15) {
            break;
        }
    }
    return x;
}

/// Standard normal CDF written with erf rather than erfc.
inline double phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

}  // namespace oracle
