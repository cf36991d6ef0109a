#pragma once

// Dense two-phase primal simplex for small linear programs.
//
//   minimize  c'x
//   s.t.      A_eq x  = b_eq
//             A_le x <= b_le
//             0 <= x <= u     (u = 0 fixes a variable, u = inf leaves it free above)
//
// Scalar may be double or an exact rational type (boost::multiprecision::cpp_rational).
// Pricing is Dantzig's rule; after a run of degenerate pivots it switches to
// Bland's rule until the objective moves again. Ratio-test ties go to the
// basic variable with the smallest column index. Rows are scaled by powers
// of two so exact arithmetic stays exact.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "cmtlab/error.hpp"

namespace cmtlab {

struct LpProblem {
    std::vector<double> objective;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;
    std::vector<double> upper;  // empty = all +inf
    std::vector<std::string> names;

    std::size_t num_vars() const noexcept { return objective.size(); }

    double upper_bound(std::size_t k) const noexcept {
        return upper.empty() ? std::numeric_limits<double>::infinity() : upper[k];
    }

    void validate() const {
        const std::size_t n = num_vars();
        if (eq_rows.size() != eq_rhs.size() || le_rows.size() != le_rhs.size()) {
            throw StructuralError("LpProblem: row and rhs counts differ");
        }
        for (const auto& r : eq_rows) {
            if (r.size() != n) {
                throw StructuralError("LpProblem: equality row width differs from variable count");
            }
        }
        for (const auto& r : le_rows) {
            if (r.size() != n) {
                throw StructuralError("LpProblem: inequality row width differs from variable count");
            }
        }
        if (!upper.empty() && upper.size() != n) {
            throw StructuralError("LpProblem: upper bound count differs from variable count");
        }
        if (!names.empty() && names.size() != n) {
            throw StructuralError("LpProblem: name count differs from variable count");
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (!(upper_bound(k) >= 0.0)) {
                throw InvalidParams("LpProblem: negative upper bound on variable " + std::to_string(k));
            }
        }
    }

    /// Largest violation of any constraint or bound at x.
    double max_violation(const std::vector<double>& x) const {
        double v = 0.0;
        const auto dot = [&](const std::vector<double>& r) {
            double s = 0.0;
            for (std::size_t k = 0; k < r.size(); ++k) {
                s += r[k] * x[k];
            }
            return s;
        };
        for (std::size_t i = 0; i < eq_rows.size(); ++i) {
            v = std::max(v, std::abs(dot(eq_rows[i]) - eq_rhs[i]));
        }
        for (std::size_t i = 0; i < le_rows.size(); ++i) {
            v = std::max(v, dot(le_rows[i]) - le_rhs[i]);
        }
        for (std::size_t k = 0; k < x.size(); ++k) {
            v = std::max(v, -x[k]);
            v = std::max(v, x[k] - upper_bound(k));
        }
        return v;
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) noexcept {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

template <class Scalar>
struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<Scalar> x;
    Scalar objective{};
    /// When infeasible: y with y'A <= 0 on every free column and y'b > 0, over
    /// the rows [eq rows, le rows, finite-upper-bound rows]. Empty otherwise.
    std::vector<Scalar> farkas;
    std::size_t iterations = 0;
    double max_violation = 0.0;
};

struct SimplexOptions {
    std::size_t max_iterations = 100000;
    std::size_t degenerate_streak = 50;
};

namespace detail {

template <class S>
double to_double(const S& v) {
    if constexpr (std::is_floating_point_v<S>) {
        return static_cast<double>(v);
    } else {
        return v.template convert_to<double>();
    }
}

template <class S>
S tolerance() {
    if constexpr (std::is_floating_point_v<S>) {
        return S(1e-9);
    } else {
        return S(0);
    }
}

template <class S>
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_(rows * (cols + 1)), d_(cols + 1) {}

    S& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
    const S& at(std::size_t i, std::size_t j) const { return a_[i * (n_ + 1) + j]; }
    S& rhs(std::size_t i) { return at(i, n_); }
    S& cost(std::size_t j) { return d_[j]; }
    S& neg_value() { return d_[n_]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    void pivot(std::size_t r, std::size_t c) {
        const std::size_t w = n_ + 1;
        S* pr = &a_[r * w];
        const S inv = S(1) / pr[c];
        for (std::size_t j = 0; j < w; ++j) {
            if (pr[j] != S(0)) {
                pr[j] *= inv;
            }
        }
        pr[c] = S(1);
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) {
                continue;
            }
            S* pi = &a_[i * w];
            const S f = pi[c];
            if (f == S(0)) {
                continue;
            }
            for (std::size_t j = 0; j < w; ++j) {
                if (pr[j] != S(0)) {
                    pi[j] -= f * pr[j];
                }
            }
            pi[c] = S(0);
        }
        const S f = d_[c];
        if (f != S(0)) {
            for (std::size_t j = 0; j < w; ++j) {
                if (pr[j] != S(0)) {
                    d_[j] -= f * pr[j];
                }
            }
            d_[c] = S(0);
        }
    }

    void erase_row(std::size_t r) {
        const std::size_t w = n_ + 1;
        a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r * w), a_.begin() + static_cast<std::ptrdiff_t>((r + 1) * w));
        --m_;
    }

private:
    std::size_t m_;
    std::size_t n_;
    std::vector<S> a_;
    std::vector<S> d_;
};

}  // namespace detail

template <class Scalar = double>
LpResult<Scalar> solve_lp(const LpProblem& prob, const SimplexOptions& opt = {}) {
    using S = Scalar;
    prob.validate();
    const std::size_t n = prob.num_vars();
    const S tol = detail::tolerance<S>();

    // Columns: free structural variables, then slacks, then artificials.
    std::vector<std::size_t> free_vars;
    for (std::size_t k = 0; k < n; ++k) {
        if (prob.upper_bound(k) > 0.0) {
            free_vars.push_back(k);
        }
    }
    struct Row {
        const std::vector<double>* coef = nullptr;
        std::size_t single = 0;  // bound row: coefficient 1 on this variable
        double rhs = 0.0;
        bool is_le = false;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < prob.eq_rows.size(); ++i) {
        rows.push_back({&prob.eq_rows[i], 0, prob.eq_rhs[i], false});
    }
    for (std::size_t i = 0; i < prob.le_rows.size(); ++i) {
        rows.push_back({&prob.le_rows[i], 0, prob.le_rhs[i], true});
    }
    for (std::size_t k : free_vars) {
        if (std::isfinite(prob.upper_bound(k))) {
            rows.push_back({nullptr, k, prob.upper_bound(k), true});
        }
    }
    const std::size_t m = rows.size();
    const std::size_t ns = free_vars.size();
    std::size_t n_slack = 0;
    for (const auto& r : rows) {
        n_slack += r.is_le ? 1 : 0;
    }

    // Row scaling: sign makes rhs >= 0, power of two brings the largest |a_ij| into [0.5, 1).
    std::vector<double> dense(m * ns, 0.0);
    std::vector<double> scale(m, 1.0);
    std::vector<double> brow(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < ns; ++c) {
            const std::size_t k = free_vars[c];
            dense[i * ns + c] = rows[i].coef ? (*rows[i].coef)[k] : (k == rows[i].single ? 1.0 : 0.0);
        }
        double big = 0.0;
        for (std::size_t c = 0; c < ns; ++c) {
            big = std::max(big, std::abs(dense[i * ns + c]));
        }
        int e = 0;
        if (big > 0.0) {
            std::frexp(big, &e);
        }
        double s = std::ldexp(1.0, -e);
        if (rows[i].rhs < 0.0) {
            s = -s;
        }
        scale[i] = s;
        brow[i] = rows[i].rhs * s;
    }

    std::vector<std::size_t> art_of_row(m, SIZE_MAX);
    std::vector<std::size_t> init_col(m);
    std::size_t n_art = 0;
    {
        std::size_t slack = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (rows[i].is_le) {
                if (scale[i] > 0.0) {
                    init_col[i] = ns + slack;
                } else {
                    art_of_row[i] = n_art++;
                }
                ++slack;
            } else {
                art_of_row[i] = n_art++;
            }
        }
    }
    const std::size_t first_art = ns + n_slack;
    const std::size_t ncols = first_art + n_art;
    detail::Tableau<S> tab(m, ncols);
    std::vector<std::size_t> basis(m);
    {
        std::size_t slack = 0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t c = 0; c < ns; ++c) {
                const double v = dense[i * ns + c];
                if (v != 0.0) {
                    tab.at(i, c) = S(v * scale[i]);
                }
            }
            if (rows[i].is_le) {
                tab.at(i, ns + slack) = S(scale[i] > 0.0 ? 1.0 : -1.0);
                ++slack;
            }
            if (art_of_row[i] != SIZE_MAX) {
                init_col[i] = first_art + art_of_row[i];
                tab.at(i, init_col[i]) = S(1);
            }
            tab.rhs(i) = S(brow[i]);
            basis[i] = init_col[i];
        }
    }

    LpResult<S> res;
    std::size_t iters = 0;

    const auto run = [&](std::size_t allowed_cols) -> LpStatus {
        std::size_t streak = 0;
        for (;;) {
            if (iters >= opt.max_iterations) {
                return LpStatus::IterationLimit;
            }
            const bool bland = streak > opt.degenerate_streak;
            std::size_t enter = SIZE_MAX;
            S best{};
            for (std::size_t j = 0; j < allowed_cols; ++j) {
                const S& dj = tab.cost(j);
                if (dj < -tol) {
                    if (bland) {
                        enter = j;
                        break;
                    }
                    if (enter == SIZE_MAX || dj < best) {
                        enter = j;
                        best = dj;
                    }
                }
            }
            if (enter == SIZE_MAX) {
                return LpStatus::Optimal;
            }
            std::size_t leave = SIZE_MAX;
            S ratio{};
            for (std::size_t i = 0; i < tab.rows(); ++i) {
                const S& aic = tab.at(i, enter);
                if (!(aic > tol)) {
                    continue;
                }
                const S r = tab.rhs(i) / aic;
                if (leave == SIZE_MAX) {
                    leave = i;
                    ratio = r;
                    continue;
                }
                const S slack_tol = std::is_floating_point_v<S> ? S(1e-12) : S(0);
                if (r < ratio - slack_tol) {
                    leave = i;
                    ratio = r;
                } else if (!(r > ratio + slack_tol) && basis[i] < basis[leave]) {
                    leave = i;
                    ratio = std::min(r, ratio);
                }
            }
            if (leave == SIZE_MAX) {
                return LpStatus::Unbounded;
            }
            streak = tab.rhs(leave) <= tol ? streak + 1 : 0;
            tab.pivot(leave, enter);
            basis[leave] = enter;
            ++iters;
        }
    };

    // Phase 1: minimize the sum of artificials.
    for (std::size_t j = 0; j <= ncols; ++j) {
        tab.cost(j) = S(0);
    }
    for (std::size_t j = first_art; j < ncols; ++j) {
        tab.cost(j) = S(1);
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (art_of_row[i] != SIZE_MAX) {
            for (std::size_t j = 0; j < ncols; ++j) {
                tab.cost(j) -= tab.at(i, j);
            }
            tab.neg_value() -= tab.rhs(i);
        }
    }
    const LpStatus p1 = run(ncols);
    res.iterations = iters;
    if (p1 == LpStatus::IterationLimit) {
        res.status = p1;
        return res;
    }
    const S infeas = -tab.neg_value();
    const S feas_tol = std::is_floating_point_v<S> ? S(1e-9) : S(0);
    if (infeas > feas_tol) {
        res.status = LpStatus::Infeasible;
        res.farkas.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const S c0 = init_col[i] >= first_art ? S(1) : S(0);
            res.farkas[i] = (c0 - tab.cost(init_col[i])) * S(scale[i]);
        }
        return res;
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    std::vector<std::size_t> kept(m);
    for (std::size_t i = 0; i < m; ++i) {
        kept[i] = i;
    }
    for (std::size_t i = 0; i < tab.rows();) {
        if (basis[i] < first_art) {
            ++i;
            continue;
        }
        std::size_t c = SIZE_MAX;
        S big{};
        for (std::size_t j = 0; j < first_art; ++j) {
            const S v = tab.at(i, j) < S(0) ? -tab.at(i, j) : tab.at(i, j);
            if (v > tol && (c == SIZE_MAX || v > big)) {
                c = j;
                big = v;
            }
        }
        if (c == SIZE_MAX) {
            tab.erase_row(i);
            basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(i));
            kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
            continue;
        }
        tab.pivot(i, c);
        basis[i] = c;
        ++i;
    }

    // Phase 2.
    for (std::size_t j = 0; j <= ncols; ++j) {
        tab.cost(j) = S(0);
    }
    for (std::size_t c = 0; c < ns; ++c) {
        tab.cost(c) = S(prob.objective[free_vars[c]]);
    }
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        const S cb = basis[i] < ns ? S(prob.objective[free_vars[basis[i]]]) : S(0);
        if (cb == S(0)) {
            continue;
        }
        for (std::size_t j = 0; j <= ncols; ++j) {
            if (tab.at(i, j) != S(0)) {
                tab.cost(j) -= cb * tab.at(i, j);
            }
        }
    }
    const LpStatus p2 = run(first_art);
    res.iterations = iters;
    res.status = p2;
    if (p2 != LpStatus::Optimal) {
        return res;
    }

    std::vector<S> xs(first_art, S(0));
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        xs[basis[i]] = tab.rhs(i);
    }
    if constexpr (std::is_floating_point_v<S>) {
        // Recompute the basic solution from the scaled original rows.
        const auto mk = static_cast<Eigen::Index>(tab.rows());
        Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(mk, mk);
        Eigen::VectorXd bvec(mk);
        std::vector<std::size_t> slack_index(m, SIZE_MAX);
        for (std::size_t i = 0, s = 0; i < m; ++i) {
            if (rows[i].is_le) {
                slack_index[i] = ns + s++;
            }
        }
        for (Eigen::Index r = 0; r < mk; ++r) {
            const std::size_t i = kept[static_cast<std::size_t>(r)];
            bvec(r) = brow[i];
            for (Eigen::Index c = 0; c < mk; ++c) {
                const std::size_t col = basis[static_cast<std::size_t>(c)];
                double v = 0.0;
                if (col < ns) {
                    v = dense[i * ns + col] * scale[i];
                } else if (col == slack_index[i]) {
                    v = scale[i] > 0.0 ? 1.0 : -1.0;
                }
                bmat(r, c) = v;
            }
        }
        const auto lu = bmat.fullPivLu();
        if (lu.isInvertible()) {
            const Eigen::VectorXd xb = lu.solve(bvec);
            if ((xb.array() >= -1e-12).all()) {
                for (Eigen::Index c = 0; c < mk; ++c) {
                    xs[basis[static_cast<std::size_t>(c)]] = std::max(0.0, xb(c));
                }
            }
        }
    }
    res.x.assign(n, S(0));
    for (std::size_t c = 0; c < ns; ++c) {
        res.x[free_vars[c]] = xs[c];
    }
    res.objective = S(0);
    for (std::size_t k = 0; k < n; ++k) {
        if (res.x[k] != S(0)) {
            res.objective += S(prob.objective[k]) * res.x[k];
        }
    }
    std::vector<double> xd(n);
    for (std::size_t k = 0; k < n; ++k) {
        xd[k] = detail::to_double(res.x[k]);
    }
    res.max_violation = prob.max_violation(xd);
    return res;
}

}  // namespace cmtlab
