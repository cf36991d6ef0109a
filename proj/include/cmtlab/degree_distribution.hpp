#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "cmtlab/error.hpp"
#include "cmtlab/rng.hpp"

namespace cmtlab {

/// Probability law over LT packet degrees 1..max_degree().
///
/// Any normalized law is accepted here; `has_degree_one()` is enforced where
/// a full codec is configured.
class DegreeDistribution {
public:
    /// `probabilities[d - 1]` is the probability of degree d.
    explicit DegreeDistribution(std::vector<double> probabilities)
        : probs_(std::move(probabilities)) {
        if (probs_.empty()) {
            throw InvalidParams("degree distribution: empty");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i])) {
                throw InvalidParams("degree distribution: entry for degree " + std::to_string(i + 1) +
                                    " is negative or not finite");
            }
            total += probs_[i];
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw InvalidParams("degree distribution: probabilities sum to " + std::to_string(total));
        }
        cdf_.resize(probs_.size());
        std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
    }

    static DegreeDistribution point(std::size_t degree) {
        if (degree == 0) {
            throw InvalidParams("degree distribution: degree must be >= 1");
        }
        std::vector<double> p(degree, 0.0);
        p[degree - 1] = 1.0;
        return DegreeDistribution(std::move(p));
    }

    /// Robust soliton law for k input symbols (Luby), spike at round(k / R),
    /// R = c * ln(k / delta) * sqrt(k).
    static DegreeDistribution robust_soliton(std::size_t k, double c = 0.1, double delta = 0.5) {
        if (k == 0) {
            throw InvalidParams("robust soliton: k must be >= 1");
        }
        if (!(c > 0.0) || !(delta > 0.0 && delta < 1.0)) {
            throw InvalidParams("robust soliton: need c > 0 and 0 < delta < 1");
        }
        if (k == 1) {
            return DegreeDistribution({1.0});
        }
        const double kd = static_cast<double>(k);
        const double r = c * std::log(kd / delta) * std::sqrt(kd);
        const auto spike = static_cast<std::size_t>(
            std::clamp(std::llround(kd / r), 1LL, static_cast<long long>(k)));
        std::vector<double> mu(k, 0.0);
        mu[0] = 1.0 / kd;
        for (std::size_t d = 2; d <= k; ++d) {
            mu[d - 1] = 1.0 / (static_cast<double>(d) * static_cast<double>(d - 1));
        }
        for (std::size_t d = 1; d < spike; ++d) {
            mu[d - 1] += r / (static_cast<double>(d) * kd);
        }
        mu[spike - 1] += r * std::log(r / delta) / kd;
        const double z = std::accumulate(mu.begin(), mu.end(), 0.0);
        for (double& x : mu) {
            x /= z;
        }
        // Trim the zero tail past the spike and absorb rounding into the last degree.
        std::size_t last = k;
        while (last > 1 && mu[last - 1] <= 0.0) {
            --last;
        }
        mu.resize(last);
        const double total = std::accumulate(mu.begin(), mu.end(), 0.0);
        mu.back() += 1.0 - total;
        return DegreeDistribution(std::move(mu));
    }

    /// Raptor encoding needs degree-one packets; checked by CodecParams.
    bool has_degree_one() const noexcept { return probs_[0] > 0.0; }

    std::size_t max_degree() const noexcept { return probs_.size(); }

    /// Probability of degree d (1-based); zero outside the support.
    double probability(std::size_t d) const noexcept {
        return d >= 1 && d <= probs_.size() ? probs_[d - 1] : 0.0;
    }

    const std::vector<double>& probabilities() const noexcept { return probs_; }

    double mean() const noexcept {
        double m = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            m += static_cast<double>(i + 1) * probs_[i];
        }
        return m;
    }

    /// Inverse-CDF sampling from one uniform01() draw.
    std::size_t sample(Rng& rng) const noexcept {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const auto idx = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
        return std::min(idx, probs_.size() - 1) + 1;
    }

private:
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

}  // namespace cmtlab
