#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pcedep::testing {

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Asymptotic two-sided Kolmogorov-Smirnov critical value at level 0.01.
inline double ks_critical_001(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// sup |F_n - F| of the sample against the continuous CDF.
inline double ks_statistic(Eigen::VectorXd sample, const std::function<double(double)>& cdf) {
    std::sort(sample.data(), sample.data() + sample.size());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample(i));
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

inline double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::ArrayXd a = x.array() - x.mean();
    const Eigen::ArrayXd b = y.array() - y.mean();
    return (a * b).sum() / std::sqrt(a.square().sum() * b.square().sum());
}

inline double standard_error_of_mean(const Eigen::VectorXd& x) {
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().sum() / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

}  // namespace pcedep::testing
