#include "pcedep/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace pcedep {

int total_degree(const MultiIndex& index) {
    return std::accumulate(index.begin(), index.end(), 0);
}

bool graded_before(const MultiIndex& a, const MultiIndex& b) {
    const int da = total_degree(a);
    const int db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

MultiIndexSet::MultiIndexSet(std::size_t dimension, std::vector<MultiIndex> indices)
    : dimension_(dimension), indices_(std::move(indices)) {
    if (dimension_ == 0) throw std::invalid_argument("multi-index dimension must be >= 1");
    for (const auto& index : indices_) {
        if (index.size() != dimension_)
            throw std::invalid_argument("multi-index length " + std::to_string(index.size()) +
                                        " does not match dimension " + std::to_string(dimension_));
        if (std::any_of(index.begin(), index.end(), [](int v) { return v < 0; }))
            throw std::invalid_argument("multi-index entries must be non-negative");
    }
    std::sort(indices_.begin(), indices_.end(), graded_before);
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

bool MultiIndexSet::contains(const MultiIndex& index) const {
    return std::binary_search(indices_.begin(), indices_.end(), index, graded_before);
}

bool MultiIndexSet::is_downward_closed() const {
    // Checking the immediate predecessors suffices by induction.
    for (const auto& index : indices_) {
        MultiIndex pred = index;
        for (std::size_t k = 0; k < dimension_; ++k) {
            if (pred[k] == 0) continue;
            --pred[k];
            if (!contains(pred)) return false;
            ++pred[k];
        }
    }
    return true;
}

int MultiIndexSet::max_degree(std::size_t k) const {
    int m = 0;
    for (const auto& index : indices_) m = std::max(m, index[k]);
    return m;
}

int MultiIndexSet::max_degree() const {
    int m = 0;
    for (const auto& index : indices_) m = std::max(m, *std::max_element(index.begin(), index.end()));
    return m;
}

namespace {

// Enumerates {λ : Σ_k cost(k, λ_k) ≤ budget} for per-coordinate costs that
// are non-decreasing in λ_k and zero at λ_k = 0.
std::vector<MultiIndex> enumerate_budget(std::size_t d, double budget,
                                         const std::function<double(std::size_t, int)>& cost,
                                         std::size_t max_size) {
    const double limit = budget + 1e-12 * std::max(1.0, std::abs(budget));
    std::vector<MultiIndex> out;
    MultiIndex current(d, 0);
    std::function<void(std::size_t, double)> recurse = [&](std::size_t k, double used) {
        if (k == d) {
            if (out.size() >= max_size)
                throw std::length_error("index set exceeds " + std::to_string(max_size) + " members");
            out.push_back(current);
            return;
        }
        for (int v = 0;; ++v) {
            const double c = cost(k, v);
            if (used + c > limit) break;
            current[k] = v;
            recurse(k + 1, used + c);
        }
        current[k] = 0;
    };
    recurse(0, 0.0);
    return out;
}

void check_dims(int d, int p) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (p < 0) throw std::invalid_argument("degree must be >= 0");
}

}  // namespace

MultiIndexSet total_degree_set(int d, int p) {
    check_dims(d, p);
    auto indices = enumerate_budget(
        static_cast<std::size_t>(d), p, [](std::size_t, int v) { return static_cast<double>(v); },
        std::numeric_limits<std::size_t>::max());
    return {static_cast<std::size_t>(d), std::move(indices)};
}

MultiIndexSet hyperbolic_set(int d, int p, double q) {
    check_dims(d, p);
    if (!(q > 0.0)) throw std::invalid_argument("hyperbolic exponent q must be positive");
    const double budget = std::pow(static_cast<double>(p), q);
    auto indices = enumerate_budget(
        static_cast<std::size_t>(d), budget,
        [q](std::size_t, int v) { return v == 0 ? 0.0 : std::pow(static_cast<double>(v), q); },
        std::numeric_limits<std::size_t>::max());
    return {static_cast<std::size_t>(d), std::move(indices)};
}

MultiIndexSet hyperbolic_set(int d, int p, MaxNorm) {
    check_dims(d, p);
    auto indices = enumerate_budget(
        static_cast<std::size_t>(d), 0.0,
        [p](std::size_t, int v) { return v <= p ? 0.0 : std::numeric_limits<double>::infinity(); },
        std::numeric_limits<std::size_t>::max());
    return {static_cast<std::size_t>(d), std::move(indices)};
}

namespace {

double checked_alpha_min(std::span<const double> alpha, int level) {
    if (alpha.empty()) throw std::invalid_argument("anisotropy weights must be non-empty");
    if (level < 0) throw std::invalid_argument("level must be >= 0");
    for (double a : alpha)
        if (!(a > 0.0)) throw std::invalid_argument("anisotropy weights must be positive");
    return *std::min_element(alpha.begin(), alpha.end());
}

}  // namespace

MultiIndexSet anisotropic_set(std::span<const double> alpha, int level, std::size_t max_size) {
    const double amin = checked_alpha_min(alpha, level);
    auto indices = enumerate_budget(
        alpha.size(), level * amin,
        [alpha](std::size_t k, int v) { return (std::max(v, 1) - 1) * alpha[k]; }, max_size);
    return {alpha.size(), std::move(indices)};
}

MultiIndexSet anisotropic_total_degree_set(std::span<const double> alpha, int level,
                                           std::size_t max_size) {
    const double amin = checked_alpha_min(alpha, level);
    auto indices = enumerate_budget(
        alpha.size(), level * amin, [alpha](std::size_t k, int v) { return v * alpha[k]; },
        max_size);
    return {alpha.size(), std::move(indices)};
}

std::vector<double> diffusion_alpha(int d, double L) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(L > 0.0)) throw std::invalid_argument("correlation length must be positive");
    const double sqrt_pi = std::sqrt(M_PI);
    std::vector<double> alpha(static_cast<std::size_t>(d));
    alpha[0] = 0.5 * std::log(1.0 + std::sqrt(1.0 / (24.0 * sqrt_pi * L)));
    const double base = 0.5 * std::log(1.0 + std::sqrt(1.0 / (48.0 * sqrt_pi * L)));
    for (int k = 2; k <= d; ++k) {
        const double freq = (k / 2) * M_PI * L;
        alpha[static_cast<std::size_t>(k - 1)] = base * std::exp(freq * freq / 8.0);
    }
    return alpha;
}

nlohmann::json index_set_to_json(const MultiIndexSet& set) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& index : set) rows.push_back(index);
    return rows;
}

MultiIndexSet index_set_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("index set JSON must be a non-empty array");
    std::vector<MultiIndex> indices;
    indices.reserve(j.size());
    for (const auto& row : j) indices.push_back(row.get<MultiIndex>());
    return {indices.front().size(), std::move(indices)};
}

}  // namespace pcedep
