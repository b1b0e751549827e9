#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pcedep {

using MultiIndex = std::vector<int>;

/// Selects the max-norm in hyperbolic_set (full tensor grid).
struct MaxNorm {};
inline constexpr MaxNorm kMaxNorm{};

[[nodiscard]] int total_degree(const MultiIndex& index);

/// Ordered, duplicate-free set of multi-indices of a common dimension.
///
/// Ordering is ascending total degree; indices of equal degree are sorted in
/// descending lexicographic order, so in 2D the degree-1 block is (1,0),(0,1).
/// The order depends only on the set contents.
class MultiIndexSet {
public:
    /// Sorts and de-duplicates `indices`. Throws std::invalid_argument on
    /// negative entries or inconsistent lengths.
    MultiIndexSet(std::size_t dimension, std::vector<MultiIndex> indices);

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
    [[nodiscard]] const MultiIndex& operator[](std::size_t n) const { return indices_[n]; }
    [[nodiscard]] const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
    [[nodiscard]] auto begin() const noexcept { return indices_.begin(); }
    [[nodiscard]] auto end() const noexcept { return indices_.end(); }

    [[nodiscard]] bool contains(const MultiIndex& index) const;
    [[nodiscard]] bool is_downward_closed() const;
    /// Largest entry in coordinate `k` over the set.
    [[nodiscard]] int max_degree(std::size_t k) const;
    [[nodiscard]] int max_degree() const;

    friend bool operator==(const MultiIndexSet&, const MultiIndexSet&) = default;

private:
    std::size_t dimension_;
    std::vector<MultiIndex> indices_;
};

/// Orders two indices the way MultiIndexSet stores them.
[[nodiscard]] bool graded_before(const MultiIndex& a, const MultiIndex& b);

/// {λ : |λ|_1 ≤ p}.
[[nodiscard]] MultiIndexSet total_degree_set(int d, int p);

/// {λ : (Σ λ_i^q)^(1/q) ≤ p}, q > 0.
[[nodiscard]] MultiIndexSet hyperbolic_set(int d, int p, double q);

/// {λ : max λ_i ≤ p}.
[[nodiscard]] MultiIndexSet hyperbolic_set(int d, int p, MaxNorm);

/// Union of boxes {λ ≤ γ} over γ ≥ 1 with Σ (γ_k - 1) α_k ≤ level·min α.
/// Every coordinate may take the value 1 at level 0, so the set has at least
/// 2^d members; builds beyond `max_size` indices throw std::length_error.
[[nodiscard]] MultiIndexSet anisotropic_set(std::span<const double> alpha, int level,
                                            std::size_t max_size = 5'000'000);

/// Anisotropic total-degree set {λ : Σ λ_k α_k ≤ level·min α}. This is the
/// union of boxes above with the box corners shifted down by one, i.e. the
/// polynomial-degree form of the same level sets.
[[nodiscard]] MultiIndexSet anisotropic_total_degree_set(std::span<const double> alpha, int level,
                                                         std::size_t max_size = 5'000'000);

/// Anisotropy weights of the one-dimensional diffusion field with
/// normalized correlation length `L` (coordinate k uses frequency ⌊k/2⌋).
[[nodiscard]] std::vector<double> diffusion_alpha(int d, double L);

/// JSON array of integer arrays, one row per multi-index.
[[nodiscard]] nlohmann::json index_set_to_json(const MultiIndexSet& set);
[[nodiscard]] MultiIndexSet index_set_from_json(const nlohmann::json& j);

}  // namespace pcedep
