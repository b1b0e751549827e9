#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "pcedep/measure.hpp"
#include "pcedep/multi_index.hpp"
#include "pcedep/univariate_poly.hpp"

namespace pcedep {

/// Products Π_i φ^i_{λ_i}(z_i) over the ordered members λ of an index set.
class TensorBasis {
public:
    TensorBasis(MultiIndexSet index_set, std::vector<PolyFamily> families);
    TensorBasis(MultiIndexSet index_set, const PolyFamily& family);

    [[nodiscard]] std::size_t size() const noexcept { return index_set_.size(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return index_set_.dimension(); }
    [[nodiscard]] const MultiIndexSet& index_set() const noexcept { return index_set_; }
    [[nodiscard]] const std::vector<PolyFamily>& families() const noexcept { return families_; }
    /// True when every family is orthonormal, so the products are orthonormal
    /// for the tensor measure.
    [[nodiscard]] bool orthonormal() const;

    /// M×N matrix of basis values at the rows of `points`.
    [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::MatrixXd& points) const;

    /// Basis restricted to the first n members of the index set.
    [[nodiscard]] TensorBasis truncated(std::size_t n) const;

private:
    MultiIndexSet index_set_;
    std::vector<PolyFamily> families_;
};

/// Tensor basis turned orthonormal for a discrete measure: φ = ψ R⁻¹.
struct OrthogonalizedBasis {
    TensorBasis source;
    /// Upper triangular R⁻¹ with positive diagonal.
    Eigen::MatrixXd change_of_basis;
    std::string quadrature_used;
    /// σ_max / σ_min of the weighted Vandermonde √W Ψ.
    double gs_condition = 1.0;
};

/// Orthonormal basis in force for a surrogate: either a tensor basis or a
/// Gram-Schmidt orthogonalized one.
class PolynomialBasis {
public:
    PolynomialBasis(TensorBasis tensor);  // NOLINT(google-explicit-constructor)
    PolynomialBasis(OrthogonalizedBasis orthogonalized);  // NOLINT(google-explicit-constructor)

    [[nodiscard]] std::size_t size() const noexcept { return tensor_.size(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return tensor_.dimension(); }
    [[nodiscard]] const MultiIndexSet& index_set() const noexcept { return tensor_.index_set(); }
    [[nodiscard]] const TensorBasis& tensor() const noexcept { return tensor_; }
    [[nodiscard]] bool orthogonalized() const noexcept { return change_.has_value(); }
    /// R⁻¹ for orthogonalized bases; throws std::logic_error otherwise.
    [[nodiscard]] const Eigen::MatrixXd& change_of_basis() const;
    [[nodiscard]] double gs_condition() const noexcept { return gs_condition_; }
    [[nodiscard]] const std::string& quadrature_used() const noexcept { return quadrature_used_; }

    /// Value of the first (constant) basis function.
    [[nodiscard]] double constant_value() const;

    [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::MatrixXd& points) const;

    /// First n basis functions. For orthogonalized bases this equals
    /// orthogonalizing the first n tensor functions on the same rule.
    [[nodiscard]] PolynomialBasis truncated(std::size_t n) const;

private:
    TensorBasis tensor_;
    std::optional<Eigen::MatrixXd> change_;
    std::string quadrature_used_;
    double gs_condition_ = 1.0;
};

/// Entry (m, n) = φ_n(z^(m)). Throws std::invalid_argument on a dimension mismatch.
[[nodiscard]] Eigen::MatrixXd assemble_vandermonde(const PolynomialBasis& basis, const Eigen::MatrixXd& points);

/// Householder QR of √W Ψ with diag(R) > 0. Throws IllPosedOrthogonalization
/// when |R(n,n)| < 1e-12 |R(0,0)| or the rule has fewer nodes than basis functions.
[[nodiscard]] OrthogonalizedBasis gram_schmidt_orthogonalize(const TensorBasis& tensor,
                                                             const QuadratureRule& rule);

/// Reweights a rule for `dominating` into one for `target`: w ← w · ω / ν.
/// Throws std::domain_error when ν vanishes at a node.
[[nodiscard]] QuadratureRule density_ratio_quadrature(const QuadratureRule& dominating_rule,
                                                      const JointDensity& target,
                                                      const JointDensity& dominating);

/// Tensor Gauss-Hermite rule of a Gaussian copula density taken in its
/// Gaussian coordinates: nodes z_i = F_i⁻¹(Φ((R^{1/2} y)_i)) over the Hermite
/// nodes y, with the Hermite weights. R^{1/2} is the symmetric square root.
[[nodiscard]] QuadratureRule copula_gauss_hermite_rule(const GaussianCopulaDensity& density, int order);

/// Equal-weight rule on the rows of `samples`.
[[nodiscard]] QuadratureRule monte_carlo_rule(const Eigen::MatrixXd& samples);

/// k(z) = Σ_n φ_n(z)².
[[nodiscard]] Eigen::VectorXd christoffel(const PolynomialBasis& basis, const Eigen::MatrixXd& points);

/// κ^GS of √W Ψ; +∞ when σ_min = 0.
[[nodiscard]] double moment_condition_number(const TensorBasis& tensor, const QuadratureRule& rule);

/// Gram matrix Σ_j w_j φ(z_j) φ(z_j)ᵀ of `basis` under `rule`.
[[nodiscard]] Eigen::MatrixXd gram_matrix(const PolynomialBasis& basis, const QuadratureRule& rule);

/// σ_max / σ_min via SVD; +∞ when σ_min = 0.
[[nodiscard]] double condition_number(const Eigen::MatrixXd& m);

[[nodiscard]] nlohmann::json family_to_json(const PolyFamily& family);
[[nodiscard]] PolyFamily family_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json basis_to_json(const PolynomialBasis& basis);
[[nodiscard]] PolynomialBasis basis_from_json(const nlohmann::json& j);

}  // namespace pcedep
