#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "pcedep/basis.hpp"
#include "pcedep/measure.hpp"

namespace pcedep {

enum class WeightKind { christoffel, sqrt_density, constant };

[[nodiscard]] const char* to_string(WeightKind kind);
/// Throws std::invalid_argument for unknown names.
[[nodiscard]] WeightKind weight_kind_from_string(const std::string& name);

/// v(z) = 1 / sqrt(k(z)) with k the Christoffel function of `basis`.
[[nodiscard]] Eigen::VectorXd christoffel_weight(const PolynomialBasis& basis, const Eigen::MatrixXd& points);

/// Row preconditioner values. `density` is required for sqrt_density only.
[[nodiscard]] Eigen::VectorXd leja_weight(WeightKind kind, const PolynomialBasis& basis, const Eigen::MatrixXd& points,
                                          const JointDensity* density = nullptr);

/// Weighted Leja points and the truncated row-pivoted LU factors of the
/// preconditioned candidate Vandermonde matrix.
class LejaSequence {
public:
    LejaSequence(PolynomialBasis basis, Eigen::MatrixXd points, std::vector<std::size_t> pivots, Eigen::MatrixXd lower,
                 Eigen::MatrixXd upper, Eigen::VectorXd weight_values, WeightKind weight_kind, std::string provenance);

    [[nodiscard]] const PolynomialBasis& basis() const noexcept { return basis_; }
    [[nodiscard]] std::size_t size() const noexcept { return pivots_.size(); }
    /// Selected candidates in pivot order.
    [[nodiscard]] const Eigen::MatrixXd& points() const noexcept { return points_; }
    /// Candidate row index of each selected point.
    [[nodiscard]] const std::vector<std::size_t>& pivots() const noexcept { return pivots_; }
    /// Unit lower triangular, M×M.
    [[nodiscard]] const Eigen::MatrixXd& lower() const noexcept { return lower_; }
    /// Upper trapezoidal, M×N.
    [[nodiscard]] const Eigen::MatrixXd& upper() const noexcept { return upper_; }
    [[nodiscard]] const Eigen::VectorXd& weight_values() const noexcept { return weight_values_; }
    [[nodiscard]] WeightKind weight_kind() const noexcept { return weight_kind_; }
    [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }
    [[nodiscard]] bool square() const noexcept { return size() == basis_.size(); }

private:
    PolynomialBasis basis_;
    Eigen::MatrixXd points_;
    std::vector<std::size_t> pivots_;
    Eigen::MatrixXd lower_;
    Eigen::MatrixXd upper_;
    Eigen::VectorXd weight_values_;
    WeightKind weight_kind_;
    std::string provenance_;
};

/// First M steps of row-pivoted LU on diag(v) Φ. The pivot is the largest
/// entry of the current Schur complement column; entries within a relative
/// 1e-12 of it go to the smallest candidate index. Throws UnisolvenceFailure
/// when a pivot falls below 1e-13.
[[nodiscard]] LejaSequence build_leja(const PolynomialBasis& basis, const Eigen::MatrixXd& candidates, std::size_t m,
                                      WeightKind kind = WeightKind::christoffel,
                                      const JointDensity* density = nullptr, std::string provenance = {});

/// Coefficients of the interpolant of values `y` given at the sequence points.
/// Throws std::invalid_argument unless the sequence is square.
[[nodiscard]] Eigen::VectorXd interpolate(const LejaSequence& seq, const Eigen::VectorXd& y);

/// Weights of the interpolatory quadrature rule on the sequence points: the
/// first row of Φ⁻¹ scaled by the value of the constant basis function.
[[nodiscard]] Eigen::VectorXd quadrature_weights(const LejaSequence& seq);

/// Σ|v| / Σv. Throws DegenerateRule when Σv ≤ 0.
[[nodiscard]] double kappa_quadrature(const Eigen::VectorXd& weights);

/// Condition number of V Φ on the selected points; +∞ when singular.
[[nodiscard]] double kappa_vandermonde(const LejaSequence& seq);

[[nodiscard]] nlohmann::json leja_to_json(const LejaSequence& seq);

}  // namespace pcedep
