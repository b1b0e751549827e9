#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "pcedep/measure.hpp"

namespace pcedep {

enum class TargetSpace { gauss, uniform };

[[nodiscard]] const char* to_string(TargetSpace target);

/// Pearson correlation of Z_i, Z_j when the underlying standard normals have
/// correlation rho_v, by tensor Gauss-Hermite quadrature of the given order.
[[nodiscard]] double nataf_z_correlation(const Marginal& mi, const Marginal& mj, double rho_v, int order = 50);

/// Corrected Gaussian correlation R_V reproducing the Pearson correlation R_Z.
/// Bisection per pair; throws InfeasibleCorrelation when R_Z(i,j) lies outside
/// the range attainable by the marginals.
[[nodiscard]] Eigen::MatrixXd nataf_correlation_solve(const Eigen::MatrixXd& r_z, std::span<const Marginal> marginals,
                                                      int order = 50);

/// Pearson correlation matrix R_Z implied by the Gaussian correlation R_V.
[[nodiscard]] Eigen::MatrixXd nataf_z_correlation_matrix(const Eigen::MatrixXd& r_v,
                                                         std::span<const Marginal> marginals, int order = 50);

/// Z → U with U = L⁻¹ Φ⁻¹(F(Z)), optionally followed by u ↦ 2Φ(u) − 1.
class NatafTransform {
public:
    /// Solves for R_V from the target Pearson correlation R_Z.
    NatafTransform(std::vector<Marginal> marginals, const Eigen::MatrixXd& r_z, TargetSpace target);
    /// Uses a known Gaussian correlation R_V (e.g. of a Gaussian copula density)
    /// and derives R_Z from it.
    static NatafTransform from_gaussian_correlation(std::vector<Marginal> marginals, const Eigen::MatrixXd& r_v,
                                                    TargetSpace target);
    static NatafTransform for_density(const GaussianCopulaDensity& density, TargetSpace target);

    [[nodiscard]] std::size_t dimension() const noexcept { return marginals_.size(); }
    [[nodiscard]] TargetSpace target() const noexcept { return target_; }
    [[nodiscard]] const std::vector<Marginal>& marginals() const noexcept { return marginals_; }
    [[nodiscard]] const Eigen::MatrixXd& r_z() const noexcept { return r_z_; }
    [[nodiscard]] const Eigen::MatrixXd& r_v() const noexcept { return r_v_.entries(); }
    [[nodiscard]] const Eigen::MatrixXd& cholesky() const noexcept { return r_v_.cholesky(); }

    /// Throws BoundaryError when some F_i(z_i) is exactly 0 or 1.
    [[nodiscard]] Eigen::VectorXd forward(std::span<const double> z) const;
    [[nodiscard]] Eigen::VectorXd inverse(std::span<const double> u) const;
    [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& z) const;
    [[nodiscard]] Eigen::MatrixXd inverse(const Eigen::MatrixXd& u) const;

    /// Tensor density of U: standard normal or uniform on [-1, 1]^d.
    [[nodiscard]] TensorDensity target_density() const;

private:
    NatafTransform(std::vector<Marginal> marginals, Eigen::MatrixXd r_z, CorrelationMatrix r_v, TargetSpace target);

    std::vector<Marginal> marginals_;
    Eigen::MatrixXd r_z_;
    CorrelationMatrix r_v_;
    TargetSpace target_;
};

[[nodiscard]] nlohmann::json nataf_to_json(const NatafTransform& t);

/// Sequential conditional CDFs F_{i|i-1..1}(z_i | z_1..z_{i-1}).
class ConditionalCdfProvider {
public:
    virtual ~ConditionalCdfProvider() = default;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
    [[nodiscard]] virtual double conditional_cdf(std::size_t i, double zi, std::span<const double> prefix) const = 0;
    /// Interval bracketing coordinate i; may be infinite.
    [[nodiscard]] virtual std::pair<double, double> range(std::size_t i) const = 0;
};

class IndependentCdfProvider final : public ConditionalCdfProvider {
public:
    explicit IndependentCdfProvider(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {}
    [[nodiscard]] std::size_t dimension() const override { return marginals_.size(); }
    [[nodiscard]] double conditional_cdf(std::size_t i, double zi, std::span<const double> prefix) const override;
    [[nodiscard]] std::pair<double, double> range(std::size_t i) const override;

private:
    std::vector<Marginal> marginals_;
};

/// Closed-form conditionals of a Gaussian copula.
class CopulaCdfProvider final : public ConditionalCdfProvider {
public:
    explicit CopulaCdfProvider(GaussianCopulaDensity density) : density_(std::move(density)) {}
    [[nodiscard]] std::size_t dimension() const override { return density_.dimension(); }
    [[nodiscard]] double conditional_cdf(std::size_t i, double zi, std::span<const double> prefix) const override;
    [[nodiscard]] std::pair<double, double> range(std::size_t i) const override;

private:
    GaussianCopulaDensity density_;
};

/// Conditionals of any bounded 2D density by composite Gauss-Legendre
/// marginalization (`panels` panels of `order` nodes per integral).
class QuadratureCdfProvider2D final : public ConditionalCdfProvider {
public:
    explicit QuadratureCdfProvider2D(std::shared_ptr<const JointDensity> density, int panels = 32, int order = 10);
    [[nodiscard]] std::size_t dimension() const override { return 2; }
    [[nodiscard]] double conditional_cdf(std::size_t i, double zi, std::span<const double> prefix) const override;
    [[nodiscard]] std::pair<double, double> range(std::size_t i) const override;

    /// ∫ ω(z1, t) dt over the support of the second coordinate.
    [[nodiscard]] double first_marginal(double z1) const;

private:
    [[nodiscard]] double integrate(const std::function<double(double)>& f, double a, double b) const;

    std::shared_ptr<const JointDensity> density_;
    Box box_;
    int panels_;
    Eigen::VectorXd nodes_;
    Eigen::VectorXd weights_;
    double total_mass_;
};

struct BisectionOptions {
    double residual_tolerance = 1e-12;
    double width_tolerance = 1e-13;
    int max_iterations = 200;
};

/// Z → U ∈ [0,1]^d by sequential conditional CDFs in coordinate order 1..d.
class RosenblattTransform {
public:
    explicit RosenblattTransform(std::shared_ptr<const ConditionalCdfProvider> provider,
                                 BisectionOptions options = {});

    [[nodiscard]] std::size_t dimension() const { return provider_->dimension(); }
    [[nodiscard]] Eigen::VectorXd forward(std::span<const double> z) const;
    /// Sequential bisection; throws ConvergenceFailure when neither tolerance
    /// is met within the iteration budget.
    [[nodiscard]] Eigen::VectorXd inverse(std::span<const double> u) const;
    [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& z) const;
    [[nodiscard]] Eigen::MatrixXd inverse(const Eigen::MatrixXd& u) const;

private:
    std::shared_ptr<const ConditionalCdfProvider> provider_;
    BisectionOptions options_;
};

/// Picks the built-in provider for the density type; throws Unsupported when none applies.
[[nodiscard]] RosenblattTransform make_rosenblatt(std::shared_ptr<const JointDensity> density);

}  // namespace pcedep
