#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcedep/univariate_poly.hpp"

namespace pcedep {

using Rng = std::mt19937_64;

[[nodiscard]] double std_normal_pdf(double x);
[[nodiscard]] double std_normal_cdf(double x);
/// Φ⁻¹(p) for p in (0, 1).
[[nodiscard]] double std_normal_quantile(double p);

/// Univariate distribution with closed-form CDF and quantile.
class Marginal {
public:
    enum class Kind { beta, normal };

    /// Beta(α, β) in the statistics convention, affinely mapped to [lower, upper].
    static Marginal beta(double alpha, double beta, double lower = 0.0, double upper = 1.0);
    static Marginal uniform(double lower = 0.0, double upper = 1.0) { return beta(1.0, 1.0, lower, upper); }
    static Marginal normal(double mean = 0.0, double stddev = 1.0);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double param1() const noexcept { return p1_; }
    [[nodiscard]] double param2() const noexcept { return p2_; }
    [[nodiscard]] double lower() const noexcept { return lower_; }
    [[nodiscard]] double upper() const noexcept { return upper_; }

    [[nodiscard]] double pdf(double z) const;
    [[nodiscard]] double cdf(double z) const;
    /// 1 - F(z), accurate in the upper tail.
    [[nodiscard]] double sf(double z) const;
    [[nodiscard]] double quantile(double p) const;
    [[nodiscard]] double mean() const;
    [[nodiscard]] double variance() const;

    /// Φ⁻¹(F(z)) evaluated from whichever tail is smaller.
    /// Throws BoundaryError when F(z) is exactly 0 or 1.
    [[nodiscard]] double to_standard_normal(double z) const;
    /// F⁻¹(Φ(u)), tail-accurate inverse of to_standard_normal.
    [[nodiscard]] double from_standard_normal(double u) const;

    /// Orthonormal polynomial family of this distribution.
    [[nodiscard]] PolyFamily family() const;
    [[nodiscard]] std::string label() const;

private:
    Marginal(Kind kind, double p1, double p2, double lower, double upper)
        : kind_(kind), p1_(p1), p2_(p2), lower_(lower), upper_(upper) {}

    Kind kind_;
    double p1_;
    double p2_;
    double lower_;
    double upper_;
};

/// Axis-aligned box, possibly unbounded.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] std::size_t dimension() const noexcept { return lower.size(); }
    [[nodiscard]] bool finite() const;
    [[nodiscard]] bool contains(std::span<const double> z) const;
    [[nodiscard]] double volume() const;
    [[nodiscard]] static Box unit(std::size_t d);
};

/// Evaluable joint probability density.
class JointDensity {
public:
    virtual ~JointDensity() = default;

    [[nodiscard]] virtual std::size_t dimension() const = 0;
    [[nodiscard]] virtual Box support() const = 0;
    /// Value of the density; zero outside the support.
    [[nodiscard]] virtual double density(std::span<const double> z) const = 0;
    /// Draws `n` iid samples as rows. Throws Unsupported when not sampleable.
    [[nodiscard]] virtual Eigen::MatrixXd sample(std::size_t n, Rng& rng) const = 0;
    /// Univariate marginal with closed form, when one exists.
    [[nodiscard]] virtual const Marginal* marginal(std::size_t) const { return nullptr; }
    [[nodiscard]] virtual std::string label() const = 0;

    /// Density at each row of `points`.
    [[nodiscard]] Eigen::VectorXd density(const Eigen::MatrixXd& points) const;
};

/// Product of independent marginals.
class TensorDensity final : public JointDensity {
public:
    explicit TensorDensity(std::vector<Marginal> marginals);
    TensorDensity(std::size_t d, const Marginal& marginal)
        : TensorDensity(std::vector<Marginal>(d, marginal)) {}

    [[nodiscard]] std::size_t dimension() const override { return marginals_.size(); }
    [[nodiscard]] Box support() const override;
    [[nodiscard]] double density(std::span<const double> z) const override;
    using JointDensity::density;
    [[nodiscard]] Eigen::MatrixXd sample(std::size_t n, Rng& rng) const override;
    [[nodiscard]] const Marginal* marginal(std::size_t i) const override { return &marginals_.at(i); }
    [[nodiscard]] std::string label() const override;

    [[nodiscard]] const std::vector<Marginal>& marginals() const noexcept { return marginals_; }

private:
    std::vector<Marginal> marginals_;
};

/// Symmetric unit-diagonal positive definite matrix with its Cholesky factor.
class CorrelationMatrix {
public:
    /// Throws std::invalid_argument for asymmetric input, non-unit diagonal or
    /// entries outside [-1, 1], and NotPositiveDefinite when Cholesky fails.
    explicit CorrelationMatrix(Eigen::MatrixXd entries);
    static CorrelationMatrix identity(std::size_t d) {
        return CorrelationMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
    }

    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    /// Lower-triangular L with L Lᵀ = R.
    [[nodiscard]] const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
    [[nodiscard]] double log_determinant() const noexcept { return log_det_; }

private:
    Eigen::MatrixXd entries_;
    Eigen::MatrixXd chol_;
    double log_det_;
};

/// Constant off-diagonal correlation `rho`.
[[nodiscard]] Eigen::MatrixXd equicorrelation(std::size_t d, double rho);

/// Joint density with the given marginals coupled by a Gaussian copula.
class GaussianCopulaDensity final : public JointDensity {
public:
    GaussianCopulaDensity(std::vector<Marginal> marginals, CorrelationMatrix correlation);

    [[nodiscard]] std::size_t dimension() const override { return marginals_.size(); }
    [[nodiscard]] Box support() const override;
    [[nodiscard]] double density(std::span<const double> z) const override;
    using JointDensity::density;
    /// iid N(0, I) → correlate with L → Φ → marginal quantiles.
    [[nodiscard]] Eigen::MatrixXd sample(std::size_t n, Rng& rng) const override;
    [[nodiscard]] const Marginal* marginal(std::size_t i) const override { return &marginals_.at(i); }
    [[nodiscard]] std::string label() const override;

    [[nodiscard]] const std::vector<Marginal>& marginals() const noexcept { return marginals_; }
    [[nodiscard]] const CorrelationMatrix& correlation() const noexcept { return correlation_; }

private:
    std::vector<Marginal> marginals_;
    CorrelationMatrix correlation_;
};

/// Convenience: copula density with Beta marginals and correlation `r_v`.
[[nodiscard]] GaussianCopulaDensity gaussian_copula_density(std::vector<Marginal> marginals,
                                                            const Eigen::MatrixXd& r_v);

/// Samples of a copula density; fixed seed gives bit-identical output.
[[nodiscard]] Eigen::MatrixXd copula_sample(const GaussianCopulaDensity& density, std::size_t n,
                                            std::uint64_t seed);

struct BetaComponent {
    double weight;
    double alpha;
    double beta;
};

/// Σ_c w_c Π_i B(z_i; α_c, β_c) on [0, 1]^d.
class BetaMixtureDensity final : public JointDensity {
public:
    BetaMixtureDensity(std::vector<BetaComponent> components, std::size_t d);

    [[nodiscard]] std::size_t dimension() const override { return d_; }
    [[nodiscard]] Box support() const override { return Box::unit(d_); }
    [[nodiscard]] double density(std::span<const double> z) const override;
    using JointDensity::density;
    [[nodiscard]] Eigen::MatrixXd sample(std::size_t n, Rng& rng) const override;
    [[nodiscard]] std::string label() const override;

    [[nodiscard]] const std::vector<BetaComponent>& components() const noexcept { return components_; }

private:
    std::vector<BetaComponent> components_;
    std::vector<Marginal> marginals_;
    std::size_t d_;
};

/// C exp(-(z1^4/10 + (2 z2 - z1^2)^2 / 2)) on [-3, 3] x [-2, 6].
class BananaDensity final : public JointDensity {
public:
    /// Computes the normalization with an `order`-point Gauss-Legendre rule per dimension.
    explicit BananaDensity(int order = 200);

    [[nodiscard]] static double unnormalized(std::span<const double> z);
    [[nodiscard]] double normalization() const noexcept { return normalization_; }

    [[nodiscard]] std::size_t dimension() const override { return 2; }
    [[nodiscard]] Box support() const override;
    [[nodiscard]] double density(std::span<const double> z) const override;
    using JointDensity::density;
    /// Rejection sampling from the uniform proposal on the support.
    [[nodiscard]] Eigen::MatrixXd sample(std::size_t n, Rng& rng) const override;
    [[nodiscard]] std::string label() const override { return "banana"; }

private:
    double normalization_;
};

/// Gaussian product-kernel density estimate with Scott's-rule bandwidths,
/// truncated to the sample bounding box inflated by three bandwidths.
class KdeDensity final : public JointDensity {
public:
    /// Throws std::invalid_argument for fewer than 2 samples or a zero-variance dimension.
    explicit KdeDensity(Eigen::MatrixXd samples);

    [[nodiscard]] std::size_t dimension() const override { return static_cast<std::size_t>(samples_.cols()); }
    [[nodiscard]] Box support() const override { return support_; }
    [[nodiscard]] double density(std::span<const double> z) const override;
    using JointDensity::density;
    [[nodiscard]] Eigen::MatrixXd sample(std::size_t n, Rng& rng) const override;
    [[nodiscard]] std::string label() const override { return "kde(scott)"; }

    [[nodiscard]] const Eigen::VectorXd& bandwidths() const noexcept { return bandwidth_; }

private:
    Eigen::MatrixXd samples_;
    Eigen::VectorXd bandwidth_;
    Box support_;
};

/// iid per-dimension arcsine (Chebyshev) samples mapped to a finite box.
/// Throws Unsupported for unbounded boxes.
[[nodiscard]] Eigen::MatrixXd chebyshev_candidates(const Box& box, std::size_t n, std::uint64_t seed);

/// ⌈n/2⌉ Chebyshev samples on `box` followed by ⌊n/2⌋ samples of `density`.
[[nodiscard]] Eigen::MatrixXd mixed_candidates(const JointDensity& density, const Box& box, std::size_t n,
                                               std::uint64_t seed);

using PointFunction = std::function<double(std::span<const double>)>;

struct RejectionStats {
    std::size_t proposed = 0;
    std::size_t accepted = 0;
};

/// Uniform-proposal rejection sampling: accept z with probability
/// density(z) / (bound · q(z)), q the uniform density on `box`. Requires
/// bound ≥ sup density / q. Throws SamplingEfficiencyError when the
/// acceptance rate falls below 1e-4 and std::invalid_argument when a
/// proposal exceeds the bound.
[[nodiscard]] Eigen::MatrixXd rejection_sample(const PointFunction& density, const Box& box, double bound,
                                               std::size_t n, Rng& rng, RejectionStats* stats = nullptr);
[[nodiscard]] Eigen::MatrixXd rejection_sample(const PointFunction& density, const Box& box, double bound,
                                               std::size_t n, std::uint64_t seed,
                                               RejectionStats* stats = nullptr);

}  // namespace pcedep
