#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "pcedep/basis.hpp"
#include "pcedep/leja.hpp"
#include "pcedep/measure.hpp"
#include "pcedep/transform.hpp"

namespace pcedep {

using ModelFunction = std::function<double(std::span<const double>)>;

/// f at each row of `points`.
[[nodiscard]] Eigen::VectorXd evaluate_model(const ModelFunction& f, const Eigen::MatrixXd& points);

/// Mixes a base seed with a stream id (splitmix64) so independent random
/// streams never share state.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class StrategyKind { gs, dom, nataf };

/// Surrogate construction strategy and its parameters. Names follow
/// gs_<α>_<β>, gs_mono, dom_<α>_<β>, nataf_gauss, nataf_unif.
struct Strategy {
    StrategyKind kind = StrategyKind::gs;
    double alpha = 1.0;
    double beta = 1.0;
    /// GS with monomial input basis.
    bool monomial = false;
    TargetSpace target = TargetSpace::gauss;

    [[nodiscard]] std::string name() const;
    /// Throws std::invalid_argument for malformed names.
    [[nodiscard]] static Strategy parse(const std::string& name);
};

/// Measure with respect to which moments of a surrogate hold.
enum class MomentSpace { target, dominating, u_space };

[[nodiscard]] const char* to_string(MomentSpace space);

struct Moments {
    double mean;
    double variance;
    MomentSpace space;
};

/// Σ α_n φ_n, evaluated through the Nataf map when present.
class PceSurrogate {
public:
    PceSurrogate(PolynomialBasis basis, Eigen::VectorXd coefficients, Strategy strategy,
                 std::optional<NatafTransform> transform = std::nullopt);

    [[nodiscard]] const PolynomialBasis& basis() const noexcept { return basis_; }
    [[nodiscard]] const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] const Strategy& strategy() const noexcept { return strategy_; }
    [[nodiscard]] const std::optional<NatafTransform>& transform() const noexcept { return transform_; }

    [[nodiscard]] Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const;

    /// Mean is the constant coefficient times the constant basis value;
    /// variance is the sum of squares of the remaining coefficients.
    [[nodiscard]] Moments moments() const;

private:
    PolynomialBasis basis_;
    Eigen::VectorXd coefficients_;
    Strategy strategy_;
    std::optional<NatafTransform> transform_;
};

/// Root mean square of f − f_N over the test samples, given f's values there.
[[nodiscard]] double l2_error(const Eigen::VectorXd& f_values, const PceSurrogate& s, const Eigen::MatrixXd& test_samples);
[[nodiscard]] double l2_error(const ModelFunction& f, const PceSurrogate& s, const Eigen::MatrixXd& test_samples);

/// max ω/g over the probe points; +∞ when g vanishes where ω does not.
[[nodiscard]] double domination_constant(const JointDensity& omega, const JointDensity& g, const Eigen::MatrixXd& probes);
/// Probes: `n` samples of ω plus `n` uniform samples on ω's support box.
[[nodiscard]] double domination_constant(const JointDensity& omega, const JointDensity& g, std::size_t n,
                                         std::uint64_t seed);

struct GsQuadrature {
    enum class Kind { tensor_gauss, monte_carlo, provided };
    Kind kind = Kind::tensor_gauss;
    /// Points per dimension: Gauss-Hermite in Gaussian coordinates for copula
    /// densities, otherwise Gauss-Legendre on the support box with density ratio.
    int order = 50;
    /// Monte Carlo samples of ω.
    std::size_t samples = 10000;
    /// Rule used as is for Kind::provided.
    std::shared_ptr<const QuadratureRule> rule;
};

struct FitConfig {
    std::size_t candidates = 10000;
    GsQuadrature gs_quadrature;
    WeightKind weight = WeightKind::christoffel;
};

struct FitResult {
    PceSurrogate surrogate;
    LejaSequence sequence;
    /// Values of f at the sequence points, in pivot order.
    Eigen::VectorXd values;
    /// κ^GS of the orthogonalization; NaN for strategies without one.
    double kappa_gs;
};

/// Quadrature used to orthogonalize against ω.
[[nodiscard]] QuadratureRule gs_quadrature_rule(const JointDensity& density, const GsQuadrature& q, std::uint64_t seed);

/// Strategy pipeline state shared across index sets within one trial:
/// candidates, GSO quadrature and, for nested index sets, the orthogonalized
/// basis of the largest set.
class StrategyFitter {
public:
    StrategyFitter(Strategy strategy, std::shared_ptr<const JointDensity> density, const MultiIndexSet& largest,
                   FitConfig config, std::uint64_t seed);

    [[nodiscard]] const Strategy& strategy() const noexcept { return strategy_; }
    [[nodiscard]] const Eigen::MatrixXd& candidates() const noexcept { return candidates_; }
    /// Basis for `set`; a prefix of the largest set reuses its orthogonalization.
    [[nodiscard]] PolynomialBasis basis_for(const MultiIndexSet& set) const;
    [[nodiscard]] FitResult fit(const MultiIndexSet& set, const ModelFunction& f) const;

private:
    [[nodiscard]] TensorBasis tensor_basis(const MultiIndexSet& set) const;

    Strategy strategy_;
    std::shared_ptr<const JointDensity> density_;
    FitConfig config_;
    std::uint64_t seed_;
    std::optional<NatafTransform> transform_;
    std::optional<QuadratureRule> gs_rule_;
    std::optional<PolynomialBasis> largest_basis_;
    Eigen::MatrixXd candidates_;
};

/// One-shot pipeline: orthogonalize or transform, build Leja, interpolate f.
[[nodiscard]] FitResult fit_strategy(const Strategy& strategy, std::shared_ptr<const JointDensity> density,
                                     const MultiIndexSet& index_set, const FitConfig& config, const ModelFunction& f,
                                     std::uint64_t seed);

[[nodiscard]] nlohmann::json surrogate_to_json(const PceSurrogate& s);

}  // namespace pcedep
