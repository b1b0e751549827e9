#include "pcedep/surrogate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pcedep/errors.hpp"
#include "pcedep/io.hpp"

namespace pcedep {

Eigen::VectorXd evaluate_model(const ModelFunction& f, const Eigen::MatrixXd& points) {
    Eigen::VectorXd out(points.rows());
    std::vector<double> row(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index k = 0; k < points.cols(); ++k) row[static_cast<std::size_t>(k)] = points(i, k);
        out(i) = f(row);
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// --- Strategy -----------------------------------------------------------------

std::string Strategy::name() const {
    switch (kind) {
        case StrategyKind::gs:
            if (monomial) return "gs_mono";
            return "gs_" + format_double(alpha) + "_" + format_double(beta);
        case StrategyKind::dom: return "dom_" + format_double(alpha) + "_" + format_double(beta);
        case StrategyKind::nataf: return target == TargetSpace::gauss ? "nataf_gauss" : "nataf_unif";
    }
    return "?";
}

Strategy Strategy::parse(const std::string& name) {
    Strategy s;
    if (name == "nataf_gauss" || name == "nataf_unif") {
        s.kind = StrategyKind::nataf;
        s.target = name == "nataf_gauss" ? TargetSpace::gauss : TargetSpace::uniform;
        return s;
    }
    if (name == "gs_mono") {
        s.monomial = true;
        return s;
    }
    const auto first = name.find('_');
    const auto second = first == std::string::npos ? std::string::npos : name.find('_', first + 1);
    if (second == std::string::npos) throw std::invalid_argument("unknown strategy '" + name + "'");
    const std::string head = name.substr(0, first);
    if (head == "gs") {
        s.kind = StrategyKind::gs;
    } else if (head == "dom") {
        s.kind = StrategyKind::dom;
    } else {
        throw std::invalid_argument("unknown strategy '" + name + "'");
    }
    try {
        s.alpha = parse_double(name.substr(first + 1, second - first - 1));
        s.beta = parse_double(name.substr(second + 1));
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("malformed strategy parameters in '" + name + "'");
    }
    if (!(s.alpha > 0.0) || !(s.beta > 0.0)) throw std::invalid_argument("strategy Beta parameters must be positive");
    return s;
}

const char* to_string(MomentSpace space) {
    switch (space) {
        case MomentSpace::target: return "target";
        case MomentSpace::dominating: return "dominating";
        case MomentSpace::u_space: return "u-space";
    }
    return "?";
}

// --- PceSurrogate -------------------------------------------------------------

PceSurrogate::PceSurrogate(PolynomialBasis basis, Eigen::VectorXd coefficients, Strategy strategy,
                           std::optional<NatafTransform> transform)
    : basis_(std::move(basis)),
      coefficients_(std::move(coefficients)),
      strategy_(strategy),
      transform_(std::move(transform)) {
    if (coefficients_.size() != static_cast<Eigen::Index>(basis_.size()))
        throw std::invalid_argument("coefficient count does not match the basis");
}

Eigen::VectorXd PceSurrogate::evaluate(const Eigen::MatrixXd& points) const {
    if (transform_) return basis_.evaluate(transform_->forward(points)) * coefficients_;
    return basis_.evaluate(points) * coefficients_;
}

Moments PceSurrogate::moments() const {
    const double c = basis_.constant_value();
    const double mean = c * coefficients_(0);
    const double variance = coefficients_.tail(coefficients_.size() - 1).squaredNorm();
    MomentSpace space = MomentSpace::target;
    if (strategy_.kind == StrategyKind::dom) space = MomentSpace::dominating;
    if (strategy_.kind == StrategyKind::nataf) space = MomentSpace::u_space;
    return {mean, variance, space};
}

double l2_error(const Eigen::VectorXd& f_values, const PceSurrogate& s, const Eigen::MatrixXd& test_samples) {
    if (test_samples.rows() == 0) throw std::invalid_argument("l2 error needs test samples");
    if (f_values.size() != test_samples.rows()) throw std::invalid_argument("value count does not match test samples");
    const Eigen::VectorXd diff = f_values - s.evaluate(test_samples);
    return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
}

double l2_error(const ModelFunction& f, const PceSurrogate& s, const Eigen::MatrixXd& test_samples) {
    if (test_samples.rows() == 0) throw std::invalid_argument("l2 error needs test samples");
    return l2_error(evaluate_model(f, test_samples), s, test_samples);
}

double domination_constant(const JointDensity& omega, const JointDensity& g, const Eigen::MatrixXd& probes) {
    const Eigen::VectorXd w = omega.density(probes);
    const Eigen::VectorXd d = g.density(probes);
    double best = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) == 0.0) continue;
        if (!(d(i) > 0.0)) return std::numeric_limits<double>::infinity();
        best = std::max(best, w(i) / d(i));
    }
    return best;
}

double domination_constant(const JointDensity& omega, const JointDensity& g, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const Eigen::MatrixXd from_omega = omega.sample(n, rng);
    const Box box = omega.support();
    if (!box.finite()) return domination_constant(omega, g, from_omega);
    Eigen::MatrixXd uniform(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(box.dimension()));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < uniform.rows(); ++i)
        for (Eigen::Index k = 0; k < uniform.cols(); ++k) {
            const auto kk = static_cast<std::size_t>(k);
            uniform(i, k) = box.lower[kk] + (box.upper[kk] - box.lower[kk]) * unif(rng);
        }
    Eigen::MatrixXd probes(from_omega.rows() + uniform.rows(), from_omega.cols());
    probes << from_omega, uniform;
    return domination_constant(omega, g, probes);
}

// --- pipelines ----------------------------------------------------------------

QuadratureRule gs_quadrature_rule(const JointDensity& density, const GsQuadrature& q, std::uint64_t seed) {
    if (q.kind == GsQuadrature::Kind::monte_carlo) {
        Rng rng(seed);
        return monte_carlo_rule(density.sample(q.samples, rng));
    }
    if (q.kind == GsQuadrature::Kind::provided) {
        if (!q.rule) throw std::invalid_argument("provided GSO rule is missing");
        return *q.rule;
    }
    const Box box = density.support();
    if (std::pow(static_cast<double>(q.order), static_cast<double>(box.dimension())) > 2e7)
        throw std::invalid_argument("tensor Gauss GSO rule too large; use a Monte Carlo rule");
    if (const auto* copula = dynamic_cast<const GaussianCopulaDensity*>(&density))
        return copula_gauss_hermite_rule(*copula, q.order);
    if (!box.finite()) throw Unsupported("tensor Gauss GSO rule needs a bounded support");
    std::vector<QuadratureRule> rules;
    std::vector<Marginal> uniforms;
    for (std::size_t k = 0; k < box.dimension(); ++k) {
        rules.push_back(gauss_rule(PolyFamily::legendre(box.lower[k], box.upper[k]), q.order));
        uniforms.push_back(Marginal::uniform(box.lower[k], box.upper[k]));
    }
    return density_ratio_quadrature(tensor_rule(rules), density, TensorDensity(std::move(uniforms)));
}

namespace {

bool is_prefix(const MultiIndexSet& head, const MultiIndexSet& full) {
    if (head.dimension() != full.dimension() || head.size() > full.size()) return false;
    for (std::size_t n = 0; n < head.size(); ++n)
        if (head[n] != full[n]) return false;
    return true;
}

Box unit_box(std::size_t d, double lo, double hi) {
    return {std::vector<double>(d, lo), std::vector<double>(d, hi)};
}

}  // namespace

StrategyFitter::StrategyFitter(Strategy strategy, std::shared_ptr<const JointDensity> density,
                               const MultiIndexSet& largest, FitConfig config, std::uint64_t seed)
    : strategy_(strategy), density_(std::move(density)), config_(config), seed_(seed) {
    if (!density_) throw std::invalid_argument("strategy needs a density");
    const std::size_t d = density_->dimension();
    if (largest.dimension() != d) throw std::invalid_argument("index set and density differ in dimension");
    const std::uint64_t candidate_seed = derive_seed(seed, 2);
    switch (strategy_.kind) {
        case StrategyKind::gs: {
            gs_rule_ = gs_quadrature_rule(*density_, config_.gs_quadrature, derive_seed(seed, 1));
            largest_basis_ = PolynomialBasis(gram_schmidt_orthogonalize(tensor_basis(largest), *gs_rule_));
            candidates_ = mixed_candidates(*density_, density_->support(), config_.candidates, candidate_seed);
            break;
        }
        case StrategyKind::dom: {
            const Box box = density_->support();
            std::vector<Marginal> marginals;
            for (std::size_t k = 0; k < d; ++k)
                marginals.push_back(Marginal::beta(strategy_.alpha, strategy_.beta, box.lower[k], box.upper[k]));
            candidates_ = mixed_candidates(TensorDensity(std::move(marginals)), box, config_.candidates, candidate_seed);
            break;
        }
        case StrategyKind::nataf: {
            const auto* copula = dynamic_cast<const GaussianCopulaDensity*>(density_.get());
            if (!copula) throw Unsupported("Nataf strategy needs a Gaussian copula density");
            transform_ = NatafTransform::for_density(*copula, strategy_.target);
            const TensorDensity target = transform_->target_density();
            if (strategy_.target == TargetSpace::gauss) {
                Rng rng(candidate_seed);
                candidates_ = target.sample(config_.candidates, rng);
            } else {
                candidates_ = mixed_candidates(target, unit_box(d, -1.0, 1.0), config_.candidates, candidate_seed);
            }
            break;
        }
    }
}

TensorBasis StrategyFitter::tensor_basis(const MultiIndexSet& set) const {
    const std::size_t d = set.dimension();
    if (strategy_.kind == StrategyKind::nataf) {
        const PolyFamily family =
            strategy_.target == TargetSpace::gauss ? PolyFamily::hermite() : PolyFamily::legendre(-1.0, 1.0);
        return {set, family};
    }
    const Box box = density_->support();
    std::vector<PolyFamily> families;
    for (std::size_t k = 0; k < d; ++k) {
        families.push_back(strategy_.monomial ? PolyFamily::monomial(box.lower[k], box.upper[k])
                                              : PolyFamily::beta(strategy_.alpha, strategy_.beta, box.lower[k],
                                                                 box.upper[k]));
    }
    return {set, std::move(families)};
}

PolynomialBasis StrategyFitter::basis_for(const MultiIndexSet& set) const {
    if (strategy_.kind != StrategyKind::gs) return {tensor_basis(set)};
    if (is_prefix(set, largest_basis_->index_set())) return largest_basis_->truncated(set.size());
    return {gram_schmidt_orthogonalize(tensor_basis(set), *gs_rule_)};
}

FitResult StrategyFitter::fit(const MultiIndexSet& set, const ModelFunction& f) const {
    PolynomialBasis basis = basis_for(set);
    LejaSequence seq = build_leja(basis, candidates_, basis.size(), config_.weight,
                                  strategy_.kind == StrategyKind::nataf ? nullptr : density_.get(),
                                  "mixed-candidates seed=" + std::to_string(seed_));
    const Eigen::MatrixXd nodes = transform_ ? transform_->inverse(seq.points()) : seq.points();
    Eigen::VectorXd y = evaluate_model(f, nodes);
    Eigen::VectorXd alpha = interpolate(seq, y);
    const double kappa_gs =
        strategy_.kind == StrategyKind::gs ? basis.gs_condition() : std::numeric_limits<double>::quiet_NaN();
    return {PceSurrogate(std::move(basis), std::move(alpha), strategy_, transform_), std::move(seq), std::move(y),
            kappa_gs};
}

FitResult fit_strategy(const Strategy& strategy, std::shared_ptr<const JointDensity> density,
                       const MultiIndexSet& index_set, const FitConfig& config, const ModelFunction& f,
                       std::uint64_t seed) {
    return StrategyFitter(strategy, std::move(density), index_set, config, seed).fit(index_set, f);
}

nlohmann::json surrogate_to_json(const PceSurrogate& s) {
    const Moments m = s.moments();
    nlohmann::json j{{"strategy", s.strategy().name()},
                     {"basis", basis_to_json(s.basis())},
                     {"coefficients", std::vector<double>(s.coefficients().begin(), s.coefficients().end())},
                     {"mean", m.mean},
                     {"variance", m.variance},
                     {"moment_space", to_string(m.space)}};
    if (s.transform()) j["transform"] = nataf_to_json(*s.transform());
    return j;
}

}  // namespace pcedep
