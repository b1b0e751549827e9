#include "pcedep/transform.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>
#include <nlohmann/json.hpp>

#include "pcedep/errors.hpp"
#include "pcedep/io.hpp"

namespace pcedep {

const char* to_string(TargetSpace target) { return target == TargetSpace::gauss ? "gauss" : "uniform"; }

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kRhoMargin = 1e-9;

struct StandardizedMarginal {
    const Marginal* m;
    double mean;
    double sd;
    double operator()(double x) const { return (m->from_standard_normal(x) - mean) / sd; }
};

StandardizedMarginal standardize(const Marginal& m) {
    const double var = m.variance();
    if (!(var > 0.0) || !std::isfinite(var)) throw std::invalid_argument("marginal needs finite positive variance");
    return {&m, m.mean(), std::sqrt(var)};
}

/// Gauss-Hermite nodes and weights, cached per order.
const QuadratureRule& hermite_rule(int order) {
    thread_local std::vector<std::pair<int, QuadratureRule>> cache;
    for (const auto& [o, r] : cache)
        if (o == order) return r;
    cache.emplace_back(order, gauss_rule(PolyFamily::hermite(), order));
    return cache.back().second;
}

class PairCorrelation {
public:
    PairCorrelation(const Marginal& mi, const Marginal& mj, int order)
        : rule_(hermite_rule(order)), gi_(standardize(mi)), gj_(standardize(mj)) {
        gi_values_.resize(rule_.size());
        for (std::size_t a = 0; a < rule_.size(); ++a) gi_values_[a] = gi_(rule_.nodes(static_cast<Eigen::Index>(a), 0));
    }

    double operator()(double rho) const {
        const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        double total = 0.0;
        const auto n = static_cast<Eigen::Index>(rule_.size());
        for (Eigen::Index a = 0; a < n; ++a) {
            const double x1 = rule_.nodes(a, 0);
            double inner = 0.0;
            for (Eigen::Index b = 0; b < n; ++b) inner += rule_.weights(b) * gj_(rho * x1 + c * rule_.nodes(b, 0));
            total += rule_.weights(a) * gi_values_[static_cast<std::size_t>(a)] * inner;
        }
        return total;
    }

private:
    const QuadratureRule& rule_;
    StandardizedMarginal gi_;
    StandardizedMarginal gj_;
    std::vector<double> gi_values_;
};

double solve_pair(const Marginal& mi, const Marginal& mj, double target, int order) {
    if (!(std::abs(target) < 1.0)) throw std::invalid_argument("target correlation must satisfy |r| < 1");
    if (target == 0.0) return 0.0;
    const PairCorrelation h(mi, mj, order);
    double lo = -1.0 + kRhoMargin;
    double hi = 1.0 - kRhoMargin;
    const double h_lo = h(lo) - target;
    const double h_hi = h(hi) - target;
    if (h_lo > 0.0 || h_hi < 0.0)
        throw InfeasibleCorrelation("correlation " + std::to_string(target) + " outside attainable range [" +
                                    std::to_string(h_lo + target) + ", " + std::to_string(h_hi + target) + "] for " +
                                    mi.label() + " and " + mj.label());
    double mid = 0.5 * (lo + hi);
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        residual = h(mid) - target;
        if (std::abs(residual) < 1e-14 || hi - lo < 1e-15) break;
        if (residual < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (!(std::abs(residual) < 1e-8)) throw ConvergenceFailure("Nataf correlation bisection did not converge", residual);
    return mid;
}

}  // namespace

double nataf_z_correlation(const Marginal& mi, const Marginal& mj, double rho_v, int order) {
    return PairCorrelation(mi, mj, order)(rho_v);
}

Eigen::MatrixXd nataf_correlation_solve(const Eigen::MatrixXd& r_z, std::span<const Marginal> marginals, int order) {
    const auto d = static_cast<Eigen::Index>(marginals.size());
    if (r_z.rows() != d || r_z.cols() != d) throw std::invalid_argument("R_Z size does not match the marginals");
    Eigen::MatrixXd r_v = Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            if (std::abs(r_z(i, j) - r_z(j, i)) > 1e-12) throw std::invalid_argument("R_Z must be symmetric");
            r_v(i, j) = r_v(j, i) = solve_pair(marginals[static_cast<std::size_t>(i)],
                                                marginals[static_cast<std::size_t>(j)], r_z(i, j), order);
        }
    }
    return r_v;
}

Eigen::MatrixXd nataf_z_correlation_matrix(const Eigen::MatrixXd& r_v, std::span<const Marginal> marginals,
                                           int order) {
    const auto d = static_cast<Eigen::Index>(marginals.size());
    if (r_v.rows() != d || r_v.cols() != d) throw std::invalid_argument("R_V size does not match the marginals");
    Eigen::MatrixXd r_z = Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j)
            r_z(i, j) = r_z(j, i) = r_v(i, j) == 0.0 ? 0.0
                                                     : nataf_z_correlation(marginals[static_cast<std::size_t>(i)],
                                                                           marginals[static_cast<std::size_t>(j)],
                                                                           r_v(i, j), order);
    return r_z;
}

NatafTransform::NatafTransform(std::vector<Marginal> marginals, Eigen::MatrixXd r_z, CorrelationMatrix r_v,
                               TargetSpace target)
    : marginals_(std::move(marginals)), r_z_(std::move(r_z)), r_v_(std::move(r_v)), target_(target) {}

NatafTransform::NatafTransform(std::vector<Marginal> marginals, const Eigen::MatrixXd& r_z, TargetSpace target)
    : NatafTransform(marginals, r_z, CorrelationMatrix(nataf_correlation_solve(r_z, marginals)), target) {}

NatafTransform NatafTransform::from_gaussian_correlation(std::vector<Marginal> marginals, const Eigen::MatrixXd& r_v,
                                                         TargetSpace target) {
    Eigen::MatrixXd r_z = nataf_z_correlation_matrix(r_v, marginals);
    return {std::move(marginals), std::move(r_z), CorrelationMatrix(r_v), target};
}

NatafTransform NatafTransform::for_density(const GaussianCopulaDensity& density, TargetSpace target) {
    return from_gaussian_correlation(density.marginals(), density.correlation().entries(), target);
}

Eigen::VectorXd NatafTransform::forward(std::span<const double> z) const {
    const auto d = static_cast<Eigen::Index>(dimension());
    if (static_cast<Eigen::Index>(z.size()) != d) throw std::invalid_argument("point dimension mismatch");
    Eigen::VectorXd uhat(d);
    for (Eigen::Index i = 0; i < d; ++i)
        uhat(i) = marginals_[static_cast<std::size_t>(i)].to_standard_normal(z[static_cast<std::size_t>(i)]);
    Eigen::VectorXd u = r_v_.cholesky().triangularView<Eigen::Lower>().solve(uhat);
    if (target_ == TargetSpace::uniform)
        for (Eigen::Index i = 0; i < d; ++i) u(i) = std::erf(u(i) / kSqrt2);
    return u;
}

Eigen::VectorXd NatafTransform::inverse(std::span<const double> u) const {
    const auto d = static_cast<Eigen::Index>(dimension());
    if (static_cast<Eigen::Index>(u.size()) != d) throw std::invalid_argument("point dimension mismatch");
    Eigen::VectorXd g(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double ui = u[static_cast<std::size_t>(i)];
        g(i) = target_ == TargetSpace::uniform ? kSqrt2 * boost::math::erf_inv(ui) : ui;
    }
    const Eigen::VectorXd uhat = r_v_.cholesky().triangularView<Eigen::Lower>() * g;
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = marginals_[static_cast<std::size_t>(i)].from_standard_normal(uhat(i));
    return z;
}

namespace {

template <typename F>
Eigen::MatrixXd map_rows(const Eigen::MatrixXd& in, std::size_t d, F&& f) {
    if (static_cast<std::size_t>(in.cols()) != d) throw std::invalid_argument("point dimension mismatch");
    Eigen::MatrixXd out(in.rows(), in.cols());
    std::vector<double> row(d);
    for (Eigen::Index i = 0; i < in.rows(); ++i) {
        for (std::size_t k = 0; k < d; ++k) row[k] = in(i, static_cast<Eigen::Index>(k));
        out.row(i) = f(std::span<const double>(row)).transpose();
    }
    return out;
}

}  // namespace

Eigen::MatrixXd NatafTransform::forward(const Eigen::MatrixXd& z) const {
    return map_rows(z, dimension(), [this](std::span<const double> p) { return forward(p); });
}

Eigen::MatrixXd NatafTransform::inverse(const Eigen::MatrixXd& u) const {
    return map_rows(u, dimension(), [this](std::span<const double> p) { return inverse(p); });
}

TensorDensity NatafTransform::target_density() const {
    return target_ == TargetSpace::gauss ? TensorDensity(dimension(), Marginal::normal())
                                         : TensorDensity(dimension(), Marginal::uniform(-1.0, 1.0));
}

nlohmann::json nataf_to_json(const NatafTransform& t) {
    nlohmann::json marginals = nlohmann::json::array();
    for (const auto& m : t.marginals()) marginals.push_back(m.label());
    return {{"target", to_string(t.target())},
            {"marginals", marginals},
            {"r_z", matrix_to_json(t.r_z())},
            {"r_v", matrix_to_json(t.r_v())}};
}

// --- Rosenblatt --------------------------------------------------------------

double IndependentCdfProvider::conditional_cdf(std::size_t i, double zi, std::span<const double>) const {
    return marginals_.at(i).cdf(zi);
}

std::pair<double, double> IndependentCdfProvider::range(std::size_t i) const {
    return {marginals_.at(i).lower(), marginals_.at(i).upper()};
}

double CopulaCdfProvider::conditional_cdf(std::size_t i, double zi, std::span<const double> prefix) const {
    const auto& marginals = density_.marginals();
    const Eigen::MatrixXd& L = density_.correlation().cholesky();
    const auto n = static_cast<Eigen::Index>(i);
    // y = L⁻¹ û, one forward-substitution row at a time.
    Eigen::VectorXd y(n + 1);
    for (Eigen::Index k = 0; k <= n; ++k) {
        const double zk = k == n ? zi : prefix[static_cast<std::size_t>(k)];
        const auto& m = marginals[static_cast<std::size_t>(k)];
        double uhat;
        if (k == n) {
            const double p = m.cdf(zk);
            if (p <= 0.0) return 0.0;
            if (p >= 1.0 || m.sf(zk) <= 0.0) return 1.0;
        }
        uhat = m.to_standard_normal(zk);
        double acc = uhat;
        for (Eigen::Index l = 0; l < k; ++l) acc -= L(k, l) * y(l);
        y(k) = acc / L(k, k);
    }
    return std_normal_cdf(y(n));
}

std::pair<double, double> CopulaCdfProvider::range(std::size_t i) const {
    const auto& m = density_.marginals().at(i);
    return {m.lower(), m.upper()};
}

QuadratureCdfProvider2D::QuadratureCdfProvider2D(std::shared_ptr<const JointDensity> density, int panels, int order)
    : density_(std::move(density)), box_(density_->support()), panels_(panels) {
    if (density_->dimension() != 2) throw Unsupported("quadrature Rosenblatt provider is two-dimensional only");
    if (!box_.finite()) throw Unsupported("quadrature Rosenblatt provider needs a bounded support");
    if (panels < 1) throw std::invalid_argument("need at least one panel");
    const QuadratureRule gl = gauss_rule(PolyFamily::legendre(0.0, 1.0), order);
    nodes_ = gl.nodes.col(0);
    weights_ = gl.weights;
    total_mass_ = integrate([this](double s) { return first_marginal(s); }, box_.lower[0], box_.upper[0]);
    if (!(total_mass_ > 0.0)) throw NumericError("density integrates to zero on its support");
}

double QuadratureCdfProvider2D::integrate(const std::function<double(double)>& f, double a, double b) const {
    if (!(b > a)) return 0.0;
    const double h = (b - a) / panels_;
    double total = 0.0;
    for (int p = 0; p < panels_; ++p) {
        const double left = a + p * h;
        for (Eigen::Index q = 0; q < nodes_.size(); ++q) total += weights_(q) * f(left + h * nodes_(q));
    }
    return total * h;
}

double QuadratureCdfProvider2D::first_marginal(double z1) const {
    return integrate(
        [&](double t) {
            const double z[2] = {z1, t};
            return density_->density(std::span<const double>(z, 2));
        },
        box_.lower[1], box_.upper[1]);
}

double QuadratureCdfProvider2D::conditional_cdf(std::size_t i, double zi, std::span<const double> prefix) const {
    if (i == 0) {
        const double z = std::clamp(zi, box_.lower[0], box_.upper[0]);
        return std::clamp(integrate([this](double s) { return first_marginal(s); }, box_.lower[0], z) / total_mass_,
                          0.0, 1.0);
    }
    if (i != 1) throw std::out_of_range("coordinate index out of range");
    const double z1 = prefix[0];
    const double denom = first_marginal(z1);
    if (!(denom > 0.0)) throw BoundaryError("conditioning value has zero marginal density");
    const double z = std::clamp(zi, box_.lower[1], box_.upper[1]);
    const double num = integrate(
        [&](double t) {
            const double p[2] = {z1, t};
            return density_->density(std::span<const double>(p, 2));
        },
        box_.lower[1], z);
    return std::clamp(num / denom, 0.0, 1.0);
}

std::pair<double, double> QuadratureCdfProvider2D::range(std::size_t i) const {
    return {box_.lower.at(i), box_.upper.at(i)};
}

RosenblattTransform::RosenblattTransform(std::shared_ptr<const ConditionalCdfProvider> provider,
                                         BisectionOptions options)
    : provider_(std::move(provider)), options_(options) {
    if (!provider_) throw std::invalid_argument("Rosenblatt transform needs a provider");
}

Eigen::VectorXd RosenblattTransform::forward(std::span<const double> z) const {
    const std::size_t d = dimension();
    if (z.size() != d) throw std::invalid_argument("point dimension mismatch");
    Eigen::VectorXd u(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) u(static_cast<Eigen::Index>(i)) = provider_->conditional_cdf(i, z[i], z.first(i));
    return u;
}

Eigen::VectorXd RosenblattTransform::inverse(std::span<const double> u) const {
    const std::size_t d = dimension();
    if (u.size() != d) throw std::invalid_argument("point dimension mismatch");
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double target = u[i];
        if (!(target > 0.0 && target < 1.0)) throw std::domain_error("Rosenblatt inverse needs u in (0, 1)");
        const std::span<const double> prefix(z.data(), i);
        auto [lo, hi] = provider_->range(i);
        if (!std::isfinite(lo)) {
            lo = -1.0;
            while (provider_->conditional_cdf(i, lo, prefix) > target) lo *= 2.0;
        }
        if (!std::isfinite(hi)) {
            hi = 1.0;
            while (provider_->conditional_cdf(i, hi, prefix) < target) hi *= 2.0;
        }
        double mid = 0.5 * (lo + hi);
        double residual = std::numeric_limits<double>::infinity();
        bool converged = false;
        for (int it = 0; it < options_.max_iterations; ++it) {
            mid = 0.5 * (lo + hi);
            residual = provider_->conditional_cdf(i, mid, prefix) - target;
            if (std::abs(residual) < options_.residual_tolerance || hi - lo < options_.width_tolerance) {
                converged = true;
                break;
            }
            if (residual < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (!converged)
            throw ConvergenceFailure("Rosenblatt bisection did not converge in coordinate " + std::to_string(i + 1),
                                     residual);
        z[i] = mid;
    }
    return Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(d));
}

Eigen::MatrixXd RosenblattTransform::forward(const Eigen::MatrixXd& z) const {
    return map_rows(z, dimension(), [this](std::span<const double> p) { return forward(p); });
}

Eigen::MatrixXd RosenblattTransform::inverse(const Eigen::MatrixXd& u) const {
    return map_rows(u, dimension(), [this](std::span<const double> p) { return inverse(p); });
}

RosenblattTransform make_rosenblatt(std::shared_ptr<const JointDensity> density) {
    if (!density) throw std::invalid_argument("null density");
    if (const auto* t = dynamic_cast<const TensorDensity*>(density.get()))
        return RosenblattTransform(std::make_shared<IndependentCdfProvider>(t->marginals()));
    if (const auto* c = dynamic_cast<const GaussianCopulaDensity*>(density.get()))
        return RosenblattTransform(std::make_shared<CopulaCdfProvider>(*c));
    if (density->dimension() == 2 && density->support().finite())
        return RosenblattTransform(std::make_shared<QuadratureCdfProvider2D>(std::move(density)));
    throw Unsupported("no Rosenblatt conditional CDFs available for " + density->label());
}

}  // namespace pcedep
