#include "pcedep/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "pcedep/errors.hpp"
#include "pcedep/io.hpp"

namespace pcedep {

namespace {

using BoostPolicy = boost::math::policies::policy<
    boost::math::policies::promote_double<false>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>>;
using BetaDist = boost::math::beta_distribution<double, BoostPolicy>;

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double beta_variate(double a, double b, Rng& rng) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

constexpr double kTailSwitch = 20.0;

/// log Φ(-x) for x > 0 via the asymptotic series of the Mills ratio.
double log_normal_tail(double x) {
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -0.5 * x2 - std::log(x) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
}

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("normal quantile needs p in [0, 1]");
    }
    return -kSqrt2 * boost::math::erfc_inv(2.0 * p, BoostPolicy());
}

// --- Marginal ---------------------------------------------------------------

Marginal Marginal::beta(double alpha, double beta, double lower, double upper) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("Beta parameters must be positive");
    if (!(upper > lower)) throw std::invalid_argument("Beta support needs upper > lower");
    return {Kind::beta, alpha, beta, lower, upper};
}

Marginal Marginal::normal(double mean, double stddev) {
    if (!(stddev > 0.0)) throw std::invalid_argument("normal standard deviation must be positive");
    const double inf = std::numeric_limits<double>::infinity();
    return {Kind::normal, mean, stddev, -inf, inf};
}

double Marginal::pdf(double z) const {
    if (kind_ == Kind::normal) return std_normal_pdf((z - p1_) / p2_) / p2_;
    if (z < lower_ || z > upper_) return 0.0;
    const double width = upper_ - lower_;
    const double t = (z - lower_) / width;
    return boost::math::pdf(BetaDist(p1_, p2_), t) / width;
}

double Marginal::cdf(double z) const {
    if (kind_ == Kind::normal) return std_normal_cdf((z - p1_) / p2_);
    if (z <= lower_) return 0.0;
    if (z >= upper_) return 1.0;
    return boost::math::cdf(BetaDist(p1_, p2_), (z - lower_) / (upper_ - lower_));
}

double Marginal::sf(double z) const {
    if (kind_ == Kind::normal) return std_normal_cdf(-(z - p1_) / p2_);
    if (z <= lower_) return 1.0;
    if (z >= upper_) return 0.0;
    return boost::math::cdf(boost::math::complement(BetaDist(p1_, p2_), (z - lower_) / (upper_ - lower_)));
}

double Marginal::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile needs p in [0, 1]");
    if (kind_ == Kind::normal) return p1_ + p2_ * std_normal_quantile(p);
    return lower_ + (upper_ - lower_) * boost::math::quantile(BetaDist(p1_, p2_), p);
}

double Marginal::mean() const {
    if (kind_ == Kind::normal) return p1_;
    return lower_ + (upper_ - lower_) * p1_ / (p1_ + p2_);
}

double Marginal::variance() const {
    if (kind_ == Kind::normal) return p2_ * p2_;
    const double s = p1_ + p2_;
    const double w = upper_ - lower_;
    return w * w * p1_ * p2_ / (s * s * (s + 1.0));
}

double Marginal::to_standard_normal(double z) const {
    if (kind_ == Kind::normal) return (z - p1_) / p2_;
    const double p = cdf(z);
    if (p <= 0.0) throw BoundaryError("CDF is 0 at z = " + format_double(z) + " for " + label());
    if (p < 0.5) return std_normal_quantile(p);
    const double q = sf(z);
    if (q <= 0.0) throw BoundaryError("CDF is 1 at z = " + format_double(z) + " for " + label());
    return -std_normal_quantile(q);
}

double Marginal::from_standard_normal(double u) const {
    if (kind_ == Kind::normal) return p1_ + p2_ * u;
    const double width = upper_ - lower_;
    if (std::abs(u) > kTailSwitch) {
        // Leading term of the incomplete Beta function: I_t(a, b) ≈ t^a / (a B(a, b)).
        const double log_tail = log_normal_tail(std::abs(u));
        const double log_beta = std::log(boost::math::beta(p1_, p2_, BoostPolicy()));
        if (u < 0.0) return lower_ + width * std::exp((log_tail + std::log(p1_) + log_beta) / p1_);
        return upper_ - width * std::exp((log_tail + std::log(p2_) + log_beta) / p2_);
    }
    const BetaDist dist(p1_, p2_);
    double t;
    if (u < 0.0) {
        t = boost::math::quantile(dist, std_normal_cdf(u));
    } else {
        t = boost::math::quantile(boost::math::complement(dist, std_normal_cdf(-u)));
    }
    return lower_ + width * t;
}

PolyFamily Marginal::family() const {
    if (kind_ == Kind::normal) {
        if (p1_ != 0.0 || p2_ != 1.0) throw Unsupported("Hermite family requires a standard normal marginal");
        return PolyFamily::hermite();
    }
    return PolyFamily::beta(p1_, p2_, lower_, upper_);
}

std::string Marginal::label() const {
    std::ostringstream os;
    if (kind_ == Kind::normal) {
        os << "normal(" << p1_ << "," << p2_ << ")";
    } else {
        os << "beta(" << p1_ << "," << p2_ << ")[" << lower_ << "," << upper_ << "]";
    }
    return os.str();
}

// --- Box --------------------------------------------------------------------

bool Box::finite() const {
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) return false;
    return true;
}

bool Box::contains(std::span<const double> z) const {
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (z[i] < lower[i] || z[i] > upper[i]) return false;
    return true;
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
    return v;
}

Box Box::unit(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

// --- JointDensity -------------------------------------------------------------

Eigen::VectorXd JointDensity::density(const Eigen::MatrixXd& points) const {
    if (static_cast<std::size_t>(points.cols()) != dimension())
        throw std::invalid_argument("point dimension does not match density");
    Eigen::VectorXd out(points.rows());
    std::vector<double> z(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index k = 0; k < points.cols(); ++k) z[static_cast<std::size_t>(k)] = points(i, k);
        out(i) = density(std::span<const double>(z));
    }
    return out;
}

// --- TensorDensity -----------------------------------------------------------

TensorDensity::TensorDensity(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
    if (marginals_.empty()) throw std::invalid_argument("tensor density needs at least one marginal");
}

Box TensorDensity::support() const {
    Box box;
    for (const auto& m : marginals_) {
        box.lower.push_back(m.lower());
        box.upper.push_back(m.upper());
    }
    return box;
}

double TensorDensity::density(std::span<const double> z) const {
    double p = 1.0;
    for (std::size_t i = 0; i < marginals_.size(); ++i) p *= marginals_[i].pdf(z[i]);
    return p;
}

Eigen::MatrixXd TensorDensity::sample(std::size_t n, Rng& rng) const {
    const auto d = static_cast<Eigen::Index>(marginals_.size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index k = 0; k < d; ++k) {
            const auto& m = marginals_[static_cast<std::size_t>(k)];
            if (m.kind() == Marginal::Kind::normal) {
                out(i, k) = m.param1() + m.param2() * normal(rng);
            } else {
                out(i, k) = m.lower() + (m.upper() - m.lower()) * beta_variate(m.param1(), m.param2(), rng);
            }
        }
    }
    return out;
}

std::string TensorDensity::label() const {
    std::string s = "tensor[";
    for (std::size_t i = 0; i < marginals_.size(); ++i) {
        if (i) s += ";";
        s += marginals_[i].label();
    }
    return s + "]";
}

// --- CorrelationMatrix -------------------------------------------------------

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    const auto d = entries_.rows();
    if (d == 0 || entries_.cols() != d) throw std::invalid_argument("correlation matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(entries_(i, i) - 1.0) > 1e-12) throw std::invalid_argument("correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < d; ++j) {
            if (std::abs(entries_(i, j) - entries_(j, i)) > 1e-12)
                throw std::invalid_argument("correlation matrix must be symmetric");
            if (std::abs(entries_(i, j)) > 1.0) throw std::invalid_argument("correlation entries must lie in [-1, 1]");
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(entries_);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("correlation matrix is not positive definite");
    chol_ = llt.matrixL();
    log_det_ = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(chol_(i, i) > 0.0)) throw NotPositiveDefinite("correlation matrix is singular");
        log_det_ += 2.0 * std::log(chol_(i, i));
    }
}

Eigen::MatrixXd equicorrelation(std::size_t d, double rho) {
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(n, n, rho);
    r.diagonal().setOnes();
    return r;
}

// --- GaussianCopulaDensity ---------------------------------------------------

GaussianCopulaDensity::GaussianCopulaDensity(std::vector<Marginal> marginals, CorrelationMatrix correlation)
    : marginals_(std::move(marginals)), correlation_(std::move(correlation)) {
    if (marginals_.size() != correlation_.dimension())
        throw std::invalid_argument("copula marginals and correlation differ in dimension");
}

Box GaussianCopulaDensity::support() const {
    Box box;
    for (const auto& m : marginals_) {
        box.lower.push_back(m.lower());
        box.upper.push_back(m.upper());
    }
    return box;
}

double GaussianCopulaDensity::density(std::span<const double> z) const {
    const auto d = static_cast<Eigen::Index>(marginals_.size());
    Eigen::VectorXd uhat(d);
    double marginal_product = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto& m = marginals_[static_cast<std::size_t>(i)];
        const double zi = z[static_cast<std::size_t>(i)];
        if (zi <= m.lower() || zi >= m.upper()) return 0.0;
        marginal_product *= m.pdf(zi);
        if (marginal_product == 0.0) return 0.0;
        try {
            uhat(i) = m.to_standard_normal(zi);
        } catch (const BoundaryError&) {
            return 0.0;
        }
    }
    const Eigen::VectorXd y = correlation_.cholesky().triangularView<Eigen::Lower>().solve(uhat);
    const double log_copula = -0.5 * y.squaredNorm() + 0.5 * uhat.squaredNorm() - 0.5 * correlation_.log_determinant();
    return std::exp(log_copula) * marginal_product;
}

Eigen::MatrixXd GaussianCopulaDensity::sample(std::size_t n, Rng& rng) const {
    const auto d = static_cast<Eigen::Index>(marginals_.size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    std::normal_distribution<double> normal;
    const Eigen::MatrixXd& L = correlation_.cholesky();
    Eigen::VectorXd u(d);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index k = 0; k < d; ++k) u(k) = normal(rng);
        const Eigen::VectorXd v = L.triangularView<Eigen::Lower>() * u;
        for (Eigen::Index k = 0; k < d; ++k)
            out(i, k) = marginals_[static_cast<std::size_t>(k)].from_standard_normal(v(k));
    }
    return out;
}

std::string GaussianCopulaDensity::label() const {
    std::string s = "gaussian-copula[";
    for (std::size_t i = 0; i < marginals_.size(); ++i) {
        if (i) s += ";";
        s += marginals_[i].label();
    }
    return s + "]";
}

GaussianCopulaDensity gaussian_copula_density(std::vector<Marginal> marginals, const Eigen::MatrixXd& r_v) {
    return {std::move(marginals), CorrelationMatrix(r_v)};
}

Eigen::MatrixXd copula_sample(const GaussianCopulaDensity& density, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return density.sample(n, rng);
}

// --- BetaMixtureDensity ------------------------------------------------------

BetaMixtureDensity::BetaMixtureDensity(std::vector<BetaComponent> components, std::size_t d)
    : components_(std::move(components)), d_(d) {
    if (components_.empty() || d_ == 0) throw std::invalid_argument("mixture needs components and d >= 1");
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0)) throw std::invalid_argument("mixture weights must be positive");
        total += c.weight;
        marginals_.push_back(Marginal::beta(c.alpha, c.beta));
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
}

double BetaMixtureDensity::density(std::span<const double> z) const {
    double total = 0.0;
    for (std::size_t c = 0; c < components_.size(); ++c) {
        double p = components_[c].weight;
        for (std::size_t i = 0; i < d_ && p != 0.0; ++i) p *= marginals_[c].pdf(z[i]);
        total += p;
    }
    return total;
}

Eigen::MatrixXd BetaMixtureDensity::sample(std::size_t n, Rng& rng) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d_));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double r = unif(rng);
        std::size_t c = 0;
        double acc = components_[0].weight;
        while (r >= acc && c + 1 < components_.size()) acc += components_[++c].weight;
        for (Eigen::Index k = 0; k < out.cols(); ++k)
            out(i, k) = beta_variate(components_[c].alpha, components_[c].beta, rng);
    }
    return out;
}

std::string BetaMixtureDensity::label() const {
    std::ostringstream os;
    os << "beta-mixture[";
    for (std::size_t c = 0; c < components_.size(); ++c) {
        if (c) os << ";";
        os << components_[c].weight << "*B(" << components_[c].alpha << "," << components_[c].beta << ")";
    }
    os << "]^" << d_;
    return os.str();
}

// --- BananaDensity -----------------------------------------------------------

namespace {
const Box kBananaBox{{-3.0, -2.0}, {3.0, 6.0}};
}

BananaDensity::BananaDensity(int order) {
    const std::vector<QuadratureRule> rules{gauss_rule(PolyFamily::legendre(-3.0, 3.0), order),
                                            gauss_rule(PolyFamily::legendre(-2.0, 6.0), order)};
    const QuadratureRule rule = tensor_rule(rules);
    double integral = 0.0;
    for (Eigen::Index q = 0; q < rule.nodes.rows(); ++q) {
        const double z[2] = {rule.nodes(q, 0), rule.nodes(q, 1)};
        integral += rule.weights(q) * unnormalized(z);
    }
    normalization_ = 1.0 / (integral * kBananaBox.volume());
}

double BananaDensity::unnormalized(std::span<const double> z) {
    const double a = z[0] * z[0];
    const double b = 2.0 * z[1] - a;
    return std::exp(-(0.1 * a * a + 0.5 * b * b));
}

Box BananaDensity::support() const { return kBananaBox; }

double BananaDensity::density(std::span<const double> z) const {
    if (!kBananaBox.contains(z)) return 0.0;
    return normalization_ * unnormalized(z);
}

Eigen::MatrixXd BananaDensity::sample(std::size_t n, Rng& rng) const {
    // sup of the unnormalized density is 1 at the origin.
    return rejection_sample([](std::span<const double> z) { return unnormalized(z); }, kBananaBox,
                            kBananaBox.volume(), n, rng);
}

// --- KdeDensity --------------------------------------------------------------

KdeDensity::KdeDensity(Eigen::MatrixXd samples) : samples_(std::move(samples)) {
    const auto n = samples_.rows();
    const auto d = samples_.cols();
    if (n < 2 || d < 1) throw std::invalid_argument("KDE needs at least two samples");
    bandwidth_.resize(d);
    const double scott = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
    for (Eigen::Index k = 0; k < d; ++k) {
        const double mean = samples_.col(k).mean();
        const double var = (samples_.col(k).array() - mean).square().sum() / static_cast<double>(n - 1);
        if (!(var > 0.0)) throw std::invalid_argument("KDE sample dimension " + std::to_string(k) + " has zero variance");
        bandwidth_(k) = std::sqrt(var) * scott;
        support_.lower.push_back(samples_.col(k).minCoeff() - 3.0 * bandwidth_(k));
        support_.upper.push_back(samples_.col(k).maxCoeff() + 3.0 * bandwidth_(k));
    }
}

double KdeDensity::density(std::span<const double> z) const {
    if (!support_.contains(z)) return 0.0;
    const auto d = samples_.cols();
    double norm = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) norm *= bandwidth_(k);
    double total = 0.0;
    for (Eigen::Index j = 0; j < samples_.rows(); ++j) {
        double q = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            const double t = (z[static_cast<std::size_t>(k)] - samples_(j, k)) / bandwidth_(k);
            q += t * t;
        }
        total += std::exp(-0.5 * q);
    }
    return total / (static_cast<double>(samples_.rows()) * norm * std::pow(2.0 * M_PI, 0.5 * static_cast<double>(d)));
}

Eigen::MatrixXd KdeDensity::sample(std::size_t n, Rng& rng) const {
    const auto d = samples_.cols();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    std::uniform_int_distribution<Eigen::Index> pick(0, samples_.rows() - 1);
    std::normal_distribution<double> normal;
    std::vector<double> z(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < out.rows();) {
        const Eigen::Index j = pick(rng);
        for (Eigen::Index k = 0; k < d; ++k)
            z[static_cast<std::size_t>(k)] = samples_(j, k) + bandwidth_(k) * normal(rng);
        if (!support_.contains(z)) continue;
        for (Eigen::Index k = 0; k < d; ++k) out(i, k) = z[static_cast<std::size_t>(k)];
        ++i;
    }
    return out;
}

// --- samplers ----------------------------------------------------------------

namespace {

Eigen::MatrixXd chebyshev_with(const Box& box, std::size_t n, Rng& rng) {
    if (!box.finite()) throw Unsupported("Chebyshev candidates need a bounded box");
    const auto d = static_cast<Eigen::Index>(box.dimension());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index k = 0; k < d; ++k) {
            const double t = 0.5 * (1.0 - std::cos(M_PI * unif(rng)));
            const auto kk = static_cast<std::size_t>(k);
            out(i, k) = box.lower[kk] + (box.upper[kk] - box.lower[kk]) * t;
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXd chebyshev_candidates(const Box& box, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return chebyshev_with(box, n, rng);
}

Eigen::MatrixXd mixed_candidates(const JointDensity& density, const Box& box, std::size_t n, std::uint64_t seed) {
    if (box.dimension() != density.dimension()) throw std::invalid_argument("candidate box and density differ in dimension");
    Rng rng(seed);
    const std::size_t n_cheb = (n + 1) / 2;
    const Eigen::MatrixXd cheb = chebyshev_with(box, n_cheb, rng);
    const Eigen::MatrixXd draws = density.sample(n - n_cheb, rng);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(box.dimension()));
    out << cheb, draws;
    return out;
}

Eigen::MatrixXd rejection_sample(const PointFunction& density, const Box& box, double bound, std::size_t n,
                                 Rng& rng, RejectionStats* stats) {
    if (!box.finite()) throw Unsupported("rejection sampling needs a bounded proposal box");
    if (!(bound > 0.0)) throw std::invalid_argument("rejection bound must be positive");
    const auto d = static_cast<Eigen::Index>(box.dimension());
    const double proposal_density = 1.0 / box.volume();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> z(box.dimension());
    RejectionStats local;
    std::size_t accepted = 0;
    while (accepted < n) {
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * unif(rng);
        ++local.proposed;
        const double ratio = density(z) / (bound * proposal_density);
        if (ratio > 1.0 + 1e-12)
            throw std::invalid_argument("rejection bound violated: density/(bound*proposal) = " + std::to_string(ratio));
        if (unif(rng) < ratio) {
            for (Eigen::Index k = 0; k < d; ++k) out(static_cast<Eigen::Index>(accepted), k) = z[static_cast<std::size_t>(k)];
            ++accepted;
        }
        if (local.proposed % 100000 == 0 &&
            static_cast<double>(accepted) < 1e-4 * static_cast<double>(local.proposed))
            throw SamplingEfficiencyError("rejection acceptance rate below 1e-4; the bound is likely far above the density supremum");
    }
    local.accepted = accepted;
    if (stats) *stats = local;
    return out;
}

Eigen::MatrixXd rejection_sample(const PointFunction& density, const Box& box, double bound, std::size_t n,
                                 std::uint64_t seed, RejectionStats* stats) {
    Rng rng(seed);
    return rejection_sample(density, box, bound, n, rng, stats);
}

}  // namespace pcedep
