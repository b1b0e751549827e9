#include <cmath>

#include <boost/math/distributions/beta.hpp>
#include <doctest.h>

#include "pcedep/basis.hpp"
#include "pcedep/errors.hpp"
#include "pcedep/measure.hpp"
#include "test_support.hpp"

using namespace pcedep;
using namespace pcedep::testing;

namespace {

Eigen::Matrix2d corr2(double rho) {
    Eigen::Matrix2d r;
    r << 1.0, rho, rho, 1.0;
    return r;
}

QuadratureRule dense_box_rule(const Box& box, int order) {
    std::vector<QuadratureRule> parts;
    for (std::size_t i = 0; i < box.dimension(); ++i)
        parts.push_back(gauss_rule(PolyFamily::legendre(box.lower[i], box.upper[i]), order));
    return tensor_rule(parts);
}

/// ∫ density over the box with a tensor Gauss-Legendre rule.
double integrate(const JointDensity& density, const Box& box, int order) {
    const auto rule = dense_box_rule(box, order);
    return box.volume() * rule.weights.dot(density.density(rule.nodes));
}

}  // namespace

TEST_CASE("marginals") {
    const auto b = Marginal::beta(2, 5);
    const boost::math::beta_distribution<double> ref(2, 5);
    for (double z : {0.01, 0.2, 0.5, 0.9}) {
        CHECK(b.pdf(z) == doctest::Approx(boost::math::pdf(ref, z)).epsilon(1e-14));
        CHECK(b.cdf(z) == doctest::Approx(boost::math::cdf(ref, z)).epsilon(1e-14));
        CHECK(b.quantile(b.cdf(z)) == doctest::Approx(z).epsilon(1e-12));
        CHECK(b.from_standard_normal(b.to_standard_normal(z)) == doctest::Approx(z).epsilon(1e-12));
    }
    CHECK(b.mean() == doctest::Approx(2.0 / 7.0));
    CHECK_THROWS_AS((void)b.to_standard_normal(0.0), BoundaryError);
    const auto shifted = Marginal::beta(2, 2, -1, 3);
    CHECK(shifted.mean() == doctest::Approx(1.0));
    CHECK(shifted.pdf(-2.0) == 0.0);
    const auto n = Marginal::normal(1.0, 2.0);
    CHECK(n.cdf(1.0) == doctest::Approx(0.5));
    CHECK(n.variance() == doctest::Approx(4.0));
    CHECK(std::isfinite(b.from_standard_normal(-40.0)));
    CHECK(b.from_standard_normal(-40.0) > 0.0);
}

TEST_CASE("correlation matrices") {
    CHECK_NOTHROW(CorrelationMatrix(corr2(-0.9)));
    CHECK_THROWS_AS(CorrelationMatrix(corr2(1.5)), std::invalid_argument);
    Eigen::Matrix3d singular = Eigen::Matrix3d::Constant(1.0);
    CHECK_THROWS_AS(CorrelationMatrix(Eigen::MatrixXd(singular)), NotPositiveDefinite);
    Eigen::Matrix2d asym = corr2(0.2);
    asym(0, 1) = 0.3;
    CHECK_THROWS_AS(CorrelationMatrix(Eigen::MatrixXd(asym)), std::invalid_argument);
    const CorrelationMatrix r(corr2(0.4));
    CHECK((r.cholesky() * r.cholesky().transpose() - r.entries()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("copula density with identity correlation is the product of marginals") {
    const std::vector<Marginal> m{Marginal::beta(2, 5), Marginal::beta(3, 1.5), Marginal::normal()};
    const auto copula = gaussian_copula_density(m, Eigen::MatrixXd::Identity(3, 3));
    const TensorDensity product(m);
    Rng rng(3);
    const auto pts = product.sample(500, rng);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const Eigen::VectorXd z = pts.row(i);
        const double a = copula.density(as_span(z));
        const double b = product.density(as_span(z));
        CHECK(std::abs(a - b) <= 1e-14 * std::max(1.0, b));
    }
}

TEST_CASE("copula density closed form and normalization") {
    const auto copula = gaussian_copula_density({Marginal::beta(2, 5), Marginal::beta(2, 5)}, corr2(-0.9));
    const auto b = Marginal::beta(2, 5);
    const double z[] = {0.2, 0.35};
    const double u1 = b.to_standard_normal(z[0]);
    const double u2 = b.to_standard_normal(z[1]);
    const double rho = -0.9;
    const double q = (u1 * u1 - 2 * rho * u1 * u2 + u2 * u2) / (1 - rho * rho);
    const double eta2 = std::exp(-0.5 * q) / (2 * M_PI * std::sqrt(1 - rho * rho));
    const double expected = eta2 / (std_normal_pdf(u1) * std_normal_pdf(u2)) * b.pdf(z[0]) * b.pdf(z[1]);
    CHECK(copula.density(std::span<const double>(z)) == doctest::Approx(expected).epsilon(1e-12));

    // Integrate in Gaussian coordinates where the integrand is smooth.
    const auto rule = copula_gauss_hermite_rule(copula, 60);
    CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    const auto mild = gaussian_copula_density({Marginal::beta(2, 5), Marginal::beta(2, 5)}, corr2(0.3));
    CHECK(integrate(mild, Box::unit(2), 200) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("copula sampling") {
    const auto uniform = gaussian_copula_density({Marginal::uniform(), Marginal::uniform()}, Eigen::MatrixXd::Identity(2, 2));
    const auto s = copula_sample(uniform, 100000, 8);
    for (int k = 0; k < 2; ++k)
        CHECK(ks_statistic(s.col(k), [](double x) { return x; }) < ks_critical_001(100000));
    CHECK(std::abs(pearson(s.col(0), s.col(1))) < 0.02);

    const auto copula = gaussian_copula_density({Marginal::beta(2, 5), Marginal::beta(2, 5)}, corr2(-0.9));
    const auto z = copula_sample(copula, 100000, 9);
    Eigen::VectorXd u1(z.rows()), u2(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        u1(i) = copula.marginals()[0].to_standard_normal(z(i, 0));
        u2(i) = copula.marginals()[1].to_standard_normal(z(i, 1));
    }
    CHECK(std::abs(pearson(u1, u2) + 0.9) < 0.02);
    CHECK(copula_sample(copula, 50, 4) == copula_sample(copula, 50, 4));
    CHECK(copula_sample(copula, 50, 4) != copula_sample(copula, 50, 5));
    CHECK(((z.array() > 0.0) && (z.array() < 1.0)).all());
}

TEST_CASE("banana density") {
    const double origin[] = {0.0, 0.0};
    const double ridge[] = {1.0, 0.5};
    CHECK(BananaDensity::unnormalized(origin) == 1.0);
    CHECK(BananaDensity::unnormalized(ridge) == doctest::Approx(std::exp(-0.1)).epsilon(1e-15));
    const BananaDensity b200(200);
    const BananaDensity b300(300);
    CHECK(b200.normalization() == doctest::Approx(b300.normalization()).epsilon(1e-8));
    CHECK(integrate(b200, b200.support(), 250) == doctest::Approx(1.0).epsilon(1e-8));
    const double outside[] = {4.0, 0.0};
    CHECK(b200.density(outside) == 0.0);

    Rng rng(12);
    const auto s = b200.sample(100000, rng);
    CHECK(std::abs(s.col(0).mean()) < 3.0 * standard_error_of_mean(s.col(0)));
    const auto rule = dense_box_rule(b200.support(), 200);
    const Eigen::VectorXd w = b200.support().volume() * rule.weights.cwiseProduct(b200.density(rule.nodes));
    const double m2 = w.dot(rule.nodes.col(1));
    const double m11 = w.dot(rule.nodes.col(0).cwiseAbs2());
    CHECK(std::abs(s.col(1).mean() - m2) < 3.0 * standard_error_of_mean(s.col(1)));
    const Eigen::VectorXd sq = s.col(0).cwiseAbs2();
    CHECK(std::abs(sq.mean() - m11) < 3.0 * standard_error_of_mean(sq));
}

TEST_CASE("beta mixtures") {
    const BetaMixtureDensity single({{1.0, 2.0, 5.0}}, 3);
    const TensorDensity tensor(3, Marginal::beta(2, 5));
    const double z[] = {0.1, 0.3, 0.7};
    CHECK(single.density(z) == doctest::Approx(tensor.density(z)).epsilon(1e-14));

    const BetaMixtureDensity mix({{0.5, 10.0, 4.0}, {0.5, 4.0, 10.0}}, 4);
    Rng rng(2);
    const auto pts = TensorDensity(4, Marginal::uniform()).sample(200, rng);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const Eigen::VectorXd a = pts.row(i);
        const Eigen::VectorXd b = 1.0 - a.array();
        CHECK(mix.density(as_span(a)) == doctest::Approx(mix.density(as_span(b))).epsilon(1e-12));
    }
    const Eigen::VectorXd centre = Eigen::VectorXd::Constant(4, 0.5);
    const Eigen::VectorXd mode = Eigen::VectorXd::Constant(4, 0.75);
    CHECK(mix.density(as_span(centre)) < mix.density(as_span(mode)));
    CHECK(integrate(BetaMixtureDensity({{0.5, 10, 4}, {0.5, 4, 10}}, 2), Box::unit(2), 60) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(BetaMixtureDensity({{0.5, 10, 4}, {0.6, 4, 10}}, 2), std::invalid_argument);
    CHECK_THROWS_AS(BetaMixtureDensity({{-0.5, 10, 4}, {1.5, 4, 10}}, 2), std::invalid_argument);
}

TEST_CASE("KDE") {
    Rng rng(4);
    Eigen::MatrixXd tight = 1e-3 * TensorDensity(2, Marginal::normal()).sample(200, rng);
    const KdeDensity peak(tight);
    const double origin[] = {0.0, 0.0};
    const double off[] = {0.01, -0.01};
    CHECK(peak.density(origin) > peak.density(off));

    const Eigen::MatrixXd cloud = TensorDensity(2, Marginal::normal()).sample(400, rng);
    Eigen::MatrixXd sym(800, 2);
    sym << cloud, -cloud;
    const KdeDensity kde(sym);
    CHECK(integrate(kde, kde.support(), 150) == doctest::Approx(1.0).epsilon(1e-3));
    const double p[] = {0.7, -0.3};
    const double q[] = {-0.7, 0.3};
    CHECK(kde.density(p) == doctest::Approx(kde.density(q)).epsilon(1e-12));
    CHECK(kde.support().lower[0] < sym.col(0).minCoeff() - 2.9 * kde.bandwidths()(0));

    Eigen::MatrixXd flat(10, 2);
    flat.col(0).setLinSpaced(10, 0.0, 1.0);
    flat.col(1).setConstant(2.0);
    CHECK_THROWS_AS(KdeDensity{flat}, std::invalid_argument);
    CHECK_THROWS_AS(KdeDensity{Eigen::MatrixXd::Zero(1, 2)}, std::invalid_argument);
}

TEST_CASE("Chebyshev candidates") {
    const auto c = chebyshev_candidates(Box::unit(1), 100000, 3);
    CHECK(ks_statistic(c.col(0), [](double x) { return 2.0 / M_PI * std::asin(std::sqrt(x)); }) <
          ks_critical_001(100000));
    int edge = 0;
    int centre = 0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        if (c(i, 0) < 0.1 || c(i, 0) > 0.9) ++edge;
        if (c(i, 0) > 0.4 && c(i, 0) < 0.6) ++centre;
    }
    CHECK(edge > 2 * centre);
    CHECK(chebyshev_candidates(Box::unit(2), 10, 1) == chebyshev_candidates(Box::unit(2), 10, 1));
    const Box box{{-3.0, -2.0}, {3.0, 6.0}};
    const auto b = chebyshev_candidates(box, 1000, 5);
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        const Eigen::VectorXd z = b.row(i);
        CHECK(box.contains(as_span(z)));
    }
    CHECK_THROWS_AS((void)chebyshev_candidates(Box{{0.0}, {INFINITY}}, 5, 1), Unsupported);
}

TEST_CASE("mixed candidates") {
    const TensorDensity d(2, Marginal::beta(2, 5));
    const auto two = mixed_candidates(d, Box::unit(2), 2, 7);
    CHECK(two.rows() == 2);
    CHECK(Eigen::RowVectorXd(two.row(0)) == Eigen::RowVectorXd(chebyshev_candidates(Box::unit(2), 1, 7).row(0)));

    const auto c = mixed_candidates(d, Box::unit(2), 10001, 3);
    CHECK(c.rows() == 10001);
    CHECK(c.topRows(5001) == chebyshev_candidates(Box::unit(2), 5001, 3));
    CHECK((c.array() >= 0.0).all());
    CHECK((c.array() <= 1.0).all());
    CHECK(mixed_candidates(d, Box::unit(2), 100, 3) == mixed_candidates(d, Box::unit(2), 100, 3));
    // The density half follows Beta(2, 5), whose mean 2/7 differs from the arcsine mean 1/2.
    CHECK(c.bottomRows(5000).col(0).mean() == doctest::Approx(2.0 / 7.0).epsilon(0.05));
}

TEST_CASE("rejection sampling") {
    const Box box{{0.0, 0.0}, {2.0, 1.0}};
    RejectionStats stats;
    const auto s = rejection_sample([](std::span<const double>) { return 0.5; }, box, 1.0, 1000, std::uint64_t{5}, &stats);
    CHECK(stats.accepted == 1000);
    CHECK(stats.proposed == 1000);
    CHECK(s.rows() == 1000);
    const auto tiny = [](std::span<const double> z) { return z[0] < 1e-6 && z[1] < 1e-6 ? 0.5 : 0.0; };
    CHECK_THROWS_AS((void)rejection_sample(tiny, box, 1.0, 10, std::uint64_t{1}), SamplingEfficiencyError);
    CHECK_THROWS_AS((void)rejection_sample([](std::span<const double>) { return 5.0; }, box, 1.0, 10, std::uint64_t{1}),
                    std::invalid_argument);
    CHECK(rejection_sample([](std::span<const double> z) { return z[1]; }, box, 2.0, 50, std::uint64_t{9}) ==
          rejection_sample([](std::span<const double> z) { return z[1]; }, box, 2.0, 50, std::uint64_t{9}));
}
