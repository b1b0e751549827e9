#include <cmath>
#include <memory>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "pcedep/errors.hpp"
#include "pcedep/transform.hpp"
#include "test_support.hpp"

using namespace pcedep;
using namespace pcedep::testing;

namespace {

Eigen::MatrixXd corr2(double rho) {
    Eigen::MatrixXd r(2, 2);
    r << 1.0, rho, rho, 1.0;
    return r;
}

std::vector<Marginal> beta25x2() { return {Marginal::beta(2, 5), Marginal::beta(2, 5)}; }

}  // namespace

TEST_CASE("Gaussian marginals need no correlation correction") {
    const std::vector<Marginal> m{Marginal::normal(), Marginal::normal(2.0, 3.0), Marginal::normal(-1.0, 0.5)};
    Eigen::MatrixXd r_z(3, 3);
    r_z << 1.0, 0.6, -0.3, 0.6, 1.0, 0.2, -0.3, 0.2, 1.0;
    const auto r_v = nataf_correlation_solve(r_z, m);
    CHECK((r_v - r_z).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero correlation is a fixed point") {
    const std::vector<Marginal> m{Marginal::beta(2, 5), Marginal::beta(0.7, 3.0), Marginal::uniform()};
    const auto r_v = nataf_correlation_solve(Eigen::MatrixXd::Identity(3, 3), m);
    CHECK((r_v - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("correlation solve residual and quadrature order") {
    const auto m = beta25x2();
    for (double rho : {-0.8, -0.3, 0.5, 0.9}) {
        const auto r_v = nataf_correlation_solve(corr2(rho), m);
        CHECK(std::abs(nataf_z_correlation(m[0], m[1], r_v(0, 1)) - rho) < 1e-8);
        CHECK(std::abs(nataf_z_correlation(m[0], m[1], r_v(0, 1), 50) -
                       nataf_z_correlation(m[0], m[1], r_v(0, 1), 100)) < 1e-9);
    }
}

TEST_CASE("Beta(2,5) correlation round trip through copula sampling") {
    const auto m = beta25x2();
    const auto r_v = nataf_correlation_solve(corr2(0.5), m);
    const auto z = copula_sample(gaussian_copula_density(m, r_v), 1000000, 31);
    CHECK(std::abs(pearson(z.col(0), z.col(1)) - 0.5) < 0.01);
}

TEST_CASE("unattainable correlations are infeasible") {
    const std::vector<Marginal> m{Marginal::beta(0.5, 5.0), Marginal::beta(5.0, 0.5)};
    CHECK_THROWS_AS((void)nataf_correlation_solve(corr2(0.99), m), InfeasibleCorrelation);
}

TEST_CASE("Nataf forward special cases") {
    const auto id = NatafTransform::from_gaussian_correlation({Marginal::normal(), Marginal::normal()},
                                                              Eigen::MatrixXd::Identity(2, 2), TargetSpace::gauss);
    const double z[] = {0.3, -1.7};
    const auto u = id.forward(std::span<const double>(z));
    CHECK(u(0) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(u(1) == doctest::Approx(-1.7).epsilon(1e-14));

    const auto one = NatafTransform::from_gaussian_correlation({Marginal::beta(2, 5)}, Eigen::MatrixXd::Identity(1, 1),
                                                               TargetSpace::uniform);
    for (double x : {0.05, 0.3, 0.8}) {
        const double in[] = {x};
        CHECK(one.forward(std::span<const double>(in))(0) ==
              doctest::Approx(2.0 * Marginal::beta(2, 5).cdf(x) - 1.0).epsilon(1e-13));
    }
    const double edge[] = {0.0, 0.5};
    const auto t = NatafTransform::for_density(gaussian_copula_density(beta25x2(), corr2(-0.9)), TargetSpace::gauss);
    CHECK_THROWS_AS((void)t.forward(std::span<const double>(edge)), BoundaryError);
    CHECK((t.cholesky() * t.cholesky().transpose() - t.r_v()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Nataf round trips") {
    const auto density = gaussian_copula_density(beta25x2(), corr2(-0.9));
    const auto z = copula_sample(density, 1000, 2);
    for (TargetSpace target : {TargetSpace::gauss, TargetSpace::uniform}) {
        const auto t = NatafTransform::for_density(density, target);
        const Eigen::MatrixXd back = t.inverse(t.forward(z));
        CHECK((back - z).cwiseAbs().maxCoeff() < 1e-10);
        Rng rng(3);
        const auto u = t.target_density().sample(1000, rng);
        CHECK((t.forward(t.inverse(u)) - u).cwiseAbs().maxCoeff() < 1e-8);
    }
    const NatafTransform solved(beta25x2(), corr2(0.5), TargetSpace::gauss);
    CHECK(std::abs(solved.r_z()(0, 1) - 0.5) < 1e-12);
    const auto j = nataf_to_json(solved);
    CHECK(j.contains("r_v"));
    CHECK(j.contains("r_z"));
}

TEST_CASE("Nataf pushforward of copula samples is the target") {
    const auto density = gaussian_copula_density(beta25x2(), corr2(-0.9));
    const auto z = copula_sample(density, 100000, 5);
    const auto g = NatafTransform::for_density(density, TargetSpace::gauss).forward(z);
    const auto u = NatafTransform::for_density(density, TargetSpace::uniform).forward(z);
    for (int k = 0; k < 2; ++k) {
        CHECK(ks_statistic(g.col(k), std_normal_cdf) < ks_critical_001(100000));
        CHECK(ks_statistic(u.col(k), [](double x) { return 0.5 * (x + 1.0); }) < ks_critical_001(100000));
    }
    CHECK(std::abs(pearson(g.col(0), g.col(1))) < 0.02);
}

TEST_CASE("Rosenblatt of independent densities") {
    const std::vector<Marginal> m{Marginal::beta(2, 5), Marginal::normal(1.0, 2.0)};
    const auto t = make_rosenblatt(std::make_shared<TensorDensity>(m));
    const double z[] = {0.4, -0.5};
    const auto u = t.forward(std::span<const double>(z));
    CHECK(u(0) == doctest::Approx(m[0].cdf(0.4)).epsilon(1e-14));
    CHECK(u(1) == doctest::Approx(m[1].cdf(-0.5)).epsilon(1e-14));
    const double v[] = {0.3, 0.9};
    const auto back = t.inverse(std::span<const double>(v));
    CHECK(back(0) == doctest::Approx(m[0].quantile(0.3)).epsilon(1e-10));
    CHECK(back(1) == doctest::Approx(m[1].quantile(0.9)).epsilon(1e-10));
}

TEST_CASE("copula conditionals agree with quadrature marginalization") {
    const auto density = std::make_shared<GaussianCopulaDensity>(gaussian_copula_density(beta25x2(), corr2(0.6)));
    const CopulaCdfProvider analytic(*density);
    const QuadratureCdfProvider2D numeric(density, 64, 12);
    for (double z1 : {0.1, 0.25, 0.5}) {
        const double prefix[] = {z1};
        CHECK(numeric.conditional_cdf(0, z1, {}) == doctest::Approx(analytic.conditional_cdf(0, z1, {})).epsilon(1e-6));
        for (double z2 : {0.05, 0.2, 0.4, 0.7})
            CHECK(std::abs(numeric.conditional_cdf(1, z2, prefix) - analytic.conditional_cdf(1, z2, prefix)) < 1e-6);
    }
}

TEST_CASE("Rosenblatt of the copula density") {
    const auto density = std::make_shared<GaussianCopulaDensity>(gaussian_copula_density(beta25x2(), corr2(-0.9)));
    const auto t = make_rosenblatt(density);
    const auto z = copula_sample(*density, 100, 7);
    const auto u = t.forward(z);
    CHECK((u.array() >= 0.0).all());
    CHECK((u.array() <= 1.0).all());
    CHECK((t.inverse(u) - z).cwiseAbs().maxCoeff() < 1e-8);
    Rng rng(8);
    const auto w = TensorDensity(2, Marginal::uniform(0.02, 0.98)).sample(100, rng);
    CHECK((t.forward(t.inverse(w)) - w).cwiseAbs().maxCoeff() < 1e-10);

    const double lo[] = {0.3, 0.4};
    const double hi[] = {0.3, 0.6};
    CHECK(t.inverse(std::span<const double>(hi))(1) > t.inverse(std::span<const double>(lo))(1));
}

TEST_CASE("generic two-dimensional Rosenblatt") {
    const auto banana = std::make_shared<BananaDensity>();
    const auto t = make_rosenblatt(banana);
    Rng rng(9);
    const auto z = banana->sample(20, rng);
    const auto u = t.forward(z);
    CHECK((u.array() >= 0.0).all());
    CHECK((u.array() <= 1.0).all());
    CHECK((t.inverse(u) - z).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_THROWS_AS((void)make_rosenblatt(std::make_shared<BetaMixtureDensity>(
                        std::vector<BetaComponent>{{0.5, 10, 4}, {0.5, 4, 10}}, 3)),
                    Unsupported);
}
