#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>
#include <nlohmann/json.hpp>

#include "pcedep/models.hpp"
#include "pcedep/surrogate.hpp"
#include "test_support.hpp"

using namespace pcedep;
using namespace pcedep::testing;

namespace {

std::shared_ptr<const GaussianCopulaDensity> beta25_copula(double rho) {
    Eigen::MatrixXd r(2, 2);
    r << 1.0, rho, rho, 1.0;
    return std::make_shared<GaussianCopulaDensity>(gaussian_copula_density({Marginal::beta(2, 5), Marginal::beta(2, 5)}, r));
}

FitConfig small_config(std::size_t candidates = 3000) {
    FitConfig c;
    c.candidates = candidates;
    c.gs_quadrature.order = 40;
    return c;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("unit coefficient vectors") {
    const PolynomialBasis basis(TensorBasis(total_degree_set(2, 3), PolyFamily::beta(2, 5)));
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(10);
    e1(0) = 1.0;
    Eigen::VectorXd e2 = Eigen::VectorXd::Zero(10);
    e2(1) = 1.0;
    const PceSurrogate s1(basis, e1, Strategy::parse("dom_2_5"));
    const PceSurrogate s2(basis, e2, Strategy::parse("dom_2_5"));
    Rng rng(1);
    const auto pts = TensorDensity(2, Marginal::uniform()).sample(20, rng);
    CHECK((s1.evaluate(pts).array() - 1.0).abs().maxCoeff() < 1e-15);
    CHECK(s1.moments().mean == doctest::Approx(1.0));
    CHECK(s1.moments().variance == 0.0);
    CHECK(s1.moments().space == MomentSpace::dominating);
    CHECK(s2.moments().mean == 0.0);
    CHECK(s2.moments().variance == doctest::Approx(1.0));
}

TEST_CASE("strategy names") {
    for (const char* name : {"gs_1_1", "gs_2_5", "gs_mono", "dom_1_1", "dom_10_4", "nataf_gauss", "nataf_unif"})
        CHECK(Strategy::parse(name).name() == name);
    CHECK(Strategy::parse("gs_2_5").alpha == 2.0);
    CHECK(Strategy::parse("gs_mono").monomial);
    CHECK(Strategy::parse("nataf_unif").target == TargetSpace::uniform);
    for (const char* bad : {"", "gs", "gs_1", "dom_a_b", "nataf_x", "foo_1_1", "gs_-1_2"})
        CHECK_THROWS_AS((void)Strategy::parse(bad), std::invalid_argument);
    CHECK(derive_seed(3, 1) == derive_seed(3, 1));
    CHECK(derive_seed(3, 1) != derive_seed(3, 2));
    CHECK(derive_seed(3, 1) != derive_seed(4, 1));
}

TEST_CASE("l2 error") {
    const auto density = beta25_copula(-0.9);
    const auto test = copula_sample(*density, 500, 2);
    const ModelFunction constant = [](std::span<const double>) { return 2.5; };
    const auto fit = fit_strategy(Strategy::parse("gs_1_1"), density, total_degree_set(2, 0), small_config(), constant, 3);
    CHECK(l2_error(constant, fit.surrogate, test) < 1e-14);
    CHECK(fit.surrogate.moments().mean == doctest::Approx(2.5).epsilon(1e-14));
    CHECK_THROWS_AS((void)l2_error(constant, fit.surrogate, Eigen::MatrixXd(0, 2)), std::invalid_argument);
    const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(500);
    CHECK(l2_error(zeros, fit.surrogate, test) == doctest::Approx(2.5));
}

TEST_CASE("every strategy reproduces polynomials and interpolates its nodes") {
    const auto density = beta25_copula(-0.9);
    const auto set = total_degree_set(2, 8);
    const ModelFunction poly = [](std::span<const double> z) {
        return 1.0 + 3.0 * z[0] - 2.0 * z[1] * z[1] + 5.0 * std::pow(z[0], 4) * std::pow(z[1], 3) + std::pow(z[1], 8);
    };
    const auto test = copula_sample(*density, 1000, 5);
    const Eigen::VectorXd exact = evaluate_model(poly, test);
    for (const char* name : {"gs_1_1", "gs_2_5", "dom_1_1", "nataf_gauss", "nataf_unif"}) {
        CAPTURE(name);
        const auto fit = fit_strategy(Strategy::parse(name), density, set, small_config(), poly, 6);
        const Eigen::MatrixXd nodes =
            fit.surrogate.transform() ? fit.surrogate.transform()->inverse(fit.sequence.points()) : fit.sequence.points();
        const Eigen::VectorXd at_nodes = fit.surrogate.evaluate(nodes);
        CHECK((at_nodes - fit.values).cwiseAbs().maxCoeff() < 1e-9 * fit.values.cwiseAbs().maxCoeff());
        if (Strategy::parse(name).kind != StrategyKind::nataf) {
            const Eigen::VectorXd approx = fit.surrogate.evaluate(test);
            CHECK((approx - exact).norm() / exact.norm() < 1e-8);
        }
    }
}

TEST_CASE("Nataf surrogate with an identity transform evaluates directly") {
    const auto density = std::make_shared<GaussianCopulaDensity>(
        gaussian_copula_density({Marginal::normal(), Marginal::normal()}, Eigen::MatrixXd::Identity(2, 2)));
    const ModelFunction f = [](std::span<const double> z) { return std::sin(z[0]) + z[1]; };
    const auto fit = fit_strategy(Strategy::parse("nataf_gauss"), density, total_degree_set(2, 4), small_config(), f, 1);
    Rng rng(2);
    const auto pts = TensorDensity(2, Marginal::normal()).sample(50, rng);
    const Eigen::VectorXd direct = fit.surrogate.basis().evaluate(pts) * fit.surrogate.coefficients();
    CHECK((fit.surrogate.evaluate(pts) - direct).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(fit.surrogate.moments().space == MomentSpace::u_space);
}

TEST_CASE("GS with the exact Gauss rule of an independent density matches DOM") {
    const auto density = std::make_shared<TensorDensity>(2, Marginal::beta(2, 5));
    const QuadratureRule parts[] = {gauss_rule(PolyFamily::beta(2, 5), 12), gauss_rule(PolyFamily::beta(2, 5), 12)};
    FitConfig gs_config = small_config();
    gs_config.gs_quadrature.kind = GsQuadrature::Kind::provided;
    gs_config.gs_quadrature.rule = std::make_shared<QuadratureRule>(tensor_rule(parts));
    const auto set = total_degree_set(2, 5);
    const ModelFunction f = [](std::span<const double> z) { return std::exp(z[0] - z[1]); };
    const auto gs = fit_strategy(Strategy::parse("gs_2_5"), density, set, gs_config, f, 4);
    const auto dom = fit_strategy(Strategy::parse("dom_2_5"), density, set, small_config(), f, 4);
    CHECK((gs.surrogate.basis().change_of_basis() - Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(gs.sequence.pivots() == dom.sequence.pivots());
    CHECK((gs.surrogate.coefficients() - dom.surrogate.coefficients()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fits are deterministic") {
    const auto density = beta25_copula(0.5);
    const auto g = make_genz_spec(2, 3);
    const ModelFunction f = [&g](std::span<const double> z) { return genz_oscillatory(g, z); };
    const auto a = fit_strategy(Strategy::parse("gs_1_1"), density, total_degree_set(2, 6), small_config(), f, 9);
    const auto b = fit_strategy(Strategy::parse("gs_1_1"), density, total_degree_set(2, 6), small_config(), f, 9);
    CHECK(a.sequence.pivots() == b.sequence.pivots());
    CHECK(a.surrogate.coefficients() == b.surrogate.coefficients());
    const auto j = surrogate_to_json(a.surrogate);
    CHECK(j["strategy"] == "gs_1_1");
    CHECK(j["coefficients"].size() == 28);
}

TEST_CASE("GS mean matches a dense reference") {
    const auto density = beta25_copula(-0.9);
    const auto g = make_genz_spec(2, 11);
    const ModelFunction f = [&g](std::span<const double> z) { return genz_oscillatory(g, z); };
    const auto reference_rule = copula_gauss_hermite_rule(*density, 200);
    const double reference = reference_rule.weights.dot(evaluate_model(f, reference_rule.nodes));
    FitConfig config;
    const auto fit = fit_strategy(Strategy::parse("gs_1_1"), density, total_degree_set(2, 15), config, f, 1);
    CHECK(std::abs(fit.surrogate.moments().mean - reference) < 1e-4 * std::abs(reference));
}

TEST_CASE("GS moments agree with Monte Carlo") {
    const auto density = beta25_copula(-0.9);
    const ModelFunction f = [](std::span<const double> z) { return std::exp(z[0] + 0.5 * z[1]) * std::cos(2.0 * z[1]); };
    const auto fit = fit_strategy(Strategy::parse("gs_2_5"), density, total_degree_set(2, 10), small_config(), f, 2);
    const auto mc = evaluate_model(f, copula_sample(*density, 1000000, 77));
    const double mean = mc.mean();
    const Eigen::ArrayXd centred = mc.array() - mean;
    const double var = centred.square().sum() / static_cast<double>(mc.size() - 1);
    const double var_se = std::sqrt((centred.pow(4).mean() - var * var) / static_cast<double>(mc.size()));
    const auto m = fit.surrogate.moments();
    CHECK(m.space == MomentSpace::target);
    CHECK(std::abs(m.mean - mean) < 3.0 * standard_error_of_mean(mc));
    CHECK(std::abs(m.variance - var) < 3.0 * var_se);
}

TEST_CASE("error decreases with degree for a smooth function") {
    const auto density = beta25_copula(-0.9);
    const ModelFunction f = [](std::span<const double> z) { return std::exp(z[0] + 0.5 * z[1]); };
    const auto test = copula_sample(*density, 2000, 8);
    const Eigen::VectorXd exact = evaluate_model(f, test);
    double previous = INFINITY;
    std::vector<StrategyFitter> fitters;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
        fitters.emplace_back(Strategy::parse("gs_1_1"), density, total_degree_set(2, 10), small_config(), seed);
    for (int p = 1; p <= 10; ++p) {
        std::vector<double> errors;
        for (const auto& fitter : fitters) errors.push_back(l2_error(exact, fitter.fit(total_degree_set(2, p), f).surrogate, test));
        const double e = median(errors);
        CAPTURE(p);
        CHECK(e < previous);
        previous = e;
    }
}

TEST_CASE("domination constant") {
    const TensorDensity beta1(1, Marginal::beta(10, 10));
    CHECK(domination_constant(beta1, beta1, 10000, 1) == doctest::Approx(1.0).epsilon(1e-12));
    const double analytic = std::pow(0.5, 18) * boost::math::tgamma(20.0) /
                            (boost::math::tgamma(10.0) * boost::math::tgamma(10.0));
    CHECK(analytic == doctest::Approx(3.5239).epsilon(1e-4));
    const TensorDensity uniform(1, Marginal::uniform());
    CHECK(std::abs(domination_constant(beta1, uniform, 100000, 2) - analytic) < 1e-2);
    double previous = 0.0;
    for (double b : {10.0, 8.0, 6.0, 4.0, 2.0, 1.0}) {
        const double c = domination_constant(TensorDensity(3, Marginal::beta(10, 10)), TensorDensity(3, Marginal::beta(b, b)),
                                             20000, 3);
        CHECK(c > previous);
        previous = c;
    }
    const TensorDensity narrow(1, Marginal::beta(2, 2, 0.2, 0.8));
    CHECK(domination_constant(beta1, narrow, 1000, 4) == INFINITY);
}

TEST_CASE("domination bound holds for the dominating-measure error") {
    const auto omega = std::make_shared<TensorDensity>(1, Marginal::beta(10, 10));
    const TensorDensity g(1, Marginal::uniform());
    const auto c_r = domination_constant(*omega, g, 100000, 5);
    const ModelFunction f = [](std::span<const double> z) { return std::cos(6.0 * z[0] + 0.3); };
    Rng rng(6);
    const auto from_omega = omega->sample(100000, rng);
    const auto from_g = g.sample(100000, rng);
    for (int p : {2, 4, 6}) {
        const auto fit = fit_strategy(Strategy::parse("dom_1_1"), omega, total_degree_set(1, p), small_config(), f, 7);
        const double e_omega = l2_error(f, fit.surrogate, from_omega);
        const double e_g = l2_error(f, fit.surrogate, from_g);
        CHECK(e_omega <= 1.05 * std::sqrt(c_r) * e_g);
    }
}
