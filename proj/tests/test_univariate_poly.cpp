#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include "pcedep/errors.hpp"
#include "pcedep/univariate_poly.hpp"

using namespace pcedep;

namespace {

std::vector<PolyFamily> families() {
    return {PolyFamily::legendre(), PolyFamily::beta(2.0, 5.0), PolyFamily::beta(10.0, 10.0),
            PolyFamily::beta(0.5, 3.0, -1.0, 2.0), PolyFamily::hermite()};
}

/// E[z^k] of the family measure.
double moment(const PolyFamily& f, int k) {
    if (f.kind() == FamilyKind::hermite) {
        if (k % 2 == 1) return 0.0;
        double m = 1.0;
        for (int i = k - 1; i > 0; i -= 2) m *= i;
        return m;
    }
    // E[(lower + (upper - lower) t)^k] with t ~ Beta(α, β), via binomial
    // expansion in 50-digit arithmetic to survive the alternating-sign cancellation.
    using big = boost::multiprecision::cpp_bin_float_50;
    std::vector<big> beta_moment(static_cast<std::size_t>(k + 1), big(1));
    for (int j = 1; j <= k; ++j)
        beta_moment[static_cast<std::size_t>(j)] = beta_moment[static_cast<std::size_t>(j - 1)] *
                                                   (big(f.alpha()) + j - 1) / (big(f.alpha()) + big(f.beta()) + j - 1);
    const big lo(f.lower());
    const big w = big(f.upper()) - lo;
    big total = 0;
    big binom = 1;
    for (int j = 0; j <= k; ++j) {
        total += binom * pow(lo, k - j) * pow(w, j) * beta_moment[static_cast<std::size_t>(j)];
        binom = binom * (k - j) / (j + 1);
    }
    return static_cast<double>(total);
}

/// Discretized Stieltjes procedure on the Beta(2, 5) density with a 30-point
/// Gauss-Legendre rule, exact for the polynomial integrands involved.
Recurrence stieltjes_beta25(int n) {
    using rule = boost::math::quadrature::gauss<double, 30>;
    std::vector<double> x;
    std::vector<double> w;
    for (std::size_t i = 0; i < rule::abscissa().size(); ++i) {
        for (int s : {-1, 1}) {
            if (i == 0 && s == -1 && rule::abscissa()[0] == 0.0) continue;
            const double t = 0.5 * (1.0 + s * rule::abscissa()[i]);
            x.push_back(t);
            w.push_back(0.5 * rule::weights()[i] * 30.0 * t * std::pow(1.0 - t, 4));
        }
    }
    Recurrence r;
    std::vector<double> prev(x.size(), 0.0);
    std::vector<double> cur(x.size(), 1.0);
    double prev_norm = 1.0;
    for (int k = 0; k <= n; ++k) {
        double norm = 0.0;
        double xnorm = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            norm += w[j] * cur[j] * cur[j];
            xnorm += w[j] * x[j] * cur[j] * cur[j];
        }
        const double a = xnorm / norm;
        const double b = k == 0 ? norm : norm / prev_norm;
        r.a.push_back(a);
        r.b.push_back(b);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double next = (x[j] - a) * cur[j] - (k == 0 ? 0.0 : b) * prev[j];
            prev[j] = cur[j];
            cur[j] = next;
        }
        prev_norm = norm;
    }
    return r;
}

}  // namespace

TEST_CASE("symmetric families have constant a_k") {
    const auto h = recurrence_coefficients(PolyFamily::hermite(), 20);
    const auto l = recurrence_coefficients(PolyFamily::legendre(), 20);
    for (int k = 0; k <= 20; ++k) {
        CHECK(std::abs(h.a[static_cast<std::size_t>(k)]) < 1e-14);
        CHECK(l.a[static_cast<std::size_t>(k)] == doctest::Approx(0.5).epsilon(1e-14));
        if (k >= 1) CHECK(h.b[static_cast<std::size_t>(k)] == doctest::Approx(k).epsilon(1e-14));
    }
    CHECK(h.b[0] == 1.0);
    CHECK(l.b[0] == 1.0);
}

TEST_CASE("Beta(2,5) recurrence matches a Stieltjes oracle") {
    const auto oracle = stieltjes_beta25(10);
    const auto r = recurrence_coefficients(PolyFamily::beta(2.0, 5.0), 10);
    for (std::size_t k = 0; k <= 10; ++k) {
        CHECK(r.a[k] == doctest::Approx(oracle.a[k]).epsilon(1e-12));
        CHECK(r.b[k] == doctest::Approx(oracle.b[k]).epsilon(1e-11));
    }
}

TEST_CASE("monomials have no recurrence") {
    CHECK_THROWS_AS((void)recurrence_coefficients(PolyFamily::monomial(), 3), Unsupported);
    CHECK_THROWS_AS((void)gauss_rule(PolyFamily::monomial(), 3), Unsupported);
}

TEST_CASE("low-degree closed forms") {
    const std::vector<double> xs{0.0, 0.1, 0.37, 0.5, 0.93, 1.0};
    const auto leg = evaluate_univariate(PolyFamily::legendre(), 2, xs);
    const std::vector<double> hx{-3.0, -0.4, 0.0, 1.7, 5.0};
    const auto her = evaluate_univariate(PolyFamily::hermite(), 2, hx);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const auto r = static_cast<Eigen::Index>(i);
        CHECK(leg(r, 0) == 1.0);
        CHECK(leg(r, 1) == doctest::Approx(std::sqrt(3.0) * (2 * x - 1)).epsilon(1e-13).scale(1.0));
        CHECK(leg(r, 2) == doctest::Approx(std::sqrt(5.0) * (6 * x * x - 6 * x + 1)).epsilon(1e-13).scale(1.0));
    }
    for (std::size_t i = 0; i < hx.size(); ++i) {
        const double x = hx[i];
        const auto r = static_cast<Eigen::Index>(i);
        CHECK(her(r, 0) == 1.0);
        CHECK(her(r, 1) == doctest::Approx(x).epsilon(1e-13).scale(1.0));
        CHECK(her(r, 2) == doctest::Approx((x * x - 1) / std::sqrt(2.0)).epsilon(1e-13).scale(1.0));
    }
    const std::vector<double> mid{0.5};
    CHECK(std::abs(evaluate_univariate(PolyFamily::legendre(), 1, mid)(0, 1)) < 1e-15);
}

TEST_CASE("Jacobi evaluation rejects points outside the support") {
    const std::vector<double> bad{1.5};
    CHECK_THROWS_AS((void)evaluate_univariate(PolyFamily::legendre(), 2, bad), std::domain_error);
    CHECK_NOTHROW((void)evaluate_univariate(PolyFamily::hermite(), 2, bad));
}

TEST_CASE("orthonormality under a 50-point Gauss rule") {
    for (const auto& f : families()) {
        const auto rule = gauss_rule(f, 50);
        const std::vector<double> nodes(rule.nodes.data(), rule.nodes.data() + rule.nodes.rows());
        const auto v = evaluate_univariate(f, 20, nodes);
        const Eigen::MatrixXd g = v.transpose() * rule.weights.asDiagonal() * v;
        CHECK((g - Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("small Gauss rules") {
    const auto one = gauss_rule(PolyFamily::legendre(), 1);
    CHECK(one.nodes(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(one.weights(0) == doctest::Approx(1.0).epsilon(1e-15));
    const auto two = gauss_rule(PolyFamily::hermite(), 2);
    CHECK(two.nodes(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(two.nodes(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(two.weights(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(two.weights(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS((void)gauss_rule(PolyFamily::legendre(), 0), std::invalid_argument);
}

TEST_CASE("Gauss rules integrate monomials of degree 2n - 1 exactly") {
    for (const auto& f : families()) {
        for (int n = 1; n <= 20; ++n) {
            const auto rule = gauss_rule(f, n);
            for (int k = 0; k <= 2 * n - 1; ++k) {
                double q = 0.0;
                double scale = 1.0;
                for (Eigen::Index j = 0; j < rule.weights.size(); ++j) {
                    const double term = rule.weights(j) * std::pow(rule.nodes(j, 0), k);
                    q += term;
                    scale += std::abs(term);
                }
                // Rounding in the quadrature sum is relative to Σ |w x^k|, not to the moment.
                CHECK(std::abs(q - moment(f, k)) <= 1e-11 * scale);
            }
        }
    }
}

TEST_CASE("Gauss rule invariants up to n = 30") {
    for (const auto& f : families()) {
        for (int n = 1; n <= 30; ++n) {
            const auto rule = gauss_rule(f, n);
            REQUIRE(rule.size() == static_cast<std::size_t>(n));
            CHECK((rule.weights.array() > 0.0).all());
            CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
            for (Eigen::Index j = 0; j < n; ++j) {
                if (f.kind() != FamilyKind::hermite) {
                    CHECK(rule.nodes(j, 0) > f.lower());
                    CHECK(rule.nodes(j, 0) < f.upper());
                }
                if (j > 0) CHECK(rule.nodes(j, 0) > rule.nodes(j - 1, 0));
            }
        }
    }
}

TEST_CASE("tensor rules and CSV") {
    const QuadratureRule parts[] = {gauss_rule(PolyFamily::legendre(), 2), gauss_rule(PolyFamily::hermite(), 3)};
    const auto t = tensor_rule(parts);
    CHECK(t.size() == 6);
    CHECK(t.dimension() == 2);
    CHECK(t.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.nodes(0, 0) == t.nodes(2, 0));
    const auto csv = quadrature_to_csv(t);
    CHECK(csv.rfind("node_1,node_2,weight\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(csv.find('\r') == std::string::npos);
}
