#include "pcedep/univariate_poly.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pcedep/errors.hpp"
#include "pcedep/io.hpp"

namespace pcedep {

PolyFamily PolyFamily::beta(double alpha, double beta, double lower, double upper) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("Beta parameters must be positive");
    if (!(upper > lower)) throw std::invalid_argument("family interval must have upper > lower");
    return {FamilyKind::jacobi, alpha, beta, lower, upper};
}

PolyFamily PolyFamily::hermite() {
    const double inf = std::numeric_limits<double>::infinity();
    return {FamilyKind::hermite, 0.0, 0.0, -inf, inf};
}

PolyFamily PolyFamily::monomial(double lower, double upper) {
    if (!(upper > lower)) throw std::invalid_argument("family interval must have upper > lower");
    return {FamilyKind::monomial, 0.0, 0.0, lower, upper};
}

std::string PolyFamily::label() const {
    std::ostringstream os;
    switch (kind_) {
        case FamilyKind::jacobi:
            os << "jacobi(" << alpha_ << "," << beta_ << ")[" << lower_ << "," << upper_ << "]";
            break;
        case FamilyKind::hermite: os << "hermite"; break;
        case FamilyKind::monomial: os << "monomial[" << lower_ << "," << upper_ << "]"; break;
    }
    return os.str();
}

Recurrence recurrence_coefficients(const PolyFamily& family, int n) {
    if (n < 0) throw std::invalid_argument("recurrence length must be >= 0");
    Recurrence rec;
    rec.a.resize(static_cast<std::size_t>(n) + 1);
    rec.b.resize(static_cast<std::size_t>(n) + 1);
    switch (family.kind()) {
        case FamilyKind::monomial:
            throw Unsupported("monomial family has no orthonormal recurrence");
        case FamilyKind::hermite:
            for (int k = 0; k <= n; ++k) {
                rec.a[k] = 0.0;
                rec.b[k] = k == 0 ? 1.0 : static_cast<double>(k);
            }
            return rec;
        case FamilyKind::jacobi: break;
    }

    // Monic Jacobi recurrence on [-1, 1], then the affine map to [lower, upper].
    const double ja = family.jacobi_a();
    const double jb = family.jacobi_b();
    const double half_width = 0.5 * (family.upper() - family.lower());
    for (int k = 0; k <= n; ++k) {
        double alpha_k;
        double beta_k;
        const double s = 2.0 * k + ja + jb;
        if (k == 0) {
            alpha_k = (jb - ja) / (ja + jb + 2.0);
            beta_k = 1.0;
        } else {
            alpha_k = (jb * jb - ja * ja) / (s * (s + 2.0));
            if (k == 1) {
                beta_k = 4.0 * (1.0 + ja) * (1.0 + jb) / ((2.0 + ja + jb) * (2.0 + ja + jb) * (3.0 + ja + jb));
            } else {
                beta_k = 4.0 * k * (k + ja) * (k + jb) * (k + ja + jb) / (s * s * (s + 1.0) * (s - 1.0));
            }
        }
        rec.a[k] = family.lower() + half_width * (alpha_k + 1.0);
        rec.b[k] = k == 0 ? 1.0 : beta_k * half_width * half_width;
    }
    return rec;
}

Eigen::MatrixXd evaluate_univariate(const PolyFamily& family, int max_degree,
                                    std::span<const double> points) {
    if (max_degree < 0) throw std::invalid_argument("max_degree must be >= 0");
    const auto n_pts = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd vals(n_pts, max_degree + 1);

    if (family.kind() == FamilyKind::monomial) {
        const double mid = 0.5 * (family.lower() + family.upper());
        const double half = 0.5 * (family.upper() - family.lower());
        for (Eigen::Index i = 0; i < n_pts; ++i) {
            const double x = (points[i] - mid) / half;
            double p = 1.0;
            for (int j = 0; j <= max_degree; ++j) {
                vals(i, j) = p;
                p *= x;
            }
        }
        return vals;
    }

    if (family.kind() == FamilyKind::jacobi) {
        const double slack = 1e-12 * (family.upper() - family.lower());
        for (double x : points) {
            if (!(x >= family.lower() - slack && x <= family.upper() + slack))
                throw std::domain_error("point " + std::to_string(x) + " outside support of " +
                                        family.label());
        }
    }

    const Recurrence rec = recurrence_coefficients(family, max_degree);
    for (Eigen::Index i = 0; i < n_pts; ++i) {
        const double x = points[i];
        double prev = 0.0;
        double cur = 1.0;
        vals(i, 0) = 1.0;
        for (int k = 0; k < max_degree; ++k) {
            const double next = ((x - rec.a[k]) * cur - std::sqrt(rec.b[k]) * prev) / std::sqrt(rec.b[k + 1]);
            vals(i, k + 1) = next;
            prev = cur;
            cur = next;
        }
    }
    return vals;
}

QuadratureRule gauss_rule(const PolyFamily& family, int n) {
    if (n < 1) throw std::invalid_argument("Gauss rule needs at least one node");
    if (family.kind() == FamilyKind::monomial)
        throw Unsupported("Gauss rule requires an orthonormal family");
    const Recurrence rec = recurrence_coefficients(family, n);

    QuadratureRule rule;
    rule.description = "gauss";
    rule.nodes.resize(n, 1);
    rule.weights.resize(n);
    if (n == 1) {
        rule.nodes(0, 0) = rec.a[0];
        rule.weights(0) = 1.0;
        return rule;
    }
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 0; k < n; ++k) diag(k) = rec.a[k];
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(rec.b[k]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericError("Golub-Welsch eigen-solve failed");
    // Weights from the Christoffel function 1 / Σ φ_j(x)² keep full relative
    // accuracy at extreme nodes, where squared eigenvector entries do not.
    const std::vector<double> nodes(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    const Eigen::MatrixXd phi = evaluate_univariate(family, n - 1, nodes);
    for (int k = 0; k < n; ++k) {
        rule.nodes(k, 0) = nodes[static_cast<std::size_t>(k)];
        rule.weights(k) = 1.0 / phi.row(k).squaredNorm();
    }
    return rule;
}

QuadratureRule tensor_rule(std::span<const QuadratureRule> rules) {
    if (rules.empty()) throw std::invalid_argument("tensor rule needs at least one factor");
    Eigen::Index total = 1;
    for (const auto& r : rules) {
        if (r.dimension() != 1) throw std::invalid_argument("tensor rule factors must be one-dimensional");
        total *= static_cast<Eigen::Index>(r.size());
    }
    const auto d = static_cast<Eigen::Index>(rules.size());
    QuadratureRule out;
    out.description = "tensor-gauss";
    out.nodes.resize(total, d);
    out.weights.setOnes(total);
    Eigen::Index stride = total;
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto& r = rules[static_cast<std::size_t>(k)];
        const auto nk = static_cast<Eigen::Index>(r.size());
        stride /= nk;
        for (Eigen::Index q = 0; q < total; ++q) {
            const Eigen::Index j = (q / stride) % nk;
            out.nodes(q, k) = r.nodes(j, 0);
            out.weights(q) *= r.weights(j);
        }
    }
    return out;
}

std::string quadrature_to_csv(const QuadratureRule& rule) {
    std::vector<std::string> header;
    for (std::size_t k = 0; k < rule.dimension(); ++k) header.push_back("node_" + std::to_string(k + 1));
    header.emplace_back("weight");
    Eigen::MatrixXd table(rule.nodes.rows(), rule.nodes.cols() + 1);
    table << rule.nodes, rule.weights;
    return matrix_to_csv(table, header);
}

}  // namespace pcedep
