#include "pcedep/basis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pcedep/errors.hpp"
#include "pcedep/io.hpp"

namespace pcedep {

TensorBasis::TensorBasis(MultiIndexSet index_set, std::vector<PolyFamily> families)
    : index_set_(std::move(index_set)), families_(std::move(families)) {
    if (families_.size() != index_set_.dimension())
        throw std::invalid_argument("tensor basis needs one family per dimension");
    if (index_set_.size() == 0) throw std::invalid_argument("tensor basis needs a non-empty index set");
}

TensorBasis::TensorBasis(MultiIndexSet index_set, const PolyFamily& family)
    : TensorBasis(index_set, std::vector<PolyFamily>(index_set.dimension(), family)) {}

bool TensorBasis::orthonormal() const {
    for (const auto& f : families_)
        if (!f.orthonormal()) return false;
    return true;
}

Eigen::MatrixXd TensorBasis::evaluate(const Eigen::MatrixXd& points) const {
    const auto d = dimension();
    if (static_cast<std::size_t>(points.cols()) != d)
        throw std::invalid_argument("points have " + std::to_string(points.cols()) + " columns, basis dimension is " +
                                    std::to_string(d));
    const auto m = points.rows();
    std::vector<Eigen::MatrixXd> uni(d);
    std::vector<double> column(static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < d; ++k) {
        for (Eigen::Index i = 0; i < m; ++i) column[static_cast<std::size_t>(i)] = points(i, static_cast<Eigen::Index>(k));
        uni[k] = evaluate_univariate(families_[k], index_set_.max_degree(k), column);
    }
    Eigen::MatrixXd out(m, static_cast<Eigen::Index>(size()));
    for (std::size_t n = 0; n < size(); ++n) {
        const auto& lambda = index_set_[n];
        auto col = out.col(static_cast<Eigen::Index>(n));
        col.setOnes();
        for (std::size_t k = 0; k < d; ++k)
            if (lambda[k] != 0) col.array() *= uni[k].col(lambda[k]).array();
    }
    return out;
}

TensorBasis TensorBasis::truncated(std::size_t n) const {
    if (n == 0 || n > size()) throw std::invalid_argument("truncation size out of range");
    std::vector<MultiIndex> head(index_set_.indices().begin(),
                                 index_set_.indices().begin() + static_cast<std::ptrdiff_t>(n));
    return {MultiIndexSet(dimension(), std::move(head)), families_};
}

PolynomialBasis::PolynomialBasis(TensorBasis tensor) : tensor_(std::move(tensor)) {}

PolynomialBasis::PolynomialBasis(OrthogonalizedBasis orthogonalized)
    : tensor_(std::move(orthogonalized.source)),
      change_(std::move(orthogonalized.change_of_basis)),
      quadrature_used_(std::move(orthogonalized.quadrature_used)),
      gs_condition_(orthogonalized.gs_condition) {
    const auto n = static_cast<Eigen::Index>(tensor_.size());
    if (change_->rows() != n || change_->cols() != n)
        throw std::invalid_argument("change of basis must be N×N");
}

const Eigen::MatrixXd& PolynomialBasis::change_of_basis() const {
    if (!change_) throw std::logic_error("tensor basis has no change of basis");
    return *change_;
}

double PolynomialBasis::constant_value() const {
    const auto& first = index_set()[0];
    for (int v : first)
        if (v != 0) throw std::logic_error("first basis function is not constant");
    return change_ ? (*change_)(0, 0) : 1.0;
}

Eigen::MatrixXd PolynomialBasis::evaluate(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd psi = tensor_.evaluate(points);
    if (!change_) return psi;
    return psi * change_->triangularView<Eigen::Upper>();
}

PolynomialBasis PolynomialBasis::truncated(std::size_t n) const {
    if (!change_) return {tensor_.truncated(n)};
    const auto k = static_cast<Eigen::Index>(n);
    OrthogonalizedBasis head{tensor_.truncated(n), change_->topLeftCorner(k, k), quadrature_used_,
                             condition_number(change_->topLeftCorner(k, k))};
    return {std::move(head)};
}

Eigen::MatrixXd assemble_vandermonde(const PolynomialBasis& basis, const Eigen::MatrixXd& points) {
    return basis.evaluate(points);
}

namespace {

Eigen::MatrixXd weighted_vandermonde(const TensorBasis& tensor, const QuadratureRule& rule) {
    if (rule.dimension() != tensor.dimension())
        throw std::invalid_argument("quadrature and basis dimensions differ");
    if ((rule.weights.array() < 0.0).any()) throw std::invalid_argument("quadrature weights must be non-negative");
    Eigen::MatrixXd a = tensor.evaluate(rule.nodes);
    a.array().colwise() *= rule.weights.array().sqrt();
    return a;
}

}  // namespace

double condition_number(const Eigen::MatrixXd& m) {
    if (m.size() == 0) throw std::invalid_argument("condition number of an empty matrix");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

namespace {

/// R factor of a thin Householder QR, rows sign-flipped so that diag(R) >= 0.
Eigen::MatrixXd positive_r_factor(const Eigen::MatrixXd& a) {
    const auto n = a.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i)
        if (r(i, i) < 0.0) r.row(i) *= -1.0;
    return r;
}

}  // namespace

OrthogonalizedBasis gram_schmidt_orthogonalize(const TensorBasis& tensor, const QuadratureRule& rule) {
    const Eigen::MatrixXd a = weighted_vandermonde(tensor, rule);
    const auto n = a.cols();
    if (a.rows() < n) throw IllPosedOrthogonalization(static_cast<std::size_t>(a.rows()), 0.0);

    const Eigen::MatrixXd r = positive_r_factor(a);
    const double r00 = std::abs(r(0, 0));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ratio = r00 > 0.0 ? std::abs(r(i, i)) / r00 : 0.0;
        if (!(ratio >= 1e-12)) throw IllPosedOrthogonalization(static_cast<std::size_t>(i), ratio);
    }
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(identity);
    // One reorthogonalization pass removes the O(eps κ) loss of orthogonality
    // left by the first triangular solve.
    const Eigen::MatrixXd r2 = positive_r_factor(a * r_inv);
    r_inv = r_inv * r2.triangularView<Eigen::Upper>().solve(identity);
    r_inv = r_inv.triangularView<Eigen::Upper>();
    return {tensor, std::move(r_inv), rule.description, condition_number(r)};
}

QuadratureRule density_ratio_quadrature(const QuadratureRule& dominating_rule, const JointDensity& target,
                                        const JointDensity& dominating) {
    if (dominating_rule.dimension() != target.dimension() || target.dimension() != dominating.dimension())
        throw std::invalid_argument("rule and densities differ in dimension");
    const Eigen::VectorXd omega = target.density(dominating_rule.nodes);
    const Eigen::VectorXd nu = dominating.density(dominating_rule.nodes);
    QuadratureRule out{dominating_rule.nodes, dominating_rule.weights, dominating_rule.description + "/density-ratio"};
    for (Eigen::Index q = 0; q < nu.size(); ++q) {
        if (!(nu(q) > 0.0))
            throw std::domain_error("dominating density vanishes at quadrature node " + std::to_string(q));
        out.weights(q) *= omega(q) / nu(q);
    }
    return out;
}

QuadratureRule copula_gauss_hermite_rule(const GaussianCopulaDensity& density, int order) {
    const std::size_t d = density.dimension();
    const std::vector<QuadratureRule> factors(d, gauss_rule(PolyFamily::hermite(), order));
    QuadratureRule rule = tensor_rule(factors);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(density.correlation().entries());
    const Eigen::MatrixXd root =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixXd uhat = rule.nodes * root;
    for (Eigen::Index q = 0; q < uhat.rows(); ++q)
        for (std::size_t k = 0; k < d; ++k)
            rule.nodes(q, static_cast<Eigen::Index>(k)) =
                density.marginals()[k].from_standard_normal(uhat(q, static_cast<Eigen::Index>(k)));
    rule.description = "copula-gauss-hermite";
    return rule;
}

QuadratureRule monte_carlo_rule(const Eigen::MatrixXd& samples) {
    if (samples.rows() < 1) throw std::invalid_argument("Monte Carlo rule needs at least one sample");
    return {samples, Eigen::VectorXd::Constant(samples.rows(), 1.0 / static_cast<double>(samples.rows())),
            "monte-carlo"};
}

Eigen::VectorXd christoffel(const PolynomialBasis& basis, const Eigen::MatrixXd& points) {
    return basis.evaluate(points).rowwise().squaredNorm();
}

double moment_condition_number(const TensorBasis& tensor, const QuadratureRule& rule) {
    return condition_number(weighted_vandermonde(tensor, rule));
}

Eigen::MatrixXd gram_matrix(const PolynomialBasis& basis, const QuadratureRule& rule) {
    const Eigen::MatrixXd phi = basis.evaluate(rule.nodes);
    return phi.transpose() * rule.weights.asDiagonal() * phi;
}

nlohmann::json family_to_json(const PolyFamily& family) {
    nlohmann::json j;
    switch (family.kind()) {
        case FamilyKind::jacobi:
            j = {{"kind", "jacobi"}, {"alpha", family.alpha()}, {"beta", family.beta()},
                 {"lower", family.lower()}, {"upper", family.upper()}};
            break;
        case FamilyKind::hermite: j = {{"kind", "hermite"}}; break;
        case FamilyKind::monomial:
            j = {{"kind", "monomial"}, {"lower", family.lower()}, {"upper", family.upper()}};
            break;
    }
    return j;
}

PolyFamily family_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "jacobi")
        return PolyFamily::beta(j.at("alpha").get<double>(), j.at("beta").get<double>(), j.at("lower").get<double>(),
                                j.at("upper").get<double>());
    if (kind == "hermite") return PolyFamily::hermite();
    if (kind == "monomial") return PolyFamily::monomial(j.at("lower").get<double>(), j.at("upper").get<double>());
    throw std::invalid_argument("unknown family kind '" + kind + "'");
}

nlohmann::json basis_to_json(const PolynomialBasis& basis) {
    nlohmann::json families = nlohmann::json::array();
    for (const auto& f : basis.tensor().families()) families.push_back(family_to_json(f));
    nlohmann::json j{{"index_set", index_set_to_json(basis.index_set())}, {"families", families}};
    if (basis.orthogonalized()) {
        j["change_of_basis"] = matrix_to_json(basis.change_of_basis());
        j["gs_condition"] = basis.gs_condition();
        j["quadrature"] = basis.quadrature_used();
    }
    return j;
}

PolynomialBasis basis_from_json(const nlohmann::json& j) {
    std::vector<PolyFamily> families;
    for (const auto& f : j.at("families")) families.push_back(family_from_json(f));
    TensorBasis tensor(index_set_from_json(j.at("index_set")), std::move(families));
    if (!j.contains("change_of_basis")) return {std::move(tensor)};
    return {OrthogonalizedBasis{std::move(tensor), matrix_from_json(j.at("change_of_basis")),
                                j.value("quadrature", std::string{}), j.value("gs_condition", 1.0)}};
}

}  // namespace pcedep
