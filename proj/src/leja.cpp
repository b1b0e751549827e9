#include "pcedep/leja.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pcedep/errors.hpp"
#include "pcedep/io.hpp"

namespace pcedep {

const char* to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::christoffel: return "christoffel";
        case WeightKind::sqrt_density: return "sqrt-density";
        case WeightKind::constant: return "constant";
    }
    return "?";
}

WeightKind weight_kind_from_string(const std::string& name) {
    if (name == "christoffel") return WeightKind::christoffel;
    if (name == "sqrt-density") return WeightKind::sqrt_density;
    if (name == "constant") return WeightKind::constant;
    throw std::invalid_argument("unknown weight kind '" + name + "'");
}

Eigen::VectorXd christoffel_weight(const PolynomialBasis& basis, const Eigen::MatrixXd& points) {
    return christoffel(basis, points).array().rsqrt();
}

Eigen::VectorXd leja_weight(WeightKind kind, const PolynomialBasis& basis, const Eigen::MatrixXd& points,
                            const JointDensity* density) {
    switch (kind) {
        case WeightKind::christoffel: return christoffel_weight(basis, points);
        case WeightKind::sqrt_density:
            if (!density) throw std::invalid_argument("sqrt-density weight needs a density");
            return density->density(points).array().sqrt();
        case WeightKind::constant: return Eigen::VectorXd::Ones(points.rows());
    }
    throw std::invalid_argument("unknown weight kind");
}

LejaSequence::LejaSequence(PolynomialBasis basis, Eigen::MatrixXd points, std::vector<std::size_t> pivots,
                           Eigen::MatrixXd lower, Eigen::MatrixXd upper, Eigen::VectorXd weight_values,
                           WeightKind weight_kind, std::string provenance)
    : basis_(std::move(basis)),
      points_(std::move(points)),
      pivots_(std::move(pivots)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      weight_values_(std::move(weight_values)),
      weight_kind_(weight_kind),
      provenance_(std::move(provenance)) {}

LejaSequence build_leja(const PolynomialBasis& basis, const Eigen::MatrixXd& candidates, std::size_t m,
                        WeightKind kind, const JointDensity* density, std::string provenance) {
    const auto s = candidates.rows();
    const auto n = static_cast<Eigen::Index>(basis.size());
    const auto mm = static_cast<Eigen::Index>(m);
    if (m == 0) throw std::invalid_argument("Leja sequence needs at least one point");
    if (mm > n) throw std::invalid_argument("Leja sequence longer than the basis");
    if (mm > s) throw std::invalid_argument("fewer candidates than requested points");

    const Eigen::VectorXd v = leja_weight(kind, basis, candidates, density);
    Eigen::MatrixXd a = basis.evaluate(candidates);
    a.array().colwise() *= v.array();

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(s));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});

    for (Eigen::Index k = 0; k < mm; ++k) {
        const auto col = a.col(k).segment(k, s - k);
        const double best = col.cwiseAbs().maxCoeff();
        if (!(best >= 1e-13)) throw UnisolvenceFailure(static_cast<std::size_t>(k + 1), best);
        const double floor = best * (1.0 - 1e-12);
        Eigen::Index row = -1;
        for (Eigen::Index r = k; r < s; ++r) {
            if (std::abs(a(r, k)) >= floor &&
                (row < 0 || perm[static_cast<std::size_t>(r)] < perm[static_cast<std::size_t>(row)]))
                row = r;
        }
        if (row != k) {
            a.row(k).swap(a.row(row));
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(row)]);
        }
        const Eigen::Index rest = s - k - 1;
        if (rest > 0) {
            a.col(k).tail(rest) /= a(k, k);
            a.bottomRightCorner(rest, n - k - 1).noalias() -= a.col(k).tail(rest) * a.row(k).tail(n - k - 1);
        }
    }

    Eigen::MatrixXd lower = Eigen::MatrixXd::Identity(mm, mm);
    lower.triangularView<Eigen::StrictlyLower>() = a.topLeftCorner(mm, mm);
    Eigen::MatrixXd upper = a.topRows(mm).triangularView<Eigen::Upper>();
    std::vector<std::size_t> pivots(static_cast<std::size_t>(mm));
    Eigen::MatrixXd points(mm, candidates.cols());
    Eigen::VectorXd weights(mm);
    for (Eigen::Index k = 0; k < mm; ++k) {
        const Eigen::Index c = perm[static_cast<std::size_t>(k)];
        pivots[static_cast<std::size_t>(k)] = static_cast<std::size_t>(c);
        points.row(k) = candidates.row(c);
        weights(k) = v(c);
    }
    return {basis, std::move(points), std::move(pivots), std::move(lower), std::move(upper),
            std::move(weights), kind, std::move(provenance)};
}

Eigen::VectorXd interpolate(const LejaSequence& seq, const Eigen::VectorXd& y) {
    if (!seq.square()) throw std::invalid_argument("interpolation needs as many points as basis functions");
    if (y.size() != static_cast<Eigen::Index>(seq.size()))
        throw std::invalid_argument("value count does not match the sequence length");
    Eigen::VectorXd rhs = seq.weight_values().cwiseProduct(y);
    seq.lower().triangularView<Eigen::UnitLower>().solveInPlace(rhs);
    seq.upper().triangularView<Eigen::Upper>().solveInPlace(rhs);
    return rhs;
}

Eigen::VectorXd quadrature_weights(const LejaSequence& seq) {
    if (!seq.square()) throw std::invalid_argument("quadrature weights need a square sequence");
    const auto m = static_cast<Eigen::Index>(seq.size());
    Eigen::VectorXd x = Eigen::VectorXd::Unit(m, 0);
    seq.upper().transpose().triangularView<Eigen::Lower>().solveInPlace(x);
    seq.lower().transpose().triangularView<Eigen::UnitUpper>().solveInPlace(x);
    return seq.basis().constant_value() * seq.weight_values().cwiseProduct(x);
}

double kappa_quadrature(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    if (!(total > 0.0)) throw DegenerateRule("quadrature weights sum to " + format_double(total));
    return weights.cwiseAbs().sum() / total;
}

double kappa_vandermonde(const LejaSequence& seq) {
    if (!seq.square()) throw std::invalid_argument("condition number needs a square sequence");
    return condition_number(seq.lower() * seq.upper());
}

nlohmann::json leja_to_json(const LejaSequence& seq) {
    nlohmann::json j{{"points", matrix_to_json(seq.points())},
                     {"pivots", seq.pivots()},
                     {"weight_kind", to_string(seq.weight_kind())},
                     {"weight_values", std::vector<double>(seq.weight_values().begin(), seq.weight_values().end())},
                     {"provenance", seq.provenance()},
                     {"basis", basis_to_json(seq.basis())}};
    if (seq.square()) {
        j["kappa_phi"] = kappa_vandermonde(seq);
        const Eigen::VectorXd w = quadrature_weights(seq);
        j["quadrature_weights"] = std::vector<double>(w.begin(), w.end());
        j["kappa_q"] = kappa_quadrature(w);
    }
    return j;
}

}  // namespace pcedep
