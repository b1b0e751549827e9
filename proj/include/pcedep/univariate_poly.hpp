#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pcedep {

enum class FamilyKind { jacobi, hermite, monomial };

/// Univariate polynomial family.
///
/// Jacobi families are orthonormal for the Beta(α, β) probability density
/// ∝ z^(α-1) (1-z)^(β-1), written in the statistics convention and mapped
/// affinely onto [lower, upper]. Hermite is the probabilists' family for the
/// standard normal. Monomials are powers of the variable rescaled to [-1, 1]
/// on [lower, upper]; they are not orthogonal and only serve as GSO input.
class PolyFamily {
public:
    static PolyFamily beta(double alpha, double beta, double lower = 0.0, double upper = 1.0);
    static PolyFamily legendre(double lower = 0.0, double upper = 1.0) {
        return beta(1.0, 1.0, lower, upper);
    }
    static PolyFamily hermite();
    static PolyFamily monomial(double lower = -1.0, double upper = 1.0);

    [[nodiscard]] FamilyKind kind() const noexcept { return kind_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double lower() const noexcept { return lower_; }
    [[nodiscard]] double upper() const noexcept { return upper_; }
    [[nodiscard]] bool orthonormal() const noexcept { return kind_ != FamilyKind::monomial; }
    /// Exponent of (1 - x) in the [-1, 1] Jacobi weight.
    [[nodiscard]] double jacobi_a() const noexcept { return beta_ - 1.0; }
    /// Exponent of (1 + x) in the [-1, 1] Jacobi weight.
    [[nodiscard]] double jacobi_b() const noexcept { return alpha_ - 1.0; }
    [[nodiscard]] std::string label() const;

    friend bool operator==(const PolyFamily&, const PolyFamily&) = default;

private:
    PolyFamily(FamilyKind kind, double alpha, double beta, double lower, double upper)
        : kind_(kind), alpha_(alpha), beta_(beta), lower_(lower), upper_(upper) {}

    FamilyKind kind_;
    double alpha_;
    double beta_;
    double lower_;
    double upper_;
};

/// Orthonormal three-term recurrence
///   sqrt(b[k+1]) φ_{k+1}(x) = (x - a[k]) φ_k(x) - sqrt(b[k]) φ_{k-1}(x),
/// with b[0] = 1 (total mass of a probability measure).
struct Recurrence {
    std::vector<double> a;
    std::vector<double> b;
};

/// Coefficients a_k, b_k for k = 0..n. Throws Unsupported for monomials.
[[nodiscard]] Recurrence recurrence_coefficients(const PolyFamily& family, int n);

/// Matrix of φ_j(x_i), rows = points, columns = degrees 0..max_degree.
/// Jacobi points outside [lower, upper] raise std::domain_error.
[[nodiscard]] Eigen::MatrixXd evaluate_univariate(const PolyFamily& family, int max_degree,
                                                  std::span<const double> points);

/// Nodes (rows are points) and weights approximating integrals against a
/// probability measure.
struct QuadratureRule {
    Eigen::MatrixXd nodes;
    Eigen::VectorXd weights;
    std::string description;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(weights.size()); }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(nodes.cols()); }
};

/// n-point Gauss rule of the family measure via Golub-Welsch.
[[nodiscard]] QuadratureRule gauss_rule(const PolyFamily& family, int n);

/// Tensor product of one-dimensional rules; the first coordinate varies slowest.
[[nodiscard]] QuadratureRule tensor_rule(std::span<const QuadratureRule> rules);

/// CSV with header node_1..node_d,weight and one node per line.
[[nodiscard]] std::string quadrature_to_csv(const QuadratureRule& rule);

}  // namespace pcedep
