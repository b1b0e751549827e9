#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "pcedep/surrogate.hpp"

namespace pcedep {

/// cos(2πe + Σ c_i z_i) with c_i = 40 b_i / (d Σ b).
struct GenzSpec {
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    double e = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(c.size()); }
};

/// Spec from given raw draws b (not all zero) and shift e.
[[nodiscard]] GenzSpec genz_spec_from_draws(Eigen::VectorXd b, double e);
/// Draws e and b uniformly on [0, 1].
[[nodiscard]] GenzSpec make_genz_spec(std::size_t d, std::uint64_t seed);
[[nodiscard]] double genz_oscillatory(const GenzSpec& spec, std::span<const double> z);

/// Rate constants and integration settings of the surface-adsorption model
///   u1' = a s − c u1 − 4 d u1 u2,  u2' = 2 b s² − 4 d u1 u2,  u3' = e s − f u3,
/// with s = 1 − u1 − u2 − u3 the vacant surface fraction.
struct ChemistrySpec {
    double c = 1.0;
    double d = 1.0;
    double e = 0.1;
    double f = 0.1;
    std::array<double, 3> u0{1.0, 0.0, 0.0};
    double horizon = 50.0;
    double dt = 1e-3;

    [[nodiscard]] static double rate_a(double z1) { return 2.0 * (z1 + 3.0) / 3.0; }
    [[nodiscard]] static double rate_b(double z2) { return 30.0 * (z2 + 2.0) / 7.0 + 5.0; }
};

/// Classical RK4 with fixed step dt. Throws IntegrationBlowup on a
/// non-finite state.
[[nodiscard]] std::array<double, 3> chemistry_solve(const ChemistrySpec& spec, double a, double b);
/// u1 at the horizon for rates a(z1), b(z2).
[[nodiscard]] double chemistry_qoi(const ChemistrySpec& spec, std::span<const double> z);

/// 1D diffusion d/dx(k u') = f(x), by default cos(2πx), on (0, 1), u(0) = u(1) = 0, with
/// log(k − 1/2) = 1 + z1 (√(πL)/2)^(1/2) + Σ_{k≥2} λ_k ξ_k(x) z_k.
struct DiffusionSpec {
    std::size_t dimension = 11;
    double correlation_length = 0.5;
    int grid_points = 201;
    double qoi_location = 0.5;
    /// Right-hand side f(x) of the equation.
    std::function<double(double)> forcing = [](double x) { return std::cos(2.0 * M_PI * x); };

    [[nodiscard]] double l_p() const { return std::max(1.0, 2.0 * correlation_length); }
    [[nodiscard]] double l() const { return correlation_length / l_p(); }
};

[[nodiscard]] double diffusivity(const DiffusionSpec& spec, double x, std::span<const double> z);
/// Nodal solution on the uniform grid, central differences with k at midpoints.
[[nodiscard]] Eigen::VectorXd diffusion_solve(const DiffusionSpec& spec, std::span<const double> z);
[[nodiscard]] double diffusion_qoi(const DiffusionSpec& spec, std::span<const double> z);

/// f(y) = g(A y) where A has orthonormal rows and g is the chemistry QoI with
/// its inputs mapped affinely from the zonotope bounding box of A [0,1]^d.
class RidgeModel {
public:
    RidgeModel(Eigen::MatrixXd projection, ChemistrySpec inner = {});

    [[nodiscard]] const Eigen::MatrixXd& projection() const noexcept { return a_; }
    [[nodiscard]] std::size_t ambient_dimension() const noexcept { return static_cast<std::size_t>(a_.cols()); }
    [[nodiscard]] std::size_t reduced_dimension() const noexcept { return static_cast<std::size_t>(a_.rows()); }
    /// Bounding box of the zonotope A [0,1]^d.
    [[nodiscard]] const Box& zonotope_box() const noexcept { return box_; }

    /// g at reduced coordinates z = A y.
    [[nodiscard]] double reduced(std::span<const double> z) const;
    [[nodiscard]] double operator()(std::span<const double> y) const;
    /// Number of reduced points clamped into the zonotope box so far.
    [[nodiscard]] std::size_t clamped() const noexcept { return clamped_->load(); }

private:
    Eigen::MatrixXd a_;
    ChemistrySpec inner_;
    Box box_;
    std::shared_ptr<std::atomic<std::size_t>> clamped_;
};

/// s×d matrix with orthonormal rows from the QR factorization of a Gaussian matrix.
[[nodiscard]] Eigen::MatrixXd random_orthonormal_rows(std::size_t s, std::size_t d, std::uint64_t seed);

/// Registry: "genz-oscillatory" {d, seed}, "chemistry" {}, "diffusion" {d, lc, nx},
/// "ridge-chemistry" {d, s, seed}. Throws std::invalid_argument for unknown names.
[[nodiscard]] ModelFunction make_model(const std::string& name, const nlohmann::json& params);

}  // namespace pcedep
