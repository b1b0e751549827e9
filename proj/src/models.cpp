#include "pcedep/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pcedep/errors.hpp"

namespace pcedep {

// --- Genz ---------------------------------------------------------------------

GenzSpec genz_spec_from_draws(Eigen::VectorXd b, double e) {
    if (b.size() == 0) throw std::invalid_argument("Genz function needs d >= 1");
    if ((b.array() < 0.0).any()) throw std::invalid_argument("Genz draws must be non-negative");
    const double total = b.sum();
    if (!(total > 0.0)) throw std::invalid_argument("Genz draws sum to zero");
    GenzSpec spec;
    spec.c = 40.0 * b / (static_cast<double>(b.size()) * total);
    spec.b = std::move(b);
    spec.e = e;
    return spec;
}

GenzSpec make_genz_spec(std::size_t d, std::uint64_t seed) {
    if (d == 0) throw std::invalid_argument("Genz function needs d >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (;;) {
        const double e = unif(rng);
        Eigen::VectorXd b(static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = unif(rng);
        if (b.sum() > 0.0) {
            GenzSpec spec = genz_spec_from_draws(std::move(b), e);
            spec.seed = seed;
            return spec;
        }
    }
}

double genz_oscillatory(const GenzSpec& spec, std::span<const double> z) {
    if (z.size() != spec.dimension()) throw std::invalid_argument("Genz point dimension mismatch");
    double arg = 2.0 * M_PI * spec.e;
    for (std::size_t i = 0; i < z.size(); ++i) arg += spec.c(static_cast<Eigen::Index>(i)) * z[i];
    return std::cos(arg);
}

// --- chemistry ----------------------------------------------------------------

namespace {

using State = std::array<double, 3>;

State chemistry_rhs(const ChemistrySpec& p, double a, double b, const State& u) {
    const double s = 1.0 - u[0] - u[1] - u[2];
    const double coupling = 4.0 * p.d * u[0] * u[1];
    return {a * s - p.c * u[0] - coupling, 2.0 * b * s * s - coupling, p.e * s - p.f * u[2]};
}

State axpy(const State& u, double h, const State& k) { return {u[0] + h * k[0], u[1] + h * k[1], u[2] + h * k[2]}; }

}  // namespace

std::array<double, 3> chemistry_solve(const ChemistrySpec& spec, double a, double b) {
    if (!(spec.dt > 0.0) || !(spec.horizon >= 0.0)) throw std::invalid_argument("invalid time stepping");
    const auto steps = static_cast<long>(std::llround(spec.horizon / spec.dt));
    if (std::abs(static_cast<double>(steps) * spec.dt - spec.horizon) > 1e-9 * std::max(1.0, spec.horizon))
        throw std::invalid_argument("horizon must be a multiple of the step");
    const double h = spec.dt;
    State u = spec.u0;
    for (long n = 0; n < steps; ++n) {
        const State k1 = chemistry_rhs(spec, a, b, u);
        const State k2 = chemistry_rhs(spec, a, b, axpy(u, 0.5 * h, k1));
        const State k3 = chemistry_rhs(spec, a, b, axpy(u, 0.5 * h, k2));
        const State k4 = chemistry_rhs(spec, a, b, axpy(u, h, k3));
        for (int i = 0; i < 3; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(u[0]) || !std::isfinite(u[1]) || !std::isfinite(u[2]))
            throw IntegrationBlowup("chemistry state became non-finite at t = " + std::to_string((n + 1) * h));
    }
    return u;
}

double chemistry_qoi(const ChemistrySpec& spec, std::span<const double> z) {
    if (z.size() != 2) throw std::invalid_argument("chemistry model takes two inputs");
    return chemistry_solve(spec, ChemistrySpec::rate_a(z[0]), ChemistrySpec::rate_b(z[1]))[0];
}

// --- diffusion ----------------------------------------------------------------

double diffusivity(const DiffusionSpec& spec, double x, std::span<const double> z) {
    if (z.size() != spec.dimension || z.empty()) throw std::invalid_argument("diffusion point dimension mismatch");
    const double l = spec.l();
    const double lp = spec.l_p();
    const double amplitude = std::sqrt(std::sqrt(M_PI * l));
    double log_k = 1.0 + z[0] * std::sqrt(std::sqrt(M_PI * l) / 2.0);
    for (std::size_t k = 2; k <= z.size(); ++k) {
        const double mode = std::floor(static_cast<double>(k) / 2.0);
        const double lambda = amplitude * std::exp(-(mode * M_PI * l) * (mode * M_PI * l) / 8.0);
        const double phase = mode * M_PI * x / lp;
        const double xi = k % 2 == 0 ? std::sin(phase) : std::cos(phase);
        log_k += lambda * xi * z[k - 1];
    }
    return 0.5 + std::exp(log_k);
}

Eigen::VectorXd diffusion_solve(const DiffusionSpec& spec, std::span<const double> z) {
    const int n = spec.grid_points;
    if (n < 3) throw std::invalid_argument("diffusion grid needs at least 3 points");
    const double h = 1.0 / (n - 1);
    const int m = n - 2;
    // Tridiagonal system for the interior unknowns, solved by the Thomas algorithm.
    Eigen::VectorXd k_mid(n - 1);
    for (int i = 0; i < n - 1; ++i) k_mid(i) = diffusivity(spec, (i + 0.5) * h, z);
    Eigen::VectorXd diag(m), upper(m), rhs(m);
    for (int j = 0; j < m; ++j) {
        const int i = j + 1;
        diag(j) = -(k_mid(i - 1) + k_mid(i));
        upper(j) = k_mid(i);
        rhs(j) = h * h * spec.forcing(i * h);
    }
    for (int j = 1; j < m; ++j) {
        const double factor = k_mid(j) / diag(j - 1);
        diag(j) -= factor * upper(j - 1);
        rhs(j) -= factor * rhs(j - 1);
        if (!(std::abs(diag(j)) > 0.0)) throw NumericError("singular diffusion system");
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    u(m) = rhs(m - 1) / diag(m - 1);
    for (int j = m - 2; j >= 0; --j) u(j + 1) = (rhs(j) - upper(j) * u(j + 2)) / diag(j);
    return u;
}

double diffusion_qoi(const DiffusionSpec& spec, std::span<const double> z) {
    const Eigen::VectorXd u = diffusion_solve(spec, z);
    const int n = spec.grid_points;
    const double pos = spec.qoi_location * (n - 1);
    const int left = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 2);
    const double t = pos - left;
    return (1.0 - t) * u(left) + t * u(left + 1);
}

// --- ridge --------------------------------------------------------------------

Eigen::MatrixXd random_orthonormal_rows(std::size_t s, std::size_t d, std::uint64_t seed) {
    if (s == 0 || s > d) throw std::invalid_argument("need 1 <= s <= d");
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
    return q.transpose();
}

RidgeModel::RidgeModel(Eigen::MatrixXd projection, ChemistrySpec inner)
    : a_(std::move(projection)), inner_(inner), clamped_(std::make_shared<std::atomic<std::size_t>>(0)) {
    if (a_.rows() != 2) throw std::invalid_argument("ridge chemistry model needs a 2-row projection");
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
        box_.lower.push_back(a_.row(i).cwiseMin(0.0).sum());
        box_.upper.push_back(a_.row(i).cwiseMax(0.0).sum());
    }
}

double RidgeModel::reduced(std::span<const double> z) const {
    if (z.size() != 2) throw std::invalid_argument("ridge reduced point must be two-dimensional");
    static constexpr double lo[2] = {-3.0, -2.0};
    static constexpr double hi[2] = {3.0, 6.0};
    double inner[2];
    bool clamped = false;
    for (std::size_t i = 0; i < 2; ++i) {
        double t = (z[i] - box_.lower[i]) / (box_.upper[i] - box_.lower[i]);
        if (t < 0.0 || t > 1.0) {
            t = std::clamp(t, 0.0, 1.0);
            clamped = true;
        }
        inner[i] = lo[i] + (hi[i] - lo[i]) * t;
    }
    if (clamped) clamped_->fetch_add(1);
    return chemistry_qoi(inner_, inner);
}

double RidgeModel::operator()(std::span<const double> y) const {
    if (y.size() != ambient_dimension()) throw std::invalid_argument("ridge point dimension mismatch");
    const Eigen::Vector2d z = a_ * Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return reduced(std::span<const double>(z.data(), 2));
}

// --- registry -----------------------------------------------------------------

ModelFunction make_model(const std::string& name, const nlohmann::json& params) {
    if (name == "genz-oscillatory") {
        const auto spec = make_genz_spec(params.value("d", std::size_t{2}), params.value("seed", std::uint64_t{0}));
        return [spec](std::span<const double> z) { return genz_oscillatory(spec, z); };
    }
    if (name == "chemistry") {
        ChemistrySpec spec;
        spec.dt = params.value("dt", spec.dt);
        return [spec](std::span<const double> z) { return chemistry_qoi(spec, z); };
    }
    if (name == "diffusion") {
        DiffusionSpec spec;
        spec.dimension = params.value("d", spec.dimension);
        spec.correlation_length = params.value("lc", spec.correlation_length);
        spec.grid_points = params.value("nx", spec.grid_points);
        return [spec](std::span<const double> z) { return diffusion_qoi(spec, z); };
    }
    if (name == "ridge-chemistry") {
        const RidgeModel model(random_orthonormal_rows(params.value("s", std::size_t{2}), params.value("d", std::size_t{20}),
                                                       params.value("seed", std::uint64_t{0})));
        return [model](std::span<const double> y) { return model(y); };
    }
    throw std::invalid_argument("unknown model '" + name + "'");
}

}  // namespace pcedep
