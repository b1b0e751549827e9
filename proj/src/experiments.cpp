#include "pcedep/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <tuple>

#include <boost/random/sobol.hpp>

#include "pcedep/basis.hpp"
#include "pcedep/errors.hpp"
#include "pcedep/leja.hpp"
#include "pcedep/models.hpp"
#include "pcedep/multi_index.hpp"
#include "pcedep/transform.hpp"
#include "pcedep/univariate_poly.hpp"

namespace pcedep {

// --- configuration ------------------------------------------------------------

namespace {

std::vector<int> range(int lo, int hi) {
    std::vector<int> v;
    for (int p = lo; p <= hi; ++p) v.push_back(p);
    return v;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"genz1d-basis", "cr-study", "genz2d",   "genz10d", "mean2d",
                                                "mean10d",      "mc-moments", "banana", "zonotope", "diffusion"};
    return names;
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "genz1d-basis") {
        c.degrees = range(1, 20);
        c.strategies = {"jacobi", "dom_1_1", "nataf_unif", "nataf_gauss"};
        c.params = {{"alpha", 10.0}, {"beta", 10.0}};
    } else if (experiment == "cr-study") {
        c.degrees = range(1, 8);
        c.strategies = {"dom"};
        c.params = {{"dimension", 3}, {"alpha", 10.0}, {"betas", range(1, 10)}, {"cr_probes", 10000}};
    } else if (experiment == "genz2d" || experiment == "mean2d" || experiment == "mc-moments") {
        c.degrees = range(1, 15);
        if (experiment == "genz2d")
            c.strategies = {"gs_1_1", "gs_2_5", "dom_1_1", "dom_2_5", "nataf_gauss"};
        else if (experiment == "mean2d")
            c.strategies = {"gs_1_1", "gs_2_5", "nataf_gauss"};
        else
            c.strategies = {"gs_2_5", "gs_2_5_mc100", "gs_2_5_mc1000", "gs_2_5_mc10000", "gs_2_5_mc100000"};
        c.params = {{"dimension", 2}, {"rho", -0.9}, {"gs_order", 50}, {"reference_order", 200}};
    } else if (experiment == "genz10d" || experiment == "mean10d") {
        c.degrees = range(1, 4);
        c.strategies = experiment == "genz10d"
                           ? std::vector<std::string>{"gs_1_1_mc20000", "gs_2_5_mc20000", "dom_1_1", "dom_2_5",
                                                      "nataf_gauss"}
                           : std::vector<std::string>{"gs_1_1_mc20000", "gs_2_5_mc20000", "nataf_gauss"};
        c.params = {{"dimension", 10}, {"rho", 0.9}, {"reference_samples", 1000000}};
    } else if (experiment == "banana") {
        c.degrees = range(1, 20);
        c.strategies = {"gs_mono", "gs_mono_mc1000", "gs_mono_mc10000", "dom_1_1"};
        c.params = {{"gs_order", 100}};
    } else if (experiment == "zonotope") {
        c.degrees = range(1, 20);
        c.strategies = {"gs_mono", "dom_1_1"};
        c.params = {{"ambient_dimension", 20}, {"kde_samples", 10000}, {"sobol_samples", 10000}};
    } else if (experiment == "diffusion") {
        c.degrees = range(0, 6);
        c.test_samples = 1000;
        c.strategies = {"gs_1_1_mc20000", "dom_1_1"};
        c.params = {{"dimension", 11}, {"correlation_length", 0.5}, {"grid_points", 201}};
    } else {
        throw UsageError("unknown experiment '" + experiment + "'");
    }
    return c;
}

std::vector<int> parse_degrees(const std::string& text) {
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            throw UsageError("invalid degree list '" + text + "'");
        }
        if (used != s.size() || v < 0) throw UsageError("invalid degree list '" + text + "'");
        return v;
    };
    std::vector<int> out;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const int lo = to_int(text.substr(0, dots));
        const int hi = to_int(text.substr(dots + 2));
        if (hi < lo) throw UsageError("empty degree range '" + text + "'");
        return range(lo, hi);
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        out.push_back(to_int(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    return {{"experiment", c.experiment}, {"degrees", c.degrees},           {"trials", c.trials},
            {"seed", c.seed},             {"candidates", c.candidates},     {"test_samples", c.test_samples},
            {"strategies", c.strategies}, {"params", c.params}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    const nlohmann::json& body = j.contains("config") ? j.at("config") : j;
    if (!body.is_object() || !body.contains("experiment")) throw UsageError("config needs an 'experiment' field");
    try {
        ExperimentConfig c = default_config(body.at("experiment").get<std::string>());
        if (body.contains("degrees")) {
            const auto& d = body.at("degrees");
            c.degrees = d.is_string() ? parse_degrees(d.get<std::string>()) : d.get<std::vector<int>>();
        }
        c.trials = body.value("trials", c.trials);
        c.seed = body.value("seed", c.seed);
        c.candidates = body.value("candidates", c.candidates);
        c.test_samples = body.value("test_samples", c.test_samples);
        if (body.contains("strategies")) c.strategies = body.at("strategies").get<std::vector<std::string>>();
        if (body.contains("params")) c.params.update(body.at("params"));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed config: ") + e.what());
    }
}

void validate(const ExperimentConfig& c) {
    (void)default_config(c.experiment);
    if (c.degrees.empty()) throw UsageError("at least one degree is required");
    if (std::any_of(c.degrees.begin(), c.degrees.end(), [](int p) { return p < 0; }))
        throw UsageError("degrees must be non-negative");
    if (c.trials == 0) throw UsageError("at least one trial is required");
    if (c.strategies.empty()) throw UsageError("at least one strategy is required");
    if (c.candidates == 0 || c.test_samples == 0) throw UsageError("candidate and test sample counts must be positive");
    if (c.experiment != "cr-study" && c.experiment != "genz1d-basis")
        for (const auto& s : c.strategies) (void)parse_strategy_label(s);
}

StrategyLabel parse_strategy_label(const std::string& label) {
    StrategyLabel out{label, {}, std::nullopt};
    std::string base = label;
    if (const auto pos = label.rfind("_mc"); pos != std::string::npos) {
        const std::string digits = label.substr(pos + 3);
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
            out.mc_samples = std::stoull(digits);
            base = label.substr(0, pos);
        }
    }
    try {
        out.strategy = Strategy::parse(base);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (out.mc_samples && out.strategy.kind != StrategyKind::gs)
        throw UsageError("Monte Carlo suffix only applies to GS strategies: '" + label + "'");
    if (out.mc_samples && *out.mc_samples == 0) throw UsageError("Monte Carlo sample count must be positive");
    return out;
}

// --- result rows ----------------------------------------------------------------

const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> cols{"experiment", "strategy", "seed",     "degree_or_level",
                                               "n_samples",  "l2_error", "mean_rel_error", "kappa_phi",
                                               "kappa_gs",   "kappa_q",  "wall_ms",  "c_r"};
    return cols;
}

CsvTable results_to_table(const std::vector<ResultRow>& rows) {
    CsvTable t;
    t.header = result_columns();
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : rows) {
        t.rows.push_back({r.experiment, r.strategy, std::to_string(r.seed), std::to_string(r.degree_or_level),
                          std::to_string(r.n_samples), format_double(r.l2_error), opt(r.mean_rel_error),
                          format_double(r.kappa_phi), opt(r.kappa_gs), format_double(r.kappa_q), opt(r.wall_ms),
                          opt(r.c_r)});
    }
    return t;
}

// --- densities ------------------------------------------------------------------

Marginal marginal_from_json(const nlohmann::json& j) {
    const std::string family = j.value("family", std::string("beta"));
    if (family == "beta")
        return Marginal::beta(j.value("alpha", 1.0), j.value("beta", 1.0), j.value("lower", 0.0), j.value("upper", 1.0));
    if (family == "uniform") return Marginal::uniform(j.value("lower", 0.0), j.value("upper", 1.0));
    if (family == "normal") return Marginal::normal(j.value("mean", 0.0), j.value("stddev", 1.0));
    throw UsageError("unknown marginal family '" + family + "'");
}

nlohmann::json marginal_to_json(const Marginal& m) {
    if (m.kind() == Marginal::Kind::normal)
        return {{"family", "normal"}, {"mean", m.param1()}, {"stddev", m.param2()}};
    return {{"family", "beta"}, {"alpha", m.param1()}, {"beta", m.param2()}, {"lower", m.lower()}, {"upper", m.upper()}};
}

namespace {

/// Equicorrelation rho; in 10D the rows and columns of odd (1-based) indices
/// change sign, which is D R D with D = diag(±1).
Eigen::MatrixXd genz_correlation(std::size_t d, double rho) {
    Eigen::MatrixXd r = equicorrelation(d, rho);
    if (d > 2) {
        Eigen::VectorXd s = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < s.size(); i += 2) s(i) = -1.0;
        r = s.asDiagonal() * r * s.asDiagonal();
    }
    return r;
}

std::shared_ptr<const GaussianCopulaDensity> genz_density(const ExperimentConfig& c) {
    const auto d = c.params.value("dimension", std::size_t{2});
    std::vector<Marginal> marginals(d, Marginal::beta(c.params.value("marginal_alpha", 2.0),
                                                      c.params.value("marginal_beta", 5.0)));
    return std::make_shared<GaussianCopulaDensity>(std::move(marginals),
                                                   CorrelationMatrix(genz_correlation(d, c.params.value("rho", -0.9))));
}

struct Zonotope {
    RidgeModel model;
    std::shared_ptr<const KdeDensity> density;
    std::shared_ptr<const QuadratureRule> sobol_rule;
};

Zonotope make_zonotope(const ExperimentConfig& c) {
    const auto d = c.params.value("ambient_dimension", std::size_t{20});
    RidgeModel model(random_orthonormal_rows(2, d, derive_seed(c.seed, 21)));
    const Eigen::MatrixXd& a = model.projection();
    Rng rng(derive_seed(c.seed, 20));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(c.params.value("kde_samples", std::size_t{10000})),
                      static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index k = 0; k < y.cols(); ++k) y(i, k) = unif(rng);
    auto density = std::make_shared<const KdeDensity>(y * a.transpose());

    const auto j = c.params.value("sobol_samples", std::size_t{10000});
    boost::random::sobol qrng(d);
    Eigen::MatrixXd ys(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < ys.rows(); ++i)
        for (Eigen::Index k = 0; k < ys.cols(); ++k) ys(i, k) = std::ldexp(static_cast<double>(qrng()), -64);
    auto rule = std::make_shared<QuadratureRule>();
    rule->nodes = ys * a.transpose();
    rule->weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(j), 1.0 / static_cast<double>(j));
    rule->description = "sobol-projected";
    return {std::move(model), std::move(density), std::move(rule)};
}

DiffusionSpec diffusion_spec(const ExperimentConfig& c) {
    DiffusionSpec s;
    s.dimension = c.params.value("dimension", s.dimension);
    s.correlation_length = c.params.value("correlation_length", s.correlation_length);
    s.grid_points = c.params.value("grid_points", s.grid_points);
    return s;
}

}  // namespace

std::shared_ptr<const JointDensity> experiment_density(const ExperimentConfig& c) {
    const std::string& e = c.experiment;
    if (e == "genz1d-basis")
        return std::make_shared<TensorDensity>(
            std::vector<Marginal>{Marginal::beta(c.params.value("alpha", 10.0), c.params.value("beta", 10.0))});
    if (e == "cr-study") {
        const auto d = c.params.value("dimension", std::size_t{3});
        const double a = c.params.value("alpha", 10.0);
        return std::make_shared<TensorDensity>(std::vector<Marginal>(d, Marginal::beta(a, a)));
    }
    if (e == "genz2d" || e == "mean2d" || e == "mc-moments" || e == "genz10d" || e == "mean10d") return genz_density(c);
    if (e == "banana") return std::make_shared<BananaDensity>();
    if (e == "zonotope") return make_zonotope(c).density;
    if (e == "diffusion")
        return std::make_shared<BetaMixtureDensity>(std::vector<BetaComponent>{{0.5, 10.0, 4.0}, {0.5, 4.0, 10.0}},
                                                    diffusion_spec(c).dimension);
    throw UsageError("unknown experiment '" + e + "'");
}

// --- sweeps ---------------------------------------------------------------------

namespace {

struct Problem {
    ModelFunction f;
    Eigen::MatrixXd test;
    Eigen::VectorXd test_values;
    std::optional<double> mean;
};

using ProblemFactory = std::function<Problem(std::uint64_t trial_seed)>;

struct SweepSpec {
    std::shared_ptr<const JointDensity> density;
    /// Nested index sets, one per entry of the configured degrees.
    std::vector<MultiIndexSet> sets;
    GsQuadrature exact_quadrature;
    ProblemFactory problem;
};

std::uint64_t trial_seed(const ExperimentConfig& c, std::size_t t) { return c.seed + t; }

void note(std::ostream* log, const std::string& line) {
    if (log) *log << line << '\n';
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& c, const SweepSpec& spec, std::ostream* log) {
    std::vector<StrategyLabel> labels;
    for (const auto& s : c.strategies) labels.push_back(parse_strategy_label(s));
    std::vector<ResultRow> rows;
    for (std::size_t t = 0; t < c.trials; ++t) {
        const std::uint64_t seed = trial_seed(c, t);
        const Problem problem = spec.problem(seed);
        for (const auto& label : labels) {
            FitConfig fit_config;
            fit_config.candidates = c.candidates;
            fit_config.gs_quadrature = spec.exact_quadrature;
            if (label.mc_samples) {
                fit_config.gs_quadrature.kind = GsQuadrature::Kind::monte_carlo;
                fit_config.gs_quadrature.samples = *label.mc_samples;
            }
            // An ill-posed orthogonalization at the largest set leaves the
            // smaller sets usable; fall back until one works.
            std::optional<StrategyFitter> fitter;
            std::size_t usable = spec.sets.size();
            while (usable > 0 && !fitter) {
                try {
                    fitter.emplace(label.strategy, spec.density, spec.sets[usable - 1], fit_config, seed);
                } catch (const IllPosedOrthogonalization& e) {
                    note(log, c.experiment + " " + label.label + " seed=" + std::to_string(seed) + " degree=" +
                                  std::to_string(c.degrees[usable - 1]) + " skipped: " + e.what());
                    --usable;
                }
            }
            for (std::size_t k = 0; k < usable; ++k) {
                try {
                    const FitResult fit = fitter->fit(spec.sets[k], problem.f);
                    ResultRow row;
                    row.experiment = c.experiment;
                    row.strategy = label.label;
                    row.seed = seed;
                    row.degree_or_level = c.degrees[k];
                    row.n_samples = fit.sequence.size();
                    row.l2_error = l2_error(problem.test_values, fit.surrogate, problem.test);
                    const Moments m = fit.surrogate.moments();
                    if (problem.mean && m.space != MomentSpace::dominating)
                        row.mean_rel_error = std::abs(m.mean - *problem.mean) / std::abs(*problem.mean);
                    row.kappa_phi = kappa_vandermonde(fit.sequence);
                    if (label.strategy.kind == StrategyKind::gs) row.kappa_gs = fit.kappa_gs;
                    row.kappa_q = kappa_quadrature(quadrature_weights(fit.sequence));
                    rows.push_back(std::move(row));
                } catch (const NumericError& e) {
                    note(log, c.experiment + " " + label.label + " seed=" + std::to_string(seed) +
                                  " degree=" + std::to_string(c.degrees[k]) + " skipped: " + e.what());
                }
            }
        }
        note(log, c.experiment + " trial " + std::to_string(t + 1) + "/" + std::to_string(c.trials) + " done");
    }
    return rows;
}

std::vector<MultiIndexSet> total_degree_sets(std::size_t d, const std::vector<int>& degrees) {
    std::vector<MultiIndexSet> sets;
    for (int p : degrees) sets.push_back(total_degree_set(static_cast<int>(d), p));
    return sets;
}

void require_increasing(const std::vector<int>& degrees) {
    if (!std::is_sorted(degrees.begin(), degrees.end()) ||
        std::adjacent_find(degrees.begin(), degrees.end()) != degrees.end())
        throw UsageError("degrees must be strictly increasing");
}

GenzSpec trial_genz(std::size_t d, std::uint64_t seed) { return make_genz_spec(d, derive_seed(seed, 10)); }

Eigen::MatrixXd trial_test_samples(const JointDensity& density, std::size_t n, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 11));
    return density.sample(n, rng);
}

std::vector<ResultRow> run_genz_sweep(const ExperimentConfig& c, std::ostream* log) {
    require_increasing(c.degrees);
    const auto density = genz_density(c);
    const std::size_t d = density->dimension();
    SweepSpec spec;
    spec.density = density;
    spec.sets = total_degree_sets(d, c.degrees);
    spec.exact_quadrature.order = c.params.value("gs_order", 50);
    std::shared_ptr<const QuadratureRule> reference;
    if (d <= 3) {
        reference = std::make_shared<QuadratureRule>(copula_gauss_hermite_rule(*density, c.params.value("reference_order", 200)));
    } else {
        Rng rng(derive_seed(c.seed, 13));
        reference = std::make_shared<QuadratureRule>(
            monte_carlo_rule(density->sample(c.params.value("reference_samples", std::size_t{1000000}), rng)));
    }
    spec.problem = [&c, density, reference, d](std::uint64_t seed) {
        const GenzSpec g = trial_genz(d, seed);
        Problem p;
        p.f = [g](std::span<const double> z) { return genz_oscillatory(g, z); };
        p.test = trial_test_samples(*density, c.test_samples, seed);
        p.test_values = evaluate_model(p.f, p.test);
        p.mean = evaluate_model(p.f, reference->nodes).dot(reference->weights);
        return p;
    };
    return run_sweep(c, spec, log);
}

std::vector<ResultRow> run_fixed_model_sweep(const ExperimentConfig& c, std::shared_ptr<const JointDensity> density,
                                             std::vector<MultiIndexSet> sets, GsQuadrature exact,
                                             const ModelFunction& f, const Eigen::MatrixXd& test, std::ostream* log) {
    note(log, c.experiment + ": evaluating the model at " + std::to_string(test.rows()) + " test samples");
    auto shared = std::make_shared<Problem>();
    shared->f = f;
    shared->test = test;
    shared->test_values = evaluate_model(f, test);
    SweepSpec spec;
    spec.density = std::move(density);
    spec.sets = std::move(sets);
    spec.exact_quadrature = std::move(exact);
    spec.problem = [shared](std::uint64_t) { return *shared; };
    return run_sweep(c, spec, log);
}

/// Interpolation at all nodes of a tensor Gauss rule: the LU of the square
/// system is built once and reused for every trial function.
struct GaussInterpolant {
    LejaSequence sequence;
    Strategy strategy;
    std::optional<NatafTransform> transform;
    Eigen::MatrixXd model_nodes;
};

GaussInterpolant gauss_interpolant(const TensorBasis& basis, const PolyFamily& node_family, Strategy strategy,
                                   std::optional<NatafTransform> transform, int points_per_dim) {
    const QuadratureRule univariate = gauss_rule(node_family, points_per_dim);
    const std::vector<QuadratureRule> rules(basis.dimension(), univariate);
    const Eigen::MatrixXd nodes = tensor_rule(rules).nodes;
    LejaSequence seq = build_leja(basis, nodes, basis.size(), WeightKind::christoffel, nullptr, "tensor-gauss");
    Eigen::MatrixXd model_nodes = transform ? transform->inverse(seq.points()) : seq.points();
    return {std::move(seq), strategy, std::move(transform), std::move(model_nodes)};
}

std::vector<ResultRow> run_genz1d(const ExperimentConfig& c, std::ostream* log) {
    const double a = c.params.value("alpha", 10.0);
    const double b = c.params.value("beta", 10.0);
    const Marginal omega = Marginal::beta(a, b);
    const TensorDensity density({omega});
    const QuadratureRule reference = gauss_rule(omega.family(), 200);

    std::vector<Problem> problems;
    for (std::size_t t = 0; t < c.trials; ++t) {
        const std::uint64_t seed = trial_seed(c, t);
        const GenzSpec g = trial_genz(1, seed);
        Problem p;
        p.f = [g](std::span<const double> z) { return genz_oscillatory(g, z); };
        p.test = trial_test_samples(density, c.test_samples, seed);
        p.test_values = evaluate_model(p.f, p.test);
        p.mean = evaluate_model(p.f, reference.nodes).dot(reference.weights);
        problems.push_back(std::move(p));
    }

    std::vector<ResultRow> rows;
    for (const auto& label : c.strategies) {
        for (int p : c.degrees) {
            const MultiIndexSet set = total_degree_set(1, p);
            std::optional<GaussInterpolant> gi;
            if (label == "jacobi") {
                const PolyFamily fam = omega.family();
                gi = gauss_interpolant(TensorBasis(set, fam), fam, Strategy{StrategyKind::dom, a, b}, std::nullopt, p + 1);
            } else {
                const StrategyLabel sl = parse_strategy_label(label);
                if (sl.strategy.kind == StrategyKind::dom) {
                    const PolyFamily fam = PolyFamily::beta(sl.strategy.alpha, sl.strategy.beta, 0.0, 1.0);
                    gi = gauss_interpolant(TensorBasis(set, fam), fam, sl.strategy, std::nullopt, p + 1);
                } else if (sl.strategy.kind == StrategyKind::nataf) {
                    const PolyFamily fam = sl.strategy.target == TargetSpace::gauss ? PolyFamily::hermite()
                                                                                   : PolyFamily::legendre(-1.0, 1.0);
                    auto transform = NatafTransform::from_gaussian_correlation({omega}, Eigen::MatrixXd::Identity(1, 1),
                                                                               sl.strategy.target);
                    gi = gauss_interpolant(TensorBasis(set, fam), fam, sl.strategy, std::move(transform), p + 1);
                } else {
                    throw UsageError("genz1d-basis supports jacobi, dom_<a>_<b> and nataf strategies");
                }
            }
            const double kappa_phi = kappa_vandermonde(gi->sequence);
            const double kappa_q = kappa_quadrature(quadrature_weights(gi->sequence));
            for (std::size_t t = 0; t < c.trials; ++t) {
                const Problem& pr = problems[t];
                const PceSurrogate s(gi->sequence.basis(), interpolate(gi->sequence, evaluate_model(pr.f, gi->model_nodes)),
                                     gi->strategy, gi->transform);
                ResultRow row;
                row.experiment = c.experiment;
                row.strategy = label;
                row.seed = trial_seed(c, t);
                row.degree_or_level = p;
                row.n_samples = gi->sequence.size();
                row.l2_error = l2_error(pr.test_values, s, pr.test);
                const bool orthonormal_for_omega = label == "jacobi" || gi->strategy.kind == StrategyKind::nataf;
                if (orthonormal_for_omega) row.mean_rel_error = std::abs(s.moments().mean - *pr.mean) / std::abs(*pr.mean);
                row.kappa_phi = kappa_phi;
                row.kappa_q = kappa_q;
                rows.push_back(std::move(row));
            }
        }
        note(log, c.experiment + " " + label + " done");
    }
    return rows;
}

std::vector<ResultRow> run_cr_study(const ExperimentConfig& c, std::ostream* log) {
    const auto d = c.params.value("dimension", std::size_t{3});
    const double a = c.params.value("alpha", 10.0);
    const auto betas = c.params.value("betas", std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const TensorDensity omega(std::vector<Marginal>(d, Marginal::beta(a, a)));

    std::vector<Problem> problems;
    for (std::size_t t = 0; t < c.trials; ++t) {
        const std::uint64_t seed = trial_seed(c, t);
        const GenzSpec g = trial_genz(d, seed);
        Problem p;
        p.f = [g](std::span<const double> z) { return genz_oscillatory(g, z); };
        p.test = trial_test_samples(omega, c.test_samples, seed);
        p.test_values = evaluate_model(p.f, p.test);
        problems.push_back(std::move(p));
    }

    std::vector<ResultRow> rows;
    for (double beta : betas) {
        const TensorDensity g(std::vector<Marginal>(d, Marginal::beta(beta, beta)));
        const double c_r =
            domination_constant(omega, g, c.params.value("cr_probes", std::size_t{10000}), derive_seed(c.seed, 12));
        const Strategy strategy{StrategyKind::dom, beta, beta};
        const std::string label = strategy.name();
        const PolyFamily fam = PolyFamily::beta(beta, beta, 0.0, 1.0);
        for (int p : c.degrees) {
            const GaussInterpolant gi =
                gauss_interpolant(TensorBasis(hyperbolic_set(static_cast<int>(d), p, MaxNorm{}), fam), fam, strategy,
                                  std::nullopt, p + 1);
            const double kappa_phi = kappa_vandermonde(gi.sequence);
            const double kappa_q = kappa_quadrature(quadrature_weights(gi.sequence));
            for (std::size_t t = 0; t < c.trials; ++t) {
                const Problem& pr = problems[t];
                const PceSurrogate s(gi.sequence.basis(), interpolate(gi.sequence, evaluate_model(pr.f, gi.model_nodes)),
                                     strategy);
                ResultRow row;
                row.experiment = c.experiment;
                row.strategy = label;
                row.seed = trial_seed(c, t);
                row.degree_or_level = p;
                row.n_samples = gi.sequence.size();
                row.l2_error = l2_error(pr.test_values, s, pr.test);
                row.kappa_phi = kappa_phi;
                row.kappa_q = kappa_q;
                row.c_r = c_r;
                rows.push_back(std::move(row));
            }
        }
        note(log, c.experiment + " " + label + " done (C_r = " + format_double(c_r) + ")");
    }
    return rows;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& c, std::ostream* log) {
    validate(c);
    const std::string& e = c.experiment;
    if (e == "genz1d-basis") return run_genz1d(c, log);
    if (e == "cr-study") return run_cr_study(c, log);
    if (e == "genz2d" || e == "genz10d" || e == "mean2d" || e == "mean10d" || e == "mc-moments")
        return run_genz_sweep(c, log);
    require_increasing(c.degrees);
    if (e == "banana") {
        auto density = std::make_shared<BananaDensity>();
        GsQuadrature exact;
        exact.order = c.params.value("gs_order", 100);
        const ChemistrySpec chem;
        return run_fixed_model_sweep(c, density, total_degree_sets(2, c.degrees), exact,
                                     [chem](std::span<const double> z) { return chemistry_qoi(chem, z); },
                                     trial_test_samples(*density, c.test_samples, c.seed), log);
    }
    if (e == "zonotope") {
        Zonotope z = make_zonotope(c);
        GsQuadrature exact;
        exact.kind = GsQuadrature::Kind::provided;
        exact.rule = z.sobol_rule;
        Rng rng(derive_seed(c.seed, 11));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::MatrixXd y(static_cast<Eigen::Index>(c.test_samples), z.model.projection().cols());
        for (Eigen::Index i = 0; i < y.rows(); ++i)
            for (Eigen::Index k = 0; k < y.cols(); ++k) y(i, k) = unif(rng);
        const RidgeModel model = z.model;
        auto rows = run_fixed_model_sweep(c, z.density, total_degree_sets(2, c.degrees), exact,
                                          [model](std::span<const double> p) { return model.reduced(p); },
                                          y * model.projection().transpose(), log);
        note(log, "zonotope: " + std::to_string(model.clamped()) + " reduced points clamped into the zonotope box");
        return rows;
    }
    if (e == "diffusion") {
        const DiffusionSpec ds = diffusion_spec(c);
        auto density = experiment_density(c);
        const std::vector<double> alpha = diffusion_alpha(static_cast<int>(ds.dimension), ds.l());
        std::vector<MultiIndexSet> sets;
        for (int level : c.degrees) sets.push_back(anisotropic_total_degree_set(alpha, level));
        return run_fixed_model_sweep(c, density, std::move(sets), GsQuadrature{},
                                     [ds](std::span<const double> z) { return diffusion_qoi(ds, z); },
                                     trial_test_samples(*density, c.test_samples, c.seed), log);
    }
    throw UsageError("unknown experiment '" + e + "'");
}

// --- report ---------------------------------------------------------------------

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string strategy_kind(const std::string& label) {
    for (const char* k : {"gs", "dom", "nataf"}) {
        const std::string prefix = std::string(k) + "_";
        if (label.rfind(prefix, 0) == 0) return k;
    }
    return {};
}

}  // namespace

nlohmann::json report(const CsvTable& table) {
    for (const auto& col : result_columns()) {
        if (std::find(table.header.begin(), table.header.end(), col) == table.header.end())
            throw ParseError("missing column '" + col + "'", 1);
    }
    static const std::vector<std::string> metrics{"n_samples", "l2_error", "mean_rel_error", "kappa_phi",
                                                  "kappa_gs",  "kappa_q",  "wall_ms",        "c_r"};
    using Key = std::pair<std::string, int>;
    std::map<Key, std::map<std::string, std::vector<double>>> groups;
    std::map<Key, std::set<std::string>> seeds;
    std::set<std::string> experiments;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 2;
        if (row.size() != table.header.size()) throw ParseError("wrong number of fields", line);
        auto field = [&](const std::string& name) -> const std::string& { return row[table.column(name)]; };
        int degree = 0;
        try {
            std::size_t used = 0;
            degree = std::stoi(field("degree_or_level"), &used);
            if (used != field("degree_or_level").size()) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw ParseError("invalid degree_or_level '" + field("degree_or_level") + "'", line);
        }
        const Key key{field("strategy"), degree};
        experiments.insert(field("experiment"));
        seeds[key].insert(field("seed"));
        for (const auto& m : metrics) {
            const std::string& text = field(m);
            if (text.empty()) continue;
            try {
                groups[key][m].push_back(parse_double(text));
            } catch (const std::invalid_argument&) {
                throw ParseError("invalid " + m + " value '" + text + "'", line);
            }
        }
    }
    nlohmann::json medians = nlohmann::json::array();
    std::map<int, std::map<std::string, double>> l2_by_degree;
    for (const auto& [key, values] : groups) {
        nlohmann::json entry{{"strategy", key.first}, {"degree_or_level", key.second}, {"trials", seeds[key].size()}};
        for (const auto& [metric, v] : values) entry[metric] = median(v);
        if (values.count("l2_error")) l2_by_degree[key.second][key.first] = median(values.at("l2_error"));
        medians.push_back(std::move(entry));
    }
    nlohmann::json ratios = nlohmann::json::array();
    static const std::vector<std::pair<std::string, std::string>> pairs{{"gs", "dom"}, {"gs", "nataf"}, {"dom", "nataf"}};
    for (const auto& [degree, by_strategy] : l2_by_degree) {
        for (const auto& [num_kind, den_kind] : pairs) {
            for (const auto& [num, num_err] : by_strategy) {
                if (strategy_kind(num) != num_kind) continue;
                for (const auto& [den, den_err] : by_strategy) {
                    if (strategy_kind(den) != den_kind) continue;
                    ratios.push_back({{"degree_or_level", degree},
                                      {"numerator", num},
                                      {"denominator", den},
                                      {"l2_error_ratio", num_err / den_err}});
                }
            }
        }
    }
    return {{"experiments", std::vector<std::string>(experiments.begin(), experiments.end())},
            {"medians", std::move(medians)},
            {"ratios", std::move(ratios)}};
}

// --- auxiliary subcommands ---------------------------------------------------------

nlohmann::json nataf_correlation_report(const nlohmann::json& request) {
    try {
        std::vector<Marginal> marginals;
        for (const auto& m : request.at("marginals")) marginals.push_back(marginal_from_json(m));
        const int order = request.value("quadrature_order", 50);
        Eigen::MatrixXd r_z;
        Eigen::MatrixXd r_v;
        if (request.contains("r_z")) {
            r_z = matrix_from_json(request.at("r_z"));
            if (r_z.rows() != static_cast<Eigen::Index>(marginals.size()))
                throw UsageError("r_z size does not match the marginals");
            r_v = nataf_correlation_solve(r_z, marginals, order);
        } else if (request.contains("r_v")) {
            r_v = matrix_from_json(request.at("r_v"));
            if (r_v.rows() != static_cast<Eigen::Index>(marginals.size()))
                throw UsageError("r_v size does not match the marginals");
            r_z = nataf_z_correlation_matrix(r_v, marginals, order);
        } else {
            throw UsageError("nataf-corr config needs 'r_z' or 'r_v'");
        }
        nlohmann::json out{{"r_z", matrix_to_json(r_z)}, {"r_v", matrix_to_json(r_v)}, {"quadrature_order", order}};
        out["marginals"] = nlohmann::json::array();
        for (const auto& m : marginals) out["marginals"].push_back(marginal_to_json(m));
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed nataf-corr config: ") + e.what());
    }
}

nlohmann::json leja_report(const ExperimentConfig& c) {
    validate(c);
    if (c.experiment == "cr-study" || c.experiment == "genz1d-basis")
        throw UsageError("leja dumps need a strategy-based experiment");
    const StrategyLabel label = parse_strategy_label(c.strategies.front());
    FitConfig fit_config;
    fit_config.candidates = c.candidates;
    fit_config.gs_quadrature.order = c.params.value("gs_order", 50);
    if (label.mc_samples) {
        fit_config.gs_quadrature.kind = GsQuadrature::Kind::monte_carlo;
        fit_config.gs_quadrature.samples = *label.mc_samples;
    }
    if (c.experiment == "zonotope") {
        fit_config.gs_quadrature.kind = GsQuadrature::Kind::provided;
        fit_config.gs_quadrature.rule = make_zonotope(c).sobol_rule;
    }
    const auto density = experiment_density(c);
    MultiIndexSet set = c.experiment == "diffusion"
                            ? anisotropic_total_degree_set(diffusion_alpha(static_cast<int>(density->dimension()),
                                                                           diffusion_spec(c).l()),
                                                           c.degrees.front())
                            : total_degree_set(static_cast<int>(density->dimension()), c.degrees.front());
    const StrategyFitter fitter(label.strategy, density, set, fit_config, c.seed);
    const PolynomialBasis basis = fitter.basis_for(set);
    const LejaSequence seq =
        build_leja(basis, fitter.candidates(), basis.size(), WeightKind::christoffel,
                   label.strategy.kind == StrategyKind::nataf ? nullptr : density.get(),
                   c.experiment + " " + label.label + " seed=" + std::to_string(c.seed));
    nlohmann::json out = leja_to_json(seq);
    out["experiment"] = c.experiment;
    out["strategy"] = label.label;
    out["degree"] = c.degrees.front();
    out["density"] = density->label();
    return out;
}

}  // namespace pcedep
