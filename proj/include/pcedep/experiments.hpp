#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcedep/io.hpp"
#include "pcedep/measure.hpp"
#include "pcedep/surrogate.hpp"

namespace pcedep {

inline constexpr const char* kToolVersion = "pce-dep 0.1.0";

/// Bad invocation or configuration; the CLI maps it to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    std::string experiment;
    /// Total degrees, or levels for index sets driven by a level.
    std::vector<int> degrees;
    std::size_t trials = 10;
    std::uint64_t seed = 0;
    std::size_t candidates = 10000;
    std::size_t test_samples = 10000;
    /// Strategy labels: gs_<a>_<b>, gs_mono, dom_<a>_<b>, nataf_gauss, nataf_unif,
    /// optionally suffixed with _mc<J> for a Monte Carlo GSO rule of J samples.
    std::vector<std::string> strategies;
    /// Experiment-specific settings.
    nlohmann::json params = nlohmann::json::object();
};

[[nodiscard]] const std::vector<std::string>& experiment_names();
/// Throws UsageError for unknown names.
[[nodiscard]] ExperimentConfig default_config(const std::string& experiment);

/// "1..15", "1,3,5" or "4". Throws UsageError.
[[nodiscard]] std::vector<int> parse_degrees(const std::string& text);

[[nodiscard]] nlohmann::json config_to_json(const ExperimentConfig& config);
/// Accepts a bare config or a run manifest; missing fields take the
/// experiment's defaults. Throws UsageError.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& j);
/// Throws UsageError when the config cannot be run.
void validate(const ExperimentConfig& config);

struct StrategyLabel {
    std::string label;
    Strategy strategy;
    /// Monte Carlo GSO sample count, when requested by an _mc<J> suffix.
    std::optional<std::size_t> mc_samples;
};

[[nodiscard]] StrategyLabel parse_strategy_label(const std::string& label);

struct ResultRow {
    std::string experiment;
    std::string strategy;
    std::uint64_t seed = 0;
    int degree_or_level = 0;
    std::size_t n_samples = 0;
    double l2_error = 0.0;
    std::optional<double> mean_rel_error;
    double kappa_phi = 0.0;
    std::optional<double> kappa_gs;
    double kappa_q = 0.0;
    std::optional<double> wall_ms;
    std::optional<double> c_r;
};

/// Column order of result CSVs.
[[nodiscard]] const std::vector<std::string>& result_columns();
/// Absent optional values are written as empty fields.
[[nodiscard]] CsvTable results_to_table(const std::vector<ResultRow>& rows);

/// Runs every trial of the configured experiment. Progress and skipped
/// fits are reported on `log` when given.
[[nodiscard]] std::vector<ResultRow> run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Per-(strategy, degree) medians over seeds and median-error ratios between
/// strategy kinds (gs / dom, gs / nataf, dom / nataf). Throws ParseError.
[[nodiscard]] nlohmann::json report(const CsvTable& table);

/// Density of an experiment (copula, mixture, banana or zonotope KDE).
[[nodiscard]] std::shared_ptr<const JointDensity> experiment_density(const ExperimentConfig& config);

[[nodiscard]] Marginal marginal_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json marginal_to_json(const Marginal& m);

/// JSON object with "marginals" and either "r_z" (solve for R_V) or "r_v"
/// (derive R_Z); returns both matrices.
[[nodiscard]] nlohmann::json nataf_correlation_report(const nlohmann::json& request);

/// Leja sequence for the density of `config` and the first strategy at the
/// first degree (total-degree set), as JSON.
[[nodiscard]] nlohmann::json leja_report(const ExperimentConfig& config);

}  // namespace pcedep
