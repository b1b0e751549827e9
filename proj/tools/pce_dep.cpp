#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcedep/errors.hpp"
#include "pcedep/experiments.hpp"
#include "pcedep/io.hpp"

namespace fs = std::filesystem;
using namespace pcedep;

namespace {

struct CommonFlags {
    std::string experiment;
    std::string degrees;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> candidates;
    std::string out;
    std::string config;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--experiment", f.experiment, "Experiment name");
    cmd->add_option("--degrees", f.degrees, "Degrees or levels: 1..15, 1,3,5 or 4");
    cmd->add_option("--trials", f.trials, "Number of trials (seeds)");
    cmd->add_option("--seed", f.seed, "Base seed; trial t uses seed + t");
    cmd->add_option("--candidates", f.candidates, "Leja candidate count");
    cmd->add_option("--config", f.config, "JSON config or run manifest");
}

std::string read_input(const std::string& path) {
    if (!fs::is_regular_file(path)) throw UsageError("cannot read '" + path + "'");
    return read_text(path);
}

nlohmann::json read_json(const std::string& path) {
    const std::string text = read_input(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

ExperimentConfig resolve_config(const CommonFlags& f) {
    ExperimentConfig c;
    if (!f.config.empty()) {
        c = config_from_json(read_json(f.config));
        if (!f.experiment.empty() && f.experiment != c.experiment)
            throw UsageError("--experiment conflicts with the config's experiment");
    } else if (!f.experiment.empty()) {
        c = default_config(f.experiment);
    } else {
        throw UsageError("either --experiment or --config is required");
    }
    if (!f.degrees.empty()) c.degrees = parse_degrees(f.degrees);
    if (f.trials) c.trials = *f.trials;
    if (f.seed) c.seed = *f.seed;
    if (f.candidates) c.candidates = *f.candidates;
    validate(c);
    return c;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
}

int run(const CommonFlags& f) {
    const ExperimentConfig c = resolve_config(f);
    const fs::path dir = f.out.empty() ? fs::path(".") : fs::path(f.out);
    fs::create_directories(dir);
    const auto rows = run_experiment(c, &std::cerr);
    const std::string csv_name = c.experiment + ".csv";
    write_text(dir / csv_name, table_to_csv(results_to_table(rows)));
    const nlohmann::json manifest{
        {"tool", kToolVersion}, {"config", config_to_json(c)}, {"outputs", {{"results", csv_name}}}};
    write_text(dir / (c.experiment + ".manifest.json"), manifest.dump(2) + "\n");
    std::cout << (dir / csv_name).string() << '\n' << (dir / (c.experiment + ".manifest.json")).string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polynomial chaos surrogates for dependent random variables"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment and write <out>/<experiment>.csv plus a manifest");
    add_common(run_cmd, run_flags);
    run_cmd->add_option("--out", run_flags.out, "Output directory (default: current directory)");

    std::string report_input;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "Summarize a result CSV as JSON");
    report_cmd->add_option("csv", report_input, "Result CSV written by run")->required();
    report_cmd->add_option("--out", report_out, "Output JSON file (default: stdout)");

    CommonFlags leja_flags;
    auto* leja_cmd = app.add_subcommand("leja", "Dump the Leja sequence of an experiment's first strategy and degree");
    add_common(leja_cmd, leja_flags);
    std::string leja_strategy;
    leja_cmd->add_option("--strategy", leja_strategy, "Strategy label (default: the experiment's first)");
    leja_cmd->add_option("--out", leja_flags.out, "Output JSON file (default: stdout)");

    std::string corr_config;
    std::string corr_out;
    auto* corr_cmd = app.add_subcommand("nataf-corr", "Solve for the Gaussian correlation of a Nataf model");
    corr_cmd->add_option("--config", corr_config, "JSON with marginals and r_z or r_v")->required();
    corr_cmd->add_option("--out", corr_out, "Output JSON file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run_cmd) return run(run_flags);
        if (*report_cmd) {
            emit(report_out, report(parse_csv(read_input(report_input))).dump(2) + "\n");
            return 0;
        }
        if (*leja_cmd) {
            ExperimentConfig c = resolve_config(leja_flags);
            if (!leja_strategy.empty()) c.strategies = {leja_strategy};
            emit(leja_flags.out, leja_report(c).dump(2) + "\n");
            return 0;
        }
        if (*corr_cmd) {
            emit(corr_out, nataf_correlation_report(read_json(corr_config)).dump(2) + "\n");
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
