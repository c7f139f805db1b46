// Command-line front end: flatctl [--config FILE] [--alpha A] ... [--study AXIS --study-values V1,V2,...]

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flatctl/errors.hpp"
#include "flatctl/pipeline.hpp"
#include "flatctl/specfun.hpp"

using namespace flatctl;

namespace {

int dump_zeros(const pipeline::RunConfig& config, int count) {
    const auto params = pipeline::model_params(config);
    const auto table = specfun::bessel_zeros(specfun::BesselOrder(params.nu()), count);
    std::filesystem::create_directories(config.out);
    std::ofstream out(config.out / "zeros.csv");
    out << "k,zero\n";
    for (int k = 1; k <= table.count(); ++k) out << k << "," << pipeline::format_number(table.zero(k)) << "\n";
    return out ? pipeline::kPass : pipeline::kNumericalFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flatness-based null control of x^alpha-degenerate heat equations"};
    app.option_defaults()->always_capture_default(false);

    std::string config_file;
    app.add_option("--config", config_file, "key = value configuration file");

    // Overrides are kept as text and applied through the config parser, in this order.
    const std::vector<std::pair<std::string, std::string>> flags = {
        {"--alpha", "alpha"},   {"--T", "T"},
        {"--tau", "tau"},       {"--s", "s"},
        {"--K", "K"},           {"--N", "N"},
        {"--cells", "cells"},   {"--dt", "dt"},
        {"--f0", "f0"},         {"--out", "out"},
        {"--study", "study"},   {"--study-values", "study_values"},
        {"--checkpoints", "checkpoints"},
        {"--galerkin-threshold", "galerkin_threshold"},
        {"--fv-threshold", "fv_threshold"},
        {"--cross-validation", "cross_validation"},
    };
    std::map<std::string, std::string> values;
    for (const auto& [flag, key] : flags) app.add_option(flag, values[key], "sets '" + key + "'");

    int zeros = 0;
    app.add_option("--dump-zeros", zeros, "write the first COUNT Bessel zeros to OUT/zeros.csv and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return pipeline::kConfigError;
    }

    pipeline::RunConfig config;
    try {
        if (!config_file.empty()) config = pipeline::read_config_file(config_file);
        for (const auto& [flag, key] : flags) {
            if (app.count(flag) > 0) pipeline::apply_setting(config, key, values[key]);
        }
        if (zeros > 0) return dump_zeros(config, zeros);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return pipeline::kConfigError;
    }

    if (!config.study_axis.empty() || !config.study_values.empty()) return pipeline::run_study(config, std::cerr);
    return pipeline::run_pipeline(config, std::cerr);
}
