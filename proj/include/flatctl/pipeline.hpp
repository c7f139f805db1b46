#pragma once

// Synthesize-then-verify pipeline behind the command-line tool.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "flatctl/flatness.hpp"
#include "flatctl/simulator.hpp"
#include "flatctl/spectral.hpp"

namespace flatctl::pipeline {

enum ExitCode : int { kPass = 0, kThresholdFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

struct Thresholds {
    double galerkin = 1e-5;
    double fv = 1e-2;
    bool cross_validation = true;
};

struct RunConfig {
    double alpha = 1.5;
    double T = 1.0;
    /// Non-positive means T/3.
    double tau = 0.0;
    double s = 1.5;
    /// Non-positive means spectral::default_mode_count.
    int K = 0;
    int N = 30;
    int cells = 400;
    double dt = 5e-4;
    std::string f0 = "const 1";
    std::filesystem::path out = "flatctl-out";
    /// Number of intervals between trajectory checkpoints.
    int checkpoints = 20;
    Thresholds thresholds;
    /// Refinement study: axis in {K, N, cells, dt} and its values.
    std::string study_axis;
    std::vector<double> study_values;
};

/// Sets one `key = value` entry. Keys: alpha T tau s K N cells dt f0 out
/// checkpoints galerkin_threshold fv_threshold cross_validation study
/// study_values. Throws ConfigError on unknown keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reads a flat `key = value` file; `#` starts a comment.
RunConfig read_config_file(const std::filesystem::path& path, RunConfig base = {});

spectral::ModelParams model_params(const RunConfig& config);
int mode_count(const RunConfig& config);

/// Throws ConfigError if any field is out of range or f0 cannot be resolved.
void validate(const RunConfig& config);

/// Resolves `const c`, `poly c0 c1 ...`, `eig k` or `csv path`.
InitialDatum parse_initial_datum(const std::string& spec, const spectral::EigenBasis& basis);

struct RunResult {
    spectral::ModelParams params;
    int modes = 0;
    std::string f0_label;
    flatness::ControlSignal control;
    std::vector<double> checkpoint_times;
    std::vector<simulator::GridState> galerkin_states;  // on the FV mesh at checkpoints
    std::vector<double> galerkin_norms;                  // at every control time
    std::vector<simulator::GridState> fv_states;         // at checkpoints
    std::vector<double> fv_norms;                        // at every control time
    std::vector<double> fv_error;                        // per checkpoint, empty if unavailable
    simulator::CrossValidationReport cross;
    double galerkin_terminal = 0.0;
    double fv_terminal = 0.0;
    double seconds = 0.0;

    bool galerkin_passed = false;
    bool fv_passed = false;
    bool passed() const;
};

/// Runs the computation without touching the filesystem.
RunResult execute(const RunConfig& config);

/// Writes control.csv, trajectory.csv, norms.csv, norms_fv.csv and summary.json.
void write_artifacts(const RunConfig& config, const RunResult& result, const std::filesystem::path& dir);

/// Validates, executes, writes artifacts; returns an ExitCode. Diagnostics go to `log`.
int run_pipeline(const RunConfig& config, std::ostream& log);

/// One run per value of the study axis, each in its own subdirectory of
/// config.out, plus study.csv with columns
/// axis,value,galerkin_norm,fv_norm,wall_seconds.
int run_study(const RunConfig& config, std::ostream& log);

/// printf("%.17g").
std::string format_number(double v);

}  // namespace flatctl::pipeline
