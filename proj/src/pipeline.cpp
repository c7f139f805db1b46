#include "flatctl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flatctl/errors.hpp"

namespace flatctl::pipeline {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size() || v < INT32_MIN || v > INT32_MAX) throw std::invalid_argument(value);
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    return words;
}

const std::set<std::string> kStudyAxes{"K", "N", "cells", "dt"};

std::vector<double> time_grid(const RunConfig& config, const spectral::ModelParams& params) {
    const int steps = static_cast<int>(std::ceil(config.T / config.dt - 1e-9));
    return flatness::control_grid(params, steps);
}

std::vector<std::size_t> checkpoint_indices(const std::vector<double>& grid, double tau, int count) {
    std::set<std::size_t> idx;
    const std::size_t last = grid.size() - 1;
    for (int i = 0; i <= count; ++i) {
        idx.insert(static_cast<std::size_t>(std::llround(static_cast<double>(i) * static_cast<double>(last) / count)));
    }
    const auto it = std::lower_bound(grid.begin(), grid.end(), tau - 1e-12 * grid.back());
    idx.insert(static_cast<std::size_t>(it - grid.begin()));
    return {idx.begin(), idx.end()};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << content;
    if (!out) throw NumericalError("write failed for " + path.string());
}

}  // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key == "alpha") c.alpha = parse_double(key, value);
    else if (key == "T") c.T = parse_double(key, value);
    else if (key == "tau") c.tau = parse_double(key, value);
    else if (key == "s") c.s = parse_double(key, value);
    else if (key == "K") c.K = parse_int(key, value);
    else if (key == "N") c.N = parse_int(key, value);
    else if (key == "cells") c.cells = parse_int(key, value);
    else if (key == "dt") c.dt = parse_double(key, value);
    else if (key == "f0") c.f0 = value;
    else if (key == "out") c.out = value;
    else if (key == "checkpoints") c.checkpoints = parse_int(key, value);
    else if (key == "galerkin_threshold") c.thresholds.galerkin = parse_double(key, value);
    else if (key == "fv_threshold") c.thresholds.fv = parse_double(key, value);
    else if (key == "cross_validation") c.thresholds.cross_validation = parse_bool(key, value);
    else if (key == "study") c.study_axis = value;
    else if (key == "study_values") {
        c.study_values.clear();
        std::string v = value;
        std::replace(v.begin(), v.end(), ',', ' ');
        for (const auto& w : split_words(v)) c.study_values.push_back(parse_double(key, w));
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

RunConfig read_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

spectral::ModelParams model_params(const RunConfig& c) {
    try {
        return spectral::ModelParams(c.alpha, c.T, c.tau > 0.0 ? c.tau : c.T / 3.0, c.s);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

int mode_count(const RunConfig& c) { return c.K > 0 ? c.K : spectral::default_mode_count(model_params(c)); }

InitialDatum parse_initial_datum(const std::string& spec, const spectral::EigenBasis& basis) {
    const auto words = split_words(spec);
    if (words.empty()) throw ConfigError("f0: empty specification");
    const std::string& kind = words[0];
    if (kind == "const") {
        if (words.size() != 2) throw ConfigError("f0: 'const c' takes one value");
        return constant_datum(parse_double("f0", words[1]));
    }
    if (kind == "poly") {
        if (words.size() < 2) throw ConfigError("f0: 'poly c0 c1 ...' needs coefficients");
        std::vector<double> c;
        for (std::size_t i = 1; i < words.size(); ++i) c.push_back(parse_double("f0", words[i]));
        return polynomial_datum(std::move(c));
    }
    if (kind == "eig") {
        if (words.size() != 2) throw ConfigError("f0: 'eig k' takes one index");
        const int k = parse_int("f0", words[1]);
        if (k < 1 || k > basis.size()) {
            throw ConfigError("f0: eigenmode " + std::to_string(k) + " outside 1.." + std::to_string(basis.size()));
        }
        std::vector<double> w(static_cast<std::size_t>(k), 0.0);
        w.back() = 1.0;
        return spectral::eigen_datum(basis, std::move(w));
    }
    if (kind == "csv") {
        if (words.size() != 2) throw ConfigError("f0: 'csv path' takes one path");
        return sampled_datum(read_samples_csv(words[1]), "csv " + words[1]);
    }
    throw ConfigError("f0: unknown kind '" + kind + "' (expected const, poly, eig or csv)");
}

void validate(const RunConfig& c) {
    const auto params = model_params(c);
    if (c.K < 0) throw ConfigError("K must be >= 1 (or 0 for the default)");
    if (c.N < 1) throw ConfigError("N must be >= 1");
    if (c.cells < 2) throw ConfigError("cells must be >= 2");
    if (c.checkpoints < 1) throw ConfigError("checkpoints must be >= 1");
    if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
    if (c.dt > (params.horizon() - params.tau()) / 200.0) throw ConfigError("dt must not exceed (T - tau) / 200");
    if (!(c.thresholds.galerkin > 0.0) || !(c.thresholds.fv > 0.0)) throw ConfigError("thresholds must be positive");
    if (c.out.empty()) throw ConfigError("out must not be empty");

    const auto words = split_words(c.f0);
    if (words.empty()) throw ConfigError("f0: empty specification");
    if (words[0] == "eig") {
        if (words.size() != 2) throw ConfigError("f0: 'eig k' takes one index");
        const int k = parse_int("f0", words[1]);
        if (k < 1 || k > mode_count(c)) throw ConfigError("f0: eigenmode index exceeds K");
    } else if (words[0] == "csv") {
        if (words.size() != 2) throw ConfigError("f0: 'csv path' takes one path");
        (void)read_samples_csv(words[1]);
    } else {
        // const and poly need no basis; eig is handled above.
        const spectral::EigenBasis dummy = spectral::build_basis(params, 1);
        (void)parse_initial_datum(c.f0, dummy);
    }

    if (!c.study_axis.empty() || !c.study_values.empty()) {
        if (!kStudyAxes.count(c.study_axis)) throw ConfigError("study axis must be one of K, N, cells, dt");
        if (c.study_values.empty()) throw ConfigError("study needs at least one value");
        for (double v : c.study_values) {
            RunConfig probe = c;
            probe.study_axis.clear();
            probe.study_values.clear();
            if (c.study_axis == "dt") {
                probe.dt = v;
            } else {
                if (v != std::floor(v)) throw ConfigError("study values for " + c.study_axis + " must be integers");
                const int iv = static_cast<int>(v);
                if (c.study_axis == "K") probe.K = iv;
                if (c.study_axis == "N") probe.N = iv;
                if (c.study_axis == "cells") probe.cells = iv;
                if (iv < 1) throw ConfigError("study values for " + c.study_axis + " must be >= 1");
            }
            validate(probe);
        }
    }
}

bool RunResult::passed() const { return galerkin_passed && fv_passed && cross.passed; }

RunResult execute(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const auto params = model_params(config);
    const auto basis = spectral::build_basis(params, mode_count(config));
    const auto f0 = parse_initial_datum(config.f0, basis);
    const auto coeffs = spectral::project(basis, f0);

    const flatness::ControlLaw law(basis, coeffs, config.N);
    const auto grid = time_grid(config, params);

    RunResult r{params, basis.size(), f0.label, flatness::assemble_control(law, grid), {}, {}, {}, {}, {}, {}, {},
                0.0, 0.0, 0.0, false, false};

    const auto cp_idx = checkpoint_indices(grid, params.tau(), config.checkpoints);
    for (auto i : cp_idx) r.checkpoint_times.push_back(grid[i]);

    const auto mesh = simulator::graded_mesh(params.alpha(), config.cells);
    const auto gal = simulator::galerkin_solve(basis, coeffs, r.control, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) r.galerkin_norms.push_back(simulator::galerkin_norm(gal, i));
    for (auto i : cp_idx) r.galerkin_states.push_back(simulator::galerkin_on_mesh(basis, gal, i, mesh));

    const auto fv_all = simulator::fv_solve(params, f0, r.control, mesh, grid);
    for (const auto& s : fv_all) r.fv_norms.push_back(simulator::l2_norm(s));
    for (auto i : cp_idx) r.fv_states.push_back(fv_all[i]);

    if (config.cells % 2 == 0 && config.cells >= 4) {
        std::set<std::size_t> coarse_idx(cp_idx.begin(), cp_idx.end());
        for (std::size_t i = 0; i < grid.size(); i += 2) coarse_idx.insert(i);
        coarse_idx.insert(grid.size() - 1);
        std::vector<double> coarse_grid;
        for (auto i : coarse_idx) coarse_grid.push_back(grid[i]);
        const auto coarse = simulator::fv_solve(params, f0, r.control, simulator::graded_mesh(params.alpha(), config.cells / 2),
                                                coarse_grid, r.checkpoint_times);
        r.fv_error = simulator::fv_error_estimate(r.fv_states, coarse);
    }

    // At t = 0 the modal truncation of f0 is compared with raw samples, which
    // measures projection error rather than solver agreement.
    const std::size_t first = r.checkpoint_times.front() > 0.0 ? 0 : 1;
    r.cross = simulator::cross_validate(std::span(r.galerkin_states).subspan(first), std::span(r.fv_states).subspan(first),
                                        r.fv_error.empty() ? std::span<const double>{} : std::span<const double>(r.fv_error).subspan(first));
    r.galerkin_terminal = r.galerkin_norms.back();
    r.fv_terminal = r.fv_norms.back();
    r.galerkin_passed = r.galerkin_terminal <= config.thresholds.galerkin;
    r.fv_passed = r.fv_terminal <= config.thresholds.fv;
    if (!config.thresholds.cross_validation) r.cross.passed = true;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void write_artifacts(const RunConfig& config, const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string control = "t,u\n";
    for (std::size_t i = 0; i < r.control.times.size(); ++i) {
        control += format_number(r.control.times[i]) + "," + format_number(r.control.u[i]) + "\n";
    }
    write_file(dir / "control.csv", control);

    std::string traj = "t,x,f\n";
    for (const auto& s : r.galerkin_states) {
        for (std::size_t i = 0; i < s.mesh.size(); ++i) {
            traj += format_number(s.time) + "," + format_number(s.mesh[i]) + "," + format_number(s.values[i]) + "\n";
        }
    }
    write_file(dir / "trajectory.csv", traj);

    std::string norms = "t,l2norm\n";
    std::string norms_fv = "t,l2norm\n";
    for (std::size_t i = 0; i < r.control.times.size(); ++i) {
        norms += format_number(r.control.times[i]) + "," + format_number(r.galerkin_norms[i]) + "\n";
        norms_fv += format_number(r.control.times[i]) + "," + format_number(r.fv_norms[i]) + "\n";
    }
    write_file(dir / "norms.csv", norms);
    write_file(dir / "norms_fv.csv", norms_fv);

    using nlohmann::ordered_json;
    ordered_json j;
    j["params"] = {{"alpha", r.params.alpha()}, {"nu", r.params.nu()},       {"T", r.params.horizon()},
                   {"tau", r.params.tau()},     {"s", r.params.gevrey()}};
    j["f0"] = r.f0_label;
    j["K"] = r.modes;
    j["N"] = config.N;
    j["cells"] = config.cells;
    j["dt"] = config.dt;
    j["terminal_norm"] = {{"galerkin", r.galerkin_terminal}, {"fv", r.fv_terminal}};
    j["gevrey_fit"] = {{"M", r.control.gevrey_fit.M},
                       {"R", r.control.gevrey_fit.R},
                       {"s", r.control.gevrey_fit.s},
                       {"residual", r.control.gevrey_fit.residual}};
    j["control_tail_bound"] = r.control.tail.empty() ? 0.0 : *std::max_element(r.control.tail.begin(), r.control.tail.end());
    j["precision_warning"] = r.control.precision_warning;
    ordered_json cv = ordered_json::array();
    const std::size_t offset = r.checkpoint_times.size() - r.cross.times.size();
    for (std::size_t i = 0; i < r.cross.times.size(); ++i) {
        cv.push_back({{"t", r.cross.times[i]},
                      {"discrepancy", r.cross.discrepancy[i]},
                      {"threshold", r.cross.threshold[i]},
                      {"fv_error", r.fv_error.empty() ? 0.0 : r.fv_error[i + offset]}});
    }
    j["cross_validation"] = {{"passed", r.cross.passed}, {"checkpoints", cv}};
    j["thresholds"] = {{"galerkin", config.thresholds.galerkin},
                       {"fv", config.thresholds.fv},
                       {"cross_validation", config.thresholds.cross_validation}};
    j["passed"] = {{"galerkin", r.galerkin_passed}, {"fv", r.fv_passed}, {"all", r.passed()}};
    write_file(dir / "summary.json", j.dump(2) + "\n");
}

namespace {

template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConvergenceError& e) {
        log << "numerical failure: " << e.what() << " (achieved " << e.achieved() << ")\n";
        return kNumericalFailure;
    } catch (const std::exception& e) {
        log << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    }
}

}  // namespace

int run_pipeline(const RunConfig& config, std::ostream& log) {
    try {
        validate(config);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    return guarded(log, [&] {
        const RunResult r = execute(config);
        write_artifacts(config, r, config.out);
        log << "K=" << r.modes << " N=" << config.N << " cells=" << config.cells << " dt=" << config.dt << "\n"
            << "galerkin |f(T)| = " << format_number(r.galerkin_terminal) << (r.galerkin_passed ? " pass" : " FAIL") << "\n"
            << "fv       |f(T)| = " << format_number(r.fv_terminal) << (r.fv_passed ? " pass" : " FAIL") << "\n"
            << "cross-validation " << (r.cross.passed ? "pass" : "FAIL") << "\n";
        if (r.control.precision_warning) log << "warning: flat output truncation tail above tolerance; increase K\n";
        return r.passed() ? kPass : kThresholdFailed;
    });
}

int run_study(const RunConfig& config, std::ostream& log) {
    try {
        if (config.study_axis.empty()) throw ConfigError("study axis not set");
        validate(config);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    return guarded(log, [&] {
        std::string table = "axis,value,galerkin_norm,fv_norm,wall_seconds\n";
        bool all = true;
        for (double v : config.study_values) {
            RunConfig run = config;
            run.study_axis.clear();
            run.study_values.clear();
            if (config.study_axis == "K") run.K = static_cast<int>(v);
            if (config.study_axis == "N") run.N = static_cast<int>(v);
            if (config.study_axis == "cells") run.cells = static_cast<int>(v);
            if (config.study_axis == "dt") run.dt = v;
            run.out = config.out / (config.study_axis + "_" + format_number(v));
            const RunResult r = execute(run);
            write_artifacts(run, r, run.out);
            all = all && r.passed();
            table += config.study_axis + "," + format_number(v) + "," + format_number(r.galerkin_terminal) + "," +
                     format_number(r.fv_terminal) + "," + format_number(r.seconds) + "\n";
            log << config.study_axis << "=" << format_number(v) << ": galerkin " << format_number(r.galerkin_terminal)
                << ", fv " << format_number(r.fv_terminal) << "\n";
        }
        std::filesystem::create_directories(config.out);
        write_file(config.out / "study.csv", table);
        return all ? kPass : kThresholdFailed;
    });
}

}  // namespace flatctl::pipeline
