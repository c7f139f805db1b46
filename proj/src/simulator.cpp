#include "flatctl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flatctl/detail/summation.hpp"
#include "flatctl/errors.hpp"

namespace flatctl::simulator {

namespace {

std::vector<std::size_t> locate(const flatness::ControlSignal& control, std::span<const double> times, const char* who) {
    std::vector<std::size_t> out;
    out.reserve(times.size());
    for (double t : times) {
        const auto i = control.index_of(t);
        if (!i) {
            throw GridError(std::string(who) + ": t = " + std::to_string(t) +
                            " is not a control sample; resample the control on a finer grid");
        }
        if (!out.empty() && *i <= out.back()) throw GridError(std::string(who) + ": times must be increasing");
        out.push_back(*i);
    }
    return out;
}

// Centred differences; one-sided (backward) at tau and T, forward at 0.
std::vector<double> control_derivative(const flatness::ControlSignal& c, double tau) {
    const auto& t = c.times;
    const auto& u = c.u;
    const std::size_t n = t.size();
    std::vector<double> du(n, 0.0);
    if (n < 2) return du;
    const auto tau_index = c.index_of(tau);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            du[i] = (u[1] - u[0]) / (t[1] - t[0]);
        } else if (i == n - 1 || (tau_index && i == *tau_index)) {
            du[i] = (u[i] - u[i - 1]) / (t[i] - t[i - 1]);
        } else {
            du[i] = (u[i + 1] - u[i - 1]) / (t[i + 1] - t[i - 1]);
        }
    }
    return du;
}

// (1 - e^{-l d}) / l and int_0^d e^{-l (d - r)} r dr.
struct Kernels {
    double decay;
    double e0;
    double e1;
};

Kernels kernels(double lambda, double d) {
    const double z = lambda * d;
    Kernels k{std::exp(-z), 0.0, 0.0};
    if (z < 1e-3) {
        k.e0 = d * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
        k.e1 = d * d * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0);
    } else {
        k.e0 = -std::expm1(-z) / lambda;
        k.e1 = (d - k.e0) / lambda;
    }
    return k;
}

}  // namespace

GalerkinTrajectory galerkin_solve(const spectral::EigenBasis& basis, const spectral::SpectralCoeffs& coeffs,
                                  const flatness::ControlSignal& control, std::span<const double> t_grid) {
    if (static_cast<int>(coeffs.a.size()) != basis.size()) throw MismatchError("galerkin_solve: coefficient count");
    if (control.times.size() != control.u.size() || control.times.empty()) {
        throw GridError("galerkin_solve: malformed control signal");
    }
    if (t_grid.empty()) throw GridError("galerkin_solve: empty time grid");
    const auto stops = locate(control, t_grid, "galerkin_solve");

    const double alpha = basis.params().alpha();
    const auto theta = spectral::project(basis, {[](double x) { return x * x; }, {}, "x^2"});
    const auto a_theta = spectral::project(
        basis, {[alpha](double x) { return -2.0 * (alpha + 1.0) * std::pow(x, alpha); }, {}, "A x^2"});
    const auto du = control_derivative(control, basis.params().tau());
    const std::size_t K = coeffs.a.size();

    auto source = [&](std::size_t i, std::size_t k) {
        return -du[i] * theta.a[k] - control.u[i] * a_theta.a[k];
    };

    GalerkinTrajectory traj;
    traj.theta_coeffs = theta.a;
    std::vector<double> g(K);
    for (std::size_t k = 0; k < K; ++k) g[k] = coeffs.a[k] - control.u[0] * theta.a[k];

    auto record = [&](std::size_t i) {
        traj.states.push_back({g, control.u[i], du[i], control.times[i]});
    };

    std::size_t next_stop = 0;
    // Samples before the first stop only advance the state.
    for (std::size_t i = 0;; ++i) {
        if (i == stops[next_stop]) {
            record(i);
            if (++next_stop == stops.size()) break;
        }
        const double d = control.times[i + 1] - control.times[i];
        for (std::size_t k = 0; k < K; ++k) {
            const auto ker = kernels(basis.lambdas()[k], d);
            const double h0 = source(i, k);
            const double h1 = source(i + 1, k);
            g[k] = ker.decay * g[k] + h0 * ker.e0 + (h1 - h0) / d * ker.e1;
        }
    }
    return traj;
}

double galerkin_value(const spectral::EigenBasis& basis, const GalerkinTrajectory& traj, std::size_t i, double x) {
    const LiftedState& s = traj.states.at(i);
    detail::CompensatedSum sum;
    for (std::size_t k = 0; k < s.g.size(); ++k) {
        if (s.g[k] != 0.0) sum.add(s.g[k] * spectral::eigenfunction(basis, static_cast<int>(k) + 1, x));
    }
    sum.add(s.u_now * x * x);
    return sum.value();
}

// ||g + u theta||^2 = sum g_k^2 + 2 u sum g_k theta_k + u^2 / 5.
double galerkin_norm(const GalerkinTrajectory& traj, std::size_t i) {
    const LiftedState& s = traj.states.at(i);
    detail::CompensatedSum sum;
    for (std::size_t k = 0; k < s.g.size(); ++k) {
        sum.add(s.g[k] * s.g[k]);
        sum.add(2.0 * s.u_now * s.g[k] * traj.theta_coeffs[k]);
    }
    sum.add(s.u_now * s.u_now / 5.0);
    return std::sqrt(std::max(0.0, sum.value()));
}

GridState galerkin_on_mesh(const spectral::EigenBasis& basis, const GalerkinTrajectory& traj, std::size_t i,
                           std::span<const double> mesh) {
    GridState out{{mesh.begin(), mesh.end()}, {}, traj.states.at(i).time};
    out.values.reserve(mesh.size());
    for (double x : mesh) out.values.push_back(galerkin_value(basis, traj, i, x));
    return out;
}

std::vector<double> graded_mesh(double alpha, int cells) {
    if (cells < 2) throw DomainError("graded_mesh: need at least two cells");
    if (!(alpha >= 1.0 && alpha < 2.0)) throw DomainError("graded_mesh: alpha must lie in [1, 2)");
    const double p = 2.0 / (2.0 - alpha);
    std::vector<double> x(static_cast<std::size_t>(cells + 1));
    for (int i = 0; i <= cells; ++i) x[static_cast<std::size_t>(i)] = std::pow(static_cast<double>(i) / cells, p);
    x.front() = 0.0;
    x.back() = 1.0;
    return x;
}

std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                                      std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n || n == 0) {
        throw MismatchError("solve_tridiagonal: band sizes differ");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double m = lower[i] / diag[i - 1];
            diag[i] -= m * upper[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        if (diag[i] == 0.0 || !std::isfinite(diag[i])) {
            throw SingularityError("solve_tridiagonal: zero pivot at row " + std::to_string(i));
        }
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

FiniteVolumeSolver::FiniteVolumeSolver(double alpha, std::vector<double> mesh) : alpha_(alpha), mesh_(std::move(mesh)) {
    const std::size_t n = mesh_.size();
    if (n < 3) throw GridError("FiniteVolumeSolver: need at least two cells");
    if (mesh_.front() != 0.0 || mesh_.back() != 1.0) throw GridError("FiniteVolumeSolver: mesh must span [0, 1]");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(mesh_[i] > mesh_[i - 1])) throw GridError("FiniteVolumeSolver: mesh must be strictly increasing");
    }
    const std::size_t M = n - 1;
    conductance_.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double mid = 0.5 * (mesh_[i] + mesh_[i + 1]);
        conductance_[i] = std::pow(mid, alpha_) / (mesh_[i + 1] - mesh_[i]);
    }
    volumes_.resize(M);
    volumes_[0] = 0.5 * mesh_[1];
    for (std::size_t i = 1; i < M; ++i) volumes_[i] = 0.5 * (mesh_[i + 1] - mesh_[i - 1]);
}

std::vector<double> FiniteVolumeSolver::fluxes(std::span<const double> values) const {
    if (values.size() != mesh_.size()) throw MismatchError("FiniteVolumeSolver: value count");
    std::vector<double> F(conductance_.size());
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = conductance_[i] * (values[i + 1] - values[i]);
    return F;
}

// V_i (f_i^{n+1} - f_i^n) / dt = (L f^{n+1} + L f^n)_i / 2,  (L f)_i = F_{i+1/2} - F_{i-1/2},
// with zero flux at x = 0 and f_M prescribed.
void FiniteVolumeSolver::step(std::vector<double>& values, double dt, double u_next) const {
    if (values.size() != mesh_.size()) throw MismatchError("FiniteVolumeSolver: value count");
    if (!(dt > 0.0)) throw DomainError("FiniteVolumeSolver: step must be positive");
    const std::size_t M = conductance_.size();
    const auto F = fluxes(values);

    std::vector<double> lower(M, 0.0), diag(M), upper(M, 0.0), rhs(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double right = conductance_[i];
        const double left = i > 0 ? conductance_[i - 1] : 0.0;
        const double net = F[i] - (i > 0 ? F[i - 1] : 0.0);
        diag[i] = volumes_[i] / dt + 0.5 * (left + right);
        if (i > 0) lower[i] = -0.5 * left;
        if (i + 1 < M) upper[i] = -0.5 * right;
        rhs[i] = volumes_[i] / dt * values[i] + 0.5 * net;
    }
    rhs[M - 1] += 0.5 * conductance_[M - 1] * u_next;

    auto next = solve_tridiagonal(std::move(lower), std::move(diag), std::move(upper), std::move(rhs));
    for (std::size_t i = 0; i < M; ++i) {
        if (!std::isfinite(next[i])) throw NumericalError("FiniteVolumeSolver: non-finite value after step");
        values[i] = next[i];
    }
    values[M] = u_next;
}

std::vector<GridState> fv_solve(const spectral::ModelParams& params, const InitialDatum& f0,
                                const flatness::ControlSignal& control, std::span<const double> mesh,
                                std::span<const double> t_grid, std::span<const double> checkpoints) {
    if (t_grid.size() < 2) throw GridError("fv_solve: time grid needs at least two points");
    const auto steps = locate(control, t_grid, "fv_solve");
    std::vector<std::size_t> keep;
    if (checkpoints.empty()) {
        for (std::size_t i = 0; i < t_grid.size(); ++i) keep.push_back(i);
    } else {
        const double tol = 1e-12 * std::max(1.0, std::abs(t_grid.back()));
        for (double c : checkpoints) {
            const auto it = std::lower_bound(t_grid.begin(), t_grid.end(), c - tol);
            if (it == t_grid.end() || std::abs(*it - c) > tol) {
                throw GridError("fv_solve: checkpoint " + std::to_string(c) + " is not on the time grid");
            }
            keep.push_back(static_cast<std::size_t>(it - t_grid.begin()));
        }
    }

    const FiniteVolumeSolver solver(params.alpha(), {mesh.begin(), mesh.end()});
    std::vector<double> values;
    values.reserve(mesh.size());
    for (double x : mesh) values.push_back(f0(x));
    values.back() = control.u[steps[0]];
    for (double v : values) {
        if (!std::isfinite(v)) throw NumericalError("fv_solve: initial datum is not finite on the mesh");
    }

    std::vector<GridState> out;
    std::size_t next_keep = 0;
    for (std::size_t n = 0; n < t_grid.size(); ++n) {
        if (n > 0) solver.step(values, t_grid[n] - t_grid[n - 1], control.u[steps[n]]);
        while (next_keep < keep.size() && keep[next_keep] == n) {
            out.push_back({solver.mesh(), values, t_grid[n]});
            ++next_keep;
        }
    }
    return out;
}

double l2_norm(const GridState& state) {
    const auto& x = state.mesh;
    const auto& f = state.values;
    if (x.size() != f.size()) throw MismatchError("l2_norm: mesh and values differ in length");
    detail::CompensatedSum sum;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) sum.add(0.5 * (f[i] * f[i] + f[i + 1] * f[i + 1]) * (x[i + 1] - x[i]));
    return std::sqrt(std::max(0.0, sum.value()));
}

std::vector<double> fv_error_estimate(std::span<const GridState> fine, std::span<const GridState> coarse) {
    if (fine.size() != coarse.size()) throw MismatchError("fv_error_estimate: checkpoint counts differ");
    std::vector<double> out;
    for (std::size_t c = 0; c < fine.size(); ++c) {
        const auto& F = fine[c];
        const auto& C = coarse[c];
        if (F.mesh.size() != 2 * C.mesh.size() - 1) throw MismatchError("fv_error_estimate: coarse mesh must have half the cells");
        GridState diff{C.mesh, std::vector<double>(C.mesh.size()), C.time};
        for (std::size_t i = 0; i < C.mesh.size(); ++i) diff.values[i] = F.values[2 * i] - C.values[i];
        out.push_back(l2_norm(diff) / 3.0);
    }
    return out;
}

CrossValidationReport cross_validate(std::span<const GridState> galerkin, std::span<const GridState> fv,
                                     std::span<const double> fv_error) {
    if (galerkin.size() != fv.size()) throw MismatchError("cross_validate: checkpoint counts differ");
    if (!fv_error.empty() && fv_error.size() != fv.size()) throw MismatchError("cross_validate: error estimate count");
    CrossValidationReport report;
    for (std::size_t c = 0; c < fv.size(); ++c) {
        if (galerkin[c].mesh.size() != fv[c].mesh.size()) throw MismatchError("cross_validate: meshes differ");
        GridState diff{fv[c].mesh, std::vector<double>(fv[c].mesh.size()), fv[c].time};
        for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] = galerkin[c].values[i] - fv[c].values[i];
        const double d = l2_norm(diff);
        const double limit = std::max(1e-3, fv_error.empty() ? 0.0 : 5.0 * fv_error[c]);
        report.times.push_back(fv[c].time);
        report.discrepancy.push_back(d);
        report.threshold.push_back(limit);
        report.passed = report.passed && d <= limit;
    }
    return report;
}

}  // namespace flatctl::simulator
