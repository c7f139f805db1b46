#pragma once

// Two independent solvers for the controlled problem
//   f_t = (x^alpha f_x)_x,  (x^alpha f_x)(0) = 0,  f(t, 1) = u(t):
//
//  * a modal Galerkin solver for the lifted unknown g = f - u(t) x^2, which
//    satisfies g_t + A g = -u' x^2 - u A x^2 with homogeneous boundary data;
//  * a vertex-centred finite-volume solver on a mesh graded toward x = 0,
//    Crank-Nicolson in time.

#include <span>
#include <vector>

#include "flatctl/flatness.hpp"
#include "flatctl/initial_datum.hpp"
#include "flatctl/spectral.hpp"

namespace flatctl::simulator {

struct GridState {
    std::vector<double> mesh;
    std::vector<double> values;
    double time = 0.0;
};

struct LiftedState {
    std::vector<double> g;
    double u_now = 0.0;
    double u_prime_now = 0.0;
    double time = 0.0;
};

struct GalerkinTrajectory {
    std::vector<LiftedState> states;
    /// <x^2, phi_k>, used by the reconstruction.
    std::vector<double> theta_coeffs;
};

/// Integrates g_k' = -lambda_k g_k + H_k(t) with the exponential integrator,
/// H_k piecewise linear between control samples. Every time in `t_grid` must
/// be a control sample (GridError otherwise); states are returned at t_grid.
GalerkinTrajectory galerkin_solve(const spectral::EigenBasis& basis, const spectral::SpectralCoeffs& coeffs,
                                  const flatness::ControlSignal& control, std::span<const double> t_grid);

/// f(t, x) = sum_k g_k phi_k(x) + u x^2.
double galerkin_value(const spectral::EigenBasis& basis, const GalerkinTrajectory& traj, std::size_t i, double x);

/// ||f(t_i)|| of the reconstruction, from the modal coefficients.
double galerkin_norm(const GalerkinTrajectory& traj, std::size_t i);

/// Samples the reconstruction of state i on `mesh`.
GridState galerkin_on_mesh(const spectral::EigenBasis& basis, const GalerkinTrajectory& traj, std::size_t i,
                           std::span<const double> mesh);

/// x_i = (i/M)^{2/(2-alpha)}, i = 0..M.
std::vector<double> graded_mesh(double alpha, int cells);

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored. Throws SingularityError on a zero pivot.
std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                                      std::vector<double> rhs);

class FiniteVolumeSolver {
public:
    FiniteVolumeSolver(double alpha, std::vector<double> mesh);

    const std::vector<double>& mesh() const noexcept { return mesh_; }
    /// Lengths of the control volumes around nodes 0..M-1.
    const std::vector<double>& volumes() const noexcept { return volumes_; }

    /// Interface flux x_{i+1/2}^alpha (f_{i+1} - f_i) / (x_{i+1} - x_i), i = 0..M-1.
    std::vector<double> fluxes(std::span<const double> values) const;

    /// One Crank-Nicolson step of length dt; values[M] is replaced by u_next.
    void step(std::vector<double>& values, double dt, double u_next) const;

private:
    double alpha_;
    std::vector<double> mesh_;
    std::vector<double> volumes_;
    std::vector<double> conductance_;  // x_{i+1/2}^alpha / (x_{i+1} - x_i)
};

/// Steps along `t_grid` (every time a control sample) from f0 sampled on the
/// mesh, with f(t, 1) = u(t). Returns the states at `checkpoints` (each in
/// t_grid), or at every time of t_grid when `checkpoints` is empty.
std::vector<GridState> fv_solve(const spectral::ModelParams& params, const InitialDatum& f0,
                                const flatness::ControlSignal& control, std::span<const double> mesh,
                                std::span<const double> t_grid, std::span<const double> checkpoints = {});

/// Trapezoidal L2 norm on the state's mesh.
double l2_norm(const GridState& state);

/// Per-checkpoint error estimate of a fine run from a run with half the cells
/// and twice the step (second-order Richardson: |fine - coarse| / 3 at the
/// shared nodes).
std::vector<double> fv_error_estimate(std::span<const GridState> fine, std::span<const GridState> coarse);

struct CrossValidationReport {
    std::vector<double> times;
    std::vector<double> discrepancy;
    std::vector<double> threshold;
    bool passed = true;
};

/// Discrepancy || galerkin - fv || on the FV mesh at each checkpoint; passes
/// where it is at most max(1e-3, 5 * fv_error). `fv_error` may be empty.
CrossValidationReport cross_validate(std::span<const GridState> galerkin, std::span<const GridState> fv,
                                     std::span<const double> fv_error);

}  // namespace flatctl::simulator
