#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nolab/field.hpp"
#include "nolab/random_field.hpp"

namespace nolab {

/// Supervised operator-learning task.
enum class Task { Helmholtz, DarcyPc, DarcyLognormal, Kolmogorov };

std::string task_name(Task t);
Task task_from_name(const std::string& name);

/// Tunables a task needs beyond grid/count/seed. Defaults are the desk-scale
/// settings; paper-scale values can be set through the CLI config.
struct TaskParams {
    double helmholtz_omega = 15.0;
    double solver_tol = 1e-8;
    double kolmogorov_re = 40.0;
    int kolmogorov_forcing_n = 4;
    double kolmogorov_h = 0.1;      // time gap between input and output vorticity
    double kolmogorov_dt = 0.005;
    double kolmogorov_burn_in = 20.0;
    int kolmogorov_pairs_per_traj = 16;
};

/// Paired input/output Fields plus the generation recipe.
struct Dataset {
    std::vector<Field> inputs;
    std::vector<Field> outputs;
    Task task = Task::DarcyPc;
    Grid2D grid;
    GrfSpec grf;
    TaskParams params;
    std::uint64_t seed = 0;

    std::size_t size() const { return inputs.size(); }
    void validate() const;
};

/// -div(a grad u) = 1 on the grid rectangle, homogeneous Dirichlet walls.
/// Finite volume with harmonic-mean face coefficients; conjugate gradient to
/// relative residual <= tol. Throws on non-positive a or non-convergence.
Field solve_darcy(const Field& a, double tol);

/// (-Laplacian - omega^2 / c^2) u = 0 with Neumann walls; inhomogeneous flux
/// du/dn = flux_scale * 1_{0.35 <= x <= 0.65} on the top edge. Direct banded
/// solve; a near-singular discrete operator raises a "resonant frequency"
/// error.
Field solve_helmholtz(const Field& c, double omega, double tol, double flux_scale = 1.0);

/// Pseudo-spectral vorticity solver for forced 2-D Navier-Stokes on the
/// periodic square [0, 2 pi]^2 (Kolmogorov flow, forcing sin(n y) x_hat whose
/// curl is -n cos(n y)). RK3 with an integrating factor for the viscous term,
/// 2/3-rule dealiasing. Set forcing_n = 0 for unforced decay.
Field solve_kolmogorov(const Field& omega0, double re, int forcing_n, double t_final,
                       double dt);

/// Vorticity forcing of the Kolmogorov flow, -n cos(n y), at cell centers.
Field kolmogorov_forcing(const Grid2D& grid, int n);

/// Generates n supervised pairs for the task; pair i depends only on
/// (seed, i) so regeneration is bit-exact.
Dataset generate_dataset(Task task, const Grid2D& grid, int n, std::uint64_t seed,
                         const TaskParams& params = {});

/// Default GRF prior for a task (tau_sq = 9, power = 2; basis and mean-mode
/// handling depend on the task).
GrfSpec default_grf(Task task, std::uint64_t seed);

/// Default grid for a task (unit square, or [0, 2 pi]^2 for Kolmogorov).
Grid2D default_grid(Task task, int n);

}  // namespace nolab
