#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nolab/pde.hpp"
#include "nolab/rng.hpp"

namespace nolab {

std::string task_name(Task t) {
    switch (t) {
        case Task::Helmholtz: return "helmholtz";
        case Task::DarcyPc: return "darcy-pc";
        case Task::DarcyLognormal: return "darcy-lognormal";
        case Task::Kolmogorov: return "kolmogorov";
    }
    throw std::logic_error("task_name: unknown task");
}

Task task_from_name(const std::string& name) {
    if (name == "helmholtz") return Task::Helmholtz;
    if (name == "darcy-pc") return Task::DarcyPc;
    if (name == "darcy-lognormal") return Task::DarcyLognormal;
    if (name == "kolmogorov") return Task::Kolmogorov;
    throw std::invalid_argument("unknown task: " + name);
}

void Dataset::validate() const {
    if (inputs.empty() || inputs.size() != outputs.size()) {
        throw std::invalid_argument("Dataset: inputs and outputs must be non-empty and paired");
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!(inputs[i].grid == grid) || !(outputs[i].grid == grid)) {
            throw std::invalid_argument("Dataset: all fields must share one grid");
        }
    }
}

GrfSpec default_grf(Task task, std::uint64_t seed) {
    GrfSpec spec;
    spec.tau_sq = 9.0;
    spec.power = 2.0;
    spec.seed = seed;
    if (task == Task::Kolmogorov) {
        spec.basis = GrfBasis::PeriodicFourier;
        spec.include_mean_mode = false;  // vorticity must be mean-zero
    } else {
        spec.basis = GrfBasis::NeumannCosine;
    }
    return spec;
}

Grid2D default_grid(Task task, int n) {
    if (task == Task::Kolmogorov) {
        const double two_pi = 2.0 * std::numbers::pi;
        return Grid2D(n, n, two_pi, two_pi);
    }
    return Grid2D(n, n);
}

namespace {

Dataset generate_kolmogorov(const Grid2D& grid, int n, std::uint64_t seed,
                            const TaskParams& p) {
    Dataset ds;
    ds.task = Task::Kolmogorov;
    ds.grid = grid;
    ds.grf = default_grf(Task::Kolmogorov, seed);
    ds.params = p;
    ds.seed = seed;

    const int per_traj = std::max(1, p.kolmogorov_pairs_per_traj);
    int produced = 0;
    for (std::uint64_t traj = 0; produced < n; ++traj) {
        Field omega = sample_grf_one(ds.grf, grid, traj);
        // Scale the initial condition to unit max vorticity so the burn-in
        // starts from a comparable state regardless of grid size.
        double amax = 0.0;
        for (double v : omega.data) amax = std::max(amax, std::abs(v));
        if (amax > 0.0) {
            for (double& v : omega.data) v /= amax;
        }
        omega = solve_kolmogorov(omega, p.kolmogorov_re, p.kolmogorov_forcing_n,
                                 p.kolmogorov_burn_in, p.kolmogorov_dt);
        for (int k = 0; k < per_traj && produced < n; ++k, ++produced) {
            Field next;
            try {
                next = solve_kolmogorov(omega, p.kolmogorov_re, p.kolmogorov_forcing_n,
                                        p.kolmogorov_h, p.kolmogorov_dt);
            } catch (const std::exception& e) {
                throw std::runtime_error("generate_dataset[kolmogorov] sample " +
                                         std::to_string(produced) + ": " + e.what());
            }
            ds.inputs.push_back(omega);
            ds.outputs.push_back(next);
            omega = ds.outputs.back();
        }
    }
    return ds;
}

}  // namespace

Dataset generate_dataset(Task task, const Grid2D& grid, int n, std::uint64_t seed,
                         const TaskParams& params) {
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    if (task == Task::Kolmogorov) return generate_kolmogorov(grid, n, seed, params);

    Dataset ds;
    ds.task = task;
    ds.grid = grid;
    ds.grf = default_grf(task, seed);
    ds.params = params;
    ds.seed = seed;
    for (int i = 0; i < n; ++i) {
        const Field g = sample_grf_one(ds.grf, grid, i);
        Field input, output;
        try {
            switch (task) {
                case Task::Helmholtz:
                    input = transform_helmholtz(g);
                    output = solve_helmholtz(input, params.helmholtz_omega, params.solver_tol);
                    break;
                case Task::DarcyPc:
                    input = transform_darcy_pc(g);
                    output = solve_darcy(input, params.solver_tol);
                    break;
                case Task::DarcyLognormal:
                    input = transform_darcy_lognormal(g);
                    output = solve_darcy(input, params.solver_tol);
                    break;
                default:
                    throw std::logic_error("unreachable");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("generate_dataset[" + task_name(task) + "] sample " +
                                     std::to_string(i) + ": " + e.what());
        }
        ds.inputs.push_back(std::move(input));
        ds.outputs.push_back(std::move(output));
    }
    return ds;
}

}  // namespace nolab
