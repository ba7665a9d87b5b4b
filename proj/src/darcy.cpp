#include <cmath>
#include <stdexcept>

#include "nolab/linsolve.hpp"
#include "nolab/pde.hpp"

namespace nolab {

namespace {

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

Field solve_darcy(const Field& a, double tol) {
    if (a.channels != 1) throw std::invalid_argument("solve_darcy: coefficient must be scalar");
    if (!(tol > 0.0) || tol > 1e-4) {
        throw std::invalid_argument("solve_darcy: tol must lie in (0, 1e-4]");
    }
    for (double v : a.data) {
        if (!(v > 0.0)) throw std::invalid_argument("solve_darcy: coefficient must be positive");
    }
    const Grid2D& g = a.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.dx(), hy = g.dy();
    const std::size_t n = g.num_points();

    // Face transmissibilities, cell-centered FV. A Dirichlet wall sits half a
    // cell from the first center, so the wall face uses the cell's own
    // coefficient over distance h/2.
    std::vector<double> tw(n), te(n), ts(n), tn(n), diag(n);
    auto id = [nx](int i, int j) { return std::size_t(j) * nx + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double aij = a.at(i, j);
            const double cx = hy / hx, cy = hx / hy;
            tw[id(i, j)] = (i > 0) ? harmonic(aij, a.at(i - 1, j)) * cx : 2.0 * aij * cx;
            te[id(i, j)] = (i < nx - 1) ? harmonic(aij, a.at(i + 1, j)) * cx : 2.0 * aij * cx;
            ts[id(i, j)] = (j > 0) ? harmonic(aij, a.at(i, j - 1)) * cy : 2.0 * aij * cy;
            tn[id(i, j)] = (j < ny - 1) ? harmonic(aij, a.at(i, j + 1)) * cy : 2.0 * aij * cy;
            diag[id(i, j)] = tw[id(i, j)] + te[id(i, j)] + ts[id(i, j)] + tn[id(i, j)];
        }
    }

    auto apply = [&](const double* x, double* y) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const std::size_t k = id(i, j);
                double s = diag[k] * x[k];
                if (i > 0) s -= tw[k] * x[id(i - 1, j)];
                if (i < nx - 1) s -= te[k] * x[id(i + 1, j)];
                if (j > 0) s -= ts[k] * x[id(i, j - 1)];
                if (j < ny - 1) s -= tn[k] * x[id(i, j + 1)];
                y[k] = s;
            }
        }
    };

    std::vector<double> b(n, hx * hy);  // unit source integrated over a cell
    CgResult res;
    try {
        res = conjugate_gradient(apply, diag, b, tol, 20 * nx * ny);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string("solve_darcy: ") + e.what());
    }

    Field u(g, 1);
    u.data = std::move(res.x);
    check_finite(u, "solve_darcy");
    return u;
}

}  // namespace nolab
