#include <cmath>
#include <stdexcept>

#include "nolab/linsolve.hpp"
#include "nolab/pde.hpp"

namespace nolab {

namespace {

// Top-edge Neumann flux du/dn = 1 on 0.35 <= x <= 0.65.
double top_flux(double x) { return (x >= 0.35 && x <= 0.65) ? 1.0 : 0.0; }

}  // namespace

Field solve_helmholtz(const Field& c, double omega, double tol, double flux_scale) {
    if (c.channels != 1) throw std::invalid_argument("solve_helmholtz: wave speed must be scalar");
    for (double v : c.data) {
        if (!(v > 0.0)) throw std::invalid_argument("solve_helmholtz: wave speed must be positive");
    }
    const Grid2D& g = c.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.dx(), hy = g.dy();
    const int n = nx * ny;
    auto id = [nx](int i, int j) { return j * nx + i; };

    // 5-point stencil, cell-centered. Neumann ghosts eliminate to a one-sided
    // coefficient drop; the inhomogeneous top flux lands in the right side.
    BandMatrix A(n, nx, nx);
    std::vector<double> b(n, 0.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int k = id(i, j);
            double diag = -omega * omega / (c.at(i, j) * c.at(i, j));
            if (i > 0) {
                diag += 1.0 / (hx * hx);
                A.at(k, id(i - 1, j)) = -1.0 / (hx * hx);
            }
            if (i < nx - 1) {
                diag += 1.0 / (hx * hx);
                A.at(k, id(i + 1, j)) = -1.0 / (hx * hx);
            }
            if (j > 0) {
                diag += 1.0 / (hy * hy);
                A.at(k, id(i, j - 1)) = -1.0 / (hy * hy);
            }
            if (j < ny - 1) {
                diag += 1.0 / (hy * hy);
                A.at(k, id(i, j + 1)) = -1.0 / (hy * hy);
            } else {
                b[k] = flux_scale * top_flux(g.x(i)) / hy;
            }
            A.at(k, k) = diag;
        }
    }

    std::vector<double> x;
    try {
        A.factor();
        x = A.solve(b);
    } catch (const std::runtime_error&) {
        throw std::runtime_error(
            "solve_helmholtz: resonant frequency (near-singular discrete operator); "
            "perturb omega");
    }

    // Residual check with an independent stencil application.
    double rn = 0.0, bn = 0.0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int k = id(i, j);
            double s = -omega * omega / (c.at(i, j) * c.at(i, j)) * x[k];
            if (i > 0) s += (x[k] - x[id(i - 1, j)]) / (hx * hx);
            if (i < nx - 1) s += (x[k] - x[id(i + 1, j)]) / (hx * hx);
            if (j > 0) s += (x[k] - x[id(i, j - 1)]) / (hy * hy);
            if (j < ny - 1) s += (x[k] - x[id(i, j + 1)]) / (hy * hy);
            const double r = s - b[k];
            rn += r * r;
            bn += b[k] * b[k];
        }
    }
    if (!(std::sqrt(rn) <= tol * std::sqrt(bn))) {
        throw std::runtime_error(
            "solve_helmholtz: resonant frequency (residual stagnation); perturb omega");
    }

    Field u(g, 1);
    u.data = std::move(x);
    check_finite(u, "solve_helmholtz");
    return u;
}

}  // namespace nolab
