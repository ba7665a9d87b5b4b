#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nolab/pde.hpp"
#include "nolab/spectral.hpp"

namespace nolab {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

struct Spectrum {
    int nx, ny;
    std::vector<cplx> a;  // row-major [ny][nx], natural DFT order

    Spectrum(int nx_, int ny_) : nx(nx_), ny(ny_), a(std::size_t(nx_) * ny_) {}
    cplx& at(int i, int j) { return a[std::size_t(j) * nx + i]; }
};

int wavenum(int i, int n) { return i < n / 2 ? i : i - n; }

void to_spectral(const Field& f, Spectrum& s) {
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) s.at(i, j) = f.at(i, j);
    fft2_inplace(s.a.data(), s.nx, s.ny, false);
}

void to_physical(const Spectrum& s, std::vector<double>& out) {
    std::vector<cplx> work = s.a;
    fft2_inplace(work.data(), s.nx, s.ny, true);
    out.resize(work.size());
    for (std::size_t k = 0; k < work.size(); ++k) out[k] = work[k].real();
}

void dealias(Spectrum& s) {
    const int cx = s.nx / 3, cy = s.ny / 3;
    for (int j = 0; j < s.ny; ++j) {
        const int ky = wavenum(j, s.ny);
        for (int i = 0; i < s.nx; ++i) {
            const int kx = wavenum(i, s.nx);
            if (std::abs(kx) > cx || std::abs(ky) > cy) s.at(i, j) = 0.0;
        }
    }
}

struct NsWorkspace {
    int nx, ny;
    std::vector<double> k2;  // |k|^2 per mode
    Spectrum f_hat;

    NsWorkspace(const Grid2D& grid, int forcing_n)
        : nx(grid.nx), ny(grid.ny), f_hat(grid.nx, grid.ny) {
        k2.resize(std::size_t(nx) * ny);
        for (int j = 0; j < ny; ++j) {
            const int ky = wavenum(j, ny);
            for (int i = 0; i < nx; ++i) {
                const int kx = wavenum(i, nx);
                k2[std::size_t(j) * nx + i] = double(kx) * kx + double(ky) * ky;
            }
        }
        if (forcing_n > 0) to_spectral(kolmogorov_forcing(grid, forcing_n), f_hat);
    }
};

// Nonlinear + forcing term N(omega) = -(u . grad omega) + f, dealiased.
// Also reports max |u| for the CFL check.
Spectrum nonlinear_term(const Spectrum& w_hat, const NsWorkspace& ws, double* max_vel) {
    const int nx = ws.nx, ny = ws.ny;
    Spectrum u_hat(nx, ny), v_hat(nx, ny), wx_hat(nx, ny), wy_hat(nx, ny);
    for (int j = 0; j < ny; ++j) {
        const int ky = wavenum(j, ny);
        for (int i = 0; i < nx; ++i) {
            const int kx = wavenum(i, nx);
            const double k2 = ws.k2[std::size_t(j) * nx + i];
            const cplx w = w_hat.a[std::size_t(j) * nx + i];
            const cplx p = (k2 == 0.0) ? cplx(0.0) : w / k2;  // Laplacian(psi) = -omega
            u_hat.at(i, j) = cplx(0.0, ky) * p;    // u = d(psi)/dy
            v_hat.at(i, j) = cplx(0.0, -kx) * p;   // v = -d(psi)/dx
            wx_hat.at(i, j) = cplx(0.0, kx) * w;
            wy_hat.at(i, j) = cplx(0.0, ky) * w;
        }
    }
    std::vector<double> u, v, wx, wy;
    to_physical(u_hat, u);
    to_physical(v_hat, v);
    to_physical(wx_hat, wx);
    to_physical(wy_hat, wy);

    double vmax = 0.0;
    Spectrum adv(nx, ny);
    for (std::size_t k = 0; k < u.size(); ++k) {
        vmax = std::max(vmax, std::max(std::abs(u[k]), std::abs(v[k])));
        adv.a[k] = u[k] * wx[k] + v[k] * wy[k];
    }
    if (max_vel) *max_vel = vmax;

    // adv currently holds the physical products; transform to spectral.
    fft2_inplace(adv.a.data(), nx, ny, false);

    for (std::size_t k = 0; k < adv.a.size(); ++k) adv.a[k] = -adv.a[k] + ws.f_hat.a[k];
    dealias(adv);
    adv.at(0, 0) = 0.0;  // advection and forcing are mean-free
    return adv;
}

}  // namespace

Field kolmogorov_forcing(const Grid2D& grid, int n) {
    Field f(grid, 1);
    for (int j = 0; j < grid.ny; ++j) {
        const double v = -double(n) * std::cos(n * grid.y(j));
        for (int i = 0; i < grid.nx; ++i) f.at(i, j) = v;
    }
    return f;
}

Field solve_kolmogorov(const Field& omega0, double re, int forcing_n, double t_final,
                       double dt) {
    const Grid2D& g = omega0.grid;
    if (omega0.channels != 1) throw std::invalid_argument("solve_kolmogorov: vorticity must be scalar");
    if (std::abs(g.lx - 2.0 * kPi) > 1e-12 || std::abs(g.ly - 2.0 * kPi) > 1e-12) {
        throw std::invalid_argument("solve_kolmogorov: grid must cover [0, 2 pi]^2");
    }
    if (!(re > 0.0) || !(dt > 0.0) || !(t_final >= 0.0)) {
        throw std::invalid_argument("solve_kolmogorov: re, dt must be positive");
    }
    {
        const double mean0 = mean_over_domain(omega0)[0];
        if (std::abs(mean0) > 1e-8) {
            throw std::invalid_argument("solve_kolmogorov: initial vorticity is not mean-zero");
        }
    }
    const double steps_real = t_final / dt;
    const long steps = std::lround(steps_real);
    if (std::abs(steps_real - double(steps)) > 1e-8) {
        throw std::invalid_argument("solve_kolmogorov: t_final must be an integer multiple of dt");
    }

    const int nx = g.nx, ny = g.ny;
    const double nu = 1.0 / re;
    NsWorkspace ws(g, forcing_n);

    Spectrum w(nx, ny);
    to_spectral(omega0, w);
    dealias(w);
    w.at(0, 0) = 0.0;

    // Dealiased modes never carry a nonlinear contribution, so their growth
    // factors can be zeroed instead of risking overflow.
    std::vector<double> e_full(ws.k2.size()), e_half(ws.k2.size());
    std::vector<double> einv_full(ws.k2.size()), einv_half(ws.k2.size());
    {
        const int cx = nx / 3, cy = ny / 3;
        for (int j = 0; j < ny; ++j) {
            const int ky = j < ny / 2 ? j : j - ny;
            for (int i = 0; i < nx; ++i) {
                const int kx = i < nx / 2 ? i : i - nx;
                const std::size_t k = std::size_t(j) * nx + i;
                e_full[k] = std::exp(-nu * ws.k2[k] * dt);
                e_half[k] = std::exp(-nu * ws.k2[k] * dt * 0.5);
                const bool kept = std::abs(kx) <= cx && std::abs(ky) <= cy;
                einv_full[k] = kept ? 1.0 / e_full[k] : 0.0;
                einv_half[k] = kept ? 1.0 / e_half[k] : 0.0;
            }
        }
    }

    const double cfl_dx = std::min(g.dx(), g.dy());
    for (long step = 0; step < steps; ++step) {
        double vmax = 0.0;
        const Spectrum n0 = nonlinear_term(w, ws, &vmax);
        if (vmax > 0.0 && dt > 0.5 * cfl_dx / vmax) {
            throw std::runtime_error("solve_kolmogorov: CFL violation at t = " +
                                     std::to_string(step * dt) + " (max |u| = " +
                                     std::to_string(vmax) + ")");
        }
        // SSP-RK3 on the integrating-factor variable v = exp(nu k^2 (t - t_n)) w.
        Spectrum s1(nx, ny), w1(nx, ny);
        for (std::size_t k = 0; k < w.a.size(); ++k) {
            s1.a[k] = w.a[k] + dt * n0.a[k];
            w1.a[k] = e_full[k] * s1.a[k];
        }
        const Spectrum n1 = nonlinear_term(w1, ws, nullptr);
        Spectrum s2(nx, ny), w2(nx, ny);
        for (std::size_t k = 0; k < w.a.size(); ++k) {
            s2.a[k] = 0.75 * w.a[k] + 0.25 * (s1.a[k] + dt * n1.a[k] * einv_full[k]);
            w2.a[k] = e_half[k] * s2.a[k];
        }
        const Spectrum n2 = nonlinear_term(w2, ws, nullptr);
        for (std::size_t k = 0; k < w.a.size(); ++k) {
            const cplx s3 =
                (1.0 / 3.0) * w.a[k] + (2.0 / 3.0) * (s2.a[k] + dt * n2.a[k] * einv_half[k]);
            w.a[k] = e_full[k] * s3;
        }
        if (std::abs(w.at(0, 0)) > 1e-8) {
            throw std::runtime_error("solve_kolmogorov: mean vorticity drift");
        }
        w.at(0, 0) = 0.0;
    }

    std::vector<double> phys;
    to_physical(w, phys);
    Field out(g, 1);
    out.data = std::move(phys);
    check_finite(out, "solve_kolmogorov");
    return out;
}

}  // namespace nolab
