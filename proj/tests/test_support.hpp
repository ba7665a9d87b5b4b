#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "nolab/field.hpp"
#include "nolab/rng.hpp"

namespace nolab::testing {

/// Compensated (Kahan) summation, the independent reduction oracle.
inline double kahan_sum(const std::vector<double>& v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

inline std::vector<double> kahan_mean(const Field& f) {
    std::vector<double> out(f.channels);
    const std::size_t n = f.grid.num_points();
    for (int ch = 0; ch < f.channels; ++ch) {
        std::vector<double> vals(n);
        for (std::size_t p = 0; p < n; ++p) vals[p] = f.data[p * f.channels + ch];
        out[ch] = kahan_sum(vals) / double(n);
    }
    return out;
}

inline double kahan_inner(const Field& f, const Field& g) {
    std::vector<double> prods(f.data.size());
    for (std::size_t k = 0; k < prods.size(); ++k) prods[k] = f.data[k] * g.data[k];
    return kahan_sum(prods) * f.grid.cell_area();
}

/// Analytic solution of -Laplacian(u) = 1 on the unit square with zero
/// Dirichlet walls, truncated double sine series.
inline double darcy_unit_series(double x, double y, int terms = 200) {
    const double pi = std::numbers::pi;
    double s = 0.0;
    for (int m = 1; m <= terms; m += 2) {
        for (int n = 1; n <= terms; n += 2) {
            const double a = 16.0 / (pi * pi * pi * pi * m * n * (double(m) * m + double(n) * n));
            s += a * std::sin(m * pi * x) * std::sin(n * pi * y);
        }
    }
    return s;
}

/// Field filled by a pointwise function of (x, y).
template <typename F>
Field field_of(const Grid2D& grid, F&& fn, int channels = 1) {
    Field out(grid, channels);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            for (int ch = 0; ch < channels; ++ch) out.at(i, j, ch) = fn(grid.x(i), grid.y(j), ch);
        }
    }
    return out;
}

/// Deterministic noise field.
inline Field random_field(const Grid2D& grid, int channels, std::uint64_t seed) {
    Field out(grid, channels);
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        out.data[k] = 2.0 * rng::uniform(seed, 7, k) - 1.0;
    }
    return out;
}

}  // namespace nolab::testing
