#include "nolab/field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nolab {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid2D::Grid2D(int nx_, int ny_, double lx_, double ly_)
    : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    if (nx < 8 || ny < 8 || !is_pow2(nx) || !is_pow2(ny)) {
        throw std::invalid_argument("Grid2D: nx, ny must be powers of two >= 8, got " +
                                    std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (!(lx > 0.0) || !(ly > 0.0)) {
        throw std::invalid_argument("Grid2D: extents must be positive");
    }
}

Field::Field(const Grid2D& g, int c, double fill)
    : grid(g), channels(c), data(g.num_points() * std::size_t(c), fill) {
    if (c < 1) throw std::invalid_argument("Field: channel count must be >= 1");
}

void check_finite(const Field& f, const char* what) {
    for (double v : f.data) {
        if (!std::isfinite(v)) {
            throw std::runtime_error(std::string(what) + ": produced non-finite field entry");
        }
    }
}

Field coords_field(const Grid2D& grid) {
    Field out(grid, 2);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            out.at(i, j, 0) = grid.x(i);
            out.at(i, j, 1) = grid.y(j);
        }
    }
    return out;
}

std::vector<double> mean_over_domain(const Field& f) {
    std::vector<double> mean(f.channels, 0.0);
    const std::size_t n = f.grid.num_points();
    const double* p = f.data.data();
    for (std::size_t k = 0; k < n; ++k) {
        for (int ch = 0; ch < f.channels; ++ch) mean[ch] += p[k * f.channels + ch];
    }
    for (double& m : mean) m /= double(n);
    return mean;
}

double inner_product(const Field& f, const Field& g) {
    if (!f.same_shape(g)) {
        throw std::invalid_argument("inner_product: shape mismatch");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < f.data.size(); ++k) s += f.data[k] * g.data[k];
    return s * f.grid.cell_area();
}

double l2_norm(const Field& f) {
    double s = 0.0;
    for (double v : f.data) s += v * v;
    return std::sqrt(s * f.grid.cell_area());
}

double rel_l2_error(const Field& pred, const Field& truth) {
    if (!pred.same_shape(truth)) {
        throw std::invalid_argument("rel_l2_error: shape mismatch");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < pred.data.size(); ++k) {
        const double d = pred.data[k] - truth.data[k];
        num += d * d;
        den += truth.data[k] * truth.data[k];
    }
    if (den == 0.0) {
        throw std::invalid_argument("rel_l2_error: degenerate reference (zero-norm truth)");
    }
    return std::sqrt(num / den);
}

}  // namespace nolab
