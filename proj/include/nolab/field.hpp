#pragma once

#include <cstddef>
#include <vector>

namespace nolab {

/// Uniform rectangular grid. Samples live at cell centers:
/// x_i = (i + 1/2) * lx / nx, and analogously in y.
///
/// nx, ny must be powers of two and at least 8 (the spectral transforms
/// are radix-2 only). Extents default to the unit square.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double lx_ = 1.0, double ly_ = 1.0);

    double dx() const { return lx / nx; }
    double dy() const { return ly / ny; }
    double x(int i) const { return (i + 0.5) * lx / nx; }
    double y(int j) const { return (j + 0.5) * ly / ny; }
    double area() const { return lx * ly; }
    /// Quadrature weight of one cell (uniform midpoint rule).
    double cell_area() const { return dx() * dy(); }
    std::size_t num_points() const { return std::size_t(nx) * std::size_t(ny); }

    bool operator==(const Grid2D&) const = default;
};

/// Channel-valued function sampled on a Grid2D.
///
/// Storage is y-major, x-minor, channel-innermost:
///   data[(j*nx + i)*channels + ch]
/// so the channel vector at one grid point is contiguous.
struct Field {
    Grid2D grid;
    int channels = 1;
    std::vector<double> data;

    Field() = default;
    Field(const Grid2D& g, int c, double fill = 0.0);

    std::size_t idx(int i, int j, int ch) const {
        return (std::size_t(j) * grid.nx + i) * channels + ch;
    }
    double& at(int i, int j, int ch = 0) { return data[idx(i, j, ch)]; }
    double at(int i, int j, int ch = 0) const { return data[idx(i, j, ch)]; }
    std::size_t size() const { return data.size(); }

    bool same_shape(const Field& other) const {
        return grid == other.grid && channels == other.channels;
    }
};

/// Throws if any entry is NaN or Inf. `what` names the producing operation.
void check_finite(const Field& f, const char* what);

/// Two-channel field holding the cell-center coordinates (x in channel 0,
/// y in channel 1). This is the positional input of the lifting layer.
Field coords_field(const Grid2D& grid);

/// Per-channel arithmetic mean over all grid points. Under the uniform
/// cell-center measure this is the exact quadrature of the domain average.
std::vector<double> mean_over_domain(const Field& f);

/// L2(domain) inner product: cell_area * sum over points and channels of f*g.
double inner_product(const Field& f, const Field& g);

/// L2(domain) norm.
double l2_norm(const Field& f);

/// ||pred - truth||_2 / ||truth||_2. Throws on shape mismatch and on a
/// zero-norm reference ("degenerate reference").
double rel_l2_error(const Field& pred, const Field& truth);

}  // namespace nolab
