#include "nolab/random_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nolab/rng.hpp"
#include "nolab/spectral.hpp"

namespace nolab {

namespace {
constexpr double kPi = std::numbers::pi;
}

void GrfSpec::validate() const {
    if (tau_sq < 0.0) throw std::invalid_argument("GrfSpec: tau_sq must be >= 0");
    if (power < 1.0) {
        // 2*power > d/2 with d = 2 needs power > 1/2; we require power >= 1 so the
        // eigenvalue sequence is comfortably square-summable on the lattice.
        throw std::invalid_argument("GrfSpec: power must be >= 1");
    }
}

double GrfSpec::eigenvalue(int k1, int k2, const Grid2D& grid) const {
    const double q = double(k1) * k1 / (grid.lx * grid.lx) +
                     double(k2) * k2 / (grid.ly * grid.ly);
    const double base = (basis == GrfBasis::NeumannCosine) ? kPi * kPi * q
                                                           : 4.0 * kPi * kPi * q;
    return std::pow(base + tau_sq, -power);
}

namespace {

Field sample_neumann(const GrfSpec& spec, const Grid2D& grid, std::uint64_t index) {
    Field coeff(grid, 1);
    for (int k2 = 0; k2 < grid.ny; ++k2) {
        for (int k1 = 0; k1 < grid.nx; ++k1) {
            if (k1 == 0 && k2 == 0 && !spec.include_mean_mode) continue;
            const std::uint64_t mode = std::uint64_t(k2) * grid.nx + k1;
            const double xi = rng::gaussian(spec.seed, index, mode);
            coeff.at(k1, k2) = std::sqrt(spec.eigenvalue(k1, k2, grid)) * xi;
        }
    }
    // idct2 reconstructs in the unit-norm discrete basis; rescale so the
    // expansion is over L2(domain)-orthonormal cosines.
    Field out = idct2(coeff);
    const double scale = std::sqrt(double(grid.num_points()) / grid.area());
    for (double& v : out.data) v *= scale;
    return out;
}

Field sample_periodic(const GrfSpec& spec, const Grid2D& grid, std::uint64_t index) {
    SpectralField s(grid, 1);
    const int kx_max = grid.nx / 2 - 1;
    const int ky_max = grid.ny / 2 - 1;
    const double inv_sqrt_area = 1.0 / std::sqrt(grid.area());
    if (spec.include_mean_mode) {
        const double xi = rng::gaussian(spec.seed, index, 0);
        s.at_mode(0, 0) = std::sqrt(spec.eigenvalue(0, 0, grid)) * xi * inv_sqrt_area;
    }
    for (int k2 = 0; k2 <= ky_max; ++k2) {
        for (int k1 = -kx_max; k1 <= kx_max; ++k1) {
            const bool half_space = (k2 > 0) || (k2 == 0 && k1 > 0);
            if (!half_space) continue;
            const std::uint64_t mode = (std::uint64_t(k2 + grid.ny / 2) * grid.nx +
                                        std::uint64_t(k1 + grid.nx / 2));
            const double xi_c = rng::gaussian(spec.seed, index, 2 * mode);
            const double xi_s = rng::gaussian(spec.seed, index, 2 * mode + 1);
            const double amp = std::sqrt(spec.eigenvalue(k1, k2, grid) / 2.0) * inv_sqrt_area;
            const std::complex<double> c(amp * xi_c, -amp * xi_s);
            s.at_mode(k1, k2) = c;
            s.at_mode(-k1, -k2) = std::conj(c);
        }
    }
    return ifft2(s);
}

}  // namespace

Field sample_grf_one(const GrfSpec& spec, const Grid2D& grid, std::uint64_t index) {
    spec.validate();
    Field out = (spec.basis == GrfBasis::NeumannCosine) ? sample_neumann(spec, grid, index)
                                                        : sample_periodic(spec, grid, index);
    check_finite(out, "sample_grf");
    return out;
}

std::vector<Field> sample_grf(const GrfSpec& spec, const Grid2D& grid, int n) {
    std::vector<Field> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(sample_grf_one(spec, grid, i));
    return out;
}

Field transform_helmholtz(const Field& g) {
    Field out = g;
    for (double& v : out.data) v = 20.0 + std::tanh(v);
    return out;
}

Field transform_darcy_pc(const Field& g) {
    Field out = g;
    for (double& v : out.data) v = (v <= 0.0) ? 4.0 : 12.0;
    return out;
}

Field transform_darcy_lognormal(const Field& g) {
    Field out = g;
    for (double& v : out.data) v = std::exp(v);
    check_finite(out, "transform_darcy_lognormal");
    return out;
}

}  // namespace nolab
