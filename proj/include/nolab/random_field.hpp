#pragma once

#include <cstdint>
#include <vector>

#include "nolab/field.hpp"

namespace nolab {

enum class GrfBasis { NeumannCosine, PeriodicFourier };

/// Gaussian random field prior with covariance (-Laplacian + tau_sq)^(-power).
///
/// Eigenpairs:
///   neumann-cosine:   e_k = L2-orthonormal cosines,
///                     lambda_k = (pi^2 (k1^2/lx^2 + k2^2/ly^2) + tau_sq)^(-power)
///   periodic-fourier: real/imaginary Fourier pairs,
///                     lambda_k = (4 pi^2 (k1^2/lx^2 + k2^2/ly^2) + tau_sq)^(-power)
struct GrfSpec {
    double tau_sq = 9.0;
    double power = 2.0;
    GrfBasis basis = GrfBasis::NeumannCosine;
    std::uint64_t seed = 0;
    /// When false the k = 0 mode is skipped, producing mean-zero samples
    /// (used for the periodic vorticity prior).
    bool include_mean_mode = true;

    void validate() const;

    /// Covariance eigenvalue of mode (k1, k2) on the given grid extents.
    double eigenvalue(int k1, int k2, const Grid2D& grid) const;
};

/// Draws one sample; bit-identical for identical (spec.seed, index).
Field sample_grf_one(const GrfSpec& spec, const Grid2D& grid, std::uint64_t index);

std::vector<Field> sample_grf(const GrfSpec& spec, const Grid2D& grid, int n);

/// Helmholtz wave-speed map c(x) = 20 + tanh(g(x)); output in (19, 21).
Field transform_helmholtz(const Field& g);

/// Piecewise-constant Darcy permeability: 4 where g <= 0, 12 where g > 0.
Field transform_darcy_pc(const Field& g);

/// Log-normal Darcy permeability exp(g).
Field transform_darcy_lognormal(const Field& g);

}  // namespace nolab
