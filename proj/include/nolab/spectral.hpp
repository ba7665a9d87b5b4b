#pragma once

#include <complex>
#include <vector>

#include "nolab/field.hpp"

namespace nolab {

/// Fourier coefficients of a Field, same layout as Field but complex.
///
/// The entry at array position (i, j) belongs to the integer wavenumber
///   kx = i          for i <  nx/2
///   kx = i - nx     for i >= nx/2      (natural DFT order, no fftshift)
/// and analogously ky. The forward transform carries the 1/(nx*ny) factor,
/// so coeff at k = 0 equals the spatial mean of the originating Field.
struct SpectralField {
    Grid2D grid;
    int channels = 1;
    std::vector<std::complex<double>> coeffs;

    SpectralField() = default;
    SpectralField(const Grid2D& g, int c);

    std::size_t idx(int i, int j, int ch) const {
        return (std::size_t(j) * grid.nx + i) * channels + ch;
    }
    std::complex<double>& at(int i, int j, int ch = 0) { return coeffs[idx(i, j, ch)]; }
    std::complex<double> at(int i, int j, int ch = 0) const { return coeffs[idx(i, j, ch)]; }

    /// Coefficient addressed by signed wavenumber (kx, ky).
    std::complex<double>& at_mode(int kx, int ky, int ch = 0);
    std::complex<double> at_mode(int kx, int ky, int ch = 0) const;
};

/// In-place radix-2 FFT of a contiguous complex signal; n must be a power
/// of two. inverse=false computes sum x_n e^{-i 2 pi k n / n} (no scaling),
/// inverse=true the conjugate sum (no scaling).
void fft_inplace(std::complex<double>* x, int n, bool inverse);

/// In-place 2-D transform of a row-major [ny][nx] complex plane. The forward
/// direction applies the 1/(nx*ny) normalization, the inverse none, matching
/// the SpectralField convention.
void fft2_inplace(std::complex<double>* plane, int nx, int ny, bool inverse);

SpectralField fft2(const Field& f);

/// Inverse of fft2. Throws "non-real spectrum" if the imaginary residue of
/// the reconstruction exceeds 1e-10 in absolute value.
Field ifft2(const SpectralField& s);

/// Zeroes every Fourier coefficient with |k|_inf > K and transforms back.
/// Linear, idempotent, mean-preserving. Requires K <= min(nx,ny)/2 - 1.
Field truncate_modes(const Field& f, int K);

/// Orthonormal type-II cosine transform per axis (the natural transform for
/// cell-centered samples). Coefficients are returned as a Field on the same
/// grid, entry (i, j) holding cosine mode (kx = i, ky = j).
///
/// Normalization: the basis vectors have unit discrete norm, so the (0,0)
/// coefficient equals mean(f) * sqrt(nx*ny).
Field dct2(const Field& f);

/// Inverse of dct2 (exact round trip up to rounding).
Field idct2(const Field& c);

/// Periodic Laplacian: multiplies coefficients by -|2 pi k / L|^2.
Field spectral_laplacian(const Field& f);

/// Solves Laplacian(u) = f for mean-zero f (periodic), fixing mean(u) = 0.
/// Throws if |mean(f)| > 1e-10.
Field inverse_laplacian(const Field& f);

}  // namespace nolab
