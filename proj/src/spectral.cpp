#include "nolab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nolab {

namespace {

constexpr double kPi = std::numbers::pi;

// Twiddle factors e^{-i 2 pi j / n}, j = 0..n/2-1, cached per size.
const std::vector<std::complex<double>>& twiddles(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<std::vector<std::complex<double>>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) {
        slot = std::make_unique<std::vector<std::complex<double>>>(n / 2);
        for (int j = 0; j < n / 2; ++j) {
            const double a = -2.0 * kPi * j / n;
            (*slot)[j] = {std::cos(a), std::sin(a)};
        }
    }
    return *slot;
}

int signed_wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }

// Unit-norm DCT-II basis matrix B[k][i] = s_k cos(pi k (i+1/2) / n),
// s_0 = sqrt(1/n), s_k = sqrt(2/n). Rows are orthonormal in R^n.
const std::vector<double>& dct_basis(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) {
        slot = std::make_unique<std::vector<double>>(std::size_t(n) * n);
        for (int k = 0; k < n; ++k) {
            const double s = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            for (int i = 0; i < n; ++i) {
                (*slot)[std::size_t(k) * n + i] = s * std::cos(kPi * k * (i + 0.5) / n);
            }
        }
    }
    return *slot;
}

}  // namespace

SpectralField::SpectralField(const Grid2D& g, int c)
    : grid(g), channels(c), coeffs(g.num_points() * std::size_t(c)) {}

std::complex<double>& SpectralField::at_mode(int kx, int ky, int ch) {
    const int i = kx >= 0 ? kx : kx + grid.nx;
    const int j = ky >= 0 ? ky : ky + grid.ny;
    return coeffs[idx(i, j, ch)];
}

std::complex<double> SpectralField::at_mode(int kx, int ky, int ch) const {
    const int i = kx >= 0 ? kx : kx + grid.nx;
    const int j = ky >= 0 ? ky : ky + grid.ny;
    return coeffs[idx(i, j, ch)];
}

void fft_inplace(std::complex<double>* x, int n, bool inverse) {
    if (n <= 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: length must be a power of two");
    // Bit-reversal permutation.
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const auto& tw = twiddles(n);
    for (int len = 2; len <= n; len <<= 1) {
        const int stride = n / len;
        for (int start = 0; start < n; start += len) {
            for (int j = 0; j < len / 2; ++j) {
                std::complex<double> w = tw[std::size_t(j) * stride];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = x[start + j];
                const std::complex<double> v = x[start + j + len / 2] * w;
                x[start + j] = u + v;
                x[start + j + len / 2] = u - v;
            }
        }
    }
}

void fft2_inplace(std::complex<double>* a, int nx, int ny, bool inverse) {
    for (int j = 0; j < ny; ++j) fft_inplace(a + std::size_t(j) * nx, nx, inverse);
    std::vector<std::complex<double>> col(ny);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) col[j] = a[std::size_t(j) * nx + i];
        fft_inplace(col.data(), ny, inverse);
        for (int j = 0; j < ny; ++j) a[std::size_t(j) * nx + i] = col[j];
    }
    if (!inverse) {
        const double scale = 1.0 / (double(nx) * double(ny));
        const std::size_t total = std::size_t(nx) * ny;
        for (std::size_t k = 0; k < total; ++k) a[k] *= scale;
    }
}

namespace {

// Samples live at cell centers x_i = (i + 1/2) h, so the analytic convention
// u_hat_k = (1/N) sum u e^{-i 2 pi k x / L} carries a half-cell phase per axis
// relative to the index-based DFT.
std::complex<double> center_phase(int k, int n) {
    const double a = -kPi * double(k) / double(n);
    return {std::cos(a), std::sin(a)};
}

}  // namespace

SpectralField fft2(const Field& f) {
    SpectralField out(f.grid, f.channels);
    const int nx = f.grid.nx, ny = f.grid.ny;
    std::vector<std::complex<double>> buf(f.grid.num_points());
    for (int ch = 0; ch < f.channels; ++ch) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                buf[std::size_t(j) * nx + i] = f.at(i, j, ch);
        fft2_inplace(buf.data(), nx, ny, false);
        for (int j = 0; j < ny; ++j) {
            const auto py = center_phase(signed_wavenumber(j, ny), ny);
            for (int i = 0; i < nx; ++i) {
                const auto px = center_phase(signed_wavenumber(i, nx), nx);
                out.at(i, j, ch) = buf[std::size_t(j) * nx + i] * px * py;
            }
        }
    }
    return out;
}

Field ifft2(const SpectralField& s) {
    Field out(s.grid, s.channels);
    const int nx = s.grid.nx, ny = s.grid.ny;
    std::vector<std::complex<double>> buf(s.grid.num_points());
    double max_imag = 0.0;
    for (int ch = 0; ch < s.channels; ++ch) {
        for (int j = 0; j < ny; ++j) {
            const auto py = std::conj(center_phase(signed_wavenumber(j, ny), ny));
            for (int i = 0; i < nx; ++i) {
                const auto px = std::conj(center_phase(signed_wavenumber(i, nx), nx));
                buf[std::size_t(j) * nx + i] = s.at(i, j, ch) * px * py;
            }
        }
        fft2_inplace(buf.data(), nx, ny, true);
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const auto v = buf[std::size_t(j) * nx + i];
                max_imag = std::max(max_imag, std::abs(v.imag()));
                out.at(i, j, ch) = v.real();
            }
        }
    }
    if (max_imag > 1e-10) {
        throw std::runtime_error("ifft2: non-real spectrum (imaginary residue " +
                                 std::to_string(max_imag) + ")");
    }
    return out;
}

Field truncate_modes(const Field& f, int K) {
    const int kmax = std::min(f.grid.nx, f.grid.ny) / 2 - 1;
    if (K < 0 || K > kmax) {
        throw std::invalid_argument("truncate_modes: K out of range [0, " +
                                    std::to_string(kmax) + "]");
    }
    // The largest legal K retains every mode the grid resolves (the Nyquist
    // lines included), making the truncation an exact no-op.
    if (K == kmax) return f;
    SpectralField s = fft2(f);
    for (int j = 0; j < f.grid.ny; ++j) {
        const int ky = signed_wavenumber(j, f.grid.ny);
        for (int i = 0; i < f.grid.nx; ++i) {
            const int kx = signed_wavenumber(i, f.grid.nx);
            if (std::max(std::abs(kx), std::abs(ky)) > K) {
                for (int ch = 0; ch < f.channels; ++ch) s.at(i, j, ch) = 0.0;
            }
        }
    }
    return ifft2(s);
}

namespace {

// out[k][...] = sum_i B[k][i] * in[i][...] along one axis; forward uses the
// basis matrix, inverse its transpose.
void dct_axis(const double* in, double* out, int n, int count, int stride, const double* B,
              bool inverse) {
    std::vector<double> tmp_in(n), tmp_out(n);
    for (int c = 0; c < count; ++c) {
        const double* src = in + (stride == 1 ? std::size_t(c) * n : std::size_t(c));
        double* dst = out + (stride == 1 ? std::size_t(c) * n : std::size_t(c));
        for (int i = 0; i < n; ++i) tmp_in[i] = src[std::size_t(i) * stride];
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            if (!inverse) {
                const double* row = B + std::size_t(k) * n;
                for (int i = 0; i < n; ++i) s += row[i] * tmp_in[i];
            } else {
                for (int i = 0; i < n; ++i) s += B[std::size_t(i) * n + k] * tmp_in[i];
            }
            tmp_out[k] = s;
        }
        for (int k = 0; k < n; ++k) dst[std::size_t(k) * stride] = tmp_out[k];
    }
}

Field dct2_impl(const Field& f, bool inverse) {
    const int nx = f.grid.nx, ny = f.grid.ny;
    const auto& Bx = dct_basis(nx);
    const auto& By = dct_basis(ny);
    Field out(f.grid, f.channels);
    std::vector<double> plane(f.grid.num_points()), tmp(f.grid.num_points());
    for (int ch = 0; ch < f.channels; ++ch) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                plane[std::size_t(j) * nx + i] = f.at(i, j, ch);
        // Rows (x axis): contiguous, stride 1; then columns (y axis), stride nx.
        dct_axis(plane.data(), tmp.data(), nx, ny, 1, Bx.data(), inverse);
        dct_axis(tmp.data(), plane.data(), ny, nx, nx, By.data(), inverse);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out.at(i, j, ch) = plane[std::size_t(j) * nx + i];
    }
    return out;
}

}  // namespace

Field dct2(const Field& f) { return dct2_impl(f, false); }

Field idct2(const Field& c) { return dct2_impl(c, true); }

Field spectral_laplacian(const Field& f) {
    SpectralField s = fft2(f);
    const int nx = f.grid.nx, ny = f.grid.ny;
    for (int j = 0; j < ny; ++j) {
        const double ky = 2.0 * kPi * signed_wavenumber(j, ny) / f.grid.ly;
        for (int i = 0; i < nx; ++i) {
            const double kx = 2.0 * kPi * signed_wavenumber(i, nx) / f.grid.lx;
            const double factor = -(kx * kx + ky * ky);
            for (int ch = 0; ch < f.channels; ++ch) s.at(i, j, ch) *= factor;
        }
    }
    return ifft2(s);
}

Field inverse_laplacian(const Field& f) {
    SpectralField s = fft2(f);
    for (int ch = 0; ch < f.channels; ++ch) {
        if (std::abs(s.at(0, 0, ch)) > 1e-10) {
            throw std::invalid_argument("inverse_laplacian: input is not mean-zero");
        }
    }
    const int nx = f.grid.nx, ny = f.grid.ny;
    for (int j = 0; j < ny; ++j) {
        const double ky = 2.0 * kPi * signed_wavenumber(j, ny) / f.grid.ly;
        for (int i = 0; i < nx; ++i) {
            const double kx = 2.0 * kPi * signed_wavenumber(i, nx) / f.grid.lx;
            const double k2 = kx * kx + ky * ky;
            for (int ch = 0; ch < f.channels; ++ch) {
                s.at(i, j, ch) = (k2 == 0.0) ? 0.0 : s.at(i, j, ch) / (-k2);
            }
        }
    }
    return ifft2(s);
}

}  // namespace nolab
