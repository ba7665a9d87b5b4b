#include "nolab/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nolab {

CgResult conjugate_gradient(const std::function<void(const double*, double*)>& apply,
                            const std::vector<double>& diag, const std::vector<double>& b,
                            double rel_tol, int max_iter) {
    const std::size_t n = b.size();
    std::vector<double> x(n, 0.0), r = b, z(n), p(n), ap(n);
    auto dot = [n](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += u[i] * v[i];
        return s;
    };
    const double b_norm = std::sqrt(dot(b, b));
    if (b_norm == 0.0) return {x, 0, 0.0};

    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        apply(p.data(), ap.data());
        const double alpha = rz / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double r_norm = std::sqrt(dot(r, r));
        if (r_norm <= rel_tol * b_norm) return {std::move(x), it, r_norm / b_norm};
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw std::runtime_error("conjugate_gradient: no convergence within " +
                             std::to_string(max_iter) + " iterations");
}

BandMatrix::BandMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
      ab_(std::size_t(ldab_) * n, 0.0), pivots_(n, 0) {}

double& BandMatrix::at(int row, int col) {
    // Entry (row, col) lives at ab_[kl + ku + row - col][col].
    const int r = kl_ + ku_ + row - col;
    if (r < kl_ || r >= ldab_) throw std::out_of_range("BandMatrix::at outside band");
    return ab_[std::size_t(col) * ldab_ + r];
}

double BandMatrix::at(int row, int col) const {
    const int r = kl_ + ku_ + row - col;
    if (r < 0 || r >= ldab_) return 0.0;
    return ab_[std::size_t(col) * ldab_ + r];
}

void BandMatrix::factor() {
    // Banded LU with partial pivoting (dgbtrf-style). Row interchanges fill
    // at most kl extra superdiagonals, reserved in ab_.
    double max_abs = 0.0;
    for (double v : ab_) max_abs = std::max(max_abs, std::abs(v));
    const double tiny = 1e-14 * std::max(max_abs, 1.0);

    auto entry = [this](int r, int c) -> double& {
        return ab_[std::size_t(c) * ldab_ + (kl_ + ku_ + r - c)];
    };

    for (int col = 0; col < n_; ++col) {
        const int last_row = std::min(n_ - 1, col + kl_);
        int piv = col;
        double piv_val = std::abs(entry(col, col));
        for (int r = col + 1; r <= last_row; ++r) {
            const double v = std::abs(entry(r, col));
            if (v > piv_val) {
                piv_val = v;
                piv = r;
            }
        }
        if (piv_val <= tiny) {
            throw std::runtime_error("BandMatrix::factor: near-singular matrix (pivot " +
                                     std::to_string(piv_val) + " at column " +
                                     std::to_string(col) + ")");
        }
        pivots_[col] = piv;
        const int last_col = std::min(n_ - 1, col + kl_ + ku_);
        if (piv != col) {
            for (int c = col; c <= last_col; ++c) std::swap(entry(col, c), entry(piv, c));
        }
        const double d = entry(col, col);
        for (int r = col + 1; r <= last_row; ++r) {
            const double m = entry(r, col) / d;
            entry(r, col) = m;
            for (int c = col + 1; c <= last_col; ++c) entry(r, c) -= m * entry(col, c);
        }
    }
    factored_ = true;
}

std::vector<double> BandMatrix::solve(const std::vector<double>& b) const {
    if (!factored_) throw std::logic_error("BandMatrix::solve before factor()");
    auto entry = [this](int r, int c) -> double {
        return ab_[std::size_t(c) * ldab_ + (kl_ + ku_ + r - c)];
    };
    std::vector<double> x = b;
    for (int col = 0; col < n_; ++col) {
        if (pivots_[col] != col) std::swap(x[col], x[pivots_[col]]);
        const int last_row = std::min(n_ - 1, col + kl_);
        for (int r = col + 1; r <= last_row; ++r) x[r] -= entry(r, col) * x[col];
    }
    for (int row = n_ - 1; row >= 0; --row) {
        const int last_col = std::min(n_ - 1, row + kl_ + ku_);
        double s = x[row];
        for (int c = row + 1; c <= last_col; ++c) s -= entry(row, c) * x[c];
        x[row] = s / entry(row, row);
    }
    return x;
}

}  // namespace nolab
