#pragma once

#include <functional>
#include <vector>

namespace nolab {

/// Jacobi-preconditioned conjugate gradient for SPD operators given as a
/// matvec callback. Returns the iteration count; throws on non-convergence.
struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double rel_residual = 0.0;
};

CgResult conjugate_gradient(const std::function<void(const double*, double*)>& apply,
                            const std::vector<double>& diag, const std::vector<double>& b,
                            double rel_tol, int max_iter);

/// General banded matrix in LAPACK-style storage with room for fill-in from
/// partial pivoting. Solves symmetric-indefinite systems such as the
/// discrete Helmholtz operator exactly (up to rounding).
class BandMatrix {
public:
    BandMatrix(int n, int kl, int ku);

    int n() const { return n_; }
    double& at(int row, int col);
    double at(int row, int col) const;

    /// LU factorization with partial pivoting. Throws "near-singular" when a
    /// pivot falls below tiny * max|A|.
    void factor();

    /// Solves A x = b using the stored factorization.
    std::vector<double> solve(const std::vector<double>& b) const;

private:
    int n_, kl_, ku_, ldab_;
    bool factored_ = false;
    std::vector<double> ab_;     // ldab_ x n_, column-major bands
    std::vector<int> pivots_;
};

}  // namespace nolab
