#pragma once

// Small dense/matrix-free linear algebra used by the implicit stepper:
// LU with partial pivoting for the dense-direct path and BiCGStab with
// diagonal preconditioning for the matrix-free Krylov path.

#include <functional>
#include <vector>

namespace thermch {

struct DenseMatrix {
    int n = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    explicit DenseMatrix(int n_) : n(n_), a(static_cast<size_t>(n_) * n_, 0.0) {}
    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * n + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * n + c]; }
};

// Solves A x = b by LU with partial pivoting; A is consumed.
std::vector<double> lu_solve(DenseMatrix A, std::vector<double> b);

using MatVec = std::function<void(const std::vector<double>& v, std::vector<double>& out)>;

struct KrylovResult {
    std::vector<double> x;
    int iterations = 0;
    bool converged = false;
    double rel_residual = 0.0;
};

// Preconditioned BiCGStab for J x = b with left diagonal preconditioning
// (pass empty diag for the identity).  Stops at ||r|| <= tol_rel ||b||.
KrylovResult bicgstab(const MatVec& matvec, const std::vector<double>& b,
                      const std::vector<double>& precond_diag,
                      double tol_rel, int max_iter);

} // namespace thermch
