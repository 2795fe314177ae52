#include "thermch/linalg.hpp"

#include "thermch/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace thermch {

std::vector<double> lu_solve(DenseMatrix A, std::vector<double> b) {
    const int n = A.n;
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("lu_solve: size mismatch");
    std::vector<int> piv(n);
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(A(k, k));
        for (int r = k + 1; r < n; ++r) {
            const double v = std::abs(A(r, k));
            if (v > best) { best = v; p = r; }
        }
        if (best == 0.0) throw std::runtime_error("lu_solve: singular matrix");
        piv[k] = p;
        if (p != k)
            for (int c = 0; c < n; ++c) std::swap(A(k, c), A(p, c));
        const double d = A(k, k);
        for (int r = k + 1; r < n; ++r) {
            const double l = A(r, k) / d;
            A(r, k) = l;
            if (l == 0.0) continue;
            for (int c = k + 1; c < n; ++c) A(r, c) -= l * A(k, c);
        }
    }
    // The stored L reflects every row interchange, so apply all pivots to b
    // before the forward substitution.
    for (int k = 0; k < n; ++k) std::swap(b[k], b[piv[k]]);
    for (int k = 0; k < n; ++k)
        for (int r = k + 1; r < n; ++r) b[r] -= A(r, k) * b[k];
    for (int r = n - 1; r >= 0; --r) {
        for (int c = r + 1; c < n; ++c) b[r] -= A(r, c) * b[c];
        b[r] /= A(r, r);
    }
    return b;
}

namespace {
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return deterministic_sum(static_cast<int>(a.size()),
                             [&](int i) { return a[i] * b[i]; });
}
} // namespace

KrylovResult bicgstab(const MatVec& matvec, const std::vector<double>& b,
                      const std::vector<double>& precond_diag,
                      double tol_rel, int max_iter) {
    const int n = static_cast<int>(b.size());
    auto prec = [&](std::vector<double>& v) {
        if (precond_diag.empty()) return;
        for (int i = 0; i < n; ++i) v[i] /= precond_diag[i];
    };

    KrylovResult res;
    res.x.assign(n, 0.0);
    std::vector<double> r = b;
    prec(r);
    const double bnorm = std::sqrt(dot(r, r));
    if (bnorm == 0.0) { res.converged = true; return res; }

    std::vector<double> r0 = r, p = r, v(n), s(n), t(n), tmp(n);
    double rho = dot(r0, r);
    double rnorm = bnorm;

    for (int it = 0; it < max_iter; ++it) {
        matvec(p, tmp);
        v = tmp;
        prec(v);
        const double denom = dot(r0, v);
        if (denom == 0.0) break;
        const double a = rho / denom;
        for (int i = 0; i < n; ++i) s[i] = r[i] - a * v[i];
        const double snorm = std::sqrt(dot(s, s));
        if (snorm <= tol_rel * bnorm) {
            for (int i = 0; i < n; ++i) res.x[i] += a * p[i];
            res.iterations = it + 1;
            res.converged = true;
            res.rel_residual = snorm / bnorm;
            return res;
        }
        matvec(s, tmp);
        t = tmp;
        prec(t);
        const double tt = dot(t, t);
        if (tt == 0.0) break;
        const double w = dot(t, s) / tt;
        for (int i = 0; i < n; ++i) res.x[i] += a * p[i] + w * s[i];
        for (int i = 0; i < n; ++i) r[i] = s[i] - w * t[i];
        rnorm = std::sqrt(dot(r, r));
        res.iterations = it + 1;
        if (rnorm <= tol_rel * bnorm) {
            res.converged = true;
            res.rel_residual = rnorm / bnorm;
            return res;
        }
        const double rho_new = dot(r0, r);
        if (rho_new == 0.0 || w == 0.0) break;
        const double beta = (rho_new / rho) * (a / w);
        rho = rho_new;
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - w * v[i]);
    }
    res.rel_residual = rnorm / bnorm;
    return res;
}

} // namespace thermch
