#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kscert/errors.hpp"

namespace kscert {

// Tridiagonal solve (Thomas).  a = sub, b = diag, c = super; overwrites x.
inline void solve_tridiag(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                          std::vector<double> d, std::vector<double>& x) {
    std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    x.assign(n, 0.0);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
}

// Periodic tridiagonal system: a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i],
// indices mod n.  Sherman-Morrison on top of the Thomas sweep.
inline std::vector<double> solve_cyclic_tridiag(const std::vector<double>& a,
                                                const std::vector<double>& b,
                                                const std::vector<double>& c,
                                                const std::vector<double>& d) {
    std::size_t n = b.size();
    if (n < 3) throw SolverError("cyclic tridiagonal needs n >= 3");
    double gamma = -b[0];
    std::vector<double> bb = b;
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - a[0] * c[n - 1] / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    std::vector<double> y, z;
    solve_tridiag(a, bb, c, d, y);
    solve_tridiag(a, bb, c, u, z);
    double fact = (y[0] + a[0] * y[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) y[i] -= fact * z[i];
    return y;
}

// Dense SPD Cholesky solve, for small cross-check systems.
struct DenseCholesky {
    int n = 0;
    std::vector<double> L;  // row-major lower triangle

    explicit DenseCholesky(const std::vector<double>& A, int n_) : n(n_), L(A) {
        for (int j = 0; j < n; ++j) {
            double s = L[j * n + j];
            for (int k = 0; k < j; ++k) s -= L[j * n + k] * L[j * n + k];
            if (s <= 0.0) throw SolverError("matrix not positive definite");
            double diag = std::sqrt(s);
            L[j * n + j] = diag;
            for (int i = j + 1; i < n; ++i) {
                double t = L[i * n + j];
                for (int k = 0; k < j; ++k) t -= L[i * n + k] * L[j * n + k];
                L[i * n + j] = t / diag;
            }
        }
    }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            double s = rhs[i];
            for (int k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
            y[i] = s / L[i * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int k = i + 1; k < n; ++k) s -= L[k * n + i] * y[k];
            y[i] = s / L[i * n + i];
        }
        return y;
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct CgResult {
    int iterations = 0;
    double residual = 0.0;
};

// Preconditioned conjugate gradients.  Op must provide apply(x, y) and
// precondition(r, z); both may assume distinct argument vectors.
template <class Op>
CgResult solve_cg(const Op& op, const std::vector<double>& b, std::vector<double>& x,
                  double rel_tol, int max_iter) {
    std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), q(n);
    double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0};
    }
    if (x.size() != n) x.assign(n, 0.0);
    op.apply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    double rnorm = norm2(r);
    if (rnorm <= rel_tol * bnorm) return {0, rnorm};
    op.precondition(r, z);
    p = z;
    double rz = dot(r, z);
    int it = 0;
    for (; it < max_iter; ++it) {
        op.apply(p, q);
        double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = norm2(r);
        if (rnorm <= rel_tol * bnorm) return {it + 1, rnorm};
        op.precondition(r, z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("cg did not converge: residual " + std::to_string(rnorm) + " after " +
                      std::to_string(max_iter) + " iterations");
}

}  // namespace kscert
