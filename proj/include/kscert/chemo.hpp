#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "kscert/errors.hpp"
#include "kscert/fft2d.hpp"
#include "kscert/fields.hpp"
#include "kscert/linalg.hpp"
#include "kscert/mesh.hpp"

namespace kscert {

// Discrete chemoattractant problem: find c_h in the continuous piecewise
// linear space with  (grad c_h, grad v) + (c_h, v) = (rho_tilde, v) for all
// test functions v, optionally with the mass matrix lumped.

// ---------------------------------------------------------------------------
// 1D
// ---------------------------------------------------------------------------

inline NodalField1D solve_chemoattractant(const NodalField1D& rho_tilde, bool lumping) {
    const Mesh1D& m = *rho_tilde.m;
    int N = m.N;
    std::vector<double> sub(N), diag(N), sup(N), rhs(N);
    for (int i = 0; i < N; ++i) {
        double dl = m.dmid[m.prev(i)], dr = m.dmid[i];
        double k_sub = -1.0 / dl, k_sup = -1.0 / dr, k_diag = 1.0 / dl + 1.0 / dr;
        if (lumping) {
            double mass = 0.5 * (dl + dr);
            sub[i] = k_sub;
            sup[i] = k_sup;
            diag[i] = k_diag + mass;
            rhs[i] = mass * rho_tilde.v[i];
        } else {
            sub[i] = k_sub + dl / 6.0;
            sup[i] = k_sup + dr / 6.0;
            diag[i] = k_diag + (dl + dr) / 3.0;
            rhs[i] = dl / 6.0 * rho_tilde.v[m.prev(i)] + (dl + dr) / 3.0 * rho_tilde.v[i] +
                     dr / 6.0 * rho_tilde.v[m.next(i)];
        }
    }
    NodalField1D c(m);
    c.v = solve_cyclic_tridiag(sub, diag, sup, rhs);
    return c;
}

// Upper bound for || c_h - c_exact ||_{H1} where c_exact solves the
// continuous elliptic problem with the same piecewise linear datum:
// element residual terms plus gradient jump terms, square-rooted.
inline double elliptic_estimator(const NodalField1D& c_h, const NodalField1D& rho_tilde) {
    if (c_h.m != rho_tilde.m) throw std::invalid_argument("mesh mismatch");
    const Mesh1D& m = *c_h.m;
    double s = 0.0;
    for (int i = 0; i < m.N; ++i) {
        double a = c_h.v[i] - rho_tilde.v[i];
        double b = c_h.v[m.next(i)] - rho_tilde.v[m.next(i)];
        double l2sq = m.dmid[i] / 3.0 * (a * a + a * b + b * b);
        s += m.dmid[i] * m.dmid[i] * l2sq;
    }
    for (int i = 0; i < m.N; ++i) {
        double jump = c_h.slope(i) - c_h.slope(m.prev(i));
        s += m.h[i] * jump * jump;
    }
    return std::sqrt(s);
}

// Gradient of c_h at every interface x_{i+1/2}; entry i sits between cells
// i and i+1 (wrapping).
inline std::vector<double> interface_gradients(const NodalField1D& c_h) {
    const Mesh1D& m = *c_h.m;
    std::vector<double> g(m.N);
    for (int i = 0; i < m.N; ++i) g[i] = (c_h.v[m.next(i)] - c_h.v[i]) / m.dmid[i];
    return g;
}

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

// 7-point operator K + M (consistent mass) or 5-point K + h^2 I (lumped)
// for the dual triangulation on a uniform grid.
struct ChemoOperator2D {
    const Mesh2D* m;
    bool lumping;
    double lateral, diagn, adiag;  // signed stencil coefficients

    ChemoOperator2D(const Mesh2D& mesh, bool lump) : m(&mesh), lumping(lump) {
        double h2 = mesh.h * mesh.h;
        if (lumping) {
            lateral = -1.0;
            adiag = 0.0;
            diagn = 4.0 + h2;
        } else {
            lateral = -1.0 + h2 / 12.0;
            adiag = h2 / 12.0;
            diagn = 4.0 + h2 / 2.0;
        }
    }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        int n = m->n;
        for (int k = 0; k < n; ++k) {
            int kp = (k + 1 < n) ? k + 1 : 0, km = (k > 0) ? k - 1 : n - 1;
            for (int j = 0; j < n; ++j) {
                int jp = (j + 1 < n) ? j + 1 : 0, jm = (j > 0) ? j - 1 : n - 1;
                double s = lateral * (x[k * n + jp] + x[k * n + jm] + x[kp * n + j] + x[km * n + j]);
                if (adiag != 0.0) s += adiag * (x[km * n + jp] + x[kp * n + jm]);
                y[k * n + j] = diagn * x[k * n + j] + s;
            }
        }
    }

    // Symmetric Gauss-Seidel preconditioner.
    void precondition(const std::vector<double>& r, std::vector<double>& z) const {
        int n = m->n;
        z.assign(r.size(), 0.0);
        auto sweep_row = [&](int k, int j) {
            int kp = (k + 1 < n) ? k + 1 : 0, km = (k > 0) ? k - 1 : n - 1;
            int jp = (j + 1 < n) ? j + 1 : 0, jm = (j > 0) ? j - 1 : n - 1;
            double s = lateral * (z[k * n + jp] + z[k * n + jm] + z[kp * n + j] + z[km * n + j]);
            if (adiag != 0.0) s += adiag * (z[km * n + jp] + z[kp * n + jm]);
            z[k * n + j] = (r[k * n + j] - s) / diagn;
        };
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) sweep_row(k, j);
        for (int k = n - 1; k >= 0; --k)
            for (int j = n - 1; j >= 0; --j) sweep_row(k, j);
    }
};

// Solver with cached FFT plans; reused across time steps.
class ChemoSolver2D {
  public:
    explicit ChemoSolver2D(const Mesh2D& mesh, double tol = 1e-12)
        : m_(&mesh), tol_(tol), fft_(std::make_unique<Fft2D>(mesh.n)) {}

    // Lumped mass: diagonal in Fourier space, solved by FFT.
    // Consistent mass: preconditioned CG on the 7-point system.
    NodalField2D solve(const NodalField2D& rho_tilde, bool lumping) const {
        const Mesh2D& m = *m_;
        NodalField2D c(m, Rep2D::P1Dual);
        double h2 = m.h * m.h;
        if (lumping) {
            fft_->solve_diagonal(rho_tilde.v, c.v, [h2](double lam) { return h2 / (lam + h2); });
            return c;
        }
        ChemoOperator2D op(m, false);
        // rhs = M * nodal values
        std::vector<double> rhs(m.N);
        {
            int n = m.n;
            const std::vector<double>& x = rho_tilde.v;
            for (int k = 0; k < n; ++k) {
                int kp = (k + 1 < n) ? k + 1 : 0, km = (k > 0) ? k - 1 : n - 1;
                for (int j = 0; j < n; ++j) {
                    int jp = (j + 1 < n) ? j + 1 : 0, jm = (j > 0) ? j - 1 : n - 1;
                    double lat = x[k * n + jp] + x[k * n + jm] + x[kp * n + j] + x[km * n + j];
                    double ad = x[km * n + jp] + x[kp * n + jm];
                    rhs[k * n + j] = h2 * (0.5 * x[k * n + j] + (lat + ad) / 12.0);
                }
            }
        }
        solve_cg(op, rhs, c.v, tol_, 20000);
        return c;
    }

    // Direct dense path for small meshes (cross-checks).
    NodalField2D solve_dense(const NodalField2D& rho_tilde, bool lumping) const {
        const Mesh2D& m = *m_;
        if (m.N > 4096) throw SolverError("dense chemo solve limited to n <= 64");
        ChemoOperator2D op(m, lumping);
        std::vector<double> A(static_cast<std::size_t>(m.N) * m.N, 0.0);
        std::vector<double> e(m.N, 0.0), col(m.N);
        for (int i = 0; i < m.N; ++i) {
            e[i] = 1.0;
            op.apply(e, col);
            for (int r = 0; r < m.N; ++r) A[static_cast<std::size_t>(r) * m.N + i] = col[r];
            e[i] = 0.0;
        }
        double h2 = m.h * m.h;
        std::vector<double> rhs(m.N);
        if (lumping) {
            for (int i = 0; i < m.N; ++i) rhs[i] = h2 * rho_tilde.v[i];
        } else {
            int n = m.n;
            const std::vector<double>& x = rho_tilde.v;
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j) {
                    int kp = (k + 1 < n) ? k + 1 : 0, km = (k > 0) ? k - 1 : n - 1;
                    int jp = (j + 1 < n) ? j + 1 : 0, jm = (j > 0) ? j - 1 : n - 1;
                    double lat = x[k * n + jp] + x[k * n + jm] + x[kp * n + j] + x[km * n + j];
                    double ad = x[km * n + jp] + x[kp * n + jm];
                    rhs[k * n + j] = h2 * (0.5 * x[k * n + j] + (lat + ad) / 12.0);
                }
        }
        DenseCholesky chol(A, m.N);
        NodalField2D c(m, Rep2D::P1Dual);
        c.v = chol.solve(rhs);
        return c;
    }

  private:
    const Mesh2D* m_;
    double tol_;
    std::unique_ptr<Fft2D> fft_;
};

// Element residuals plus edge jump terms of the dual triangulation.
inline double elliptic_estimator(const NodalField2D& c_h, const NodalField2D& rho_tilde) {
    if (c_h.m != rho_tilde.m) throw std::invalid_argument("mesh mismatch");
    if (c_h.rep != Rep2D::P1Dual || rho_tilde.rep != Rep2D::P1Dual)
        throw std::invalid_argument("estimator needs the P1 representation");
    const Mesh2D& m = *c_h.m;
    double h2 = m.h * m.h;
    double area = 0.5 * h2;
    auto tri_l2sq = [&](double a, double b, double c) {
        return area / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
    };
    double s = 0.0;
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            double d00 = c_h.at(j, k) - rho_tilde.at(j, k);
            double d10 = c_h.at(j + 1, k) - rho_tilde.at(j + 1, k);
            double d01 = c_h.at(j, k + 1) - rho_tilde.at(j, k + 1);
            double d11 = c_h.at(j + 1, k + 1) - rho_tilde.at(j + 1, k + 1);
            s += h2 * (tri_l2sq(d00, d10, d01) + tri_l2sq(d10, d11, d01));
        }
    for (const EdgeJump2D& e : broken_L2_jump(c_h)) s += m.h * e.length * e.jump * e.jump;
    return std::sqrt(s);
}

// Gradients at interface midpoints: gx at (x_{j+1/2}, y_k) between cells
// (j,k) and (j+1,k); gy at (x_j, y_{k+1/2}).  Both points lie on edges of
// the dual triangulation, so the tangential derivative is single-valued.
struct InterfaceGrads2D {
    std::vector<double> gx, gy;
};

inline InterfaceGrads2D interface_gradients(const NodalField2D& c_h) {
    if (c_h.rep != Rep2D::P1Dual) throw std::invalid_argument("need the P1 representation");
    const Mesh2D& m = *c_h.m;
    InterfaceGrads2D g;
    g.gx.resize(m.N);
    g.gy.resize(m.N);
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            g.gx[m.idx(j, k)] = (c_h.at(j + 1, k) - c_h.at(j, k)) / m.h;
            g.gy[m.idx(j, k)] = (c_h.at(j, k + 1) - c_h.at(j, k)) / m.h;
        }
    return g;
}

}  // namespace kscert
