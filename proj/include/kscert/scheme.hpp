#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kscert/chemo.hpp"
#include "kscert/errors.hpp"
#include "kscert/fft2d.hpp"
#include "kscert/fields.hpp"
#include "kscert/linalg.hpp"

namespace kscert {

// (s)^(gamma-1) with the convention that the exponent 0 gives 1 (so the
// linear-diffusion coefficient is identically one).
inline double pow_gm1(double s, double gamma) {
    if (gamma == 1.0) return 1.0;
    return std::pow(s, gamma - 1.0);
}

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

// ---------------------------------------------------------------------------
// 1D
// ---------------------------------------------------------------------------

// Per-interface data; entry i lives at the interface between cells i and i+1.
struct FluxSet1D {
    std::vector<double> advective;  // upwind flux F_{i+1/2}
    std::vector<double> dcoef;      // gamma * (average density)^(gamma-1)
};

inline FluxSet1D advective_fluxes(const CellField1D& rho, const NodalField1D& c_h, double gamma) {
    if (rho.m != c_h.m) throw std::invalid_argument("mesh mismatch");
    const Mesh1D& m = *rho.m;
    FluxSet1D f;
    f.advective.resize(m.N);
    f.dcoef.resize(m.N);
    std::vector<double> g = interface_gradients(c_h);
    for (int i = 0; i < m.N; ++i) {
        int ip = m.next(i);
        f.advective[i] = pos_part(g[i]) * rho.v[i] - neg_part(g[i]) * rho.v[ip];
        f.dcoef[i] = gamma * pow_gm1(0.5 * (rho.v[i] + rho.v[ip]), gamma);
    }
    return f;
}

inline double cfl_max_dt(const CellField1D& rho, const NodalField1D& c_h) {
    const Mesh1D& m = *rho.m;
    std::vector<double> g = interface_gradients(c_h);
    double dt = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.N; ++i) {
        double a = std::abs(neg_part(g[m.prev(i)]) + pos_part(g[i]));
        if (a > 0.0) dt = std::min(dt, m.h[i] / a);
    }
    return dt;
}

// Implicit diffusion operator I - dt*A with frozen coefficients.  A is kept
// in sign-explicit form: off-diagonals oE, oW >= 0 and diagonal -(oE + oW).
struct StepOperator1D {
    const Mesh1D* m = nullptr;
    double dt = 0.0;
    std::vector<double> oE, oW, diagA;

    // (I - dt A) x; off-diagonal contributions are summed before the
    // diagonal one so that the ones vector maps to ones exactly.
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        int N = m->N;
        for (int i = 0; i < N; ++i) {
            double ax = oE[i] * x[m->next(i)] + oW[i] * x[m->prev(i)] + diagA[i] * x[i];
            y[i] = x[i] - dt * ax;
        }
    }
};

inline StepOperator1D build_step_operator(const CellField1D& rho_prev, double gamma, double dt) {
    const Mesh1D& m = *rho_prev.m;
    StepOperator1D op;
    op.m = &m;
    op.dt = dt;
    op.oE.resize(m.N);
    op.oW.resize(m.N);
    op.diagA.resize(m.N);
    std::vector<double> dcoef(m.N);
    for (int i = 0; i < m.N; ++i)
        dcoef[i] = gamma * pow_gm1(0.5 * (rho_prev.v[i] + rho_prev.v[m.next(i)]), gamma);
    for (int i = 0; i < m.N; ++i) {
        op.oE[i] = dcoef[i] / (m.dmid[i] * m.h[i]);
        op.oW[i] = dcoef[m.prev(i)] / (m.dmid[m.prev(i)] * m.h[i]);
        op.diagA[i] = -(op.oE[i] + op.oW[i]);
    }
    return op;
}

// Largest deviation from the M-matrix sign pattern of A (zero when clean):
// off-diagonals >= 0, diagonal <= 0, rows of A sum to zero by construction
// (checked bitwise through the ones vector).
template <class Op>
double assert_m_matrix(const Op& op) {
    double viol = 0.0;
    auto bad_pos = [&](double v) { viol = std::max(viol, -v); };  // wants v >= 0
    for (std::size_t i = 0; i < op.diagA.size(); ++i) {
        bad_pos(op.oE[i]);
        bad_pos(op.oW[i]);
        viol = std::max(viol, op.diagA[i] > 0.0 ? op.diagA[i] : 0.0);
    }
    std::vector<double> ones(op.diagA.size(), 1.0), y(op.diagA.size());
    op.apply(ones, y);
    for (double v : y) viol = std::max(viol, std::abs(v - 1.0));
    return viol;
}

namespace detail {

// Gauss-Seidel sweeps keep nonnegative iterates nonnegative for an M-matrix
// with nonnegative right-hand side; used to return the solve's iterate to
// the positive cone when roundoff produced stray negative entries.
template <class Op>
void gs_restore_nonneg(const Op& op, const std::vector<double>& b, std::vector<double>& x,
                       double tol_abs) {
    for (double& v : x)
        if (v < 0.0) v = 0.0;
    std::vector<double> y(x.size());
    for (int sweep = 0; sweep < 200; ++sweep) {
        op.gs_sweep_nonneg(b, x);
        op.apply(x, y);
        double res = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) res += (b[i] - y[i]) * (b[i] - y[i]);
        if (std::sqrt(res) <= tol_abs) return;
    }
}

}  // namespace detail

struct StepOptions {
    double tol = 1e-14;       // linear solve relative tolerance
    bool enforce_cfl = true;  // reject dt above the advective stability limit
};

inline void gs_sweep_nonneg_1d(const StepOperator1D& op, const std::vector<double>& b,
                               std::vector<double>& x) {
    const Mesh1D& m = *op.m;
    for (int i = 0; i < m.N; ++i) {
        double off = op.dt * (op.oE[i] * x[m.next(i)] + op.oW[i] * x[m.prev(i)]);
        x[i] = (b[i] + off) / (1.0 - op.dt * op.diagA[i]);
    }
}

inline CellField1D step(const CellField1D& rho_prev, const NodalField1D& c_h, double dt,
                        double gamma, const StepOptions& opts = {}) {
    if (rho_prev.m != c_h.m) throw std::invalid_argument("mesh mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("need dt > 0");
    const Mesh1D& m = *rho_prev.m;
    if (opts.enforce_cfl) {
        double dtmax = cfl_max_dt(rho_prev, c_h);
        if (dt > dtmax)
            throw CflError("time step " + std::to_string(dt) + " exceeds advective limit " +
                           std::to_string(dtmax));
    }
    FluxSet1D f = advective_fluxes(rho_prev, c_h, gamma);
    std::vector<double> rhs(m.N);
    for (int i = 0; i < m.N; ++i)
        rhs[i] = rho_prev.v[i] - dt / m.h[i] * (f.advective[i] - f.advective[m.prev(i)]);
    StepOperator1D op = build_step_operator(rho_prev, gamma, dt);
    std::vector<double> sub(m.N), diag(m.N), sup(m.N);
    for (int i = 0; i < m.N; ++i) {
        sub[i] = -dt * op.oW[i];
        sup[i] = -dt * op.oE[i];
        diag[i] = 1.0 - dt * op.diagA[i];
    }
    CellField1D out(m);
    out.v = solve_cyclic_tridiag(sub, diag, sup, rhs);
    bool rhs_nonneg = std::all_of(rhs.begin(), rhs.end(), [](double v) { return v >= 0.0; });
    if (rhs_nonneg && *std::min_element(out.v.begin(), out.v.end()) < 0.0) {
        struct Wrap {
            const StepOperator1D* op;
            void apply(const std::vector<double>& x, std::vector<double>& y) const {
                op->apply(x, y);
            }
            void gs_sweep_nonneg(const std::vector<double>& b, std::vector<double>& x) const {
                gs_sweep_nonneg_1d(*op, b, x);
            }
        } w{&op};
        detail::gs_restore_nonneg(w, rhs, out.v, opts.tol * norm2(rhs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

struct FluxSet2D {
    std::vector<double> Fx, Fy;        // Fx at (x_{j+1/2}, y_k), Fy at (x_j, y_{k+1/2})
    std::vector<double> dcx, dcy;      // diffusion coefficients at the same interfaces
};

inline FluxSet2D advective_fluxes(const CellField2D& rho, const NodalField2D& c_h, double gamma) {
    if (rho.m != c_h.m) throw std::invalid_argument("mesh mismatch");
    const Mesh2D& m = *rho.m;
    InterfaceGrads2D g = interface_gradients(c_h);
    FluxSet2D f;
    f.Fx.resize(m.N);
    f.Fy.resize(m.N);
    f.dcx.resize(m.N);
    f.dcy.resize(m.N);
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            int i = m.idx(j, k);
            double rC = rho.v[i], rE = rho.at(j + 1, k), rN = rho.at(j, k + 1);
            f.Fx[i] = pos_part(g.gx[i]) * rC - neg_part(g.gx[i]) * rE;
            f.Fy[i] = pos_part(g.gy[i]) * rC - neg_part(g.gy[i]) * rN;
            f.dcx[i] = gamma * pow_gm1(0.5 * (rC + rE), gamma);
            f.dcy[i] = gamma * pow_gm1(0.5 * (rC + rN), gamma);
        }
    return f;
}

inline double cfl_max_dt(const CellField2D& rho, const NodalField2D& c_h) {
    const Mesh2D& m = *rho.m;
    InterfaceGrads2D g = interface_gradients(c_h);
    double dt = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            double a = std::abs(pos_part(g.gx[m.idx(j, k)]) + neg_part(g.gx[m.idxw(j - 1, k)]) +
                                pos_part(g.gy[m.idx(j, k)]) + neg_part(g.gy[m.idxw(j, k - 1)]));
            if (a > 0.0) dt = std::min(dt, m.h / a);
        }
    return dt;
}

struct StepOperator2D {
    const Mesh2D* m = nullptr;
    double dt = 0.0;
    std::vector<double> oE, oW, oN, oS, diagA;

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        int n = m->n;
        for (int k = 0; k < n; ++k) {
            int kp = (k + 1 < n) ? k + 1 : 0, km = (k > 0) ? k - 1 : n - 1;
            for (int j = 0; j < n; ++j) {
                int jp = (j + 1 < n) ? j + 1 : 0, jm = (j > 0) ? j - 1 : n - 1;
                int i = k * n + j;
                double ax = ((oE[i] * x[k * n + jp] + oW[i] * x[k * n + jm]) + oN[i] * x[kp * n + j]) +
                            oS[i] * x[km * n + j] + diagA[i] * x[i];
                y[i] = x[i] - dt * ax;
            }
        }
    }

    // Symmetric Gauss-Seidel preconditioner for I - dt*A.
    void precondition(const std::vector<double>& r, std::vector<double>& z) const {
        int n = m->n;
        z.assign(r.size(), 0.0);
        auto row = [&](int k, int j) {
            int kp = (k + 1 < n) ? k + 1 : 0, km = (k > 0) ? k - 1 : n - 1;
            int jp = (j + 1 < n) ? j + 1 : 0, jm = (j > 0) ? j - 1 : n - 1;
            int i = k * n + j;
            double off = -dt * (oE[i] * z[k * n + jp] + oW[i] * z[k * n + jm] +
                                oN[i] * z[kp * n + j] + oS[i] * z[km * n + j]);
            z[i] = (r[i] - off) / (1.0 - dt * diagA[i]);
        };
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) row(k, j);
        for (int k = n - 1; k >= 0; --k)
            for (int j = n - 1; j >= 0; --j) row(k, j);
    }

    void gs_sweep_nonneg(const std::vector<double>& b, std::vector<double>& x) const {
        int n = m->n;
        for (int k = 0; k < n; ++k) {
            int kp = (k + 1 < n) ? k + 1 : 0, km = (k > 0) ? k - 1 : n - 1;
            for (int j = 0; j < n; ++j) {
                int jp = (j + 1 < n) ? j + 1 : 0, jm = (j > 0) ? j - 1 : n - 1;
                int i = k * n + j;
                double off = dt * (oE[i] * x[k * n + jp] + oW[i] * x[k * n + jm] +
                                   oN[i] * x[kp * n + j] + oS[i] * x[km * n + j]);
                x[i] = (b[i] + off) / (1.0 - dt * diagA[i]);
            }
        }
    }
};

inline StepOperator2D build_step_operator(const CellField2D& rho_prev, double gamma, double dt) {
    const Mesh2D& m = *rho_prev.m;
    StepOperator2D op;
    op.m = &m;
    op.dt = dt;
    op.oE.resize(m.N);
    op.oW.resize(m.N);
    op.oN.resize(m.N);
    op.oS.resize(m.N);
    op.diagA.resize(m.N);
    double h2 = m.h * m.h;
    std::vector<double> dcx(m.N), dcy(m.N);
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            int i = m.idx(j, k);
            dcx[i] = gamma * pow_gm1(0.5 * (rho_prev.v[i] + rho_prev.at(j + 1, k)), gamma);
            dcy[i] = gamma * pow_gm1(0.5 * (rho_prev.v[i] + rho_prev.at(j, k + 1)), gamma);
        }
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            int i = m.idx(j, k);
            op.oE[i] = dcx[i] / h2;
            op.oW[i] = dcx[m.idxw(j - 1, k)] / h2;
            op.oN[i] = dcy[i] / h2;
            op.oS[i] = dcy[m.idxw(j, k - 1)] / h2;
            op.diagA[i] = -(((op.oE[i] + op.oW[i]) + op.oN[i]) + op.oS[i]);
        }
    return op;
}

// One scheme step.  For gamma = 1 the diffusion operator has constant
// coefficients and an FFT solve is used when a transform context is given;
// otherwise preconditioned CG.
inline CellField2D step(const CellField2D& rho_prev, const NodalField2D& c_h, double dt,
                        double gamma, const StepOptions& opts = {}, Fft2D* fft = nullptr) {
    if (rho_prev.m != c_h.m) throw std::invalid_argument("mesh mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("need dt > 0");
    const Mesh2D& m = *rho_prev.m;
    if (opts.enforce_cfl) {
        double dtmax = cfl_max_dt(rho_prev, c_h);
        if (dt > dtmax)
            throw CflError("time step " + std::to_string(dt) + " exceeds advective limit " +
                           std::to_string(dtmax));
    }
    FluxSet2D f = advective_fluxes(rho_prev, c_h, gamma);
    std::vector<double> rhs(m.N);
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            int i = m.idx(j, k);
            double div = (f.Fx[i] - f.Fx[m.idxw(j - 1, k)]) + (f.Fy[i] - f.Fy[m.idxw(j, k - 1)]);
            rhs[i] = rho_prev.v[i] - dt / m.h * div;
        }
    StepOperator2D op = build_step_operator(rho_prev, gamma, dt);
    CellField2D out(m);
    if (gamma == 1.0 && fft != nullptr) {
        double h2 = m.h * m.h;
        fft->solve_diagonal(rhs, out.v, [&](double lam) { return 1.0 / (1.0 + dt * lam / h2); });
    } else {
        out.v = rho_prev.v;  // warm start
        solve_cg(op, rhs, out.v, opts.tol, 100000);
    }
    bool rhs_nonneg = std::all_of(rhs.begin(), rhs.end(), [](double v) { return v >= 0.0; });
    if (rhs_nonneg && *std::min_element(out.v.begin(), out.v.end()) < 0.0)
        detail::gs_restore_nonneg(op, rhs, out.v, opts.tol * norm2(rhs));
    return out;
}

}  // namespace kscert
