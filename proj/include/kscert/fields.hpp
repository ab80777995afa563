#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "kscert/mesh.hpp"
#include "kscert/quadrature.hpp"

namespace kscert {

// ---------------------------------------------------------------------------
// 1D fields
// ---------------------------------------------------------------------------

// Piecewise constant cell averages.
struct CellField1D {
    const Mesh1D* m = nullptr;
    std::vector<double> v;

    CellField1D() = default;
    explicit CellField1D(const Mesh1D& mesh, double fill = 0.0) : m(&mesh), v(mesh.N, fill) {}
};

// Continuous piecewise linear field on the dual vertex mesh (values at cell
// midpoints, linear on each dual segment, periodic).
struct NodalField1D {
    const Mesh1D* m = nullptr;
    std::vector<double> v;

    NodalField1D() = default;
    explicit NodalField1D(const Mesh1D& mesh, double fill = 0.0) : m(&mesh), v(mesh.N, fill) {}

    // Slope on dual segment i (from midpoint i to midpoint i+1, wrapping).
    double slope(int i) const { return (v[m->next(i)] - v[i]) / m->dmid[i]; }

    double eval(double x) const {
        double L = m->L;
        x -= L * std::floor(x / L);
        // Locate the dual segment containing x.
        int i = int(std::upper_bound(m->xm.begin(), m->xm.end(), x) - m->xm.begin()) - 1;
        if (i < 0) i = m->N - 1;  // wrap segment before the first midpoint
        double x0 = m->xm[i];
        double t = x - x0;
        if (t < 0) t += L;
        return v[i] + slope(i) * t;
    }
};

inline NodalField1D nodal_from_cells(const CellField1D& r) {
    NodalField1D f(*r.m);
    f.v = r.v;
    return f;
}

// ---------------------------------------------------------------------------
// 2D fields
// ---------------------------------------------------------------------------

struct CellField2D {
    const Mesh2D* m = nullptr;
    std::vector<double> v;

    CellField2D() = default;
    explicit CellField2D(const Mesh2D& mesh, double fill = 0.0) : m(&mesh), v(mesh.N, fill) {}

    double at(int j, int k) const { return v[m->idxw(j, k)]; }
};

// Continuous piecewise linear representation on the dual triangulation
// (used for the chemoattractant), or the per-quarter-cell linear form
// assembled from midpoint values and face averages (used for the density
// reconstruction).  The two coincide at the nodes but not in between.
enum class Rep2D { P1Dual, Subcell };

struct NodalField2D {
    const Mesh2D* m = nullptr;
    std::vector<double> v;
    Rep2D rep = Rep2D::P1Dual;

    NodalField2D() = default;
    NodalField2D(const Mesh2D& mesh, Rep2D r, double fill = 0.0)
        : m(&mesh), v(mesh.N, fill), rep(r) {}

    double at(int j, int k) const { return v[m->idxw(j, k)]; }

    // Gradients of the P1 representation on the two triangles of dual quad
    // (j, k) (lower-left vertex at node (j, k), antidiagonal split).
    void grad_lower_left(int j, int k, double& gx, double& gy) const {
        double v00 = at(j, k), v10 = at(j + 1, k), v01 = at(j, k + 1);
        gx = (v10 - v00) / m->h;
        gy = (v01 - v00) / m->h;
    }
    void grad_upper_right(int j, int k, double& gx, double& gy) const {
        double v10 = at(j + 1, k), v01 = at(j, k + 1), v11 = at(j + 1, k + 1);
        gx = (v11 - v01) / m->h;
        gy = (v11 - v10) / m->h;
    }

    // Subcell-form value on quadrant (sx, sy) of cell (j, k) at local offsets
    // xi = (x - xmid_j)/h, eta = (y - ymid_k)/h; sx, sy in {-1, +1}.
    double subcell_value(int j, int k, int sx, int sy, double xi, double eta) const {
        double c = at(j, k);
        double nx = at(j + sx, k);
        double ny = at(j, k + sy);
        return (1.0 - sx * xi - sy * eta) * c + sx * xi * nx + sy * eta * ny;
    }

    // The four corner values of quadrant (sx, sy) of cell (j, k).
    void subcell_corners(int j, int k, int sx, int sy, double out[4]) const {
        double c = at(j, k), nx = at(j + sx, k), ny = at(j, k + sy);
        out[0] = c;
        out[1] = 0.5 * (c + nx);
        out[2] = 0.5 * (c + ny);
        out[3] = 0.5 * (nx + ny);
    }

    // Subcell-form gradient on quadrant (sx, sy) of cell (j, k).
    void subcell_grad(int j, int k, int sx, int sy, double& gx, double& gy) const {
        gx = sx * (at(j + sx, k) - at(j, k)) / m->h;
        gy = sy * (at(j, k + sy) - at(j, k)) / m->h;
    }

    double eval(double x, double y) const {
        double L = m->L, h = m->h;
        x -= L * std::floor(x / L);
        y -= L * std::floor(y / L);
        if (rep == Rep2D::Subcell) {
            int j = std::min(int(x / h), m->n - 1);
            int k = std::min(int(y / h), m->n - 1);
            double xi = x / h - (j + 0.5), eta = y / h - (k + 0.5);
            int sx = xi < 0 ? -1 : 1, sy = eta < 0 ? -1 : 1;
            return subcell_value(j, k, sx, sy, xi, eta);
        }
        // P1 on the dual triangulation.
        double u = x / h - 0.5, w = y / h - 0.5;
        int jd = int(std::floor(u)), kd = int(std::floor(w));
        double xi = u - jd, eta = w - kd;
        double v00 = at(jd, kd), v10 = at(jd + 1, kd), v01 = at(jd, kd + 1),
               v11 = at(jd + 1, kd + 1);
        if (xi + eta <= 1.0) return v00 + xi * (v10 - v00) + eta * (v01 - v00);
        return v11 + (1.0 - xi) * (v01 - v11) + (1.0 - eta) * (v10 - v11);
    }
};

inline NodalField2D nodal_from_cells(const CellField2D& r, Rep2D rep) {
    NodalField2D f(*r.m, rep);
    f.v = r.v;
    return f;
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

inline double norm_Lp(const CellField1D& f, double p) {
    if (p < 1.0) throw std::invalid_argument("need p >= 1");
    if (std::isinf(p)) {
        double s = 0.0;
        for (double x : f.v) s = std::max(s, std::abs(x));
        return s;
    }
    double s = 0.0;
    for (int i = 0; i < f.m->N; ++i) s += f.m->h[i] * std::pow(std::abs(f.v[i]), p);
    return std::pow(s, 1.0 / p);
}

inline double norm_Lp(const CellField2D& f, double p) {
    if (p < 1.0) throw std::invalid_argument("need p >= 1");
    if (std::isinf(p)) {
        double s = 0.0;
        for (double x : f.v) s = std::max(s, std::abs(x));
        return s;
    }
    double cell = f.m->h * f.m->h, s = 0.0;
    for (double x : f.v) s += cell * std::pow(std::abs(x), p);
    return std::pow(s, 1.0 / p);
}

// L^infty of a piecewise linear field is attained at the nodes.
inline double norm_Linf(const NodalField1D& f) {
    double s = 0.0;
    for (double x : f.v) s = std::max(s, std::abs(x));
    return s;
}
inline double norm_Linf(const NodalField2D& f) {
    double s = 0.0;
    for (double x : f.v) s = std::max(s, std::abs(x));
    return s;
}

inline double norm_Lp(const NodalField1D& f, double p, int quad_order = 4) {
    if (p < 1.0) throw std::invalid_argument("need p >= 1");
    if (std::isinf(p)) return norm_Linf(f);
    GaussLegendre g(quad_order);
    const Mesh1D& m = *f.m;
    double s = 0.0;
    for (int i = 0; i < m.N; ++i) {
        double a = f.v[i], b = f.v[m.next(i)];
        s += g.interval(0.0, m.dmid[i], [&](double t) {
            double val = a + (b - a) * t / m.dmid[i];
            return std::pow(std::abs(val), p);
        });
    }
    return std::pow(s, 1.0 / p);
}

inline double norm_Lp(const NodalField2D& f, double p, int quad_order = 4) {
    if (p < 1.0) throw std::invalid_argument("need p >= 1");
    if (std::isinf(p)) return norm_Linf(f);
    GaussLegendre g(quad_order);
    const Mesh2D& m = *f.m;
    double s = 0.0;
    if (f.rep == Rep2D::Subcell) {
        double hh = 0.5 * m.h;
        for (int k = 0; k < m.n; ++k)
            for (int j = 0; j < m.n; ++j)
                for (int sy : {-1, 1})
                    for (int sx : {-1, 1})
                        s += g.rect(0.0, hh, 0.0, hh, [&](double a, double b) {
                            double xi = sx * a / m.h, eta = sy * b / m.h;
                            return std::pow(
                                std::abs(f.subcell_value(j, k, sx, sy, xi, eta)), p);
                        });
    } else {
        for (int k = 0; k < m.n; ++k)
            for (int j = 0; j < m.n; ++j) {
                double x0 = m.xmid(j), y0 = m.xmid(k);
                double A[2] = {x0, y0}, B[2] = {x0 + m.h, y0}, C[2] = {x0, y0 + m.h},
                       D[2] = {x0 + m.h, y0 + m.h};
                auto fp = [&](double x, double y) { return std::pow(std::abs(f.eval(x, y)), p); };
                s += triangle_deg5(A, B, C, fp);
                s += triangle_deg5(B, D, C, fp);
            }
    }
    return std::pow(s, 1.0 / p);
}

// Exact H1 seminorm (gradients are piecewise constant).
inline double seminorm_H1(const NodalField1D& f) {
    const Mesh1D& m = *f.m;
    double s = 0.0;
    for (int i = 0; i < m.N; ++i) {
        double g = f.slope(i);
        s += m.dmid[i] * g * g;
    }
    return std::sqrt(s);
}

inline double seminorm_H1(const NodalField2D& f) {
    const Mesh2D& m = *f.m;
    double s = 0.0;
    if (f.rep == Rep2D::Subcell) {
        double area = 0.25 * m.h * m.h;
        for (int k = 0; k < m.n; ++k)
            for (int j = 0; j < m.n; ++j)
                for (int sy : {-1, 1})
                    for (int sx : {-1, 1}) {
                        double gx, gy;
                        f.subcell_grad(j, k, sx, sy, gx, gy);
                        s += area * (gx * gx + gy * gy);
                    }
    } else {
        double area = 0.5 * m.h * m.h;
        for (int k = 0; k < m.n; ++k)
            for (int j = 0; j < m.n; ++j) {
                double gx, gy;
                f.grad_lower_left(j, k, gx, gy);
                s += area * (gx * gx + gy * gy);
                f.grad_upper_right(j, k, gx, gy);
                s += area * (gx * gx + gy * gy);
            }
    }
    return std::sqrt(s);
}

// L^p norm of |grad f| (exact; gradients piecewise constant).
inline double grad_norm_Lp(const NodalField1D& f, double p) {
    const Mesh1D& m = *f.m;
    if (std::isinf(p)) {
        double s = 0.0;
        for (int i = 0; i < m.N; ++i) s = std::max(s, std::abs(f.slope(i)));
        return s;
    }
    double s = 0.0;
    for (int i = 0; i < m.N; ++i) s += m.dmid[i] * std::pow(std::abs(f.slope(i)), p);
    return std::pow(s, 1.0 / p);
}

inline double grad_norm_Lp(const NodalField2D& f, double p) {
    if (f.rep != Rep2D::P1Dual) throw std::invalid_argument("gradient norms need the P1 representation");
    const Mesh2D& m = *f.m;
    double area = 0.5 * m.h * m.h;
    double s = 0.0, smax = 0.0;
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            double gx, gy;
            f.grad_lower_left(j, k, gx, gy);
            double g1 = std::hypot(gx, gy);
            f.grad_upper_right(j, k, gx, gy);
            double g2 = std::hypot(gx, gy);
            if (std::isinf(p)) {
                smax = std::max({smax, g1, g2});
            } else {
                s += area * (std::pow(g1, p) + std::pow(g2, p));
            }
        }
    return std::isinf(p) ? smax : std::pow(s, 1.0 / p);
}

// Exact integral of a piecewise linear field.
inline double integral(const NodalField1D& f) {
    const Mesh1D& m = *f.m;
    double s = 0.0;
    for (int i = 0; i < m.N; ++i) s += 0.5 * m.dmid[i] * (f.v[i] + f.v[m.next(i)]);
    return s;
}
inline double integral(const NodalField2D& f) {
    double cell = f.m->h * f.m->h, s = 0.0;
    for (double x : f.v) s += x;
    return cell * s;  // holds for both representations
}
inline double total_mass(const CellField1D& f) {
    double s = 0.0;
    for (int i = 0; i < f.m->N; ++i) s += f.m->h[i] * f.v[i];
    return s;
}
inline double total_mass(const CellField2D& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return f.m->h * f.m->h * s;
}

// ---------------------------------------------------------------------------
// Gradient jumps of the continuous piecewise linear representation
// ---------------------------------------------------------------------------

// 1D: slope jump at each dual vertex x_i (right slope minus left slope).
inline std::vector<double> broken_L2_jump(const NodalField1D& f) {
    const Mesh1D& m = *f.m;
    std::vector<double> out(m.N);
    for (int i = 0; i < m.N; ++i) out[i] = f.slope(i) - f.slope(m.prev(i));
    return out;
}

// 2D: normal gradient jumps across the edges of the dual triangulation.
struct EdgeJump2D {
    int j, k;       // owning dual quad (lower-left vertex = node (j, k))
    int type;       // 0 horizontal (bottom), 1 vertical (left), 2 antidiagonal
    double length;  // edge length
    double jump;    // (grad(T) - grad(V)) . eta_{T|V}
};

inline std::vector<EdgeJump2D> broken_L2_jump(const NodalField2D& f) {
    if (f.rep != Rep2D::P1Dual) throw std::invalid_argument("jumps need the P1 representation");
    const Mesh2D& m = *f.m;
    std::vector<EdgeJump2D> out;
    out.reserve(3 * m.N);
    double s2 = std::sqrt(2.0);
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            double gxLL, gyLL, gxUR, gyUR, gx2, gy2;
            f.grad_lower_left(j, k, gxLL, gyLL);
            f.grad_upper_right(j, k, gxUR, gyUR);
            // bottom edge: T = lower-left of (j,k), V = upper-right of (j,k-1), eta = (0,-1)
            f.grad_upper_right(j, k - 1, gx2, gy2);
            out.push_back({j, k, 0, m.h, -(gyLL - gy2)});
            // left edge: T = lower-left of (j,k), V = upper-right of (j-1,k), eta = (-1,0)
            f.grad_upper_right(j - 1, k, gx2, gy2);
            out.push_back({j, k, 1, m.h, -(gxLL - gx2)});
            // antidiagonal: T = lower-left, V = upper-right, eta = (1,1)/sqrt(2)
            out.push_back({j, k, 2, s2 * m.h, ((gxLL - gxUR) + (gyLL - gyUR)) / s2});
        }
    return out;
}

}  // namespace kscert
