#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "kscert/fields.hpp"
#include "kscert/quadrature.hpp"
#include "kscert/reconstruct.hpp"
#include "kscert/scheme.hpp"

namespace kscert {

// Computable bounds for the dual norm of the reconstruction residual over a
// time slab, split into the diffusion part (R1), the time-interpolation part
// (R2) and the advection part (R3).  Each part is affine in the Lagrange
// weights l0, l1 of the slab, so one set of spatial sums serves all
// evaluation times.

struct EtaLevels {
    double nm1 = 0.0, n = 0.0, np1 = 0.0;
};

// r1(t) = l0 * pair_n + l1 * pair_nm1 + l1 * lag + interp
struct R1Parts {
    double pair_n = 0.0, pair_nm1 = 0.0, lag = 0.0, interp = 0.0;
    double at(double l0, double l1) const { return l0 * pair_n + l1 * pair_nm1 + l1 * lag + interp; }
};
// r2(t) = spatial + l1 * second_diff
struct R2Parts {
    double spatial = 0.0, second_diff = 0.0;
    double at(double, double l1) const { return spatial + l1 * second_diff; }
};
// r3(t) = mixed + l0 * flux_n + l1 * flux_nm1
struct R3Parts {
    double mixed = 0.0, flux_n = 0.0, flux_nm1 = 0.0;
    double at(double l0, double l1) const { return mixed + l0 * flux_n + l1 * flux_nm1; }
};

// ---------------------------------------------------------------------------
// 1D parts
// ---------------------------------------------------------------------------

namespace detail {

// Coefficient-mismatch and flux-difference sums for one frozen-coefficient
// pair (coefficients at level a, unknowns at level b).
inline double r1_pair_1d(const TimeSlab1D& s, double gamma, int a, int b) {
    const Mesh1D& m = *s.rho[0].m;
    const std::vector<double>& ra = s.rho[a].v;
    const std::vector<double>& rb = s.rho[b].v;
    int N = m.N;
    std::vector<double> D(N);
    double mismatch = 0.0;
    for (int i = 0; i < N; ++i) {
        int ip = m.next(i);
        double hat = 0.5 * (ra[i] + ra[ip]);
        double phat = pow_gm1(hat, gamma);
        double diff = rb[ip] - rb[i];
        D[i] = gamma * phat * diff / m.dmid[i];
        double dev = std::max(std::abs(pow_gm1(ra[i], gamma) - phat),
                              std::abs(pow_gm1(ra[ip], gamma) - phat));
        mismatch += diff * diff / m.dmid[i] * dev * dev;
    }
    double fluxdiff = 0.0;
    for (int i = 0; i < N; ++i) {
        double dd = D[i] - D[m.prev(i)];
        fluxdiff += m.h[i] * dd * dd;
    }
    return gamma * std::sqrt(mismatch) + std::sqrt(fluxdiff);
}

}  // namespace detail

inline R1Parts r1_parts_1d(const TimeSlab1D& s, double gamma) {
    const Mesh1D& m = *s.rho[0].m;
    R1Parts p;
    p.pair_n = detail::r1_pair_1d(s, gamma, LVL_N, LVL_NP1);
    p.pair_nm1 = detail::r1_pair_1d(s, gamma, LVL_NM1, LVL_N);
    if (gamma == 1.0) return p;
    int N = m.N;
    // Both remaining contributions subtract their own value at gamma = 1,
    // where the frozen-coefficient pairs already represent the diffusion
    // operator exactly; the coefficients gamma*s^(gamma-1) - 1 make the
    // bounds vanish there and keep them continuous in gamma.
    double lag = 0.0;
    for (int i = 0; i < N; ++i) {
        double A = gamma * pow_gm1(s.rho[LVL_NM1].v[i], gamma) - 1.0;
        double B = gamma * pow_gm1(s.rho[LVL_N].v[i], gamma) - 1.0;
        double gl_n = s.rho_t[LVL_N].slope(m.prev(i)), gr_n = s.rho_t[LVL_N].slope(i);
        double gl_p = s.rho_t[LVL_NP1].slope(m.prev(i)), gr_p = s.rho_t[LVL_NP1].slope(i);
        double wl = A * gl_n - B * gl_p, wr = A * gr_n - B * gr_p;
        lag += 0.5 * m.h[i] * (wl * wl + wr * wr);
    }
    p.lag = std::sqrt(lag);
    double i1 = 0.0, i2 = 0.0;
    for (int i = 0; i < N; ++i) {
        double cn = gamma * pow_gm1(s.rho[LVL_N].v[i], gamma) - 1.0;
        double cp = gamma * pow_gm1(s.rho[LVL_NP1].v[i], gamma) - 1.0;
        double C = std::abs(cn) + std::abs(cp);
        double E = std::abs(pow_gm1(s.rho[LVL_N].v[i], gamma) - pow_gm1(s.rho[LVL_NP1].v[i], gamma));
        double gl_n = s.rho_t[LVL_N].slope(m.prev(i)), gr_n = s.rho_t[LVL_N].slope(i);
        double gl_p = s.rho_t[LVL_NP1].slope(m.prev(i)), gr_p = s.rho_t[LVL_NP1].slope(i);
        double dl = gl_p - gl_n, dr = gr_p - gr_n;
        i1 += C * C * 0.5 * m.h[i] * (dl * dl + dr * dr);
        i2 += E * E * 0.5 * m.h[i] * (gl_p * gl_p + gr_p * gr_p);
    }
    p.interp = std::sqrt(i1) + gamma * std::sqrt(i2);
    return p;
}

inline R2Parts r2_parts_1d(const TimeSlab1D& s) {
    const Mesh1D& m = *s.rho[0].m;
    int N = m.N;
    R2Parts p;
    double sp = 0.0;
    for (int i = 0; i < N; ++i) {
        int im = m.prev(i);
        double di = (s.rho[LVL_NP1].v[i] - s.rho[LVL_N].v[i]) / s.dt_n;
        double dm = (s.rho[LVL_NP1].v[im] - s.rho[LVL_N].v[im]) / s.dt_n;
        sp += 0.5 * (m.h[i] + m.h[im]) * (di - dm) * (di - dm);
    }
    p.spatial = std::sqrt(sp);
    double sd = 0.0;
    for (int i = 0; i < N; ++i) {
        double dfwd = (s.rho[LVL_NP1].v[i] - s.rho[LVL_N].v[i]) / s.dt_n;
        double dbwd = (s.rho[LVL_N].v[i] - s.rho[LVL_NM1].v[i]) / s.dt_nm1;
        sd += m.h[i] * (dfwd - dbwd) * (dfwd - dbwd);
    }
    p.second_diff = std::sqrt(sd);
    return p;
}

namespace detail {

// sup of |v - rho_tilde| over cell i; the reconstruction is linear between
// the interface values and the midpoint value.
inline double sup_dev_cell_1d(const NodalField1D& rt, int i, double v) {
    const Mesh1D& m = *rt.m;
    int im = m.prev(i);
    double left = rt.v[im] + rt.slope(im) * (0.5 * m.h[im]);   // value at interface i-1/2
    double right = rt.v[i] + rt.slope(i) * (0.5 * m.h[i]);     // value at interface i+1/2
    return std::max({std::abs(v - left), std::abs(v - rt.v[i]), std::abs(v - right)});
}

// 2 * sum over interfaces of the upwind flux error bound at one time level.
inline double flux_error_1d(const CellField1D& rho, const NodalField1D& rt, const NodalField1D& c,
                            double eta) {
    const Mesh1D& m = *rho.m;
    int N = m.N;
    std::vector<double> cgrad2(N);  // squared L2 norm of dc/dx on each cell
    for (int i = 0; i < N; ++i) {
        double sl = c.slope(m.prev(i)), sr = c.slope(i);
        cgrad2[i] = 0.5 * m.h[i] * (sl * sl + sr * sr);
    }
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        int ip = m.next(i);
        double Mi = std::max(sup_dev_cell_1d(rt, i, rho.v[i]), sup_dev_cell_1d(rt, i, rho.v[ip]));
        double Mp = std::max(sup_dev_cell_1d(rt, ip, rho.v[i]), sup_dev_cell_1d(rt, ip, rho.v[ip]));
        sum += cgrad2[i] * Mi * Mi + cgrad2[ip] * Mp * Mp;
    }
    double rinf = norm_Linf(rt);
    sum += 2.0 * rinf * rinf * eta * eta;
    return 2.0 * std::sqrt(sum);
}

}  // namespace detail

inline R3Parts r3_parts_1d(const TimeSlab1D& s, const EtaLevels& eta) {
    R3Parts p;
    const NodalField1D& rm = s.rho_t[LVL_NM1];
    const NodalField1D& rn = s.rho_t[LVL_N];
    const NodalField1D& rp = s.rho_t[LVL_NP1];
    auto diff_linf = [](const NodalField1D& a, const NodalField1D& b) {
        double d = 0.0;
        for (std::size_t i = 0; i < a.v.size(); ++i) d = std::max(d, std::abs(a.v[i] - b.v[i]));
        return d;
    };
    double d_np = diff_linf(rn, rp), d_mn = diff_linf(rm, rn);
    p.mixed = (norm_Linf(rn) + norm_Linf(rp) + d_np) * d_np + (norm_Linf(rm) + norm_Linf(rn)) * d_mn;
    p.flux_n = detail::flux_error_1d(s.rho[LVL_N], rn, s.c[LVL_N], eta.n);
    p.flux_nm1 = detail::flux_error_1d(s.rho[LVL_NM1], rm, s.c[LVL_NM1], eta.nm1);
    return p;
}

inline double r1_bound_1d(const TimeSlab1D& s, double gamma, double t) {
    s.check_time(t);
    return r1_parts_1d(s, gamma).at(s.ell0(t), s.ell1(t));
}
inline double r2_bound_1d(const TimeSlab1D& s, double t) {
    s.check_time(t);
    return r2_parts_1d(s).at(s.ell0(t), s.ell1(t));
}
inline double r3_bound_1d(const TimeSlab1D& s, double t, const EtaLevels& eta) {
    s.check_time(t);
    return r3_parts_1d(s, eta).at(s.ell0(t), s.ell1(t));
}

// ---------------------------------------------------------------------------
// 2D parts
// ---------------------------------------------------------------------------

namespace detail {

// min/max of the subcell reconstruction over each cell (attained at the
// quadrant corners).
inline void cell_range_2d(const NodalField2D& rt, std::vector<double>& cmin,
                          std::vector<double>& cmax) {
    const Mesh2D& m = *rt.m;
    cmin.resize(m.N);
    cmax.resize(m.N);
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            double lo = rt.at(j, k), hi = lo;
            double corners[4];
            for (int sy : {-1, 1})
                for (int sx : {-1, 1}) {
                    rt.subcell_corners(j, k, sx, sy, corners);
                    for (double c : corners) {
                        lo = std::min(lo, c);
                        hi = std::max(hi, c);
                    }
                }
            cmin[m.idx(j, k)] = lo;
            cmax[m.idx(j, k)] = hi;
        }
}

// min/max of the subcell reconstruction over the shifted cell
// [x_j, x_{j+1}] x [y_{k-1/2}, y_{k+1/2}] (x direction; transpose for y).
inline void shifted_range_2d(const NodalField2D& rt, int j, int k, bool xdir, double& lo,
                             double& hi) {
    double corners[4];
    lo = 1e300;
    hi = -1e300;
    auto scan = [&](int cj, int ck, int sx, int sy) {
        rt.subcell_corners(cj, ck, sx, sy, corners);
        for (double c : corners) {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
    };
    if (xdir) {
        scan(j, k, 1, -1);
        scan(j, k, 1, 1);
        scan(j + 1, k, -1, -1);
        scan(j + 1, k, -1, 1);
    } else {
        scan(j, k, -1, 1);
        scan(j, k, 1, 1);
        scan(j, k + 1, -1, -1);
        scan(j, k + 1, 1, -1);
    }
}

inline double r1_pair_2d(const TimeSlab2D& s, double gamma, int a, int b) {
    const Mesh2D& m = *s.rho[0].m;
    const CellField2D& ra = s.rho[a];
    const CellField2D& rb = s.rho[b];
    int n = m.n;
    double mismatch = 0.0, fluxdiff = 0.0;
    for (int dir = 0; dir < 2; ++dir) {
        bool xdir = dir == 0;
        std::vector<double> D(m.N);
        double mis = 0.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                double rc = ra.at(j, k);
                double rn = xdir ? ra.at(j + 1, k) : ra.at(j, k + 1);
                double hat = 0.5 * (rc + rn);
                double phat = pow_gm1(hat, gamma);
                double diff = (xdir ? rb.at(j + 1, k) : rb.at(j, k + 1)) - rb.at(j, k);
                D[m.idx(j, k)] = gamma * phat * diff / m.h;
                double lo, hi;
                shifted_range_2d(s.rho_t[a], j, k, xdir, lo, hi);
                double dev = std::max(std::abs(pow_gm1(std::max(lo, 0.0), gamma) - phat),
                                      std::abs(pow_gm1(std::max(hi, 0.0), gamma) - phat));
                // squared L2 norm of the directional gradient over the
                // shifted cell is diff^2
                mis += dev * dev * diff * diff;
            }
        mismatch += std::sqrt(mis);
        double fd = 0.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                double dd = D[m.idx(j, k)] -
                            (xdir ? D[m.idxw(j - 1, k)] : D[m.idxw(j, k - 1)]);
                fd += dd * dd;
            }
        fluxdiff += 0.5 * m.h * std::sqrt(fd);
    }
    return gamma * mismatch + fluxdiff;
}

}  // namespace detail

inline R1Parts r1_parts_2d(const TimeSlab2D& s, double gamma) {
    const Mesh2D& m = *s.rho[0].m;
    R1Parts p;
    p.pair_n = detail::r1_pair_2d(s, gamma, LVL_N, LVL_NP1);
    p.pair_nm1 = detail::r1_pair_2d(s, gamma, LVL_NM1, LVL_N);
    if (gamma == 1.0) return p;
    int n = m.n;
    double harea = 0.5 * m.h * m.h;  // area of each half cell
    double lag_x = 0.0, lag_y = 0.0, i1x = 0.0, i1y = 0.0, i2x = 0.0, i2y = 0.0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            int i = m.idx(j, k);
            double A = gamma * pow_gm1(s.rho[LVL_NM1].v[i], gamma) - 1.0;
            double B = gamma * pow_gm1(s.rho[LVL_N].v[i], gamma) - 1.0;
            double C = std::abs(B) + std::abs(gamma * pow_gm1(s.rho[LVL_NP1].v[i], gamma) - 1.0);
            double E = std::abs(pow_gm1(s.rho[LVL_N].v[i], gamma) -
                                pow_gm1(s.rho[LVL_NP1].v[i], gamma));
            for (int dir = 0; dir < 2; ++dir) {
                bool xdir = dir == 0;
                auto grad_halves = [&](const CellField2D& r, double& gm, double& gp) {
                    double rc = r.at(j, k);
                    if (xdir) {
                        gm = (rc - r.at(j - 1, k)) / m.h;
                        gp = (r.at(j + 1, k) - rc) / m.h;
                    } else {
                        gm = (rc - r.at(j, k - 1)) / m.h;
                        gp = (r.at(j, k + 1) - rc) / m.h;
                    }
                };
                double gnm, gnp, gpm, gpp;
                grad_halves(s.rho[LVL_N], gnm, gnp);
                grad_halves(s.rho[LVL_NP1], gpm, gpp);
                double wl = A * gnm - B * gpm, wr = A * gnp - B * gpp;
                double lag = harea * (wl * wl + wr * wr);
                double dl = gpm - gnm, dr = gpp - gnp;
                double i1 = C * C * harea * (dl * dl + dr * dr);
                double i2 = E * E * harea * (gpm * gpm + gpp * gpp);
                if (xdir) {
                    lag_x += lag;
                    i1x += i1;
                    i2x += i2;
                } else {
                    lag_y += lag;
                    i1y += i1;
                    i2y += i2;
                }
            }
        }
    p.lag = std::sqrt(lag_x) + std::sqrt(lag_y);
    p.interp = std::sqrt(i1x) + std::sqrt(i1y) + gamma * (std::sqrt(i2x) + std::sqrt(i2y));
    return p;
}

inline R2Parts r2_parts_2d(const TimeSlab2D& s) {
    const Mesh2D& m = *s.rho[0].m;
    int n = m.n;
    R2Parts p;
    // Reconstruction defect of the time increment, split per cell into the
    // pairing with the cell averages of the test function (symmetric
    // stencil over all four quadrant identities) and the per-cell mean-free
    // remainder.  The reconstruction preserves every integral, so the
    // cell-mean field is globally mean free and pairs with the mean-free
    // part of the test function (torus Poincare constant 1/(2 pi)); the
    // remainder is evaluated exactly and uses the square Poincare constant
    // h/pi.  The explicit mean term below is identically zero in exact
    // arithmetic and kept for floating-point honesty.
    const std::vector<double>& rp = s.rho[LVL_NP1].v;
    const std::vector<double>& rn = s.rho[LVL_N].v;
    double Psum = 0.0, Rsum = 0.0, mean = 0.0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            auto d = [&](int jj, int kk) {
                int i = m.idxw(jj, kk);
                return rp[i] - rn[i];
            };
            double dc = d(j, k), dw = d(j - 1, k), de = d(j + 1, k), ds = d(j, k - 1),
                   dn = d(j, k + 1);
            double stencil = 4.0 * dc - dw - de - ds - dn;
            Psum += stencil * stencil / 64.0;
            mean += stencil / 8.0;
            // quadrant neighbor differences a = dc - d_x, b = dc - d_y
            auto quad = [&](double a, double b) {
                return (a * a + b * b) / 48.0 + a * b / 32.0;
            };
            double cell = quad(dc - dw, dc - ds) + quad(dc - de, dc - ds) +
                          quad(dc - dw, dc - dn) + quad(dc - de, dc - dn);
            cell -= stencil * stencil / 64.0;  // remove the cell-mean part
            Rsum += std::max(cell, 0.0);
        }
    double h = m.h;
    double avg_part = h * std::sqrt(Psum) / (2.0 * M_PI);
    double rem_part = h / M_PI * std::sqrt(h * h * Rsum);
    p.spatial = (std::abs(mean) * h * h + avg_part + rem_part) / s.dt_n;
    double sd = 0.0;
    for (int i = 0; i < m.N; ++i) {
        double dfwd = (rp[i] - rn[i]) / s.dt_n;
        double dbwd = (rn[i] - s.rho[LVL_NM1].v[i]) / s.dt_nm1;
        sd += h * h * (dfwd - dbwd) * (dfwd - dbwd);
    }
    p.second_diff = std::sqrt(sd);
    return p;
}

namespace detail {

// Per-cell data of the piecewise constant chemoattractant gradient: squared
// L2 norms and value ranges of each component.
struct CellGradData2D {
    std::vector<double> gx2, gy2, gxmin, gxmax, gymin, gymax;
};

inline CellGradData2D cell_grad_data_2d(const NodalField2D& c) {
    const Mesh2D& m = *c.m;
    CellGradData2D d;
    d.gx2.assign(m.N, 0.0);
    d.gy2.assign(m.N, 0.0);
    d.gxmin.assign(m.N, 1e300);
    d.gxmax.assign(m.N, -1e300);
    d.gymin.assign(m.N, 1e300);
    d.gymax.assign(m.N, -1e300);
    double q = 0.25 * m.h * m.h, e = 0.125 * m.h * m.h;
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            int i = m.idx(j, k);
            auto acc = [&](double area, double gx, double gy) {
                d.gx2[i] += area * gx * gx;
                d.gy2[i] += area * gy * gy;
                d.gxmin[i] = std::min(d.gxmin[i], gx);
                d.gxmax[i] = std::max(d.gxmax[i], gx);
                d.gymin[i] = std::min(d.gymin[i], gy);
                d.gymax[i] = std::max(d.gymax[i], gy);
            };
            double gx, gy;
            c.grad_upper_right(j - 1, k - 1, gx, gy);  // SW quadrant
            acc(q, gx, gy);
            c.grad_lower_left(j, k, gx, gy);  // NE quadrant
            acc(q, gx, gy);
            c.grad_lower_left(j, k - 1, gx, gy);  // SE quadrant, both pieces
            acc(e, gx, gy);
            c.grad_upper_right(j, k - 1, gx, gy);
            acc(e, gx, gy);
            c.grad_lower_left(j - 1, k, gx, gy);  // NW quadrant, both pieces
            acc(e, gx, gy);
            c.grad_upper_right(j - 1, k, gx, gy);
            acc(e, gx, gy);
        }
    return d;
}

inline double flux_error_2d(const CellField2D& rho, const NodalField2D& rt, const NodalField2D& c,
                            double eta) {
    const Mesh2D& m = *rho.m;
    int n = m.n;
    CellGradData2D gd = cell_grad_data_2d(c);
    std::vector<double> rmin, rmax;
    cell_range_2d(rt, rmin, rmax);
    auto sup_dev = [&](int cell, double v) {
        return std::max(std::abs(v - rmin[cell]), std::abs(v - rmax[cell]));
    };
    double rinf = norm_Linf(rt);
    double h2 = m.h * m.h;
    double total = 0.0;
    for (int dir = 0; dir < 2; ++dir) {
        bool xdir = dir == 0;
        double sum = 0.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                int i0 = m.idx(j, k);
                int i1 = xdir ? m.idxw(j + 1, k) : m.idxw(j, k + 1);
                double r0 = rho.v[i0], r1 = rho.v[i1];
                double Mdev = std::max(std::max(sup_dev(i0, r0), sup_dev(i0, r1)),
                                       std::max(sup_dev(i1, r0), sup_dev(i1, r1)));
                double g2 = xdir ? gd.gx2[i0] + gd.gx2[i1] : gd.gy2[i0] + gd.gy2[i1];
                // gradient component at the interface midpoint
                double v0 = ((xdir ? c.at(j + 1, k) : c.at(j, k + 1)) - c.v[i0]) / m.h;
                double devg;
                if (xdir) {
                    devg = std::max(std::max(std::abs(gd.gxmin[i0] - v0), std::abs(gd.gxmax[i0] - v0)),
                                    std::max(std::abs(gd.gxmin[i1] - v0), std::abs(gd.gxmax[i1] - v0)));
                } else {
                    devg = std::max(std::max(std::abs(gd.gymin[i0] - v0), std::abs(gd.gymax[i0] - v0)),
                                    std::max(std::abs(gd.gymin[i1] - v0), std::abs(gd.gymax[i1] - v0)));
                }
                double rsup = std::max(std::max(std::abs(rmin[i0]), std::abs(rmax[i0])),
                                       std::max(std::abs(rmin[i1]), std::abs(rmax[i1])));
                sum += g2 * Mdev * Mdev + rsup * rsup * h2 * devg * devg;
            }
        sum += 2.0 * rinf * rinf * eta * eta;
        total += 2.0 * std::sqrt(sum);
    }
    return total;
}

}  // namespace detail

inline R3Parts r3_parts_2d(const TimeSlab2D& s, const EtaLevels& eta) {
    R3Parts p;
    const NodalField2D& rm = s.rho_t[LVL_NM1];
    const NodalField2D& rn = s.rho_t[LVL_N];
    const NodalField2D& rp = s.rho_t[LVL_NP1];
    auto diff_linf = [](const NodalField2D& a, const NodalField2D& b) {
        double d = 0.0;
        for (std::size_t i = 0; i < a.v.size(); ++i) d = std::max(d, std::abs(a.v[i] - b.v[i]));
        return d;
    };
    double d_np = diff_linf(rn, rp), d_mn = diff_linf(rm, rn);
    p.mixed = (norm_Linf(rn) + norm_Linf(rp) + d_np) * d_np + (norm_Linf(rm) + norm_Linf(rn)) * d_mn;
    p.flux_n = detail::flux_error_2d(s.rho[LVL_N], rn, s.c[LVL_N], eta.n);
    p.flux_nm1 = detail::flux_error_2d(s.rho[LVL_NM1], rm, s.c[LVL_NM1], eta.nm1);
    return p;
}

inline double r1_bound_2d(const TimeSlab2D& s, double gamma, double t) {
    s.check_time(t);
    return r1_parts_2d(s, gamma).at(s.ell0(t), s.ell1(t));
}
inline double r2_bound_2d(const TimeSlab2D& s, double t) {
    s.check_time(t);
    return r2_parts_2d(s).at(s.ell0(t), s.ell1(t));
}
inline double r3_bound_2d(const TimeSlab2D& s, double t, const EtaLevels& eta) {
    s.check_time(t);
    return r3_parts_2d(s, eta).at(s.ell0(t), s.ell1(t));
}

// ---------------------------------------------------------------------------
// Slab integration and accumulation
// ---------------------------------------------------------------------------

// Norm snapshot of one time level, consumed by the growth-rate function of
// the stability conditions.
struct NormSnapshot {
    double t = 0.0;
    double rho_linf = 0.0;
    double rho_l3sq = 0.0;      // squared L3 norm of the reconstruction
    double rho_pow_l3sq = 0.0;  // squared L3 norm of its (gamma-1)/2 power
    double gradc_l3 = 0.0;
    double gradc_linf = 0.0;
    double eta_c = 0.0;
};

inline NormSnapshot compute_snapshot(double t, const NodalField1D& rho_t, const NodalField1D& c,
                                     double eta, double gamma, int quad_order = 4) {
    NormSnapshot s;
    s.t = t;
    s.rho_linf = norm_Linf(rho_t);
    double l3 = norm_Lp(rho_t, 3.0, quad_order);
    s.rho_l3sq = l3 * l3;
    if (gamma == 1.0) {
        s.rho_pow_l3sq = 1.0;
    } else {
        const Mesh1D& m = *rho_t.m;
        GaussLegendre g(quad_order);
        double e = 1.5 * (gamma - 1.0);
        double sum = 0.0;
        for (int i = 0; i < m.N; ++i) {
            double a = rho_t.v[i], b = rho_t.v[m.next(i)];
            sum += g.interval(0.0, m.dmid[i], [&](double x) {
                double val = a + (b - a) * x / m.dmid[i];
                return std::pow(std::max(val, 0.0), e);
            });
        }
        s.rho_pow_l3sq = std::pow(sum, 2.0 / 3.0);
    }
    s.gradc_l3 = grad_norm_Lp(c, 3.0);
    s.gradc_linf = grad_norm_Lp(c, std::numeric_limits<double>::infinity());
    s.eta_c = eta;
    return s;
}

inline NormSnapshot compute_snapshot(double t, const NodalField2D& rho_t, const NodalField2D& c,
                                     double eta, double gamma, int quad_order = 4) {
    NormSnapshot s;
    s.t = t;
    s.rho_linf = norm_Linf(rho_t);
    double l3 = norm_Lp(rho_t, 3.0, quad_order);
    s.rho_l3sq = l3 * l3;
    if (gamma == 1.0) {
        s.rho_pow_l3sq = 1.0;
    } else {
        const Mesh2D& m = *rho_t.m;
        GaussLegendre g(quad_order);
        double e = 1.5 * (gamma - 1.0);
        double hh = 0.5 * m.h;
        double sum = 0.0;
        for (int k = 0; k < m.n; ++k)
            for (int j = 0; j < m.n; ++j)
                for (int sy : {-1, 1})
                    for (int sx : {-1, 1})
                        sum += g.rect(0.0, hh, 0.0, hh, [&](double a, double b) {
                            double val = rho_t.subcell_value(j, k, sx, sy, sx * a / m.h,
                                                             sy * b / m.h);
                            return std::pow(std::max(val, 0.0), e);
                        });
        s.rho_pow_l3sq = std::pow(sum, 2.0 / 3.0);
    }
    s.gradc_l3 = grad_norm_Lp(c, 3.0);
    s.gradc_linf = grad_norm_Lp(c, std::numeric_limits<double>::infinity());
    s.eta_c = eta;
    return s;
}

// Squared time-integrated residual bounds over one slab, plus diagnostics
// and the endpoint snapshots.
struct SlabResidual {
    double t0 = 0.0, t1 = 0.0;
    double int_r1_sq = 0.0, int_r2_sq = 0.0, int_r3_sq = 0.0, int_total_sq = 0.0;
    R1Parts r1;
    R2Parts r2;
    R3Parts r3;
    NormSnapshot snap_left, snap_right;
};

namespace detail {

// The parts are affine in time, so squared integrals are exact with 3-point
// Gauss on the slab.
inline void integrate_parts(SlabResidual& out, double t0, double dt, const R1Parts& p1,
                            const R2Parts& p2, const R3Parts& p3) {
    static const GaussLegendre g3(3);
    out.t0 = t0;
    out.t1 = t0 + dt;
    out.r1 = p1;
    out.r2 = p2;
    out.r3 = p3;
    out.int_r1_sq = out.int_r2_sq = out.int_r3_sq = out.int_total_sq = 0.0;
    for (int q = 0; q < 3; ++q) {
        double w = 0.5 * dt * g3.weights[q];
        double tq = t0 + 0.5 * dt * (1.0 + g3.nodes[q]);
        double l0 = (tq - t0) / dt, l1 = 1.0 - l0;
        double v1 = p1.at(l0, l1), v2 = p2.at(l0, l1), v3 = p3.at(l0, l1);
        out.int_r1_sq += w * v1 * v1;
        out.int_r2_sq += w * v2 * v2;
        out.int_r3_sq += w * v3 * v3;
        double tot = v1 + v2 + v3;
        out.int_total_sq += w * tot * tot;
    }
}

}  // namespace detail

inline SlabResidual integrate_slab(const TimeSlab1D& s, double gamma, const EtaLevels& eta,
                                   int quad_order = 4) {
    SlabResidual out;
    detail::integrate_parts(out, s.t_n, s.dt_n, r1_parts_1d(s, gamma), r2_parts_1d(s),
                            r3_parts_1d(s, eta));
    out.snap_left = compute_snapshot(s.t_n, s.rho_t[LVL_N], s.c[LVL_N], eta.n, gamma, quad_order);
    out.snap_right = compute_snapshot(s.t_np1(), s.rho_t[LVL_NP1], s.c[LVL_NP1], eta.np1, gamma,
                                      quad_order);
    return out;
}

inline SlabResidual integrate_slab(const TimeSlab2D& s, double gamma, const EtaLevels& eta,
                                   int quad_order = 4) {
    SlabResidual out;
    detail::integrate_parts(out, s.t_n, s.dt_n, r1_parts_2d(s, gamma), r2_parts_2d(s),
                            r3_parts_2d(s, eta));
    out.snap_left = compute_snapshot(s.t_n, s.rho_t[LVL_N], s.c[LVL_N], eta.n, gamma, quad_order);
    out.snap_right = compute_snapshot(s.t_np1(), s.rho_t[LVL_NP1], s.c[LVL_NP1], eta.np1, gamma,
                                      quad_order);
    return out;
}

// Cumulative residual series A(t) and the per-part series A^j(t).
struct ResidualSeries {
    std::vector<double> t;
    std::vector<double> A, A1, A2, A3;
};

inline ResidualSeries accumulate_A(const std::vector<SlabResidual>& slabs, double z1_initial) {
    ResidualSeries s;
    double A = z1_initial, A1 = z1_initial, A2 = z1_initial, A3 = z1_initial;
    if (!slabs.empty()) {
        s.t.push_back(slabs.front().t0);
        s.A.push_back(A);
        s.A1.push_back(A1);
        s.A2.push_back(A2);
        s.A3.push_back(A3);
    }
    for (const SlabResidual& r : slabs) {
        A += r.int_total_sq;
        A1 += r.int_r1_sq;
        A2 += r.int_r2_sq;
        A3 += r.int_r3_sq;
        s.t.push_back(r.t1);
        s.A.push_back(A);
        s.A1.push_back(A1);
        s.A2.push_back(A2);
        s.A3.push_back(A3);
    }
    return s;
}

}  // namespace kscert
