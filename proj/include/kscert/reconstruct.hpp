#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "kscert/fields.hpp"

namespace kscert {

// Time levels carried by a slab.
enum SlabLevel { LVL_NM1 = 0, LVL_N = 1, LVL_NP1 = 2 };

// One time slab [t^n, t^{n+1}] together with the three density levels
// n-1, n, n+1 entering the residual bounds, their nodal interpolants, and
// the chemoattractant solves.
template <class CellF, class NodalF>
struct TimeSlab {
    double t_n = 0.0;
    double dt_n = 0.0;
    double dt_nm1 = 0.0;
    CellF rho[3];
    NodalF rho_t[3];
    NodalF c[3];

    double t_np1() const { return t_n + dt_n; }
    double ell0(double t) const { return (t - t_n) / dt_n; }
    double ell1(double t) const { return (t_np1() - t) / dt_n; }
    void check_time(double t) const {
        if (t < t_n - 1e-14 * dt_n || t > t_np1() + 1e-14 * dt_n)
            throw std::invalid_argument("time outside slab");
    }
};

using TimeSlab1D = TimeSlab<CellField1D, NodalField1D>;
using TimeSlab2D = TimeSlab<CellField2D, NodalField2D>;

// Temporal interpolants between the n and n+1 levels.
template <class CellF, class NodalF>
void interpolate_in_time(const TimeSlab<CellF, NodalF>& s, double t, NodalF& rho_tilde_t,
                         CellF& rho_h_t) {
    s.check_time(t);
    double l0 = s.ell0(t), l1 = s.ell1(t);
    rho_tilde_t = s.rho_t[LVL_N];
    rho_h_t = s.rho[LVL_N];
    for (std::size_t i = 0; i < rho_tilde_t.v.size(); ++i)
        rho_tilde_t.v[i] = l0 * s.rho_t[LVL_NP1].v[i] + l1 * s.rho_t[LVL_N].v[i];
    for (std::size_t i = 0; i < rho_h_t.v.size(); ++i)
        rho_h_t.v[i] = l0 * s.rho[LVL_NP1].v[i] + l1 * s.rho[LVL_N].v[i];
}

// Constant-in-time derivative of the reconstructed density on the slab.
template <class CellF, class NodalF>
NodalF time_derivative(const TimeSlab<CellF, NodalF>& s) {
    NodalF out = s.rho_t[LVL_N];
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = (s.rho_t[LVL_NP1].v[i] - s.rho_t[LVL_N].v[i]) / s.dt_n;
    return out;
}

// Start-up convention for the level n-1 required by the residual bounds.
enum class FirstSlabPolicy { Hold, Extrapolate };

template <class CellF, class NodalF>
struct SlabState {
    double t = 0.0;
    CellF rho;
    NodalF rho_t;
    NodalF c;
};

using SlabState1D = SlabState<CellField1D, NodalField1D>;
using SlabState2D = SlabState<CellField2D, NodalField2D>;

// Builds a slab from two (first slab; the n-1 level is synthesized per
// policy) or three consecutive states.
template <class CellF, class NodalF>
TimeSlab<CellF, NodalF> make_slab(const std::vector<SlabState<CellF, NodalF>>& hist,
                                  FirstSlabPolicy policy) {
    if (hist.size() != 2 && hist.size() != 3)
        throw std::invalid_argument("need two or three consecutive states");
    for (std::size_t i = 1; i < hist.size(); ++i) {
        if (hist[i].rho.m != hist[0].rho.m) throw std::invalid_argument("mesh mismatch");
        if (!(hist[i].t > hist[i - 1].t)) throw std::invalid_argument("states not time-ordered");
    }
    TimeSlab<CellF, NodalF> s;
    if (hist.size() == 3) {
        s.t_n = hist[1].t;
        s.dt_n = hist[2].t - hist[1].t;
        s.dt_nm1 = hist[1].t - hist[0].t;
        for (int l = 0; l < 3; ++l) {
            s.rho[l] = hist[l].rho;
            s.rho_t[l] = hist[l].rho_t;
            s.c[l] = hist[l].c;
        }
        return s;
    }
    s.t_n = hist[0].t;
    s.dt_n = hist[1].t - hist[0].t;
    s.dt_nm1 = s.dt_n;
    for (int l = 0; l < 2; ++l) {
        s.rho[l + 1] = hist[l].rho;
        s.rho_t[l + 1] = hist[l].rho_t;
        s.c[l + 1] = hist[l].c;
    }
    s.rho[LVL_NM1] = hist[0].rho;
    s.rho_t[LVL_NM1] = hist[0].rho_t;
    s.c[LVL_NM1] = hist[0].c;
    if (policy == FirstSlabPolicy::Extrapolate) {
        // rho^{-1} := 2 rho^0 - rho^1, clamped at zero so the synthesized
        // level is an admissible density; the chemoattractant solve is
        // linear in its datum, so the same extrapolation applies to c.
        for (std::size_t i = 0; i < s.rho[0].v.size(); ++i)
            s.rho[0].v[i] = std::max(2.0 * hist[0].rho.v[i] - hist[1].rho.v[i], 0.0);
        s.rho_t[0].v = s.rho[0].v;
        for (std::size_t i = 0; i < s.c[0].v.size(); ++i)
            s.c[0].v[i] = 2.0 * hist[0].c.v[i] - hist[1].c.v[i];
    }
    return s;
}

}  // namespace kscert
