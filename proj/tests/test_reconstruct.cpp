#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kscert/reconstruct.hpp"

using namespace kscert;

namespace {

TimeSlab1D random_slab(std::mt19937_64& rng) {
    static Mesh1D m = build_mesh_1d({0.0, 0.2, 0.45, 0.8, 1.0});
    std::uniform_real_distribution<double> U(0.1, 2.0);
    TimeSlab1D s;
    s.t_n = 0.5;
    s.dt_n = 0.125;
    s.dt_nm1 = 0.25;
    for (int l = 0; l < 3; ++l) {
        s.rho[l] = CellField1D(m);
        for (double& v : s.rho[l].v) v = U(rng);
        s.rho_t[l] = nodal_from_cells(s.rho[l]);
        s.c[l] = NodalField1D(m);
        for (double& v : s.c[l].v) v = U(rng);
    }
    return s;
}

}  // namespace

TEST_CASE("temporal interpolation reproduces the endpoints and the midpoint mean") {
    std::mt19937_64 rng(1);
    TimeSlab1D s = random_slab(rng);
    NodalField1D rt;
    CellField1D rh;
    interpolate_in_time(s, s.t_n, rt, rh);
    for (int i = 0; i < 4; ++i) {
        REQUIRE(rt.v[i] == Catch::Approx(s.rho_t[LVL_N].v[i]).epsilon(1e-14));
        REQUIRE(rh.v[i] == Catch::Approx(s.rho[LVL_N].v[i]).epsilon(1e-14));
    }
    interpolate_in_time(s, s.t_np1(), rt, rh);
    for (int i = 0; i < 4; ++i)
        REQUIRE(rt.v[i] == Catch::Approx(s.rho_t[LVL_NP1].v[i]).epsilon(1e-14));
    interpolate_in_time(s, s.t_n + 0.5 * s.dt_n, rt, rh);
    for (int i = 0; i < 4; ++i)
        REQUIRE(rt.v[i] ==
                Catch::Approx(0.5 * (s.rho_t[LVL_N].v[i] + s.rho_t[LVL_NP1].v[i])).epsilon(1e-14));
    REQUIRE_THROWS_AS(interpolate_in_time(s, s.t_n - 0.1, rt, rh), std::invalid_argument);
}

TEST_CASE("lagrange weights form a partition of unity") {
    std::mt19937_64 rng(2);
    TimeSlab1D s = random_slab(rng);
    for (double f : {0.0, 0.21, 0.5, 0.77, 1.0}) {
        double t = s.t_n + f * s.dt_n;
        REQUIRE(s.ell0(t) + s.ell1(t) == Catch::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("time derivative of the reconstruction") {
    std::mt19937_64 rng(3);
    TimeSlab1D s = random_slab(rng);
    // equal endpoints: derivative vanishes
    s.rho_t[LVL_NP1] = s.rho_t[LVL_N];
    NodalField1D d0 = time_derivative(s);
    for (double v : d0.v) REQUIRE(v == Catch::Approx(0.0).margin(1e-14));
    // linear drift: recovered exactly
    for (std::size_t i = 0; i < d0.v.size(); ++i)
        s.rho_t[LVL_NP1].v[i] = s.rho_t[LVL_N].v[i] + s.dt_n * (0.3 + double(i));
    NodalField1D d1 = time_derivative(s);
    for (std::size_t i = 0; i < d1.v.size(); ++i)
        REQUIRE(d1.v[i] == Catch::Approx(0.3 + double(i)).epsilon(1e-13));
    // finite difference of the interpolant at two interior times
    TimeSlab1D r = random_slab(rng);
    NodalField1D rta, rtb;
    CellField1D rha, rhb;
    double ta = r.t_n + 0.3 * r.dt_n, tb = r.t_n + 0.7 * r.dt_n;
    interpolate_in_time(r, ta, rta, rha);
    interpolate_in_time(r, tb, rtb, rhb);
    NodalField1D dr = time_derivative(r);
    for (std::size_t i = 0; i < dr.v.size(); ++i)
        REQUIRE(dr.v[i] == Catch::Approx((rtb.v[i] - rta.v[i]) / (tb - ta)).epsilon(1e-11));
}

TEST_CASE("nodal interpolation commutes with time interpolation") {
    std::mt19937_64 rng(4);
    TimeSlab1D s = random_slab(rng);
    double t = s.t_n + 0.37 * s.dt_n;
    NodalField1D rt;
    CellField1D rh;
    interpolate_in_time(s, t, rt, rh);
    NodalField1D lifted = nodal_from_cells(rh);
    for (std::size_t i = 0; i < rt.v.size(); ++i)
        REQUIRE(lifted.v[i] == Catch::Approx(rt.v[i]).epsilon(1e-14));
}

TEST_CASE("first slab policies") {
    Mesh1D m = build_mesh_1d({0.0, 0.5, 1.0});
    SlabState1D s0, s1;
    s0.t = 0.0;
    s1.t = 0.1;
    s0.rho = CellField1D(m);
    s1.rho = CellField1D(m);
    s0.rho.v = {1.0, 2.0};
    s1.rho.v = {1.5, 1.8};
    s0.rho_t = nodal_from_cells(s0.rho);
    s1.rho_t = nodal_from_cells(s1.rho);
    s0.c = NodalField1D(m, 0.5);
    s1.c = NodalField1D(m, 0.6);

    TimeSlab1D hold = make_slab<CellField1D, NodalField1D>({s0, s1}, FirstSlabPolicy::Hold);
    REQUIRE(hold.dt_nm1 == Catch::Approx(hold.dt_n));
    // second difference with the held level reduces to rho^1 - rho^0
    for (int i = 0; i < 2; ++i) {
        double second = hold.rho[LVL_NP1].v[i] - 2.0 * hold.rho[LVL_N].v[i] + hold.rho[LVL_NM1].v[i];
        REQUIRE(second == Catch::Approx(s1.rho.v[i] - s0.rho.v[i]).epsilon(1e-14));
    }

    TimeSlab1D ex = make_slab<CellField1D, NodalField1D>({s0, s1}, FirstSlabPolicy::Extrapolate);
    for (int i = 0; i < 2; ++i) {
        double second = ex.rho[LVL_NP1].v[i] - 2.0 * ex.rho[LVL_N].v[i] + ex.rho[LVL_NM1].v[i];
        REQUIRE(second == Catch::Approx(0.0).margin(1e-14));
    }
    // the synthesized level is clamped at zero
    SlabState1D z0 = s0, z1 = s1;
    z0.rho.v = {0.0, 0.0};
    z1.rho.v = {0.5, 0.3};
    z0.rho_t = nodal_from_cells(z0.rho);
    z1.rho_t = nodal_from_cells(z1.rho);
    TimeSlab1D exz = make_slab<CellField1D, NodalField1D>({z0, z1}, FirstSlabPolicy::Extrapolate);
    for (double v : exz.rho[LVL_NM1].v) REQUIRE(v >= 0.0);

    // three states pass through untouched
    SlabState1D s2 = s1;
    s2.t = 0.25;
    TimeSlab1D full = make_slab<CellField1D, NodalField1D>({s0, s1, s2}, FirstSlabPolicy::Hold);
    REQUIRE(full.t_n == Catch::Approx(0.1));
    REQUIRE(full.dt_n == Catch::Approx(0.15));
    REQUIRE(full.dt_nm1 == Catch::Approx(0.1));

    // mesh mismatch rejected
    Mesh1D other = build_mesh_1d({0.0, 0.4, 1.0});
    SlabState1D bad = s1;
    bad.rho = CellField1D(other);
    bad.rho_t = nodal_from_cells(bad.rho);
    bad.c = NodalField1D(other);
    REQUIRE_THROWS_AS(
        (make_slab<CellField1D, NodalField1D>({s0, bad}, FirstSlabPolicy::Hold)),
        std::invalid_argument);
}
