#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "kscert/chemo.hpp"

using namespace kscert;

namespace {

double h1_error_1d(const NodalField1D& c, double (*cf)(double), double (*cfx)(double)) {
    GaussLegendre g(6);
    const Mesh1D& m = *c.m;
    double s = 0.0;
    for (int i = 0; i < m.N; ++i) {
        double x0 = m.xm[i], d = m.dmid[i];
        double a = c.v[i], slope = c.slope(i);
        s += g.interval(0.0, d, [&](double t) {
            double x = x0 + t;
            double e = a + slope * t - cf(x);
            double ex = slope - cfx(x);
            return e * e + ex * ex;
        });
    }
    return std::sqrt(s);
}

double cexact1(double x) { return std::sin(2.0 * M_PI * x); }
double cexact1x(double x) { return 2.0 * M_PI * std::cos(2.0 * M_PI * x); }

double h1_error_2d(const NodalField2D& c) {
    const Mesh2D& m = *c.m;
    auto cf = [](double x, double y) { return std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y); };
    auto cfx = [](double x, double y) {
        return 2 * M_PI * std::cos(2 * M_PI * x) * std::sin(2 * M_PI * y);
    };
    auto cfy = [](double x, double y) {
        return 2 * M_PI * std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y);
    };
    double s = 0.0;
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            double x0 = m.xmid(j), y0 = m.xmid(k);
            double gxl, gyl, gxu, gyu;
            c.grad_lower_left(j, k, gxl, gyl);
            c.grad_upper_right(j, k, gxu, gyu);
            double v00 = c.at(j, k);
            double v11 = c.at(j + 1, k + 1);
            double A[2] = {x0, y0}, B[2] = {x0 + m.h, y0}, C[2] = {x0, y0 + m.h},
                   D[2] = {x0 + m.h, y0 + m.h};
            auto errLL = [&](double x, double y) {
                double v = v00 + gxl * (x - x0) + gyl * (y - y0);
                double e = v - cf(x, y);
                double ex = gxl - cfx(x, y), ey = gyl - cfy(x, y);
                return e * e + ex * ex + ey * ey;
            };
            auto errUR = [&](double x, double y) {
                double v = v11 + gxu * (x - x0 - m.h) + gyu * (y - y0 - m.h);
                double e = v - cf(x, y);
                double ex = gxu - cfx(x, y), ey = gyu - cfy(x, y);
                return e * e + ex * ex + ey * ey;
            };
            s += triangle_deg5(A, B, C, errLL);
            s += triangle_deg5(B, D, C, errUR);
        }
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("constant datum gives constant chemoattractant") {
    Mesh1D m = build_mesh_1d({0.0, 0.2, 0.55, 1.0});
    NodalField1D rho(m, 1.0);
    for (bool lump : {false, true}) {
        NodalField1D c = solve_chemoattractant(rho, lump);
        for (double v : c.v) REQUIRE(v == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(elliptic_estimator(c, rho) == Catch::Approx(0.0).margin(1e-13));
        for (double gv : interface_gradients(c)) REQUIRE(gv == Catch::Approx(0.0).margin(1e-12));
    }
    Mesh2D m2 = build_mesh_2d(6);
    ChemoSolver2D solver(m2);
    NodalField2D rho2(m2, Rep2D::P1Dual, 1.0);
    for (bool lump : {false, true}) {
        NodalField2D c = solver.solve(rho2, lump);
        for (double v : c.v) REQUIRE(v == Catch::Approx(1.0).epsilon(1e-10));
        REQUIRE(elliptic_estimator(c, rho2) == Catch::Approx(0.0).margin(1e-10));
    }
}

TEST_CASE("manufactured 1d solution converges at first order in H1") {
    double prev_err = 0.0;
    for (int n : {16, 32, 64, 128}) {
        Mesh1D m = uniform_mesh_1d(n);
        NodalField1D rho(m);
        for (int i = 0; i < m.N; ++i) rho.v[i] = (1.0 + 4.0 * M_PI * M_PI) * cexact1(m.xm[i]);
        NodalField1D c = solve_chemoattractant(rho, true);
        double err = h1_error_1d(c, cexact1, cexact1x);
        if (prev_err > 0.0) {
            double ratio = prev_err / err;
            REQUIRE(ratio > 1.8);
            REQUIRE(ratio < 2.2);
        }
        prev_err = err;
    }
}

TEST_CASE("manufactured 2d solution halves the H1 error from n=32 to n=64") {
    double e32 = 0.0, e64 = 0.0;
    for (int n : {32, 64}) {
        Mesh2D m = build_mesh_2d(n);
        ChemoSolver2D solver(m);
        NodalField2D rho(m, Rep2D::P1Dual);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                rho.v[m.idx(j, k)] = (1.0 + 8.0 * M_PI * M_PI) *
                                     std::sin(2 * M_PI * m.xmid(j)) *
                                     std::sin(2 * M_PI * m.xmid(k));
        NodalField2D c = solver.solve(rho, true);
        (n == 32 ? e32 : e64) = h1_error_2d(c);
    }
    double ratio = e32 / e64;
    REQUIRE(ratio > 1.8);
    REQUIRE(ratio < 2.2);
}

TEST_CASE("fft and dense paths agree") {
    Mesh2D m = build_mesh_2d(16);
    ChemoSolver2D solver(m);
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    NodalField2D rho(m, Rep2D::P1Dual);
    for (double& v : rho.v) v = U(rng);
    NodalField2D a = solver.solve(rho, true);
    NodalField2D b = solver.solve_dense(rho, true);
    for (int i = 0; i < m.N; ++i) REQUIRE(a.v[i] == Catch::Approx(b.v[i]).margin(1e-10));
    // consistent-mass CG path against its dense counterpart
    NodalField2D ac = solver.solve(rho, false);
    NodalField2D bc = solver.solve_dense(rho, false);
    for (int i = 0; i < m.N; ++i) REQUIRE(ac.v[i] == Catch::Approx(bc.v[i]).margin(1e-9));
}

TEST_CASE("discrete mean property and spd energy") {
    Mesh2D m = build_mesh_2d(12);
    ChemoSolver2D solver(m);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(-1.0, 3.0);
    NodalField2D rho(m, Rep2D::P1Dual);
    for (double& v : rho.v) v = U(rng);
    for (bool lump : {false, true}) {
        NodalField2D c = solver.solve(rho, lump);
        REQUIRE(integral(c) == Catch::Approx(integral(rho)).epsilon(1e-12));
    }
    ChemoOperator2D op(m, false);
    std::vector<double> x(m.N), y(m.N);
    for (double& v : x) v = U(rng);
    op.apply(x, y);
    REQUIRE(dot(x, y) > 0.0);

    Mesh1D m1 = build_mesh_1d({0.0, 0.22, 0.41, 0.8, 1.0});
    NodalField1D r1(m1);
    for (double& v : r1.v) v = U(rng);
    for (bool lump : {false, true}) {
        NodalField1D c1 = solve_chemoattractant(r1, lump);
        REQUIRE(integral(c1) == Catch::Approx(integral(r1)).epsilon(1e-12));
    }
}

TEST_CASE("lumped and consistent solves agree at second order") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        Mesh2D m = build_mesh_2d(n);
        ChemoSolver2D solver(m);
        NodalField2D rho(m, Rep2D::P1Dual);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                rho.v[m.idx(j, k)] =
                    std::sin(2 * M_PI * m.xmid(j)) * std::cos(2 * M_PI * m.xmid(k)) + 1.0;
        NodalField2D a = solver.solve(rho, true);
        NodalField2D b = solver.solve(rho, false);
        double diff = 0.0;
        for (int i = 0; i < m.N; ++i) diff = std::max(diff, std::abs(a.v[i] - b.v[i]));
        if (prev > 0.0) REQUIRE(prev / diff > 3.0);  // second order: factor ~4 per doubling
        prev = diff;
    }
}

TEST_CASE("estimator decreases at first order on smooth data") {
    double e16 = 0.0, e32 = 0.0;
    for (int n : {16, 32}) {
        Mesh2D m = build_mesh_2d(n);
        ChemoSolver2D solver(m);
        NodalField2D rho(m, Rep2D::P1Dual);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                rho.v[m.idx(j, k)] =
                    1.0 + std::sin(2 * M_PI * m.xmid(j)) * std::sin(2 * M_PI * m.xmid(k));
        NodalField2D c = solver.solve(rho, true);
        (n == 16 ? e16 : e32) = elliptic_estimator(c, rho);
    }
    REQUIRE(e16 / e32 > 1.6);
    REQUIRE(e16 / e32 < 2.4);
}

TEST_CASE("estimator reliability against a fine reference (1d)") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.5, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
        int n = 16;
        Mesh1D m = uniform_mesh_1d(n);
        NodalField1D rho(m);
        double a1 = U(rng), a2 = U(rng), p1 = U(rng), p2 = U(rng);
        for (int i = 0; i < n; ++i)
            rho.v[i] = 2.0 + a1 * std::sin(2 * M_PI * m.xm[i] + p1) +
                       a2 * std::cos(4 * M_PI * m.xm[i] + p2);
        NodalField1D c = solve_chemoattractant(rho, false);
        double eta = elliptic_estimator(c, rho);

        // reference: consistent solve on the 4x refined mesh with the
        // resampled datum, compared exactly on the refined dual mesh
        int R = 4;
        Mesh1D mf = uniform_mesh_1d(R * n);
        NodalField1D rho_f(mf);
        for (int i = 0; i < mf.N; ++i) rho_f.v[i] = rho.eval(mf.xm[i]);
        NodalField1D cf = solve_chemoattractant(rho_f, false);
        double err2 = 0.0;
        for (int i = 0; i < mf.N; ++i) {
            double ca = c.eval(mf.xm[i]), cb = c.eval(mf.xm[mf.next(i)]);
            double fa = cf.v[i], fb = cf.v[mf.next(i)];
            double d = mf.dmid[i];
            double ea = ca - fa, eb = cb - fb;
            err2 += d / 3.0 * (ea * ea + ea * eb + eb * eb);
            double ge = (cb - ca) / d - (fb - fa) / d;
            err2 += d * ge * ge;
        }
        double ref_err = std::sqrt(err2);
        REQUIRE(ref_err <= eta);
    }
}

TEST_CASE("2d interface gradients are tangentially consistent") {
    Mesh2D m = build_mesh_2d(5);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    NodalField2D c(m, Rep2D::P1Dual);
    for (double& v : c.v) v = U(rng);
    InterfaceGrads2D g = interface_gradients(c);
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            // finite difference along the edge through (x_{j+1/2}, y_k)
            double x = m.xface(j + 1), y = m.xmid(k);
            double d = 1e-7;
            double fd = (c.eval(x + d, y) - c.eval(x - d, y)) / (2 * d);
            REQUIRE(g.gx[m.idx(j, k)] == Catch::Approx(fd).margin(1e-5));
            double x2 = m.xmid(j), y2 = m.xface(k + 1);
            double fd2 = (c.eval(x2, y2 + d) - c.eval(x2, y2 - d)) / (2 * d);
            REQUIRE(g.gy[m.idx(j, k)] == Catch::Approx(fd2).margin(1e-5));
        }
    Mesh1D m1 = build_mesh_1d({0.0, 0.5, 1.0});
    NodalField1D c1(m1);
    c1.v = {0.0, 1.0};
    std::vector<double> g1 = interface_gradients(c1);
    REQUIRE(g1[0] == Catch::Approx(2.0));
    REQUIRE(g1[1] == Catch::Approx(-2.0));
}

TEST_CASE("estimator rejects mismatched inputs") {
    Mesh2D m = build_mesh_2d(4);
    Mesh2D m2 = build_mesh_2d(8);
    NodalField2D a(m, Rep2D::P1Dual, 1.0), b(m2, Rep2D::P1Dual, 1.0);
    REQUIRE_THROWS_AS(elliptic_estimator(a, b), std::invalid_argument);
    NodalField2D sc(m, Rep2D::Subcell, 1.0);
    REQUIRE_THROWS_AS(elliptic_estimator(a, sc), std::invalid_argument);
}
