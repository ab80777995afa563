#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kscert/chemo.hpp"
#include "kscert/errors.hpp"
#include "kscert/fields.hpp"
#include "kscert/mesh.hpp"
#include "kscert/reconstruct.hpp"
#include "kscert/residual.hpp"
#include "kscert/scheme.hpp"
#include "kscert/stability.hpp"

namespace kscert {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    int dim = 2;
    double gamma = 1.0;
    double T = 5e-3;
    int n = 100;
    std::vector<double> interfaces;  // optional explicit 1D interfaces
    double dt = 0.0;                 // 0: use T/n
    bool lumping = true;
    int quad_order = 4;
    double chemo_tol = 1e-12;
    double scheme_tol = 1e-14;
    double cfl_safety = 1.0;
    ConstantsTable constants;
    FirstSlabPolicy first_slab = FirstSlabPolicy::Extrapolate;
    enum class Z1Policy { Surrogate, Zero };
    Z1Policy z1_policy = Z1Policy::Surrogate;
    std::string out_path;
    std::string plot_prefix;
    int threads = 1;
    unsigned long long seed = 0;

    double step_dt() const { return dt > 0.0 ? dt : T / n; }
    int steps() const { return int(std::llround(T / step_dt())); }
};

inline void validate(const RunConfig& c) {
    if (c.dim != 1 && c.dim != 2) throw ConfigError("dim must be 1 or 2");
    if (c.gamma < 1.0 || c.gamma > 3.0) throw ConfigError("gamma must lie in [1, 3]");
    if (!(c.T > 0.0)) throw ConfigError("tfinal must be positive");
    if (c.n < 2 && c.interfaces.empty()) throw ConfigError("n must be at least 2");
    if (c.dt < 0.0) throw ConfigError("dt must be positive");
    if (c.quad_order < 1 || c.quad_order > 16) throw ConfigError("quad order out of range");
    if (!(c.cfl_safety > 0.0) || c.cfl_safety > 1.0)
        throw ConfigError("cfl safety factor must lie in (0, 1]");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    if (!(c.chemo_tol > 0.0) || !(c.scheme_tol > 0.0)) throw ConfigError("tolerances must be positive");
}

// ---------------------------------------------------------------------------
// Experiment data
// ---------------------------------------------------------------------------

// Initial cell density: localized bump at the domain center.
inline double initial_density(double x, double y) {
    double dx = x - 0.5, dy = y - 0.5;
    return 1.3 * std::sin(M_PI * x) * std::sin(M_PI * y) * std::exp(-25.0 * dx * dx - 25.0 * dy * dy);
}
inline double initial_density_1d(double x) {
    double dx = x - 0.5;
    return 1.3 * std::sin(M_PI * x) * std::exp(-25.0 * dx * dx);
}

inline CellField1D initial_cell_averages(const Mesh1D& m, int quad_order) {
    GaussLegendre g(quad_order);
    CellField1D r(m);
    for (int i = 0; i < m.N; ++i)
        r.v[i] = g.interval(m.iface[i], m.iface[i + 1], initial_density_1d) / m.h[i];
    return r;
}

inline CellField2D initial_cell_averages(const Mesh2D& m, int quad_order) {
    GaussLegendre g(quad_order);
    CellField2D r(m);
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j)
            r.v[m.idx(j, k)] = g.rect(m.xface(j), m.xface(j + 1), m.xface(k), m.xface(k + 1),
                                      initial_density) /
                               (m.h * m.h);
    return r;
}

// || rho_0 - reconstruction ||_{L2} by piecewise quadrature (pieces aligned
// with the reconstruction kinks).
inline double init_l2_distance(const Mesh1D& m, const NodalField1D& rt, int quad_order) {
    GaussLegendre g(quad_order + 2);
    double s = 0.0;
    for (int i = 0; i < m.N; ++i) {
        auto f = [&](double x) {
            double d = initial_density_1d(x) - rt.eval(x);
            return d * d;
        };
        s += g.interval(m.iface[i], m.xm[i], f);
        s += g.interval(m.xm[i], m.iface[i + 1], f);
    }
    return std::sqrt(s);
}

inline double init_l2_distance(const Mesh2D& m, const NodalField2D& rt, int quad_order) {
    GaussLegendre g(quad_order + 2);
    double s = 0.0;
    for (int k = 0; k < m.n; ++k)
        for (int j = 0; j < m.n; ++j) {
            double xm = m.xmid(j), ym = m.xmid(k);
            auto f = [&](double x, double y) {
                double d = initial_density(x, y) - rt.eval(x, y);
                return d * d;
            };
            s += g.rect(m.xface(j), xm, m.xface(k), ym, f);
            s += g.rect(xm, m.xface(j + 1), m.xface(k), ym, f);
            s += g.rect(m.xface(j), xm, ym, m.xface(k + 1), f);
            s += g.rect(xm, m.xface(j + 1), ym, m.xface(k + 1), f);
        }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

struct StepRow {
    int step = 0;
    double t = 0.0, mass = 0.0, min_rho = 0.0, max_rho = 0.0, cfl_margin = 0.0;
    double r1_sq = 0.0, r2_sq = 0.0, r3_sq = 0.0;
    double A = 0.0, A1 = 0.0, A2 = 0.0, A3 = 0.0;
    double a_t = 0.0, E_t = 0.0, cond_lhs = 0.0;
    int certified = 0;
    NormSnapshot snap;
};

struct RunSummary {
    double A_T = 0.0, A1_T = 0.0, A2_T = 0.0, A3_T = 0.0;
    double z1_initial = 0.0;
    double mass_drift_rel_max = 0.0;
    double min_rho_overall = 0.0;
    double certified_prefix_end = std::numeric_limits<double>::quiet_NaN();
    bool all_satisfied = false;
    double bound = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
    int steps = 0;
};

struct RunRecord {
    RunConfig config;
    std::vector<StepRow> rows;
    RunSummary summary;
    CertificationReport cert;
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void finalize_record(RunRecord& rec, const std::vector<SlabResidual>& slabs,
                            const NormSnapshot& snap0, double z1, double gamma,
                            const ConstantsTable& cs, int dim) {
    ResidualSeries series = accumulate_A(slabs, z1);
    std::vector<double> a(series.t.size());
    std::vector<NormSnapshot> snaps(series.t.size());
    snaps[0] = snap0;
    for (std::size_t i = 0; i < slabs.size(); ++i) snaps[i + 1] = slabs[i].snap_right;
    for (std::size_t i = 0; i < snaps.size(); ++i) a[i] = a_gamma_of_t(snaps[i], gamma, cs, dim);
    rec.cert = certify(series.t, series.A, a, gamma, cs);
    rec.rows.resize(series.t.size());
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        StepRow& r = rec.rows[i];
        r.step = int(i);
        r.t = series.t[i];
        r.A = series.A[i];
        r.A1 = series.A1[i];
        r.A2 = series.A2[i];
        r.A3 = series.A3[i];
        if (i > 0) {
            r.r1_sq = slabs[i - 1].int_r1_sq;
            r.r2_sq = slabs[i - 1].int_r2_sq;
            r.r3_sq = slabs[i - 1].int_r3_sq;
        }
        r.a_t = a[i];
        r.E_t = rec.cert.E[i];
        r.cond_lhs = rec.cert.lhs[i];
        r.certified = rec.cert.satisfied[i] ? 1 : 0;
        r.snap = snaps[i];
    }
    RunSummary& s = rec.summary;
    s.A_T = series.A.back();
    s.A1_T = series.A1.back();
    s.A2_T = series.A2.back();
    s.A3_T = series.A3.back();
    s.z1_initial = z1;
    s.certified_prefix_end = rec.cert.certified_prefix_end;
    s.all_satisfied = rec.cert.all_satisfied;
    s.bound = rec.cert.bound;
    s.steps = int(slabs.size());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Run loops
// ---------------------------------------------------------------------------

inline RunRecord run_1d(const RunConfig& cfg) {
    validate(cfg);
    auto tic = std::chrono::steady_clock::now();
    Mesh1D mesh = cfg.interfaces.empty() ? uniform_mesh_1d(cfg.n) : build_mesh_1d(cfg.interfaces);
    double dt = cfg.step_dt();
    int steps = cfg.steps();
    if (steps < 1) throw ConfigError("no steps to run");

    struct Level {
        SlabState1D st;
        double eta = 0.0;
    };
    auto make_level = [&](double t, CellField1D rho) {
        Level lv;
        lv.st.t = t;
        lv.st.rho = std::move(rho);
        lv.st.rho_t = nodal_from_cells(lv.st.rho);
        lv.st.c = solve_chemoattractant(lv.st.rho_t, cfg.lumping);
        lv.eta = elliptic_estimator(lv.st.c, lv.st.rho_t);
        return lv;
    };

    RunRecord rec;
    rec.config = cfg;
    Level cur = make_level(0.0, initial_cell_averages(mesh, cfg.quad_order));
    double z1 = 0.0;
    if (cfg.z1_policy == RunConfig::Z1Policy::Surrogate) {
        double d = init_l2_distance(mesh, cur.st.rho_t, cfg.quad_order);
        z1 = 0.5 * cfg.constants.C_ell * cfg.constants.C_ell * d * d;
    }
    NormSnapshot snap0 = compute_snapshot(0.0, cur.st.rho_t, cur.st.c, cur.eta, cfg.gamma,
                                          cfg.quad_order);

    double mass0 = total_mass(cur.st.rho);
    RunSummary& sm = rec.summary;
    sm.min_rho_overall = *std::min_element(cur.st.rho.v.begin(), cur.st.rho.v.end());
    std::vector<SlabResidual> slabs;
    slabs.reserve(steps);
    std::vector<double> masses{mass0}, minr_v{sm.min_rho_overall},
        maxr_v{*std::max_element(cur.st.rho.v.begin(), cur.st.rho.v.end())},
        cflm_v{std::numeric_limits<double>::infinity()};
    bool have_prev = false;
    Level prev;
    StepOptions sopts;
    sopts.tol = cfg.scheme_tol;
    for (int nstep = 0; nstep < steps; ++nstep) {
        double dtmax = cfl_max_dt(cur.st.rho, cur.st.c);
        if (dt > cfg.cfl_safety * dtmax)
            throw CflError("step " + std::to_string(nstep) + ": dt " + std::to_string(dt) +
                           " exceeds cfl limit " + std::to_string(cfg.cfl_safety * dtmax));
        CellField1D rho_next = step(cur.st.rho, cur.st.c, dt, cfg.gamma, sopts);
        Level nxt = make_level(cur.st.t + dt, std::move(rho_next));

        TimeSlab1D slab = have_prev
                              ? make_slab<CellField1D, NodalField1D>(
                                    {prev.st, cur.st, nxt.st}, cfg.first_slab)
                              : make_slab<CellField1D, NodalField1D>({cur.st, nxt.st},
                                                                     cfg.first_slab);
        EtaLevels eta;
        eta.n = cur.eta;
        eta.np1 = nxt.eta;
        if (have_prev) {
            eta.nm1 = prev.eta;
        } else if (cfg.first_slab == FirstSlabPolicy::Hold) {
            eta.nm1 = cur.eta;
        } else {
            // solve for the synthesized level so the slab is scheme-consistent
            slab.c[LVL_NM1] = solve_chemoattractant(slab.rho_t[LVL_NM1], cfg.lumping);
            eta.nm1 = elliptic_estimator(slab.c[LVL_NM1], slab.rho_t[LVL_NM1]);
        }
        slabs.push_back(integrate_slab(slab, cfg.gamma, eta, cfg.quad_order));

        double mass = total_mass(nxt.st.rho);
        double minr = *std::min_element(nxt.st.rho.v.begin(), nxt.st.rho.v.end());
        masses.push_back(mass);
        minr_v.push_back(minr);
        maxr_v.push_back(*std::max_element(nxt.st.rho.v.begin(), nxt.st.rho.v.end()));
        cflm_v.push_back(dtmax / dt);
        sm.min_rho_overall = std::min(sm.min_rho_overall, minr);
        sm.mass_drift_rel_max =
            std::max(sm.mass_drift_rel_max, std::abs(mass - mass0) / std::abs(mass0));
        if (minr < 0.0)
            throw SolverError("positivity lost at step " + std::to_string(nstep));
        prev = std::move(cur);
        cur = std::move(nxt);
        have_prev = true;
    }
    detail::finalize_record(rec, slabs, snap0, z1, cfg.gamma, cfg.constants, 1);
    for (std::size_t i = 0; i < rec.rows.size(); ++i) {
        rec.rows[i].mass = masses[i];
        rec.rows[i].min_rho = minr_v[i];
        rec.rows[i].max_rho = maxr_v[i];
        rec.rows[i].cfl_margin = cflm_v[i];
    }
    sm.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    return rec;
}

inline RunRecord run_2d(const RunConfig& cfg) {
    validate(cfg);
    auto tic = std::chrono::steady_clock::now();
    Mesh2D mesh = build_mesh_2d(cfg.n);
    double dt = cfg.step_dt();
    int steps = cfg.steps();
    if (steps < 1) throw ConfigError("no steps to run");
    ChemoSolver2D chemo(mesh, cfg.chemo_tol);
    Fft2D step_fft(mesh.n);

    struct Level {
        SlabState2D st;
        double eta = 0.0;
    };
    auto make_level = [&](double t, CellField2D rho) {
        Level lv;
        lv.st.t = t;
        lv.st.rho = std::move(rho);
        lv.st.rho_t = nodal_from_cells(lv.st.rho, Rep2D::Subcell);
        NodalField2D rt_p1 = nodal_from_cells(lv.st.rho, Rep2D::P1Dual);
        lv.st.c = chemo.solve(rt_p1, cfg.lumping);
        lv.eta = elliptic_estimator(lv.st.c, rt_p1);
        return lv;
    };

    RunRecord rec;
    rec.config = cfg;
    Level cur = make_level(0.0, initial_cell_averages(mesh, cfg.quad_order));
    double z1 = 0.0;
    if (cfg.z1_policy == RunConfig::Z1Policy::Surrogate) {
        double d = init_l2_distance(mesh, cur.st.rho_t, cfg.quad_order);
        z1 = 0.5 * cfg.constants.C_ell * cfg.constants.C_ell * d * d;
    }
    NormSnapshot snap0 = compute_snapshot(0.0, cur.st.rho_t, cur.st.c, cur.eta, cfg.gamma,
                                          cfg.quad_order);

    double mass0 = total_mass(cur.st.rho);
    RunSummary& sm = rec.summary;
    sm.min_rho_overall = *std::min_element(cur.st.rho.v.begin(), cur.st.rho.v.end());
    std::vector<SlabResidual> slabs;
    slabs.reserve(steps);
    std::vector<double> masses, minr_v, maxr_v, cflm_v;
    masses.push_back(mass0);
    minr_v.push_back(sm.min_rho_overall);
    maxr_v.push_back(*std::max_element(cur.st.rho.v.begin(), cur.st.rho.v.end()));
    cflm_v.push_back(std::numeric_limits<double>::infinity());
    bool have_prev = false;
    Level prev;
    StepOptions sopts;
    sopts.tol = cfg.scheme_tol;
    for (int nstep = 0; nstep < steps; ++nstep) {
        double dtmax = cfl_max_dt(cur.st.rho, cur.st.c);
        if (dt > cfg.cfl_safety * dtmax)
            throw CflError("step " + std::to_string(nstep) + ": dt " + std::to_string(dt) +
                           " exceeds cfl limit " + std::to_string(cfg.cfl_safety * dtmax));
        CellField2D rho_next = step(cur.st.rho, cur.st.c, dt, cfg.gamma, sopts, &step_fft);
        Level nxt = make_level(cur.st.t + dt, std::move(rho_next));

        TimeSlab2D slab = have_prev
                              ? make_slab<CellField2D, NodalField2D>(
                                    {prev.st, cur.st, nxt.st}, cfg.first_slab)
                              : make_slab<CellField2D, NodalField2D>({cur.st, nxt.st},
                                                                     cfg.first_slab);
        EtaLevels eta;
        eta.n = cur.eta;
        eta.np1 = nxt.eta;
        if (have_prev) {
            eta.nm1 = prev.eta;
        } else if (cfg.first_slab == FirstSlabPolicy::Hold) {
            eta.nm1 = cur.eta;
        } else {
            NodalField2D r0(mesh, Rep2D::P1Dual);
            r0.v = slab.rho_t[LVL_NM1].v;
            slab.c[LVL_NM1] = chemo.solve(r0, cfg.lumping);
            eta.nm1 = elliptic_estimator(slab.c[LVL_NM1], r0);
        }
        slabs.push_back(integrate_slab(slab, cfg.gamma, eta, cfg.quad_order));

        double mass = total_mass(nxt.st.rho);
        double minr = *std::min_element(nxt.st.rho.v.begin(), nxt.st.rho.v.end());
        double maxr = *std::max_element(nxt.st.rho.v.begin(), nxt.st.rho.v.end());
        masses.push_back(mass);
        minr_v.push_back(minr);
        maxr_v.push_back(maxr);
        cflm_v.push_back(dtmax / dt);
        sm.min_rho_overall = std::min(sm.min_rho_overall, minr);
        sm.mass_drift_rel_max =
            std::max(sm.mass_drift_rel_max, std::abs(mass - mass0) / std::abs(mass0));
        if (minr < 0.0)
            throw SolverError("positivity lost at step " + std::to_string(nstep));
        prev = std::move(cur);
        cur = std::move(nxt);
        have_prev = true;
    }
    detail::finalize_record(rec, slabs, snap0, z1, cfg.gamma, cfg.constants, 2);
    for (std::size_t i = 0; i < rec.rows.size(); ++i) {
        rec.rows[i].mass = masses[i];
        rec.rows[i].min_rho = minr_v[i];
        rec.rows[i].max_rho = maxr_v[i];
        rec.rows[i].cfl_margin = cflm_v[i];
    }
    sm.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    return rec;
}

inline RunRecord run(const RunConfig& cfg) { return cfg.dim == 1 ? run_1d(cfg) : run_2d(cfg); }

// ---------------------------------------------------------------------------
// CSV and plot output
// ---------------------------------------------------------------------------

inline const char* csv_header() {
    return "step,t,mass,min_rho,max_rho,cfl_margin,int_R1_sq,int_R2_sq,int_R3_sq,"
           "A,A1,A2,A3,a_t,E_t,cond_lhs,certified,"
           "snap_rho_linf,snap_rho_l3sq,snap_rho_pow_l3sq,snap_gradc_l3,snap_gradc_linf,"
           "snap_eta_c";
}

inline void write_csv(const RunRecord& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file " + path);
    out << "# kscert-csv v1\n" << csv_header() << "\n";
    for (const StepRow& r : rec.rows) {
        using detail::fmt17;
        out << r.step << ',' << fmt17(r.t) << ',' << fmt17(r.mass) << ',' << fmt17(r.min_rho)
            << ',' << fmt17(r.max_rho) << ',' << fmt17(r.cfl_margin) << ',' << fmt17(r.r1_sq)
            << ',' << fmt17(r.r2_sq) << ',' << fmt17(r.r3_sq) << ',' << fmt17(r.A) << ','
            << fmt17(r.A1) << ',' << fmt17(r.A2) << ',' << fmt17(r.A3) << ',' << fmt17(r.a_t)
            << ',' << fmt17(r.E_t) << ',' << fmt17(r.cond_lhs) << ',' << r.certified << ','
            << fmt17(r.snap.rho_linf) << ',' << fmt17(r.snap.rho_l3sq) << ','
            << fmt17(r.snap.rho_pow_l3sq) << ',' << fmt17(r.snap.gradc_l3) << ','
            << fmt17(r.snap.gradc_linf) << ',' << fmt17(r.snap.eta_c) << '\n';
    }
}

inline void write_plot_files(const RunRecord& rec, const std::string& prefix) {
    using detail::fmt17;
    {
        std::ofstream out(prefix + "_A.dat");
        if (!out) throw ConfigError("cannot open " + prefix + "_A.dat");
        for (const StepRow& r : rec.rows) out << fmt17(r.t) << ' ' << fmt17(r.A) << '\n';
    }
    {
        std::ofstream out(prefix + "_cond.dat");
        if (!out) throw ConfigError("cannot open " + prefix + "_cond.dat");
        for (const StepRow& r : rec.rows) out << fmt17(r.t) << ' ' << fmt17(r.cond_lhs) << '\n';
    }
}

// Data needed to re-evaluate the certification from a stored run.
struct StoredRun {
    std::vector<double> t, A;
    std::vector<NormSnapshot> snaps;
};

inline StoredRun read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    StoredRun sr;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("step,", 0) == 0) continue;
        std::vector<double> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(std::strtod(tok.c_str(), nullptr));
        if (f.size() < 23) throw ConfigError("malformed csv row in " + path);
        sr.t.push_back(f[1]);
        sr.A.push_back(f[9]);
        NormSnapshot s;
        s.t = f[1];
        s.rho_linf = f[17];
        s.rho_l3sq = f[18];
        s.rho_pow_l3sq = f[19];
        s.gradc_l3 = f[20];
        s.gradc_linf = f[21];
        s.eta_c = f[22];
        sr.snaps.push_back(s);
    }
    if (sr.t.empty()) throw ConfigError("no data rows in " + path);
    return sr;
}

inline CertificationReport certify_stored(const StoredRun& sr, double gamma,
                                          const ConstantsTable& cs, int dim) {
    std::vector<double> a(sr.t.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a_gamma_of_t(sr.snaps[i], gamma, cs, dim);
    return certify(sr.t, sr.A, a, gamma, cs);
}

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

struct EocRow {
    int n = 0;
    double A1 = 0, eoc1 = 0, A2 = 0, eoc2 = 0, A3 = 0, eoc3 = 0, A = 0, eoc = 0;
    bool has_eoc = false;
    bool nondoubling = false;
};

struct EocTable {
    std::vector<EocRow> rows;
};

inline double eoc_value(double coarse, double fine, int n_coarse, int n_fine, bool& nondoubling) {
    if (n_fine == 2 * n_coarse) {
        nondoubling = false;
        return std::log2(coarse / fine);
    }
    nondoubling = true;
    return std::log(coarse / fine) / std::log(double(n_fine) / n_coarse);
}

inline EocTable eoc_from_summaries(const std::vector<int>& ns, const std::vector<RunSummary>& sums) {
    if (ns.size() < 2) throw ConfigError("convergence study needs at least 2 meshes");
    EocTable t;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        EocRow r;
        r.n = ns[i];
        r.A1 = sums[i].A1_T;
        r.A2 = sums[i].A2_T;
        r.A3 = sums[i].A3_T;
        r.A = sums[i].A_T;
        if (i > 0) {
            r.has_eoc = true;
            r.eoc1 = eoc_value(sums[i - 1].A1_T, r.A1, ns[i - 1], ns[i], r.nondoubling);
            r.eoc2 = eoc_value(sums[i - 1].A2_T, r.A2, ns[i - 1], ns[i], r.nondoubling);
            r.eoc3 = eoc_value(sums[i - 1].A3_T, r.A3, ns[i - 1], ns[i], r.nondoubling);
            r.eoc = eoc_value(sums[i - 1].A_T, r.A, ns[i - 1], ns[i], r.nondoubling);
        }
        t.rows.push_back(r);
    }
    return t;
}

// Runs the config template over a mesh list; independent runs may execute
// concurrently (threads > 1).
inline EocTable convergence_study(const RunConfig& tmpl, const std::vector<int>& ns,
                                  std::vector<RunRecord>* records = nullptr) {
    std::vector<RunRecord> recs(ns.size());
    int workers = std::max(1, std::min<int>(tmpl.threads, int(ns.size())));
    std::vector<std::string> errors(ns.size());
    if (workers == 1) {
        for (std::size_t i = 0; i < ns.size(); ++i) {
            RunConfig c = tmpl;
            c.n = ns[i];
            c.out_path.clear();
            c.plot_prefix.clear();
            recs[i] = run(c);
        }
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w]() {
                for (std::size_t i = w; i < ns.size(); i += workers) {
                    try {
                        RunConfig c = tmpl;
                        c.n = ns[i];
                        c.out_path.clear();
                        c.plot_prefix.clear();
                        recs[i] = run(c);
                    } catch (const std::exception& e) {
                        errors[i] = e.what();
                    }
                }
            });
        (void)next;
        for (auto& th : pool) th.join();
        for (const std::string& e : errors)
            if (!e.empty()) throw SolverError("convergence run failed: " + e);
    }
    std::vector<RunSummary> sums;
    for (const RunRecord& r : recs) sums.push_back(r.summary);
    if (records) *records = std::move(recs);
    return eoc_from_summaries(ns, sums);
}

inline std::string render_eoc_table(const EocTable& t) {
    char buf[256];
    std::string out;
    out += "    n          A1     EOC          A2     EOC          A3     EOC           A     EOC\n";
    for (const EocRow& r : t.rows) {
        auto num = [&](double v) {
            char b[32];
            std::snprintf(b, sizeof b, "%11.3e", v);
            return std::string(b);
        };
        auto eoc = [&](double v, bool has) {
            char b[32];
            if (has)
                std::snprintf(b, sizeof b, "%7.2f", v);
            else
                std::snprintf(b, sizeof b, "%7s", "");
            return std::string(b);
        };
        std::snprintf(buf, sizeof buf, "%5d %s %s %s %s %s %s %s %s%s\n", r.n, num(r.A1).c_str(),
                      eoc(r.eoc1, r.has_eoc).c_str(), num(r.A2).c_str(),
                      eoc(r.eoc2, r.has_eoc).c_str(), num(r.A3).c_str(),
                      eoc(r.eoc3, r.has_eoc).c_str(), num(r.A).c_str(),
                      eoc(r.eoc, r.has_eoc).c_str(), r.nondoubling ? "  (nondoubling ratio)" : "");
        out += buf;
    }
    return out;
}

inline void write_eoc_csv(const EocTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << "n,A1,EOC1,A2,EOC2,A3,EOC3,A,EOC,nondoubling\n";
    using detail::fmt17;
    for (const EocRow& r : t.rows)
        out << r.n << ',' << fmt17(r.A1) << ',' << (r.has_eoc ? fmt17(r.eoc1) : "") << ','
            << fmt17(r.A2) << ',' << (r.has_eoc ? fmt17(r.eoc2) : "") << ',' << fmt17(r.A3) << ','
            << (r.has_eoc ? fmt17(r.eoc3) : "") << ',' << fmt17(r.A) << ','
            << (r.has_eoc ? fmt17(r.eoc) : "") << ',' << (r.nondoubling ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Config file parsing (flat key = value lines)
// ---------------------------------------------------------------------------

inline void apply_config_line(RunConfig& c, const std::string& key, const std::string& value) {
    auto to_d = [&](const std::string& s) {
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str()) throw ConfigError("bad numeric value for " + key);
        return v;
    };
    auto to_b = [&](const std::string& s) {
        if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
        if (s == "0" || s == "false" || s == "off" || s == "no") return false;
        throw ConfigError("bad boolean value for " + key);
    };
    if (key == "dim") c.dim = int(to_d(value));
    else if (key == "gamma") c.gamma = to_d(value);
    else if (key == "tfinal") c.T = to_d(value);
    else if (key == "n") c.n = int(to_d(value));
    else if (key == "dt") c.dt = to_d(value);
    else if (key == "lumping") c.lumping = to_b(value);
    else if (key == "quad_order") c.quad_order = int(to_d(value));
    else if (key == "chemo_tol") c.chemo_tol = to_d(value);
    else if (key == "scheme_tol") c.scheme_tol = to_d(value);
    else if (key == "cfl_safety") c.cfl_safety = to_d(value);
    else if (key == "C_S") c.constants.C_S = to_d(value);
    else if (key == "C_Sp") c.constants.C_Sp = to_d(value);
    else if (key == "C_ell") c.constants.C_ell = to_d(value);
    else if (key == "Ctilde_S") c.constants.Ctilde_S = to_d(value);
    else if (key == "first_slab_policy") {
        if (value == "hold") c.first_slab = FirstSlabPolicy::Hold;
        else if (value == "extrapolate") c.first_slab = FirstSlabPolicy::Extrapolate;
        else throw ConfigError("first_slab_policy must be hold or extrapolate");
    } else if (key == "z1_policy") {
        if (value == "surrogate") c.z1_policy = RunConfig::Z1Policy::Surrogate;
        else if (value == "zero") c.z1_policy = RunConfig::Z1Policy::Zero;
        else throw ConfigError("z1_policy must be surrogate or zero");
    } else if (key == "out") c.out_path = value;
    else if (key == "plot_prefix") c.plot_prefix = value;
    else if (key == "threads") c.threads = int(to_d(value));
    else if (key == "seed") c.seed = (unsigned long long)to_d(value);
    else if (key == "interfaces") {
        c.interfaces.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) c.interfaces.push_back(to_d(tok));
    } else if (key == "interfaces_file") {
        std::ifstream in(value);
        if (!in) throw ConfigError("cannot open interfaces file " + value);
        c.interfaces.clear();
        double v;
        while (in >> v) c.interfaces.push_back(v);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            std::size_t e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key = value");
        apply_config_line(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

}  // namespace kscert
