// Command line driver: time-stepping runs with certification output,
// mesh-convergence studies, re-certification of stored runs, and the
// randomized self-test suite.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kscert/harness.hpp"

namespace {

using namespace kscert;

int resolve_threads(int cli_threads, bool cli_given) {
    if (cli_given) return cli_threads;
    if (const char* env = std::getenv("KS_CERTIFY_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

void print_summary(const RunRecord& rec) {
    const RunSummary& s = rec.summary;
    std::printf("steps            : %d\n", s.steps);
    std::printf("total residual A : %.6e  (parts %.6e / %.6e / %.6e)\n", s.A_T, s.A1_T, s.A2_T,
                s.A3_T);
    std::printf("initial term     : %.6e\n", s.z1_initial);
    std::printf("mass drift (rel) : %.3e\n", s.mass_drift_rel_max);
    std::printf("min density      : %.3e\n", s.min_rho_overall);
    if (s.all_satisfied)
        std::printf("condition        : satisfied on [0, %.6g], error bound %.6e\n",
                    rec.cert.t.back(), s.bound);
    else if (std::isnan(s.certified_prefix_end))
        std::printf("condition        : violated from t = 0; no certified prefix\n");
    else
        std::printf("condition        : certified prefix [0, %.6g], bound there %.6e\n",
                    s.certified_prefix_end, s.bound);
    std::printf("gradient norm in the growth rate uses the broken maximum (uncertified surrogate)\n");
    std::printf("wall time        : %.2f s\n", s.wall_seconds);
}

int run_selftest(unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 10.0);
    std::uniform_real_distribution<double> G(1.0 + 1e-9, 3.0);
    int failures = 0;
    auto check = [&](bool ok, const char* what) {
        std::printf("%-58s %s\n", what, ok ? "ok" : "FAILED");
        if (!ok) ++failures;
    };

    {
        double worst = 0.0;
        for (int t = 0; t < 10000; ++t) {
            double margin = F_lower_bound_margin(U(rng), U(rng), G(rng));
            worst = std::min(worst, margin);
        }
        check(worst >= -1e-12, "secant slope lower bound (1e4 trials)");
    }
    {
        double worst = 0.0;
        for (int t = 0; t < 10000; ++t) {
            double u = U(rng), ub = U(rng), g = G(rng);
            double r = U(rng) + 1e-6, rb = U(rng) + 1e-6;
            LemmaMargins m = lemma_checks(u, ub, r, rb, g, 1.0 + U(rng) / 5.0);
            worst = std::min({worst, m.power_diff, m.mixed});
        }
        check(worst >= -1e-12, "scalar power inequalities (1e4 trials)");
    }
    {
        double worst = 0.0;
        for (int t = 0; t < 10000; ++t) {
            QuasiNormMargins m = quasi_norm_margins(U(rng), U(rng), G(rng));
            worst = std::min({worst, m.lower, m.upper});
        }
        check(worst >= -1e-12, "quasi-norm equivalence (1e4 trials)");
    }
    check(std::abs(c_gamma_low(2.0) - c_gamma_high(2.0)) <= 1e-12,
          "lower-bound constant branches agree at gamma = 2");
    check(std::abs(beta_low(2.0) - beta_high(2.0)) <= 1e-12,
          "condition exponent branches agree at gamma = 2");
    {
        GaussLegendre g(4);
        double v = g.interval(0.0, 1.0, [](double x) { return x * x * x * x * x * x * x; });
        check(std::abs(v - 0.125) < 1e-14, "quadrature exactness (degree 7 at order 4)");
    }
    {
        Mesh1D m = build_mesh_1d({0.0, 0.3, 0.7, 1.0});
        double sum = 0.0;
        for (double h : m.h) sum += h;
        check(std::abs(sum - m.L) < 1e-15, "mesh cell sizes sum to the domain length");
    }
    std::printf("%s\n", failures == 0 ? "self test passed" : "self test FAILED");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite volume chemotaxis solver with a posteriori certification"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    int cli_threads = 1;
    bool threads_given = false;
    std::string first_slab = "extrapolate", z1pol = "surrogate";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--dim", cfg.dim, "space dimension (1 or 2)");
        sub->add_option("--gamma", cfg.gamma, "diffusion exponent in [1,3]");
        sub->add_option("--n", cfg.n, "cells per direction");
        sub->add_option("--tfinal", cfg.T, "final time");
        sub->add_option("--dt", cfg.dt, "time step (default tfinal/n)");
        sub->add_option("--lumping", cfg.lumping, "mass lumping in the chemoattractant solve");
        sub->add_option("--quad-order", cfg.quad_order, "quadrature order per direction");
        sub->add_option("--config", config_path, "key = value config file");
        sub->add_option("--out", cfg.out_path, "CSV output path");
        sub->add_option("--plot-prefix", cfg.plot_prefix, "two-column plot file prefix");
        sub->add_option("--threads", cli_threads, "worker threads for independent runs")
            ->each([&](const std::string&) { threads_given = true; });
        sub->add_option("--seed", cfg.seed, "seed for randomized suites");
        sub->add_option("--first-slab-policy", first_slab, "hold | extrapolate");
        sub->add_option("--z1-policy", z1pol, "surrogate | zero");
        sub->add_option("--cfl-safety", cfg.cfl_safety, "safety factor on the advective limit");
        sub->add_option("--ctilde-s", cfg.constants.Ctilde_S, "embedding constant override");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "run one simulation with certification");
    add_common(cmd_run);

    CLI::App* cmd_conv = app.add_subcommand("converge", "mesh convergence study");
    add_common(cmd_conv);
    std::vector<int> mesh_list;
    cmd_conv->add_option("--meshes", mesh_list, "mesh resolutions (e.g. 100 200 400)")
        ->expected(-2);
    std::string eoc_out;
    cmd_conv->add_option("--table-out", eoc_out, "CSV path for the convergence table");

    CLI::App* cmd_cert = app.add_subcommand("certify", "re-evaluate conditions from a stored run");
    std::string record_path;
    cmd_cert->add_option("record", record_path, "CSV produced by run")->required();
    cmd_cert->add_option("--gamma", cfg.gamma, "diffusion exponent of the stored run");
    cmd_cert->add_option("--dim", cfg.dim, "dimension of the stored run");
    cmd_cert->add_option("--c-s", cfg.constants.C_S, "embedding constant override");
    cmd_cert->add_option("--c-sp", cfg.constants.C_Sp, "embedding constant override");
    cmd_cert->add_option("--ctilde-s", cfg.constants.Ctilde_S, "embedding constant override");

    CLI::App* cmd_self = app.add_subcommand("selftest", "randomized property suites");
    cmd_self->add_option("--seed", cfg.seed, "seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(cmd_self)) return run_selftest(cfg.seed);

        if (app.got_subcommand(cmd_cert)) {
            StoredRun sr = read_csv(record_path);
            CertificationReport rep = certify_stored(sr, cfg.gamma, cfg.constants, cfg.dim);
            std::printf("rows             : %zu\n", rep.t.size());
            if (rep.all_satisfied)
                std::printf("condition        : satisfied on [0, %.6g], bound %.6e\n",
                            rep.t.back(), rep.bound);
            else if (std::isnan(rep.certified_prefix_end))
                std::printf("condition        : violated from t = 0\n");
            else
                std::printf("condition        : certified prefix [0, %.6g], bound %.6e\n",
                            rep.certified_prefix_end, rep.bound);
            return 0;
        }

        // run / converge share the config pipeline: file first, flags override
        if (!config_path.empty()) {
            RunConfig file_cfg;
            load_config_file(file_cfg, config_path);
            RunConfig merged = file_cfg;
            CLI::App* active = app.got_subcommand(cmd_run) ? cmd_run : cmd_conv;
            auto touched = [&](const std::string& name) {
                CLI::Option* o = active->get_option_no_throw(name);
                return o && o->count() > 0;
            };
            if (touched("--dim")) merged.dim = cfg.dim;
            if (touched("--gamma")) merged.gamma = cfg.gamma;
            if (touched("--n")) merged.n = cfg.n;
            if (touched("--tfinal")) merged.T = cfg.T;
            if (touched("--dt")) merged.dt = cfg.dt;
            if (touched("--lumping")) merged.lumping = cfg.lumping;
            if (touched("--quad-order")) merged.quad_order = cfg.quad_order;
            if (touched("--out")) merged.out_path = cfg.out_path;
            if (touched("--plot-prefix")) merged.plot_prefix = cfg.plot_prefix;
            if (touched("--seed")) merged.seed = cfg.seed;
            if (touched("--cfl-safety")) merged.cfl_safety = cfg.cfl_safety;
            if (touched("--ctilde-s")) merged.constants.Ctilde_S = cfg.constants.Ctilde_S;
            cfg = merged;
        }
        if (first_slab == "hold") cfg.first_slab = FirstSlabPolicy::Hold;
        else if (first_slab == "extrapolate") cfg.first_slab = FirstSlabPolicy::Extrapolate;
        else throw ConfigError("--first-slab-policy must be hold or extrapolate");
        if (z1pol == "surrogate") cfg.z1_policy = RunConfig::Z1Policy::Surrogate;
        else if (z1pol == "zero") cfg.z1_policy = RunConfig::Z1Policy::Zero;
        else throw ConfigError("--z1-policy must be surrogate or zero");
        cfg.threads = resolve_threads(cli_threads, threads_given);

        if (app.got_subcommand(cmd_run)) {
            RunRecord rec = run(cfg);
            if (!cfg.out_path.empty()) write_csv(rec, cfg.out_path);
            if (!cfg.plot_prefix.empty()) write_plot_files(rec, cfg.plot_prefix);
            print_summary(rec);
            return 0;
        }
        if (app.got_subcommand(cmd_conv)) {
            if (mesh_list.size() < 2) throw ConfigError("need at least two mesh resolutions");
            EocTable table = convergence_study(cfg, mesh_list);
            std::fputs(render_eoc_table(table).c_str(), stdout);
            if (!eoc_out.empty()) write_eoc_csv(table, eoc_out);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const CflError& e) {
        std::fprintf(stderr, "cfl violation: %s\n", e.what());
        return 3;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
