#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kscert/residual.hpp"

namespace kscert {

// Embedding and auxiliary constants of the conditional stability estimates.
// The cited values are for the unit torus; Ctilde_S depends on the diffusion
// exponent and must be supplied for exponents without a known value.
struct ConstantsTable {
    double C_S = 2.1358;    // H1 -> L6
    double C_Sp = 7.6112;   // H2 -> Linf route
    double C_ell = 1.0;     // elliptic regularity of c - lap(c) = rho
    double Ctilde_S = 0.0;  // W^{2,gamma+1} embedding; 0 = resolve from the known table

    double resolve_Ctilde(double gamma) const {
        if (Ctilde_S > 0.0) return Ctilde_S;
        if (std::abs(gamma - 1.5) < 1e-12) return 5.2494;
        if (std::abs(gamma - 2.0) < 1e-12) return 3.9228;
        throw ConfigError("no tabulated embedding constant for gamma = " + std::to_string(gamma) +
                          "; supply one explicitly");
    }
};

// Branch formulas kept separate so their agreement at gamma = 2 is testable.
inline double c_gamma_low(double gamma) { return 0.5 * gamma; }
inline double c_gamma_high(double gamma) { return gamma / std::pow(2.0, gamma - 1.0); }
inline double c_gamma(double gamma) { return gamma <= 2.0 ? c_gamma_low(gamma) : c_gamma_high(gamma); }

inline double beta_low(double gamma) { return (3.0 - gamma) / (2.0 * (gamma - 1.0)); }
inline double beta_high(double gamma) { return 0.5 * (gamma - 1.0); }
inline double beta_exponent(double gamma) {
    if (gamma <= 1.0) return 0.5;  // linear-diffusion condition
    return gamma < 2.0 ? beta_low(gamma) : beta_high(gamma);
}

inline double C_Y(double gamma) {
    return 1.0 / (gamma + 1.0) * std::pow(16.0 * gamma / (3.0 * gamma + 3.0), gamma);
}
inline double c_tilde_gamma(double gamma) {
    return std::pow(0.5 * c_gamma(gamma), 0.5 * (gamma + 1.0));
}
inline double C_Yp(double gamma, double Ctilde_S) {
    double ct = c_tilde_gamma(gamma);
    return std::sqrt(2.0) * ct * (gamma - 1.0) / (gamma + 1.0) *
           std::pow(16.0 * std::sqrt(2.0) * Ctilde_S * ct / (3.0 * gamma + 3.0),
                    2.0 / (gamma - 1.0));
}

inline double C_a(double gamma, const ConstantsTable& cs) {
    if (gamma < 2.0)
        return cs.C_S * C_Y(gamma) * std::pow(std::sqrt(2.0) * gamma, gamma + 1.0);
    return cs.resolve_Ctilde(gamma) * C_Yp(gamma, cs.resolve_Ctilde(gamma));
}

inline double B_constant(double gamma, const ConstantsTable& cs) {
    double Cts = cs.resolve_Ctilde(gamma);
    return cs.C_S * C_Y(gamma) * std::pow(std::sqrt(2.0) * gamma, gamma + 1.0) +
           Cts * C_Yp(gamma, Cts);
}

// ---------------------------------------------------------------------------
// Scalar inequalities backing the nonlinear estimate
// ---------------------------------------------------------------------------

// Secant slope of s -> s^gamma between rho and rho_bar.
inline double F_secant(double rho, double rho_bar, double gamma) {
    if (rho < 0.0 || rho_bar < 0.0) throw std::invalid_argument("F needs nonnegative arguments");
    if (rho == rho_bar) return gamma * pow_gm1(rho, gamma);
    return (std::pow(rho, gamma) - std::pow(rho_bar, gamma)) / (rho - rho_bar);
}

// F(rho, rho_bar) >= c_gamma (rho^{gamma-1} + rho_bar^{gamma-1}); margin >= 0
// when the inequality holds.
inline double F_lower_bound_margin(double rho, double rho_bar, double gamma) {
    return F_secant(rho, rho_bar, gamma) -
           c_gamma(gamma) * (pow_gm1(rho, gamma) + pow_gm1(rho_bar, gamma));
}

struct LemmaMargins {
    double power_diff;  // |u^a - ub^a| - |u - ub|^a
    double mixed;       // ((r^g - rb^g)(r - rb))^{g/(g+1)} - |r^{g-1} - rb^{g-1}||r - rb|
};

inline LemmaMargins lemma_checks(double u, double u_bar, double rho, double rho_bar, double gamma,
                                 double alpha) {
    if (u < 0.0 || u_bar < 0.0) throw std::invalid_argument("need nonnegative u");
    if (rho <= 0.0 || rho_bar <= 0.0) throw std::invalid_argument("need positive rho");
    LemmaMargins m;
    m.power_diff = std::abs(std::pow(u, alpha) - std::pow(u_bar, alpha)) -
                   std::pow(std::abs(u - u_bar), alpha);
    double prod = (std::pow(rho, gamma) - std::pow(rho_bar, gamma)) * (rho - rho_bar);
    m.mixed = std::pow(prod, gamma / (gamma + 1.0)) -
              std::abs(pow_gm1(rho, gamma) - pow_gm1(rho_bar, gamma)) * std::abs(rho - rho_bar);
    return m;
}

// Quasi-norm equivalence margins.  The difference of (gamma+1)/2 powers
// controls the mixed product from below only up to the Cauchy-Schwarz
// constant (gamma+1)^2/(4 gamma); both margins are >= 0 when the
// equivalence holds.
struct QuasiNormMargins {
    double lower;  // (gamma+1)^2/(4 gamma) * mixed - diff^2
    double upper;  // (gamma+1)/2 * diff^2 - mixed
};

inline QuasiNormMargins quasi_norm_margins(double rho, double rho_bar, double gamma) {
    if (rho < 0.0 || rho_bar < 0.0) throw std::invalid_argument("need nonnegative arguments");
    double mixed = (std::pow(rho, gamma) - std::pow(rho_bar, gamma)) * (rho - rho_bar);
    double d = std::pow(rho, 0.5 * (gamma + 1.0)) - std::pow(rho_bar, 0.5 * (gamma + 1.0));
    double dsq = d * d;
    QuasiNormMargins m;
    m.lower = (gamma + 1.0) * (gamma + 1.0) / (4.0 * gamma) * mixed - dsq;
    m.upper = 0.5 * (gamma + 1.0) * dsq - mixed;
    return m;
}

// ---------------------------------------------------------------------------
// Growth rate, condition, certification
// ---------------------------------------------------------------------------

// Growth rate a(t) evaluated from a norm snapshot.  The gradient norms of
// the exact reconstruction are replaced by computable surrogates: the L3
// norm is inflated by the elliptic estimator, the Linf norm is the raw
// broken maximum (an uncertified surrogate, flagged in reports).
inline double a_gamma_of_t(const NormSnapshot& s, double gamma, const ConstantsTable& cs,
                           int dim) {
    if (gamma == 1.0) {
        double g = s.gradc_linf;
        return 2.0 * cs.C_S * cs.C_S * s.rho_l3sq + 2.0 * g * g + 0.5;
    }
    double C = 0.5 * dim;
    double gradc_l3 = s.gradc_l3 + cs.C_S * s.eta_c;
    return 4.0 * cs.C_S * cs.C_S / c_gamma(gamma) * gamma * gamma * s.rho_pow_l3sq +
           C_a(gamma, cs) + 2.0 * (C + 1.0) * s.rho_linf + 2.0 * cs.C_S * gradc_l3 + 0.5;
}

// exp of the cumulative trapezoid integral of a(t).
inline std::vector<double> exp_integral(const std::vector<double>& t, const std::vector<double>& a) {
    if (t.size() != a.size() || t.empty()) throw std::invalid_argument("series size mismatch");
    std::vector<double> E(t.size());
    double acc = 0.0;
    E[0] = 1.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        acc += 0.5 * (a[i] + a[i - 1]) * (t[i] - t[i - 1]);
        E[i] = std::exp(acc);
    }
    return E;
}

// Left-hand side of the smallness condition at time t.
inline double condition_lhs(double A, double E, double t, double gamma, const ConstantsTable& cs) {
    if (gamma == 1.0) {
        double inner = 8.0 * (4.0 * std::sqrt(2.0) + 2.0) * cs.C_Sp * (1.0 + t) * E;
        return 8.0 * A * E * inner * inner;
    }
    double inner = 8.0 * B_constant(gamma, cs) * (1.0 + t) * E;
    return 8.0 * A * E * std::pow(inner, 1.0 / beta_exponent(gamma));
}

struct CertificationReport {
    bool linear_mode = false;
    double gamma = 1.0;
    std::vector<double> t, A, a, E, lhs;
    std::vector<char> satisfied;
    bool all_satisfied = false;
    double certified_prefix_end = std::numeric_limits<double>::quiet_NaN();
    double first_violation_t = std::numeric_limits<double>::quiet_NaN();
    double bound = std::numeric_limits<double>::quiet_NaN();  // 8 A E at the prefix end
    bool gradc_linf_surrogate = true;
};

// Evaluates the conditional error estimate on a common time grid of
// cumulative residuals A(t) and growth rates a(t).
inline CertificationReport certify(const std::vector<double>& t, const std::vector<double>& A,
                                   const std::vector<double>& a, double gamma,
                                   const ConstantsTable& cs) {
    if (t.empty() || t.size() != A.size() || t.size() != a.size())
        throw std::invalid_argument("certify needs nonempty series of equal length");
    if (gamma < 1.0 || gamma > 3.0) throw std::invalid_argument("gamma outside [1, 3]");
    CertificationReport r;
    r.linear_mode = gamma == 1.0;
    r.gamma = gamma;
    r.t = t;
    r.A = A;
    r.a = a;
    r.E = exp_integral(t, a);
    r.lhs.resize(t.size());
    r.satisfied.resize(t.size());
    std::size_t prefix = 0;
    bool broken = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        r.lhs[i] = condition_lhs(A[i], r.E[i], t[i], gamma, cs);
        r.satisfied[i] = r.lhs[i] <= 1.0;
        if (!r.satisfied[i] && !broken) {
            broken = true;
            r.first_violation_t = t[i];
        }
        if (!broken) prefix = i + 1;
    }
    r.all_satisfied = !broken;
    if (prefix > 0) {
        r.certified_prefix_end = t[prefix - 1];
        r.bound = 8.0 * A[prefix - 1] * r.E[prefix - 1];
    }
    return r;
}

}  // namespace kscert
