#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kscert {

// Gauss-Legendre rule with q points, exact for polynomials of degree <= 2q-1.
struct GaussLegendre {
    int q = 0;
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2

    explicit GaussLegendre(int q_) : q(q_), nodes(q_), weights(q_) {
        if (q < 1 || q > 64) throw std::invalid_argument("quadrature order out of range");
        for (int i = 0; i < q; ++i) {
            // Newton iteration from the Chebyshev estimate of the i-th root.
            double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                if (q == 1) { p1 = x; }
                for (int k = 2; k <= q; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double pq = (q == 1) ? x : p1;
                double pqm1 = (q == 1) ? 1.0 : p0;
                dp = q * (x * pq - pqm1) / (x * x - 1.0);
                double dx = pq / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[q - 1 - i] = x;
            weights[q - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    // Integrate f over [a, b].
    template <class F>
    double interval(double a, double b, F&& f) const {
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < q; ++i) s += weights[i] * f(mid + half * nodes[i]);
        return s * half;
    }

    // Integrate f(x, y) over [ax, bx] x [ay, by] (tensor rule).
    template <class F>
    double rect(double ax, double bx, double ay, double by, F&& f) const {
        double mx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
        double my = 0.5 * (ay + by), hy = 0.5 * (by - ay);
        double s = 0.0;
        for (int i = 0; i < q; ++i) {
            double x = mx + hx * nodes[i];
            double row = 0.0;
            for (int j = 0; j < q; ++j) row += weights[j] * f(x, my + hy * nodes[j]);
            s += weights[i] * row;
        }
        return s * hx * hy;
    }
};

// Degree-5 rule on a triangle with vertices a, b, c (7 points).
template <class F>
inline double triangle_deg5(const double a[2], const double b[2], const double c[2], F&& f) {
    static const double w0 = 9.0 / 40.0;
    static const double wa = (155.0 - std::sqrt(15.0)) / 1200.0;
    static const double wb = (155.0 + std::sqrt(15.0)) / 1200.0;
    static const double ga = (6.0 - std::sqrt(15.0)) / 21.0;
    static const double gb = (6.0 + std::sqrt(15.0)) / 21.0;
    const double bary[7][3] = {
        {1.0 / 3, 1.0 / 3, 1.0 / 3},
        {1 - 2 * ga, ga, ga}, {ga, 1 - 2 * ga, ga}, {ga, ga, 1 - 2 * ga},
        {1 - 2 * gb, gb, gb}, {gb, 1 - 2 * gb, gb}, {gb, gb, 1 - 2 * gb}};
    const double w[7] = {w0, wa, wa, wa, wb, wb, wb};
    double area = 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    double s = 0.0;
    for (int i = 0; i < 7; ++i) {
        double x = bary[i][0] * a[0] + bary[i][1] * b[0] + bary[i][2] * c[0];
        double y = bary[i][0] * a[1] + bary[i][1] * b[1] + bary[i][2] * c[1];
        s += w[i] * f(x, y);
    }
    return s * area;
}

}  // namespace kscert
