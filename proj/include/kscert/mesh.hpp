#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kscert {

// Periodic interval mesh with (possibly) nonuniform cells.
//
// Cells K_i = [iface[i], iface[i+1]], i = 0..N-1, identified periodically on
// [0, L].  The dual vertex mesh carries the cell midpoints; dual segment i
// runs from midpoint i to midpoint i+1 (wrapping) and has length dmid[i].
struct Mesh1D {
    double L = 1.0;
    int N = 0;
    std::vector<double> iface;  // N+1 interface coordinates, iface[0] = 0, iface[N] = L
    std::vector<double> h;      // cell sizes
    std::vector<double> xm;     // cell midpoints
    std::vector<double> dmid;   // dmid[i] = (h[i] + h[i+1 mod N]) / 2

    int next(int i) const { return i + 1 < N ? i + 1 : 0; }
    int prev(int i) const { return i > 0 ? i - 1 : N - 1; }
};

inline Mesh1D build_mesh_1d(const std::vector<double>& interfaces) {
    if (interfaces.size() < 3) throw std::invalid_argument("mesh needs at least 2 cells");
    if (interfaces.front() != 0.0) throw std::invalid_argument("first interface must be 0");
    for (std::size_t i = 1; i < interfaces.size(); ++i)
        if (!(interfaces[i] > interfaces[i - 1]))
            throw std::invalid_argument("interfaces must be strictly increasing");
    Mesh1D m;
    m.iface = interfaces;
    m.N = static_cast<int>(interfaces.size()) - 1;
    m.L = interfaces.back();
    m.h.resize(m.N);
    m.xm.resize(m.N);
    for (int i = 0; i < m.N; ++i) {
        m.h[i] = m.iface[i + 1] - m.iface[i];
        m.xm[i] = 0.5 * (m.iface[i + 1] + m.iface[i]);
    }
    m.dmid.resize(m.N);
    for (int i = 0; i < m.N; ++i) m.dmid[i] = 0.5 * (m.h[i] + m.h[m.next(i)]);
    return m;
}

inline Mesh1D uniform_mesh_1d(int n, double L = 1.0) {
    if (n < 2) throw std::invalid_argument("need n >= 2");
    std::vector<double> ifc(n + 1);
    for (int i = 0; i <= n; ++i) ifc[i] = L * i / n;
    ifc[0] = 0.0;
    ifc[n] = L;
    return build_mesh_1d(ifc);
}

// Uniform periodic Cartesian mesh of n x n square cells on [0, L]^2.
//
// Cell (j, k), zero-based, has flat index k*n + j.  The chemoattractant lives
// on the dual triangulation: dual squares [x_j, x_{j+1}] x [y_k, y_{k+1}]
// spanned by cell midpoints, each split along the antidiagonal into a
// lower-left and an upper-right triangle.
struct Mesh2D {
    double L = 1.0;
    int n = 0;  // cells per direction
    int N = 0;  // n * n
    double h = 0.0;

    int idx(int j, int k) const { return k * n + j; }
    int wrap(int j) const {
        j %= n;
        return j < 0 ? j + n : j;
    }
    int idxw(int j, int k) const { return wrap(k) * n + wrap(j); }
    double xmid(int j) const { return (j + 0.5) * h; }   // cell midpoint = dual vertex
    double xface(int j) const { return j * h; }          // cell interface
};

inline Mesh2D build_mesh_2d(int n, double L = 1.0) {
    if (n < 2) throw std::invalid_argument("need n >= 2");
    if (!(L > 0.0)) throw std::invalid_argument("need L > 0");
    Mesh2D m;
    m.n = n;
    m.N = n * n;
    m.L = L;
    m.h = L / n;
    return m;
}

}  // namespace kscert
