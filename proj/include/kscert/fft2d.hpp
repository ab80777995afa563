#pragma once

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

#include "kscert/errors.hpp"

namespace kscert {

namespace detail {
// FFTW planning is not thread-safe; executing plans is.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

// Real 2D FFT helper for diagonal solves of periodic constant-stencil
// systems on an n x n grid.  Layout matches the flat cell index k*n + j
// (k = row).  Plans use FFTW_ESTIMATE so results are reproducible.
class Fft2D {
  public:
    explicit Fft2D(int n) : n_(n), nc_(n / 2 + 1) {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        real_ = fftw_alloc_real(static_cast<std::size_t>(n_) * n_);
        cplx_ = fftw_alloc_complex(static_cast<std::size_t>(n_) * nc_);
        if (!real_ || !cplx_) throw SolverError("fft allocation failed");
        fwd_ = fftw_plan_dft_r2c_2d(n_, n_, real_, cplx_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(n_, n_, cplx_, real_, FFTW_ESTIMATE);
        lam_.resize(n_);
        for (int i = 0; i < n_; ++i) lam_[i] = 2.0 - 2.0 * std::cos(2.0 * M_PI * i / n_);
    }
    ~Fft2D() {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(cplx_);
    }
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    int n() const { return n_; }

    // Solves the diagonalized system: out-hat = rhs-hat * invmul(lambda),
    // where lambda = lam(k) + lam(j) is the eigenvalue of the periodic
    // 5-point stencil {4; -1, -1, -1, -1}.
    template <class F>
    void solve_diagonal(const std::vector<double>& rhs, std::vector<double>& out, F&& invmul) {
        const std::size_t N = static_cast<std::size_t>(n_) * n_;
        for (std::size_t i = 0; i < N; ++i) real_[i] = rhs[i];
        fftw_execute(fwd_);
        for (int k = 0; k < n_; ++k)
            for (int j = 0; j < nc_; ++j) {
                double f = invmul(lam_[k] + lam_[j]) / double(N);
                std::size_t p = static_cast<std::size_t>(k) * nc_ + j;
                cplx_[p][0] *= f;
                cplx_[p][1] *= f;
            }
        fftw_execute(bwd_);
        out.resize(N);
        for (std::size_t i = 0; i < N; ++i) out[i] = real_[i];
    }

  private:
    int n_, nc_;
    double* real_ = nullptr;
    fftw_complex* cplx_ = nullptr;
    fftw_plan fwd_{}, bwd_{};
    std::vector<double> lam_;
};

}  // namespace kscert
