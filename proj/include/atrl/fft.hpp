#pragma once

// Thin RAII layer over FFTW. Planning is serialized behind a global mutex
// (the FFTW planner is not thread-safe); plans are cached per thread and per
// size, and always built with FFTW_ESTIMATE so the algorithm choice (and
// therefore roundoff) is reproducible run to run.

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "atrl/common.hpp"

namespace atrl::fft {

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Midpoint-grid trigonometric transforms on x_j = (j + 1/2) pi / n:
//   sine synthesis   u(x_j) = sum_{m=1..n} c_m sin(m x_j)
//   cosine synthesis v(x_j) = sum_{m=1..n-1} d_m cos(m x_j)
//   sine analysis    c_m = (2/n) sum_j u(x_j) sin(m x_j)
// The analysis quadrature is exact for sine polynomials of degree < 2n.
class midpoint_trig {
  public:
    explicit midpoint_trig(std::size_t n) : n_(n) {
        if (n < 2) throw dimension_error("fft: grid too small");
        in_ = fftw_alloc_real(n);
        out_ = fftw_alloc_real(n);
        std::lock_guard<std::mutex> g(planner_mutex());
        sin_synth_ = fftw_plan_r2r_1d(static_cast<int>(n), in_, out_, FFTW_RODFT01, FFTW_ESTIMATE);
        cos_synth_ = fftw_plan_r2r_1d(static_cast<int>(n), in_, out_, FFTW_REDFT01, FFTW_ESTIMATE);
        sin_anal_ = fftw_plan_r2r_1d(static_cast<int>(n), in_, out_, FFTW_RODFT10, FFTW_ESTIMATE);
        if (!sin_synth_ || !cos_synth_ || !sin_anal_) throw std::runtime_error("fft: planning failed");
    }

    ~midpoint_trig() {
        std::lock_guard<std::mutex> g(planner_mutex());
        fftw_destroy_plan(sin_synth_);
        fftw_destroy_plan(cos_synth_);
        fftw_destroy_plan(sin_anal_);
        fftw_free(in_);
        fftw_free(out_);
    }

    midpoint_trig(const midpoint_trig&) = delete;
    midpoint_trig& operator=(const midpoint_trig&) = delete;

    std::size_t size() const { return n_; }

    // c has up to n-1 leading sine amplitudes (mode m = index + 1).
    void sine_synthesis(const std::vector<double>& c, std::vector<double>& values) {
        if (c.size() >= n_) throw dimension_error("fft: too many sine modes for grid");
        std::memset(in_, 0, n_ * sizeof(double));
        for (std::size_t m = 0; m < c.size(); ++m) in_[m] = 0.5 * c[m];
        fftw_execute(sin_synth_);
        values.assign(out_, out_ + n_);
    }

    // d has up to n-1 cosine amplitudes for modes 1..n-1 (no constant term).
    void cosine_synthesis(const std::vector<double>& d, std::vector<double>& values) {
        if (d.size() >= n_) throw dimension_error("fft: too many cosine modes for grid");
        std::memset(in_, 0, n_ * sizeof(double));
        for (std::size_t m = 0; m < d.size(); ++m) in_[m + 1] = 0.5 * d[m];
        fftw_execute(cos_synth_);
        values.assign(out_, out_ + n_);
    }

    // Returns the first `modes` sine amplitudes of the grid function.
    void sine_analysis(const std::vector<double>& values, std::size_t modes, std::vector<double>& c) {
        if (values.size() != n_) throw dimension_error("fft: value count != grid size");
        if (modes > n_) throw dimension_error("fft: more modes than grid resolves");
        std::memcpy(in_, values.data(), n_ * sizeof(double));
        fftw_execute(sin_anal_);
        c.resize(modes);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t m = 0; m < modes; ++m) c[m] = scale * out_[m];
    }

  private:
    std::size_t n_;
    double* in_;
    double* out_;
    fftw_plan sin_synth_;
    fftw_plan cos_synth_;
    fftw_plan sin_anal_;
};

// Unnormalized complex 2d FFT pair on an M x M periodic grid; backward is
// spectrum -> grid, forward is grid -> M^2 * spectrum.
class fourier_2d {
  public:
    explicit fourier_2d(std::size_t m) : m_(m) {
        if (m < 4) throw dimension_error("fft: 2d grid too small");
        const std::size_t total = m * m;
        buf_a_ = fftw_alloc_complex(total);
        buf_b_ = fftw_alloc_complex(total);
        std::lock_guard<std::mutex> g(planner_mutex());
        backward_ = fftw_plan_dft_2d(static_cast<int>(m), static_cast<int>(m), buf_a_, buf_b_,
                                     FFTW_BACKWARD, FFTW_ESTIMATE);
        forward_ = fftw_plan_dft_2d(static_cast<int>(m), static_cast<int>(m), buf_a_, buf_b_,
                                    FFTW_FORWARD, FFTW_ESTIMATE);
        if (!backward_ || !forward_) throw std::runtime_error("fft: planning failed");
    }

    ~fourier_2d() {
        std::lock_guard<std::mutex> g(planner_mutex());
        fftw_destroy_plan(backward_);
        fftw_destroy_plan(forward_);
        fftw_free(buf_a_);
        fftw_free(buf_b_);
    }

    fourier_2d(const fourier_2d&) = delete;
    fourier_2d& operator=(const fourier_2d&) = delete;

    std::size_t size() const { return m_; }
    std::complex<double>* input() { return reinterpret_cast<std::complex<double>*>(buf_a_); }
    const std::complex<double>* output() const { return reinterpret_cast<const std::complex<double>*>(buf_b_); }

    void clear_input() { std::memset(buf_a_, 0, m_ * m_ * sizeof(fftw_complex)); }
    void run_backward() { fftw_execute(backward_); }
    void run_forward() { fftw_execute(forward_); }

    std::size_t slot(int kx, int ky) const {
        const int M = static_cast<int>(m_);
        const int ix = ((kx % M) + M) % M;
        const int iy = ((ky % M) + M) % M;
        return static_cast<std::size_t>(iy) * m_ + static_cast<std::size_t>(ix);
    }

  private:
    std::size_t m_;
    fftw_complex* buf_a_;
    fftw_complex* buf_b_;
    fftw_plan backward_;
    fftw_plan forward_;
};

inline midpoint_trig& trig_workspace(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::unique_ptr<midpoint_trig>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<midpoint_trig>(n);
    return *slot;
}

inline fourier_2d& fourier_workspace(std::size_t m) {
    thread_local std::unordered_map<std::size_t, std::unique_ptr<fourier_2d>> cache;
    auto& slot = cache[m];
    if (!slot) slot = std::make_unique<fourier_2d>(m);
    return *slot;
}

}  // namespace atrl::fft
