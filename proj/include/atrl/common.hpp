#pragma once

// Shared plumbing: typed errors, compensated accumulation, deterministic
// random draws, small statistics helpers, and an index-parallel sweep whose
// results are reduced in index order (thread count never changes output).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace atrl {

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct sample_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct integrity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct estimation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an evolving state leaves the finite range; carries the first
// bad time so callers can report where the run died.
struct divergence_error : std::runtime_error {
    double time;
    explicit divergence_error(double t)
        : std::runtime_error("state diverged at t = " + std::to_string(t)), time(t) {}
};

// Neumaier variant of Kahan summation; the invariants downstream are pinned
// at 1e-12 relative, which plain summation does not reliably meet at D ~ 1e3.
class compensated_sum {
  public:
    void add(double x) {
        const double t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double compensated_dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw dimension_error("dot: length mismatch");
    compensated_sum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

// Deterministic normal draws: mt19937_64 plus explicit Box-Muller, because
// std::normal_distribution's stream is implementation-defined and reports
// must be byte-reproducible.
class normal_source {
  public:
    explicit normal_source(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double uniform() {  // in [0, 1)
        return (eng_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct linear_fit_result {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    std::size_t count = 0;
};

// Ordinary least squares of y against x with the coefficient of
// determination; callers exclude degenerate rows before calling.
inline linear_fit_result linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw dimension_error("linear_fit: length mismatch");
    if (x.size() < 2) throw sample_error("linear_fit: need at least two points");
    const double n = static_cast<double>(x.size());
    compensated_sum sx, sy;
    for (double v : x) sx.add(v);
    for (double v : y) sy.add(v);
    const double mx = sx.value() / n;
    const double my = sy.value() / n;
    compensated_sum sxx, sxy, syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
        syy.add((y[i] - my) * (y[i] - my));
    }
    if (sxx.value() <= 0.0) throw sample_error("linear_fit: x values are all equal");
    linear_fit_result out;
    out.slope = sxy.value() / sxx.value();
    out.intercept = my - out.slope * mx;
    out.count = x.size();
    const double ss_tot = syy.value();
    if (ss_tot <= 0.0) {
        out.r2 = 1.0;
    } else {
        compensated_sum ss_res;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (out.intercept + out.slope * x[i]);
            ss_res.add(r * r);
        }
        out.r2 = 1.0 - ss_res.value() / ss_tot;
    }
    return out;
}

// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw sample_error("quantile: empty sample");
    if (q < 0.0 || q > 1.0) throw domain_error("quantile: q outside [0,1]");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

// Runs fn(i) for i in [0, n); with threads > 1 the index range is split into
// contiguous chunks. fn must only write to per-index slots so the result is
// independent of the schedule.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error = nullptr;
    std::mutex err_mutex;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = static_cast<std::size_t>(w) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi]() {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace atrl
