#pragma once

// Test-only reference implementations, deliberately independent of the
// library code paths: plain adaptive quadrature, naive O(n^2) transforms,
// and brute-force sweeps. Used to freeze expected values and cross-check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, a, m);
    const double right = simpson(f, m, b);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 60) {
    if (!(b > a)) return 0.0;
    return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, depth);
}

// integral_0^inf b_{n,alpha}(t) e^{-mu t} dt by quadrature only. The
// singular branch (e t/alpha)^(-alpha) t in (0, t*] is integrated after the
// substitution t = s^(1/(1-alpha)), which removes the endpoint singularity;
// the tail is truncated where the integrand underflows the tolerance.
inline double tail_weighted_integral(double alpha, double mu, double lambda_next) {
    const double ts = alpha / lambda_next;
    const double p = 1.0 / (1.0 - alpha);
    const auto g = [&](double s) {
        const double t = std::pow(s, p);
        // f(t) dt = (e t/alpha)^(-alpha) e^(-mu t) * p * s^(p-1) ds and
        // t^(-alpha) * s^(p-1) = s^{-alpha p + p - 1} = s^0 = 1.
        return std::pow(std::exp(1.0) / alpha, -alpha) * std::exp(-mu * t) * p;
    };
    const double part1 = adaptive_simpson(g, 0.0, std::pow(ts, 1.0 - alpha), 1e-14);
    const double rate = lambda_next + mu;
    const double t_end = ts + 80.0 / rate;
    const auto h = [&](double t) { return std::pow(lambda_next, alpha) * std::exp(-lambda_next * t) * std::exp(-mu * t); };
    const double part2 = adaptive_simpson(h, ts, t_end, 1e-14);
    return part1 + part2;
}

// Naive midpoint-grid sine synthesis/analysis on x_j = (j + 1/2) pi / n.
inline std::vector<double> naive_sine_synthesis(const std::vector<double>& c, std::size_t n) {
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = (static_cast<double>(j) + 0.5) * M_PI / static_cast<double>(n);
        double s = 0.0;
        for (std::size_t m = 1; m <= c.size(); ++m) s += c[m - 1] * std::sin(static_cast<double>(m) * x);
        out[j] = s;
    }
    return out;
}

inline std::vector<double> naive_cosine_synthesis(const std::vector<double>& d, std::size_t n) {
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = (static_cast<double>(j) + 0.5) * M_PI / static_cast<double>(n);
        double s = 0.0;
        for (std::size_t m = 1; m <= d.size(); ++m) s += d[m - 1] * std::cos(static_cast<double>(m) * x);
        out[j] = s;
    }
    return out;
}

inline std::vector<double> naive_sine_analysis(const std::vector<double>& vals, std::size_t modes) {
    const std::size_t n = vals.size();
    std::vector<double> c(modes, 0.0);
    for (std::size_t m = 1; m <= modes; ++m) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = (static_cast<double>(j) + 0.5) * M_PI / static_cast<double>(n);
            s += vals[j] * std::sin(static_cast<double>(m) * x);
        }
        c[m - 1] = 2.0 * s / static_cast<double>(n);
    }
    return c;
}

}  // namespace oracle
