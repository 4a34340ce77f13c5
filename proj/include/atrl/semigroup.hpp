#pragma once

// Analytic semigroup e^{-At} and the smoothing decay bound for spectral
// tails: for 0 < alpha < 1,
//
//   ||A^alpha e^{-At} Q_n u|| <= b_{n,alpha}(t) ||Q_n u||,
//
//   b_{n,alpha}(t) = (e t / alpha)^(-alpha)                 0 < t <= alpha/lambda_{n+1}
//                  = lambda_{n+1}^alpha e^{-lambda_{n+1} t} t >= alpha/lambda_{n+1}
//
// which is sup over lambda >= lambda_{n+1} of lambda^alpha e^{-lambda t};
// both branches agree at the switch point, and the second branch is attained
// by the pure mode n+1.

#include <cmath>

#include "atrl/field.hpp"

namespace atrl {

inline SpectralField semigroup_apply(const SpectralField& u, double t) {
    if (!(t >= 0.0)) throw domain_error("semigroup: t must be nonnegative");
    SpectralField w = u;
    const auto& lam = u.op->eigenvalues;
    for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] *= std::exp(-lam[i] * t);
    return w;
}

inline double tail_decay_bound(const OperatorSpec& op, std::size_t n, double alpha, double t) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("tail bound: alpha must lie in (0,1)");
    if (!(t > 0.0)) throw domain_error("tail bound: t must be positive");
    if (n + 1 > op.dimension()) throw dimension_error("tail bound: lambda_{n+1} not retained");
    const double lam = op.eigenvalues[n];
    const double t_switch = alpha / lam;
    if (t <= t_switch)
        return std::pow(std::exp(1.0) * t / alpha, -alpha);
    return std::pow(lam, alpha) * std::exp(-lam * t);
}

}  // namespace atrl
