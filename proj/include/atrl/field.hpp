#pragma once

// SpectralField: immutable-by-convention coefficient vector tied to an
// operator. Norm and projection helpers live here; all reductions use
// compensated summation.

#include <cmath>
#include <utility>
#include <vector>

#include "atrl/common.hpp"
#include "atrl/operator_spec.hpp"

namespace atrl {

struct SpectralField {
    OperatorPtr op;
    std::vector<double> a;  // coefficients in the eigenbasis of op, size D

    SpectralField() = default;
    SpectralField(OperatorPtr o, std::vector<double> coeffs) : op(std::move(o)), a(std::move(coeffs)) {
        if (!op) throw dimension_error("field: null operator");
        if (a.size() != op->dimension()) throw dimension_error("field: coefficient count != operator dimension");
    }

    std::size_t dimension() const { return a.size(); }
};

inline SpectralField zero_field(OperatorPtr op) {
    return SpectralField(op, std::vector<double>(op->dimension(), 0.0));
}

inline void check_compatible(const SpectralField& u, const SpectralField& v) {
    if (!u.op || !v.op) throw dimension_error("field: null operator");
    if (u.op != v.op && !same_operator(*u.op, *v.op))
        throw dimension_error("field: operator mismatch");
}

inline SpectralField operator+(const SpectralField& u, const SpectralField& v) {
    check_compatible(u, v);
    SpectralField w = u;
    for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] += v.a[i];
    return w;
}

inline SpectralField operator-(const SpectralField& u, const SpectralField& v) {
    check_compatible(u, v);
    SpectralField w = u;
    for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] -= v.a[i];
    return w;
}

inline SpectralField operator*(double c, const SpectralField& u) {
    SpectralField w = u;
    for (double& x : w.a) x *= c;
    return w;
}

inline double inner(const SpectralField& u, const SpectralField& v) {
    check_compatible(u, v);
    return compensated_dot(u.a, v.a);
}

// ||A^beta u||: sqrt of sum lambda_j^(2 beta) a_j^2. beta = 0, 1/2, 1 hit
// exact weight fast paths (1, lambda, lambda^2).
inline double fractional_power_norm(const SpectralField& u, double beta) {
    if (!u.op) throw dimension_error("norm: null operator");
    if (!std::isfinite(beta)) throw domain_error("norm: beta must be finite");
    compensated_sum s;
    const auto& lam = u.op->eigenvalues;
    if (beta == 0.0) {
        for (double x : u.a) s.add(x * x);
    } else if (beta == 0.5) {
        for (std::size_t i = 0; i < u.a.size(); ++i) s.add(lam[i] * u.a[i] * u.a[i]);
    } else if (beta == 1.0) {
        for (std::size_t i = 0; i < u.a.size(); ++i) s.add(lam[i] * lam[i] * u.a[i] * u.a[i]);
    } else {
        for (std::size_t i = 0; i < u.a.size(); ++i) s.add(std::pow(lam[i], 2.0 * beta) * u.a[i] * u.a[i]);
    }
    return std::sqrt(s.value());
}

inline double norm(const SpectralField& u) { return fractional_power_norm(u, 0.0); }

// A^beta u as a field (diagonal reweighting).
inline SpectralField apply_power(const SpectralField& u, double beta) {
    if (!u.op) throw dimension_error("apply_power: null operator");
    SpectralField w = u;
    const auto& lam = u.op->eigenvalues;
    if (beta == 1.0) {
        for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] *= lam[i];
    } else if (beta != 0.0) {
        for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] *= std::pow(lam[i], beta);
    }
    return w;
}

// Low/high split at mode n: low keeps modes 1..n, high keeps n+1..D.
struct ProjectionSplit {
    SpectralField low;
    SpectralField high;
    std::size_t n = 0;
};

inline ProjectionSplit project(const SpectralField& u, std::size_t n) {
    if (!u.op) throw dimension_error("project: null operator");
    if (n > u.dimension()) throw dimension_error("project: cutoff exceeds dimension");
    ProjectionSplit out;
    out.n = n;
    out.low = zero_field(u.op);
    out.high = zero_field(u.op);
    for (std::size_t i = 0; i < u.a.size(); ++i) {
        if (i < n)
            out.low.a[i] = u.a[i];
        else
            out.high.a[i] = u.a[i];
    }
    return out;
}

// ||P_n u|| and ||Q_n u|| in the A^alpha norm without materializing fields.
inline double low_mode_norm(const SpectralField& u, std::size_t n, double alpha) {
    if (n > u.dimension()) throw dimension_error("low_mode_norm: cutoff exceeds dimension");
    compensated_sum s;
    const auto& lam = u.op->eigenvalues;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (alpha == 0.0) ? 1.0 : std::pow(lam[i], 2.0 * alpha);
        s.add(w * u.a[i] * u.a[i]);
    }
    return std::sqrt(s.value());
}

inline double high_mode_norm(const SpectralField& u, std::size_t n, double alpha) {
    if (n > u.dimension()) throw dimension_error("high_mode_norm: cutoff exceeds dimension");
    compensated_sum s;
    const auto& lam = u.op->eigenvalues;
    for (std::size_t i = n; i < u.a.size(); ++i) {
        const double w = (alpha == 0.0) ? 1.0 : std::pow(lam[i], 2.0 * alpha);
        s.add(w * u.a[i] * u.a[i]);
    }
    return std::sqrt(s.value());
}

}  // namespace atrl
