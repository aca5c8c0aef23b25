#ifndef FAIRGDA_CORE_MATH_HPP
#define FAIRGDA_CORE_MATH_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "fairgda/errors.hpp"

namespace fairgda {

using Vector = std::vector<double>;

// Probabilities are clamped into [kEpsClip, 1 - kEpsClip] before any log.
inline constexpr double kEpsClip = 1e-12;

// Below this norm a projection target is treated as the zero vector.
inline constexpr double kEpsProj = 1e-12;

// Numerically stable logistic function: evaluates exp only of a
// non-positive argument, so |z| up to 500 cannot overflow.
inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double dot(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) {
        throw dimension_error("dot: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

inline double squared_norm(const Vector& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return s;
}

inline double norm(const Vector& u) { return std::sqrt(squared_norm(u)); }

// u += c * v
inline void axpy(double c, const Vector& v, Vector& u) {
    if (u.size() != v.size()) {
        throw dimension_error("axpy: dimension mismatch");
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += c * v[i];
}

inline Vector scaled(const Vector& u, double c) {
    Vector r(u);
    for (double& x : r) x *= c;
    return r;
}

// Mean negative log-likelihood of binary labels under the given
// probabilities, with clipping so a saturated prediction stays finite.
inline double log_loss(const Vector& predictions, const Vector& labels) {
    if (predictions.size() != labels.size()) {
        throw dimension_error("log_loss: predictions/labels length mismatch");
    }
    if (predictions.empty()) {
        throw dimension_error("log_loss: empty input");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double p = predictions[i];
        if (p < kEpsClip) p = kEpsClip;
        if (p > 1.0 - kEpsClip) p = 1.0 - kEpsClip;
        total += labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
    }
    return -total / static_cast<double>(predictions.size());
}

// Projection of u onto the line spanned by v. A vanishing v gives the
// zero vector, so callers degrade to a plain descent step.
inline Vector project(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) {
        throw dimension_error("project: dimension mismatch");
    }
    const double vv = squared_norm(v);
    if (std::sqrt(vv) < kEpsProj) {
        return Vector(u.size(), 0.0);
    }
    return scaled(v, dot(u, v) / vv);
}

inline double pearson_correlation(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) {
        throw dimension_error("pearson_correlation: dimension mismatch");
    }
    if (u.size() < 2) {
        throw dimension_error("pearson_correlation: need length >= 2");
    }
    const double n = static_cast<double>(u.size());
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= n;
    mv /= n;
    double suv = 0.0, suu = 0.0, svv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double du = u[i] - mu;
        const double dv = v[i] - mv;
        suv += du * dv;
        suu += du * du;
        svv += dv * dv;
    }
    if (suu == 0.0 || svv == 0.0) {
        throw data_error("pearson_correlation: constant input vector");
    }
    return suv / (std::sqrt(suu) * std::sqrt(svv));
}

// Central-difference gradient, the verification oracle for every
// hand-derived gradient in this library.
inline Vector finite_diff_gradient(const std::function<double(const Vector&)>& f,
                                   const Vector& at, double step) {
    Vector g(at.size(), 0.0);
    Vector x = at;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + step;
        const double fp = f(x);
        x[i] = xi - step;
        const double fm = f(x);
        x[i] = xi;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

}  // namespace fairgda

#endif
