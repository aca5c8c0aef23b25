#ifndef FAIRGDA_METRICS_HPP
#define FAIRGDA_METRICS_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "fairgda/dataset.hpp"
#include "fairgda/errors.hpp"

namespace fairgda {

// Classifier decisions after thresholding sigma(w'x) at 0.5.
using HardPredictions = std::vector<int>;

inline HardPredictions harden(const Vector& probabilities) {
    HardPredictions bits(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        bits[i] = probabilities[i] > 0.5 ? 1 : 0;
    }
    return bits;
}

namespace detail {

inline double rate_ratio(double a, double b) {
    // Convention: 0/0 -> 1 (parity in the degenerate case), p/0 -> 0.
    if (a == 0.0 && b == 0.0) return 1.0;
    if (b == 0.0) return 0.0;
    return a / b;
}

}  // namespace detail

// Min-ratio of positive-prediction rates across the two sensitive groups.
inline double statistical_rate(const HardPredictions& pred, const Dataset& data) {
    if (pred.size() != data.size()) {
        throw dimension_error("statistical_rate: length mismatch");
    }
    if (data.group0.empty() || data.group1.empty()) {
        throw data_error("statistical_rate: empty sensitive group");
    }
    double pos0 = 0.0, pos1 = 0.0;
    for (std::size_t i : data.group0) pos0 += pred[i];
    for (std::size_t i : data.group1) pos1 += pred[i];
    const double rate0 = pos0 / static_cast<double>(data.group0.size());
    const double rate1 = pos1 / static_cast<double>(data.group1.size());
    const double r01 = detail::rate_ratio(rate0, rate1);
    const double r10 = detail::rate_ratio(rate1, rate0);
    return r01 < r10 ? r01 : r10;
}

// Min-ratio across groups of P[y = 0 | pred = 1, group]. Empty
// conditioning event (a group with no positive predictions) has no
// value, so the result is disengaged rather than a sentinel.
inline std::optional<double> false_discovery_rate(const HardPredictions& pred,
                                                  const Dataset& data) {
    if (pred.size() != data.size()) {
        throw dimension_error("false_discovery_rate: length mismatch");
    }
    double npos0 = 0.0, npos1 = 0.0;   // positives per group
    double fd0 = 0.0, fd1 = 0.0;       // positives with true label 0
    for (std::size_t i : data.group0) {
        if (pred[i] == 1) {
            npos0 += 1.0;
            if (data.labels[i] == 0.0) fd0 += 1.0;
        }
    }
    for (std::size_t i : data.group1) {
        if (pred[i] == 1) {
            npos1 += 1.0;
            if (data.labels[i] == 0.0) fd1 += 1.0;
        }
    }
    if (npos0 == 0.0 || npos1 == 0.0) return std::nullopt;
    const double p0 = fd0 / npos0;
    const double p1 = fd1 / npos1;
    const double r01 = detail::rate_ratio(p0, p1);
    const double r10 = detail::rate_ratio(p1, p0);
    return r01 < r10 ? r01 : r10;
}

inline double accuracy(const HardPredictions& pred, const Dataset& data) {
    if (pred.size() != data.size()) {
        throw dimension_error("accuracy: length mismatch");
    }
    double hits = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (static_cast<double>(pred[i]) == data.labels[i]) hits += 1.0;
    }
    return hits / static_cast<double>(pred.size());
}

// |w_eta| / max_i |w_i| over the non-noise coordinates; +inf when every
// non-noise weight is zero.
inline double noise_weight_ratio(const Vector& w) {
    if (w.size() < 2) {
        throw dimension_error("noise_weight_ratio: need dimension >= 2");
    }
    double max_rest = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double a = std::abs(w[i]);
        if (a > max_rest) max_rest = a;
    }
    const double w_eta = std::abs(w.back());
    if (max_rest == 0.0) {
        return w_eta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return w_eta / max_rest;
}

struct MetricReport {
    double accuracy = 0.0;
    double statistical_rate = 0.0;
    std::optional<double> false_discovery_rate;
    double positive_rate_group0 = 0.0;
    double positive_rate_group1 = 0.0;
};

inline MetricReport evaluate(const HardPredictions& pred, const Dataset& data) {
    MetricReport r;
    r.accuracy = accuracy(pred, data);
    r.statistical_rate = statistical_rate(pred, data);
    r.false_discovery_rate = false_discovery_rate(pred, data);
    double pos0 = 0.0, pos1 = 0.0;
    for (std::size_t i : data.group0) pos0 += pred[i];
    for (std::size_t i : data.group1) pos1 += pred[i];
    r.positive_rate_group0 = pos0 / static_cast<double>(data.group0.size());
    r.positive_rate_group1 = pos1 / static_cast<double>(data.group1.size());
    return r;
}

}  // namespace fairgda

#endif
