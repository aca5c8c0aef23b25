#ifndef FAIRGDA_OPTIMIZERS_HPP
#define FAIRGDA_OPTIMIZERS_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fairgda/core_math.hpp"
#include "fairgda/dataset.hpp"
#include "fairgda/errors.hpp"
#include "fairgda/metrics.hpp"
#include "fairgda/models.hpp"

namespace fairgda {

enum class Algorithm { normal_gda, ngd_modified, agd_modified };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::normal_gda: return "normal_gda";
        case Algorithm::ngd_modified: return "ngd_modified";
        default: return "agd_modified";
    }
}

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::ngd_modified;
    double eta1 = 0.1;  // adversary ascent rate
    double eta2 = 0.1;  // classifier descent rate (NGD / normal GDA)
    double alpha0 = 0.1;
    double alpha_p = 0.5;          // alpha_t = alpha0 * t^{-alpha_p}
    bool alpha_constant = false;   // constant-alpha mode (alpha_t = alpha0)
    int iterations = 100;
    std::optional<double> threshold;  // tau; disabled when empty
    std::uint64_t seed = 0;
    // AGD smoothness constants; non-positive means estimate empirically.
    double smoothness_l1 = 0.0;
    double smoothness_l2 = 0.0;
    int smoothness_samples = 16;

    double alpha_at(int t) const {
        return alpha_constant ? alpha0
                              : alpha0 * std::pow(static_cast<double>(t), -alpha_p);
    }

    void validate() const {
        if (eta1 < 0.0 || eta2 < 0.0 || alpha0 < 0.0) {
            throw config_error("optimizer: rates must be non-negative");
        }
        if (alpha_p < 0.0 || alpha_p > 1.0) {
            throw config_error("optimizer: alpha decay exponent must be in [0,1]");
        }
        if (iterations < 1) throw config_error("optimizer: iterations must be >= 1");
        if (threshold && (*threshold <= 0.0 || *threshold > 1.0)) {
            throw config_error("optimizer: threshold must be in (0,1]");
        }
    }
};

struct TraceRow {
    int t = 0;
    double loss_c = 0.0;
    double loss_f = 0.0;
    double accuracy = 0.0;
    // Training fairness (SR, or FDR for the FDR adversary); disengaged
    // when FDR conditions on an empty event.
    std::optional<double> fairness;
    double identity_residual = 0.0;  // <grad LF, step dir> + alpha ||grad LF||^2
    double grad_norm_f = 0.0;
    double grad_norm_c = 0.0;
    double alpha = 0.0;
};

using TrainingTrace = std::vector<TraceRow>;

// Best-accuracy-so-far checkpoint among iterates whose training fairness
// meets tau. Ties keep the earlier iterate.
struct ThresholdTracker {
    double tau = 0.0;
    double best_accuracy = -1.0;
    int best_iteration = -1;
    double best_fairness = 0.0;
    std::optional<ClassifierParams> best_classifier;
    AdversaryParams best_adversary;

    bool has_best() const { return best_classifier.has_value(); }

    void update(int t, const ClassifierParams& cls, const AdversaryParams& adv,
                double acc, std::optional<double> fairness) {
        if (!fairness || *fairness < tau) return;
        if (acc > best_accuracy) {
            best_accuracy = acc;
            best_iteration = t;
            best_fairness = *fairness;
            best_classifier = cls;
            best_adversary = adv;
        }
    }
};

// g = grad L_C - alpha grad L_F - proj(grad L_C onto grad L_F).
// A vanishing grad L_F collapses both fairness terms, leaving plain descent.
inline Vector modified_gradient(const LossGradients& grads, double alpha) {
    if (norm(grads.grad_w_lf) < kEpsProj) {
        return grads.grad_w_lc;
    }
    Vector g = grads.grad_w_lc;
    axpy(-alpha, grads.grad_w_lf, g);
    axpy(-1.0, project(grads.grad_w_lc, grads.grad_w_lf), g);
    return g;
}

struct RunResult {
    ClassifierParams classifier;
    AdversaryParams adversary;
    ThresholdTracker tracker;
    bool tracker_enabled = false;
    // Per-iteration parameter snapshots for the convergence diagnostics.
    std::vector<ClassifierParams> classifier_history;
    std::vector<AdversaryParams> adversary_history;
    double smoothness_l1 = 0.0;  // populated by AGD runs
    double smoothness_l2 = 0.0;
};

// Empirical Lipschitz constant of a gradient map: max pairwise
// ||grad(u) - grad(v)|| / ||u - v|| over sampled points, times 1.5.
inline double estimate_smoothness(const std::function<Vector(const Vector&)>& grad,
                                  std::size_t dim, int sample_points,
                                  std::uint64_t seed, double radius = 1.0) {
    if (sample_points < 2) {
        throw config_error("estimate_smoothness: need at least 2 sample points");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-radius, radius);
    std::vector<Vector> points(static_cast<std::size_t>(sample_points), Vector(dim));
    std::vector<Vector> grads;
    grads.reserve(points.size());
    for (auto& p : points) {
        for (double& x : p) x = uni(rng);
        grads.push_back(grad(p));
    }
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            Vector d = grads[i];
            axpy(-1.0, grads[j], d);
            Vector dp = points[i];
            axpy(-1.0, points[j], dp);
            const double dist = norm(dp);
            if (dist < 1e-12) continue;
            const double ratio = norm(d) / dist;
            if (ratio > best) best = ratio;
        }
    }
    constexpr double kSafety = 1.5;
    constexpr double kFloor = 1e-9;
    return std::max(best * kSafety, kFloor);
}

namespace detail {

inline std::optional<double> training_fairness(const AdversarySpec& spec,
                                               const HardPredictions& pred,
                                               const Dataset& base) {
    if (spec.kind == AdversaryKind::false_discovery) {
        return false_discovery_rate(pred, base);
    }
    return statistical_rate(pred, base);
}

inline void check_finite(double loss_c, double loss_f, int t) {
    constexpr double kBlowUp = 1e12;
    if (!std::isfinite(loss_c) || !std::isfinite(loss_f) ||
        std::abs(loss_c) > kBlowUp || std::abs(loss_f) > kBlowUp) {
        throw divergence_error(
            "training diverged at iteration " + std::to_string(t), t);
    }
}

// Shared descent-ascent loop for normal GDA and NGD with modified update.
inline RunResult run_gda(const OptimizerConfig& cfg, const AdversarySpec& spec,
                         const AugmentedDataset& data, TrainingTrace& trace,
                         bool modified) {
    cfg.validate();
    RunResult res;
    res.classifier.w.assign(data.dim(), 0.0);
    res.adversary = make_adversary_params(spec);
    res.tracker_enabled = cfg.threshold.has_value();
    if (res.tracker_enabled) res.tracker.tau = *cfg.threshold;
    trace.clear();
    trace.reserve(static_cast<std::size_t>(cfg.iterations));

    for (int t = 1; t <= cfg.iterations; ++t) {
        const double alpha = cfg.alpha_at(t);
        const LossGradients grads = gradients(spec, res.adversary, res.classifier, data);
        const Vector step_dir = modified ? modified_gradient(grads, alpha)
                                         : [&] {
                                               Vector g = grads.grad_w_lc;
                                               axpy(-alpha, grads.grad_w_lf, g);
                                               return g;
                                           }();
        axpy(cfg.eta1, grads.grad_u_lf, res.adversary.u);
        axpy(-cfg.eta2, step_dir, res.classifier.w);

        TraceRow row;
        row.t = t;
        row.alpha = alpha;
        row.grad_norm_f = norm(grads.grad_w_lf);
        row.grad_norm_c = norm(grads.grad_w_lc);
        row.identity_residual =
            dot(grads.grad_w_lf, step_dir) + alpha * squared_norm(grads.grad_w_lf);
        row.loss_c = classification_loss(res.classifier, data);
        row.loss_f = adversary_loss(res.adversary, spec, res.classifier, data);
        check_finite(row.loss_c, row.loss_f, t);
        const HardPredictions pred = harden(classify_soft(res.classifier, data));
        row.accuracy = accuracy(pred, data.base);
        row.fairness = training_fairness(spec, pred, data.base);
        trace.push_back(row);
        res.classifier_history.push_back(res.classifier);
        res.adversary_history.push_back(res.adversary);
        if (res.tracker_enabled) {
            res.tracker.update(t, res.classifier, res.adversary, row.accuracy,
                               row.fairness);
        }
    }
    return res;
}

}  // namespace detail

inline RunResult run_normal_gda(const OptimizerConfig& cfg, const AdversarySpec& spec,
                                const AugmentedDataset& data, TrainingTrace& trace) {
    return detail::run_gda(cfg, spec, data, trace, /*modified=*/false);
}

inline RunResult run_ngd_modified(const OptimizerConfig& cfg, const AdversarySpec& spec,
                                  const AugmentedDataset& data, TrainingTrace& trace) {
    return detail::run_gda(cfg, spec, data, trace, /*modified=*/true);
}

// Accelerated descent for noisy gradient oracles, with the modified step
// as the oracle. psi(w) = ||w||^2 / 2, so grad psi(w) = w and the p/q
// sequences are convex combinations of past iterates. Reported
// classifier is q_T.
inline RunResult run_agd_modified(const OptimizerConfig& cfg, const AdversarySpec& spec,
                                  const AugmentedDataset& data, TrainingTrace& trace) {
    cfg.validate();
    RunResult res;
    const std::size_t dim = data.dim();
    res.adversary = make_adversary_params(spec);
    res.tracker_enabled = cfg.threshold.has_value();
    if (res.tracker_enabled) res.tracker.tau = *cfg.threshold;
    trace.clear();
    trace.reserve(static_cast<std::size_t>(cfg.iterations));

    double l1 = cfg.smoothness_l1;
    double l2 = cfg.smoothness_l2;
    if (l1 <= 0.0) {
        l1 = estimate_smoothness(
            [&](const Vector& w) {
                return classification_gradient(ClassifierParams{w}, data);
            },
            dim, cfg.smoothness_samples, cfg.seed + 1);
    }
    if (l2 <= 0.0) {
        const AdversaryParams adv0 = make_adversary_params(spec);
        l2 = estimate_smoothness(
            [&](const Vector& w) {
                return gradients(spec, adv0, ClassifierParams{w}, data).grad_w_lf;
            },
            dim, cfg.smoothness_samples, cfg.seed + 2);
    }
    res.smoothness_l1 = l1;
    res.smoothness_l2 = l2;

    Vector w(dim, 0.0);   // gradient-step sequence
    Vector q(dim, 0.0);   // averaged output sequence
    double a_sum = 0.0;   // A_t

    for (int t = 1; t <= cfg.iterations; ++t) {
        const double alpha = cfg.alpha_at(t);
        const ClassifierParams w_prev{w};
        const LossGradients grads = gradients(spec, res.adversary, w_prev, data);
        axpy(cfg.eta1, grads.grad_u_lf, res.adversary.u);

        const Vector g = modified_gradient(grads, alpha);
        const double a_t = 1.0 / (alpha * l1 * l2 * std::sqrt(static_cast<double>(t)));
        const double a_prev_sum = a_sum;
        a_sum += a_t;

        // p_t = (A_{t-1}/A_t) q_{t-1} + (a_t/A_t) grad psi(w_{t-1})
        Vector p = scaled(q, a_prev_sum / a_sum);
        axpy(a_t / a_sum, w, p);
        // w_t = w_{t-1} - a_t g(w_{t-1})
        axpy(-a_t, g, w);
        // q_t = (A_{t-1}/A_t) q_{t-1} + (a_t/A_t) grad psi(w_t)
        q = scaled(q, a_prev_sum / a_sum);
        axpy(a_t / a_sum, w, q);

        const ClassifierParams q_params{q};
        TraceRow row;
        row.t = t;
        row.alpha = alpha;
        row.grad_norm_f = norm(grads.grad_w_lf);
        row.grad_norm_c = norm(grads.grad_w_lc);
        row.identity_residual =
            dot(grads.grad_w_lf, g) + alpha * squared_norm(grads.grad_w_lf);
        row.loss_c = classification_loss(q_params, data);
        row.loss_f = adversary_loss(res.adversary, spec, q_params, data);
        detail::check_finite(row.loss_c, row.loss_f, t);
        const HardPredictions pred = harden(classify_soft(q_params, data));
        row.accuracy = accuracy(pred, data.base);
        row.fairness = detail::training_fairness(spec, pred, data.base);
        trace.push_back(row);
        res.classifier_history.push_back(q_params);
        res.adversary_history.push_back(res.adversary);
        if (res.tracker_enabled) {
            res.tracker.update(t, q_params, res.adversary, row.accuracy, row.fairness);
        }
    }
    res.classifier.w = q;
    return res;
}

inline RunResult run(const OptimizerConfig& cfg, const AdversarySpec& spec,
                     const AugmentedDataset& data, TrainingTrace& trace) {
    switch (cfg.algorithm) {
        case Algorithm::normal_gda: return run_normal_gda(cfg, spec, data, trace);
        case Algorithm::ngd_modified: return run_ngd_modified(cfg, spec, data, trace);
        default: return run_agd_modified(cfg, spec, data, trace);
    }
}

// Empirical stand-ins for the convergence theory's constants: the
// gradient-ratio bound G, regret-style curves against best observed
// optima, and the (epsilon, delta) solution quality read off the trace.
struct ConvergenceDiagnostics {
    double g_estimate = 1.0;
    double d_estimate = 0.0;
    double smoothness_l1 = 0.0;
    double smoothness_l2 = 0.0;
    std::vector<double> r_f;  // best observed L_F minus L_F(t)
    std::vector<double> r_c;  // L_C(t) minus best observed L_C
    double epsilon = 0.0;     // max observed L_F - final L_F
    double delta = 0.0;       // final L_C - min observed L_C
};

inline ConvergenceDiagnostics diagnose_convergence(const TrainingTrace& trace,
                                                   const RunResult& result) {
    ConvergenceDiagnostics d;
    if (trace.empty()) return d;
    d.smoothness_l1 = result.smoothness_l1;
    d.smoothness_l2 = result.smoothness_l2;

    double best_lf = trace.front().loss_f;
    double best_lc = trace.front().loss_c;
    for (const auto& row : trace) {
        best_lf = std::max(best_lf, row.loss_f);
        best_lc = std::min(best_lc, row.loss_c);
        if (row.grad_norm_f > kEpsProj && row.grad_norm_c > kEpsProj) {
            const double ratio =
                std::max(row.grad_norm_c / row.grad_norm_f,
                         row.grad_norm_f / row.grad_norm_c);
            d.g_estimate = std::max(d.g_estimate, ratio);
        }
    }
    d.r_f.reserve(trace.size());
    d.r_c.reserve(trace.size());
    for (const auto& row : trace) {
        d.r_f.push_back(best_lf - row.loss_f);
        d.r_c.push_back(row.loss_c - best_lc);
    }
    d.epsilon = best_lf - trace.back().loss_f;
    d.delta = trace.back().loss_c - best_lc;

    // Diameter proxy: farthest iterate from the final one.
    if (!result.classifier_history.empty()) {
        const Vector& w_final = result.classifier_history.back().w;
        const Vector& u_final = result.adversary_history.back().u;
        for (std::size_t i = 0; i < result.classifier_history.size(); ++i) {
            Vector dw = result.classifier_history[i].w;
            axpy(-1.0, w_final, dw);
            Vector du = result.adversary_history[i].u;
            axpy(-1.0, u_final, du);
            d.d_estimate = std::max(
                d.d_estimate, std::sqrt(squared_norm(dw) + squared_norm(du)));
        }
    }
    return d;
}

}  // namespace fairgda

#endif
