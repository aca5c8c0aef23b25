#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "fairgda/optimizers.hpp"
#include "fairgda/trace_io.hpp"
#include "test_support.hpp"

using namespace fairgda;

namespace {

AugmentedDataset small_train(std::uint64_t seed = 3) {
    return augment(testsup::make_base_dataset(200, 3, seed), AugmentMode::noise,
                   seed + 101);
}

OptimizerConfig base_config(Algorithm alg) {
    OptimizerConfig cfg;
    cfg.algorithm = alg;
    cfg.eta1 = 0.1;
    cfg.eta2 = 0.1;
    cfg.alpha0 = 0.1;
    cfg.alpha_p = 0.5;
    cfg.iterations = 20;
    return cfg;
}

AdversarySpec sp_spec(double mu) {
    AdversarySpec spec;
    spec.kind = AdversaryKind::statistical_parity;
    spec.mu = mu;
    return spec;
}

}  // namespace

TEST_CASE("modified gradient examples") {
    LossGradients g;
    g.grad_w_lc = {1, 0};
    g.grad_w_lf = {1, 0};
    const Vector m = modified_gradient(g, 0.5);
    CHECK(m[0] == doctest::Approx(-0.5));
    CHECK(m[1] == doctest::Approx(0.0));

    // Orthogonal fairness gradient with alpha = 0 leaves grad L_C intact.
    g.grad_w_lc = {2, 0};
    g.grad_w_lf = {0, 3};
    CHECK(modified_gradient(g, 0.0) == Vector{2, 0});

    // Vanishing fairness gradient degrades to plain descent.
    g.grad_w_lf = {0, 0};
    CHECK(modified_gradient(g, 0.7) == Vector{2, 0});
}

TEST_CASE("modified gradient orthogonality identity on random inputs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-4.0, 4.0);
    std::uniform_real_distribution<double> alpha_dist(0.0, 2.0);
    for (int rep = 0; rep < 300; ++rep) {
        LossGradients g;
        g.grad_w_lc.resize(7);
        g.grad_w_lf.resize(7);
        for (int i = 0; i < 7; ++i) {
            g.grad_w_lc[i] = uni(rng);
            g.grad_w_lf[i] = uni(rng);
        }
        const double alpha = alpha_dist(rng);
        const Vector m = modified_gradient(g, alpha);
        const double lhs = dot(g.grad_w_lf, m);
        const double rhs = -alpha * squared_norm(g.grad_w_lf);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("zero step sizes leave parameters unchanged") {
    const AugmentedDataset train = small_train();
    OptimizerConfig cfg = base_config(Algorithm::normal_gda);
    cfg.eta1 = 0.0;
    cfg.eta2 = 0.0;
    cfg.iterations = 5;
    TrainingTrace trace;
    const RunResult res = run_normal_gda(cfg, sp_spec(1e-5), train, trace);
    CHECK(res.classifier.w == Vector(train.dim(), 0.0));
    CHECK(res.adversary.u == Vector(3, 0.0));
    CHECK(trace.size() == 5);
}

TEST_CASE("one NGD-modified step matches an independent evaluation") {
    const AugmentedDataset train = small_train();
    const AdversarySpec spec = sp_spec(1e-5);
    OptimizerConfig cfg = base_config(Algorithm::ngd_modified);
    cfg.iterations = 1;
    TrainingTrace trace;
    const RunResult res = run_ngd_modified(cfg, spec, train, trace);

    // Recompute the displayed update from scratch at (w0, u0) = 0.
    const ClassifierParams w0{Vector(train.dim(), 0.0)};
    const AdversaryParams u0 = make_adversary_params(spec);
    const LossGradients g = gradients(spec, u0, w0, train);
    Vector w1(train.dim(), 0.0);
    Vector step = g.grad_w_lc;
    axpy(-cfg.alpha_at(1), g.grad_w_lf, step);
    axpy(-1.0, project(g.grad_w_lc, g.grad_w_lf), step);
    axpy(-cfg.eta2, step, w1);
    Vector u1(u0.u.size(), 0.0);
    axpy(cfg.eta1, g.grad_u_lf, u1);

    CHECK(res.classifier.w == w1);
    CHECK(res.adversary.u == u1);
    CHECK(trace.size() == 1);
}

TEST_CASE("AGD sequences follow the published recurrences") {
    const AugmentedDataset train = small_train();
    const AdversarySpec spec = sp_spec(1e-5);
    OptimizerConfig cfg = base_config(Algorithm::agd_modified);
    cfg.iterations = 6;
    cfg.alpha_constant = true;
    cfg.alpha0 = 1.0;
    cfg.smoothness_l1 = 1.0;
    cfg.smoothness_l2 = 1.0;
    TrainingTrace trace;
    const RunResult res = run_agd_modified(cfg, spec, train, trace);

    // Independent replay of the five-line update with psi(w) = ||w||^2/2.
    Vector w(train.dim(), 0.0), q(train.dim(), 0.0);
    AdversaryParams u = make_adversary_params(spec);
    double a_sum = 0.0;
    for (int t = 1; t <= cfg.iterations; ++t) {
        const LossGradients g = gradients(spec, u, {w}, train);
        axpy(cfg.eta1, g.grad_u_lf, u.u);
        const Vector dir = modified_gradient(g, 1.0);
        const double a_t = 1.0 / std::sqrt(static_cast<double>(t));
        // a_4 = 1/2 when alpha = L1 = L2 = 1.
        if (t == 4) CHECK(a_t == doctest::Approx(0.5));
        const double a_prev = a_sum;
        a_sum += a_t;
        Vector p = scaled(q, a_prev / a_sum);
        axpy(a_t / a_sum, w, p);
        axpy(-a_t, dir, w);
        q = scaled(q, a_prev / a_sum);
        axpy(a_t / a_sum, w, q);
        CHECK(res.classifier_history[static_cast<std::size_t>(t - 1)].w == q);
    }
    // A_4 = 1 + 1/sqrt(2) + 1/sqrt(3) + 1/2 under the same constants.
    const double a4 = 1.0 + 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0) + 0.5;
    CHECK(a4 == doctest::Approx(2.78446).epsilon(1e-5));
    CHECK(res.classifier.w == q);
}

TEST_CASE("modified runs satisfy the orthogonality identity each iteration") {
    const AugmentedDataset train = small_train();
    for (Algorithm alg : {Algorithm::ngd_modified, Algorithm::agd_modified}) {
        OptimizerConfig cfg = base_config(alg);
        cfg.iterations = 30;
        cfg.smoothness_l1 = 4.0;
        cfg.smoothness_l2 = 4.0;
        TrainingTrace trace;
        run(cfg, sp_spec(1e-5), train, trace);
        for (const auto& row : trace) {
            const double bound =
                1e-8 * (1.0 + row.grad_norm_f * row.grad_norm_f);
            CHECK(std::abs(row.identity_residual) <= bound);
        }
    }
}

TEST_CASE("with a silent adversary NGD-modified is plain gradient descent") {
    const AugmentedDataset train = small_train();
    AdversarySpec spec = sp_spec(0.0);  // mu = 0, u stays 0: grad_w L_F == 0
    OptimizerConfig cfg = base_config(Algorithm::ngd_modified);
    cfg.eta1 = 0.0;
    cfg.alpha0 = 0.0;
    cfg.iterations = 25;
    TrainingTrace trace;
    const RunResult res = run_ngd_modified(cfg, spec, train, trace);

    Vector w(train.dim(), 0.0);
    for (int t = 0; t < cfg.iterations; ++t) {
        const Vector g = classification_gradient({w}, train);
        axpy(-cfg.eta2, g, w);
    }
    CHECK(res.classifier.w == w);
}

TEST_CASE("determinism: identical config gives identical traces") {
    const AugmentedDataset train = small_train();
    for (Algorithm alg :
         {Algorithm::normal_gda, Algorithm::ngd_modified, Algorithm::agd_modified}) {
        OptimizerConfig cfg = base_config(alg);
        cfg.iterations = 15;
        cfg.smoothness_l1 = 4.0;
        cfg.smoothness_l2 = 4.0;
        TrainingTrace t1, t2;
        run(cfg, sp_spec(1e-5), train, t1);
        run(cfg, sp_spec(1e-5), train, t2);
        REQUIRE(t1.size() == t2.size());
        for (std::size_t i = 0; i < t1.size(); ++i) {
            CHECK(t1[i].loss_c == t2[i].loss_c);
            CHECK(t1[i].loss_f == t2[i].loss_f);
            CHECK(t1[i].accuracy == t2[i].accuracy);
        }
    }
}

TEST_CASE("divergence raises with the iteration index") {
    const AugmentedDataset train = small_train();
    OptimizerConfig cfg = base_config(Algorithm::normal_gda);
    cfg.eta2 = 1e8;  // absurd step size blows up the regularizer
    cfg.iterations = 50;
    TrainingTrace trace;
    CHECK_THROWS_AS(run_normal_gda(cfg, sp_spec(1.0), train, trace),
                    divergence_error);
}

TEST_CASE("estimate_smoothness") {
    auto quad_grad = [](const Vector& x) { return x; };
    const double l_quad = estimate_smoothness(quad_grad, 4, 10, 1);
    CHECK(l_quad >= 1.0);
    CHECK(l_quad <= 1.5 + 1e-9);

    auto const_grad = [](const Vector& x) { return Vector(x.size(), 2.0); };
    CHECK(estimate_smoothness(const_grad, 4, 10, 1) <= 1e-8);

    // Logistic log-loss curvature is bounded by max ||x||^2 / 4 (+1 for
    // the ridge term), and the empirical estimate must respect it.
    const AugmentedDataset train = small_train();
    double max_sq = 0.0;
    for (const auto& row : train.augmented) {
        max_sq = std::max(max_sq, squared_norm(row));
    }
    const double l_est = estimate_smoothness(
        [&](const Vector& w) { return classification_gradient({w}, train); },
        train.dim(), 12, 2);
    CHECK(l_est <= 1.5 * (max_sq / 4.0 + 1.0));
    CHECK(l_est > 0.0);

    CHECK_THROWS_AS(estimate_smoothness(quad_grad, 3, 1, 1), config_error);
}

TEST_CASE("threshold tracker rule") {
    ThresholdTracker tracker;
    tracker.tau = 0.8;
    ClassifierParams w1{{1.0}}, w2{{2.0}}, w3{{3.0}};
    AdversaryParams u{{0.0}};
    tracker.update(1, w1, u, 0.9, 0.7);    // below tau, ignored
    tracker.update(2, w2, u, 0.8, 0.85);   // first feasible
    tracker.update(3, w3, u, 0.85, 0.9);   // better accuracy, replaces
    REQUIRE(tracker.has_best());
    CHECK(tracker.best_iteration == 3);
    CHECK(tracker.best_accuracy == doctest::Approx(0.85));
    CHECK(tracker.best_fairness >= tracker.tau);
    CHECK(tracker.best_classifier->w == Vector{3.0});

    // Ties keep the earlier iterate.
    tracker.update(4, w1, u, 0.85, 0.95);
    CHECK(tracker.best_iteration == 3);

    // Undefined fairness never qualifies.
    ThresholdTracker empty;
    empty.tau = 0.5;
    empty.update(1, w1, u, 0.99, std::nullopt);
    empty.update(2, w2, u, 0.99, 0.4);
    CHECK_FALSE(empty.has_best());
}

TEST_CASE("convergence diagnostics") {
    TrainingTrace trace;
    RunResult res;
    for (int t = 1; t <= 4; ++t) {
        TraceRow row;
        row.t = t;
        row.grad_norm_c = 2.0;
        row.grad_norm_f = 2.0;
        row.loss_f = -1.0 / static_cast<double>(t);  // rising toward 0
        row.loss_c = 1.0 + 1.0 / static_cast<double>(t);
        trace.push_back(row);
        res.classifier_history.push_back({Vector{static_cast<double>(t), 0.0}});
        res.adversary_history.push_back({Vector{0.0}});
    }
    const ConvergenceDiagnostics d = diagnose_convergence(trace, res);
    CHECK(d.g_estimate == doctest::Approx(1.0));
    CHECK(d.epsilon == doctest::Approx(0.0));  // final L_F is the max
    CHECK(d.delta == doctest::Approx(0.0));    // final L_C is the min
    CHECK(d.d_estimate == doctest::Approx(3.0));
    // R_F nonincreasing on this converging trace.
    for (std::size_t i = 1; i < d.r_f.size(); ++i) {
        CHECK(d.r_f[i] <= d.r_f[i - 1] + 1e-12);
    }
}

TEST_CASE("trace CSV round-trip") {
    const AugmentedDataset train = small_train();
    OptimizerConfig cfg = base_config(Algorithm::ngd_modified);
    cfg.iterations = 8;
    TrainingTrace trace;
    run_ngd_modified(cfg, sp_spec(1e-5), train, trace);
    const auto path =
        (std::filesystem::temp_directory_path() / "fairgda_trace.csv").string();
    save_trace(trace, path);
    const TrainingTrace back = load_trace(path);
    REQUIRE(back.size() == trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(back[i].t == trace[i].t);
        CHECK(back[i].loss_c == trace[i].loss_c);
        CHECK(back[i].loss_f == trace[i].loss_f);
        CHECK(back[i].accuracy == trace[i].accuracy);
        CHECK(back[i].fairness == trace[i].fairness);
        CHECK(back[i].identity_residual == trace[i].identity_residual);
        CHECK(back[i].grad_norm_f == trace[i].grad_norm_f);
        CHECK(back[i].grad_norm_c == trace[i].grad_norm_c);
        CHECK(back[i].alpha == trace[i].alpha);
    }
}

namespace {

// Separable data: both kinds of signal columns sit in [0,1] with a wide
// gap between the classes, so a ridge-penalized classifier can actually
// commit. Half the columns track the label, half the sensitive attribute.
Dataset separable_dataset(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = uni(rng) < 0.5 ? 1.0 : 0.0;
        const double z = uni(rng) < 0.6 ? y : 1.0 - y;
        Vector x(6);
        for (int j = 0; j < 3; ++j) x[j] = (uni(rng) + 4.0 * y) / 5.0;
        for (int j = 3; j < 6; ++j) x[j] = (uni(rng) + 4.0 * z) / 5.0;
        d.features.push_back(std::move(x));
        d.labels.push_back(y);
        d.sensitive.push_back(z);
    }
    d.rebuild_groups();
    return d;
}

// Nearly z-determined labels: accuracy and parity are directly at odds.
Dataset conflict_dataset(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = uni(rng) < 0.5 ? 1.0 : 0.0;
        const double y = uni(rng) < 0.95 ? z : 1.0 - z;
        Vector x(6);
        for (auto& v : x) v = (uni(rng) + 4.0 * y) / 5.0;
        d.features.push_back(std::move(x));
        d.labels.push_back(y);
        d.sensitive.push_back(z);
    }
    d.rebuild_groups();
    return d;
}

}  // namespace

TEST_CASE("normal updates let the adversary lose on conflicted data") {
    const AugmentedDataset train =
        augment(conflict_dataset(400, 11), AugmentMode::bias, 112);
    AdversarySpec spec;
    spec.kind = AdversaryKind::disparity_only;
    spec.mu = 16.0 / (400.0 * 400.0);
    OptimizerConfig cfg = base_config(Algorithm::normal_gda);
    cfg.alpha0 = 1.0;
    cfg.iterations = 100;
    TrainingTrace trace;
    run(cfg, spec, train, trace);
    // Once past the initial transient the classifier drives L_F down
    // monotonically: the adversary keeps losing, fairness never arrives.
    for (std::size_t i = 50; i < trace.size(); ++i) {
        CHECK(trace[i].loss_f <= trace[i - 1].loss_f);
    }
    CHECK(trace.back().fairness.value_or(1.0) < 0.5);
}

TEST_CASE("modified update ends fairer than the normal update") {
    const Dataset synth = make_synthetic(separable_dataset(1000, 21), 0.5, 5);
    const AugmentedDataset train = augment(synth, AugmentMode::bias, 1112);
    const AdversarySpec spec = sp_spec(1e-6);
    OptimizerConfig cfg = base_config(Algorithm::normal_gda);
    cfg.alpha0 = 1.0;
    cfg.iterations = 100;
    TrainingTrace tn;
    run(cfg, spec, train, tn);
    cfg.algorithm = Algorithm::ngd_modified;
    TrainingTrace tm;
    run(cfg, spec, train, tm);
    CHECK(tn.back().fairness.value_or(0.0) < tm.back().fairness.value_or(0.0));
}

TEST_CASE("modified run reaches a high-accuracy fair iterate") {
    const AugmentedDataset train =
        augment(separable_dataset(1000, 21), AugmentMode::bias, 1112);
    OptimizerConfig cfg = base_config(Algorithm::ngd_modified);
    cfg.iterations = 100;
    TrainingTrace trace;
    run(cfg, sp_spec(1e-6), train, trace);
    double best_fair_acc = 0.0;
    for (const auto& row : trace) {
        if (row.fairness.value_or(0.0) >= 0.9) {
            best_fair_acc = std::max(best_fair_acc, row.accuracy);
        }
    }
    CHECK(best_fair_acc >= 0.85);
}
