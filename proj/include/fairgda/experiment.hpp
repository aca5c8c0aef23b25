#ifndef FAIRGDA_EXPERIMENT_HPP
#define FAIRGDA_EXPERIMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fairgda/config.hpp"
#include "fairgda/core_math.hpp"
#include "fairgda/dataset.hpp"
#include "fairgda/errors.hpp"
#include "fairgda/metrics.hpp"
#include "fairgda/models.hpp"
#include "fairgda/optimizers.hpp"
#include "fairgda/trace_io.hpp"

namespace fairgda {

inline constexpr const char* kOutputRootEnv = "FAIRGDA_OUTPUT_ROOT";

namespace detail {

inline std::filesystem::path resolve_output_dir(const Config& cfg) {
    std::filesystem::path dir = cfg.require("output.dir");
    if (dir.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv)) {
            dir = std::filesystem::path(root) / dir;
        }
    }
    std::filesystem::create_directories(dir);
    return dir;
}

inline CsvSchema schema_from_config(const Config& cfg) {
    CsvSchema schema;
    schema[cfg.require("data.label")] = ColumnRole::label;
    schema[cfg.require("data.sensitive")] = ColumnRole::sensitive;
    std::stringstream ss(cfg.get("data.drop"));
    std::string col;
    while (std::getline(ss, col, ',')) {
        if (!col.empty()) schema[col] = ColumnRole::drop;
    }
    return schema;
}

// Either a prepared cache (data.cache) or a raw CSV with a schema.
inline Dataset load_dataset(const Config& cfg) {
    if (cfg.has("data.cache")) return load_cache(cfg.require("data.cache"));
    return load_csv(cfg.require("data.csv"), schema_from_config(cfg));
}

inline AugmentMode augment_mode(const Config& cfg) {
    const std::string mode = cfg.get("data.augment", "noise");
    if (mode == "noise") return AugmentMode::noise;
    if (mode == "bias") return AugmentMode::bias;
    throw config_error("data.augment must be 'noise' or 'bias'");
}

inline AdversarySpec adversary_from_config(const Config& cfg, std::size_t n_train) {
    AdversarySpec spec;
    const std::string kind = cfg.get("adversary.kind", "statistical_parity");
    if (kind == "statistical_parity") {
        spec.kind = AdversaryKind::statistical_parity;
    } else if (kind == "false_discovery") {
        spec.kind = AdversaryKind::false_discovery;
    } else if (kind == "disparity_only") {
        spec.kind = AdversaryKind::disparity_only;
    } else {
        throw config_error("adversary.kind must be statistical_parity, "
                           "false_discovery or disparity_only");
    }
    spec.degree = cfg.get_int("adversary.degree", 2);
    if (spec.degree < 1) throw config_error("adversary.degree must be >= 1");
    // "auto" scales mu by 1/N^2 so the group-sum regularizer, whose raw
    // value grows like N * (group mean gap), stays commensurate with the
    // mean log-loss term regardless of sample count.
    const std::string mu = cfg.get("adversary.mu", "auto");
    if (mu == "auto") {
        spec.mu = 1.0 / (static_cast<double>(n_train) * static_cast<double>(n_train));
    } else {
        spec.mu = cfg.get_double("adversary.mu", 1.0);
        if (spec.mu < 0.0) throw config_error("adversary.mu must be >= 0");
    }
    return spec;
}

inline OptimizerConfig optimizer_from_config(const Config& cfg) {
    OptimizerConfig opt;
    const std::string alg = cfg.get("optimizer.algorithm", "ngd_modified");
    if (alg == "normal_gda") {
        opt.algorithm = Algorithm::normal_gda;
    } else if (alg == "ngd_modified") {
        opt.algorithm = Algorithm::ngd_modified;
    } else if (alg == "agd_modified") {
        opt.algorithm = Algorithm::agd_modified;
    } else {
        throw config_error("optimizer.algorithm must be normal_gda, "
                           "ngd_modified or agd_modified");
    }
    opt.eta1 = cfg.get_double("optimizer.eta1", 0.1);
    opt.eta2 = cfg.get_double("optimizer.eta2", 0.1);
    opt.alpha0 = cfg.get_double("optimizer.alpha0", 0.1);
    opt.alpha_p = cfg.get_double("optimizer.alpha_p", 0.5);
    opt.alpha_constant = cfg.get_bool("optimizer.alpha_constant", false);
    opt.iterations = cfg.get_int("optimizer.iterations", 100);
    if (cfg.has("optimizer.threshold")) {
        opt.threshold = cfg.get_double("optimizer.threshold", 0.8);
    }
    opt.seed = cfg.get_seed("seed", 0);
    opt.smoothness_l1 = cfg.get_double("optimizer.smoothness_l1", 0.0);
    opt.smoothness_l2 = cfg.get_double("optimizer.smoothness_l2", 0.0);
    opt.validate();
    return opt;
}

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Everything a single training run produces; sweeps aggregate these.
struct TrainOutcome {
    RunResult result;
    TrainingTrace trace;
    MetricReport test_metrics;           // of the reported classifier
    double test_fairness = 0.0;          // metric matching the adversary kind
    bool fairness_defined = true;
    double noise_ratio = 0.0;
    bool threshold_met = false;          // tracker produced a checkpoint
    int iterations_to_threshold = -1;    // first iterate with fairness >= tau
    AdversarySpec spec;
    ClassifierParams reported;           // threshold pick when available
};

// Trains on a pre-split, pre-augmented pair. The reported classifier is
// the threshold-selected iterate when the tracker found one, else the
// final iterate.
inline TrainOutcome train_once(const OptimizerConfig& opt, const AdversarySpec& spec,
                               const AugmentedDataset& train,
                               const AugmentedDataset& test,
                               TrainingTrace& trace) {
    TrainOutcome out;
    out.spec = spec;
    out.result = run(opt, spec, train, trace);
    out.trace = trace;

    out.reported = out.result.tracker.has_best()
                       ? *out.result.tracker.best_classifier
                       : out.result.classifier;
    out.threshold_met = out.result.tracker.has_best();
    if (opt.threshold) {
        for (const auto& row : trace) {
            if (row.fairness && *row.fairness >= *opt.threshold) {
                out.iterations_to_threshold = row.t;
                break;
            }
        }
    }

    const HardPredictions pred = harden(classify_soft(out.reported, test));
    out.test_metrics = evaluate(pred, test.base);
    if (spec.kind == AdversaryKind::false_discovery) {
        out.fairness_defined = out.test_metrics.false_discovery_rate.has_value();
        out.test_fairness = out.fairness_defined
                                ? *out.test_metrics.false_discovery_rate
                                : 0.0;
    } else {
        out.test_fairness = out.test_metrics.statistical_rate;
    }
    out.noise_ratio = noise_weight_ratio(out.reported.w);
    return out;
}

// prepare: build one correlation-controlled cache per requested target,
// recording the measured correlation (or the failure) in manifest.csv.
inline void cmd_prepare(const Config& cfg) {
    const auto outdir = detail::resolve_output_dir(cfg);
    const std::vector<double> targets = cfg.get_double_list("synthetic.correlations");
    if (targets.empty()) {
        throw config_error("prepare: synthetic.correlations must be non-empty");
    }
    const Dataset base = detail::load_dataset(cfg);
    const std::uint64_t seed = cfg.get_seed("seed", 0);

    std::ofstream manifest(outdir / "manifest.csv");
    manifest << "target_corr,measured_corr,path,error\n";
    std::size_t produced = 0;
    for (double target : targets) {
        char name[64];
        std::snprintf(name, sizeof(name), "synthetic_corr_%.2f.csv", target);
        const auto path = outdir / name;
        try {
            const Dataset synth = make_synthetic(base, target, seed);
            save_cache(synth, path.string());
            manifest << detail::fmt(target) << ','
                     << detail::fmt(pearson_correlation(synth.labels, synth.sensitive))
                     << ',' << path.string() << ",\n";
            ++produced;
        } catch (const data_error& e) {
            manifest << detail::fmt(target) << ",nan,," << e.what() << "\n";
        }
    }
    if (produced == 0) {
        throw data_error("prepare: no correlation target was reachable");
    }
}

// train: one run on one dataset; writes trace, checkpoints, metrics and
// diagnostics into output.dir. A divergent run still persists the trace
// collected so far before the error propagates.
inline void cmd_train(const Config& cfg) {
    const auto outdir = detail::resolve_output_dir(cfg);
    const Dataset full = detail::load_dataset(cfg);
    const std::uint64_t seed = cfg.get_seed("seed", 0);
    const double test_fraction = cfg.get_double("data.test_fraction", 0.2);
    auto [train_set, test_set] = split(full, test_fraction, seed);

    const AugmentMode mode = detail::augment_mode(cfg);
    const AugmentedDataset train = augment(train_set, mode, seed + 101);
    const AugmentedDataset test = augment(test_set, mode, seed + 202);

    const AdversarySpec spec = detail::adversary_from_config(cfg, train.size());
    const OptimizerConfig opt = detail::optimizer_from_config(cfg);

    TrainingTrace trace;
    TrainOutcome out;
    try {
        out = train_once(opt, spec, train, test, trace);
    } catch (const divergence_error&) {
        save_trace(trace, (outdir / "trace.csv").string());
        throw;
    }
    save_trace(trace, (outdir / "trace.csv").string());
    save_checkpoint((outdir / "checkpoint_final.txt").string(),
                    out.result.classifier, out.result.adversary, spec);
    if (out.threshold_met) {
        save_checkpoint((outdir / "checkpoint_threshold.txt").string(),
                        *out.result.tracker.best_classifier,
                        out.result.tracker.best_adversary, spec);
    }

    std::ofstream metrics(outdir / "metrics.csv");
    metrics << "test_accuracy,test_statistical_rate,test_fdr,noise_weight_ratio,"
               "threshold_met,iterations_to_threshold\n";
    metrics << detail::fmt(out.test_metrics.accuracy) << ','
            << detail::fmt(out.test_metrics.statistical_rate) << ','
            << (out.test_metrics.false_discovery_rate
                    ? detail::fmt(*out.test_metrics.false_discovery_rate)
                    : "nan")
            << ',' << detail::fmt(out.noise_ratio) << ','
            << (out.threshold_met ? 1 : 0) << ',' << out.iterations_to_threshold
            << "\n";

    const ConvergenceDiagnostics diag = diagnose_convergence(trace, out.result);
    std::ofstream dfile(outdir / "diagnostics.txt");
    dfile << "G_estimate " << detail::fmt(diag.g_estimate) << "\n"
          << "D_estimate " << detail::fmt(diag.d_estimate) << "\n"
          << "L1 " << detail::fmt(diag.smoothness_l1) << "\n"
          << "L2 " << detail::fmt(diag.smoothness_l2) << "\n"
          << "epsilon " << detail::fmt(diag.epsilon) << "\n"
          << "delta " << detail::fmt(diag.delta) << "\n";
}

namespace detail {

struct ManifestEntry {
    double target = 0.0;
    double measured = 0.0;
    std::string path;
};

inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("sweep: cannot open manifest '" + path + "'");
    std::vector<ManifestEntry> entries;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string target, measured, file, err;
        std::getline(ss, target, ',');
        std::getline(ss, measured, ',');
        std::getline(ss, file, ',');
        std::getline(ss, err, ',');
        if (file.empty()) continue;  // failed target, skip
        entries.push_back({std::stod(target), std::stod(measured), file});
    }
    if (entries.empty()) throw data_error("sweep: manifest has no usable datasets");
    return entries;
}

}  // namespace detail

// sweep: one training run per (dataset, algorithm, seed) cell. Per-run
// rows land in sweep_runs.csv; sweep.csv aggregates over seeds with
// mean/min/max. Cell failures become error-marked rows and the sweep
// continues.
inline void cmd_sweep(const Config& cfg) {
    const auto outdir = detail::resolve_output_dir(cfg);
    const auto entries = detail::load_manifest(cfg.require("data.manifest"));

    std::vector<std::string> algorithms;
    {
        std::stringstream ss(cfg.get("sweep.algorithms", "ngd_modified"));
        std::string a;
        while (std::getline(ss, a, ',')) {
            if (!a.empty()) algorithms.push_back(a);
        }
    }
    std::vector<double> seed_list = cfg.get_double_list("sweep.seeds");
    if (seed_list.empty()) {
        seed_list.push_back(static_cast<double>(cfg.get_seed("seed", 0)));
    }

    std::ofstream runs(outdir / "sweep_runs.csv");
    runs << "correlation,algorithm,seed,test_accuracy,test_fairness,"
            "noise_weight_ratio,iterations_to_threshold,error\n";
    std::ofstream summary(outdir / "sweep.csv");
    summary << "correlation,algorithm,test_accuracy_mean,test_accuracy_min,"
               "test_accuracy_max,test_fairness_mean,test_fairness_min,"
               "test_fairness_max,noise_weight_ratio_mean,"
               "iterations_to_threshold_mean,failures\n";

    for (const auto& entry : entries) {
        for (const auto& alg : algorithms) {
            std::vector<double> accs, fairs, ratios, to_thresh;
            int failures = 0;
            for (double seed_val : seed_list) {
                const auto seed = static_cast<std::uint64_t>(seed_val);
                Config cell = cfg;
                cell.set("data.cache", entry.path);
                cell.set("optimizer.algorithm", alg);
                cell.set("seed", std::to_string(seed));
                try {
                    const Dataset full = load_cache(entry.path);
                    auto [train_set, test_set] =
                        split(full, cell.get_double("data.test_fraction", 0.2), seed);
                    const AugmentMode mode = detail::augment_mode(cell);
                    const AugmentedDataset train = augment(train_set, mode, seed + 101);
                    const AugmentedDataset test = augment(test_set, mode, seed + 202);
                    const AdversarySpec spec =
                        detail::adversary_from_config(cell, train.size());
                    const OptimizerConfig opt = detail::optimizer_from_config(cell);
                    TrainingTrace trace;
                    const TrainOutcome out = train_once(opt, spec, train, test, trace);
                    runs << detail::fmt(entry.measured) << ',' << alg << ',' << seed
                         << ',' << detail::fmt(out.test_metrics.accuracy) << ','
                         << detail::fmt(out.test_fairness) << ','
                         << detail::fmt(out.noise_ratio) << ','
                         << out.iterations_to_threshold << ",\n";
                    accs.push_back(out.test_metrics.accuracy);
                    fairs.push_back(out.test_fairness);
                    ratios.push_back(out.noise_ratio);
                    to_thresh.push_back(out.iterations_to_threshold);
                } catch (const std::exception& e) {
                    ++failures;
                    runs << detail::fmt(entry.measured) << ',' << alg << ',' << seed
                         << ",nan,nan,nan,-1," << e.what() << "\n";
                }
            }
            auto mean = [](const std::vector<double>& v) {
                double s = 0.0;
                for (double x : v) s += x;
                return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
            };
            auto vmin = [](const std::vector<double>& v) {
                return v.empty() ? std::nan("")
                                 : *std::min_element(v.begin(), v.end());
            };
            auto vmax = [](const std::vector<double>& v) {
                return v.empty() ? std::nan("")
                                 : *std::max_element(v.begin(), v.end());
            };
            summary << detail::fmt(entry.measured) << ',' << alg << ','
                    << detail::fmt(mean(accs)) << ',' << detail::fmt(vmin(accs)) << ','
                    << detail::fmt(vmax(accs)) << ',' << detail::fmt(mean(fairs))
                    << ',' << detail::fmt(vmin(fairs)) << ','
                    << detail::fmt(vmax(fairs)) << ',' << detail::fmt(mean(ratios))
                    << ',' << detail::fmt(mean(to_thresh)) << ',' << failures << "\n";
        }
    }
}

// alpha-sweep: one dataset, one algorithm, alpha = alpha0 / t^p for
// p in {0.1, ..., 1.0}.
inline void cmd_alpha_sweep(const Config& cfg) {
    const auto outdir = detail::resolve_output_dir(cfg);
    const Dataset full = detail::load_dataset(cfg);
    const std::uint64_t seed = cfg.get_seed("seed", 0);
    auto [train_set, test_set] =
        split(full, cfg.get_double("data.test_fraction", 0.2), seed);
    const AugmentMode mode = detail::augment_mode(cfg);
    const AugmentedDataset train = augment(train_set, mode, seed + 101);
    const AugmentedDataset test = augment(test_set, mode, seed + 202);
    const AdversarySpec spec = detail::adversary_from_config(cfg, train.size());

    std::ofstream out(outdir / "alpha_sweep.csv");
    out << "p,test_accuracy,test_fairness,error\n";
    for (int i = 1; i <= 10; ++i) {
        const double p = 0.1 * static_cast<double>(i);
        Config cell = cfg;
        cell.set("optimizer.alpha_p", detail::fmt(p));
        try {
            const OptimizerConfig opt = detail::optimizer_from_config(cell);
            TrainingTrace trace;
            const TrainOutcome run_out = train_once(opt, spec, train, test, trace);
            out << detail::fmt(p) << ',' << detail::fmt(run_out.test_metrics.accuracy)
                << ',' << detail::fmt(run_out.test_fairness) << ",\n";
        } catch (const std::exception& e) {
            out << detail::fmt(p) << ",nan,nan," << e.what() << "\n";
        }
    }
}

// evaluate: metrics of an existing checkpoint on a dataset.
inline MetricReport cmd_evaluate(const Config& cfg, std::ostream& os) {
    const Checkpoint ck = load_checkpoint(cfg.require("eval.checkpoint"));
    const Dataset data = detail::load_dataset(cfg);
    const AugmentedDataset aug =
        augment(data, detail::augment_mode(cfg), cfg.get_seed("seed", 0) + 202);
    if (ck.classifier.w.size() != aug.dim()) {
        throw data_error("evaluate: checkpoint dimension does not match dataset");
    }
    const HardPredictions pred = harden(classify_soft(ck.classifier, aug));
    const MetricReport report = evaluate(pred, data);
    os << "accuracy " << detail::fmt(report.accuracy) << "\n"
       << "statistical_rate " << detail::fmt(report.statistical_rate) << "\n"
       << "false_discovery_rate "
       << (report.false_discovery_rate ? detail::fmt(*report.false_discovery_rate)
                                       : "undefined")
       << "\n"
       << "noise_weight_ratio " << detail::fmt(noise_weight_ratio(ck.classifier.w))
       << "\n";
    return report;
}

}  // namespace fairgda

#endif
