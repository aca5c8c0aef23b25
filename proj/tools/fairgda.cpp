// Command-line front end: prepare / train / sweep / alpha-sweep / evaluate.
// Exit codes: 0 success, 2 config error, 3 data error, 4 divergence.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairgda/experiment.hpp"

namespace {

fairgda::Config build_config(const std::string& config_path,
                             const std::vector<std::string>& overrides) {
    fairgda::Config cfg;
    if (!config_path.empty()) {
        cfg = fairgda::Config::from_file(config_path);
    }
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw fairgda::config_error("--set expects key=value, got '" + kv + "'");
        }
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial fair classifier training via gradient descent-ascent"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "Flat key-value config file");
    app.add_option("-s,--set", overrides,
                   "Override a config key, e.g. --set optimizer.eta1=0.05");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "Flat key-value config file");
        sub->add_option("-s,--set", overrides, "Override a config key (key=value)");
    };

    CLI::App* prepare = app.add_subcommand(
        "prepare", "Build correlation-controlled synthetic dataset caches");
    CLI::App* train = app.add_subcommand("train", "Run a single training job");
    CLI::App* sweep = app.add_subcommand(
        "sweep", "Train on every prepared dataset for each algorithm and seed");
    CLI::App* alpha_sweep = app.add_subcommand(
        "alpha-sweep", "Sweep the alpha decay exponent p over 0.1..1.0");
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Report metrics of a saved checkpoint on a dataset");
    for (CLI::App* sub : {prepare, train, sweep, alpha_sweep, evaluate}) {
        add_common(sub);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const fairgda::Config cfg = build_config(config_path, overrides);
        if (prepare->parsed()) {
            fairgda::cmd_prepare(cfg);
        } else if (train->parsed()) {
            fairgda::cmd_train(cfg);
        } else if (sweep->parsed()) {
            fairgda::cmd_sweep(cfg);
        } else if (alpha_sweep->parsed()) {
            fairgda::cmd_alpha_sweep(cfg);
        } else if (evaluate->parsed()) {
            fairgda::cmd_evaluate(cfg, std::cout);
        }
    } catch (const fairgda::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fairgda::divergence_error& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 4;
    } catch (const fairgda::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
