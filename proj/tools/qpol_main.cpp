#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "qpol/runner.hpp"

using namespace qpol;

namespace {

cli::ExperimentConfig load_config(const std::string& path) {
    return cli::ExperimentConfig::from(cli::ConfigFile::load(path));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-circuit policy training and verification lab"};
    app.require_subcommand(1);

    std::string config_path, params_path, out_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> suites = {"shift", "score"};
    double shift_override = -1.0;
    cli::DlpVerifyOptions dlp_opts;

    auto* train_cmd = app.add_subcommand("train", "train a policy, emit per-seed CSV curves");
    train_cmd->add_option("--config", config_path, "experiment config file")->required();
    train_cmd->add_option("--seed", seed, "override the config seed list with one seed");

    auto* eval_cmd = app.add_subcommand("eval", "roll out a policy without updates");
    eval_cmd->add_option("--config", config_path, "experiment config file")->required();
    eval_cmd->add_option("--seed", seed, "evaluation seed");
    eval_cmd->add_option("--params", params_path, "parameter dump from a training run");

    auto* grad_cmd = app.add_subcommand("gradcheck", "gradient and score-identity suites");
    grad_cmd->add_option("--seed", seed, "suite seed");
    grad_cmd->add_option("--suite", suites, "suites to run (shift, score)")
        ->delimiter(',')
        ->expected(0, -1);
    grad_cmd->add_option("--shift", shift_override,
                         "debug: inject a non-standard shift angle (radians)");
    grad_cmd->add_option("--out", out_path, "output directory");

    auto* dlp_cmd = app.add_subcommand("dlp-verify", "number-theoretic checks and bound tables");
    dlp_cmd->add_option("--seed", seed, "verification seed");
    dlp_cmd->add_option("--trials", dlp_opts.theorem3_trials, "training-table trials");
    dlp_cmd->add_option("--p", dlp_opts.theorem3_p, "prime for the training table");
    dlp_cmd->add_option("--training", dlp_opts.theorem3_training, "training set size");
    dlp_cmd->add_option("--shots", dlp_opts.theorem3_shots, "circuit evaluations per inner product");
    dlp_cmd->add_option("--k", dlp_opts.theorem3_k, "feature interval exponent");
    dlp_cmd->add_option("--min-accuracy", dlp_opts.min_accuracy,
                        "per-trial exhaustive accuracy target");
    dlp_cmd->add_option("--min-fraction", dlp_opts.min_fraction,
                        "required fraction of trials at the target");
    dlp_cmd->add_option("--out", out_path, "output directory");

    auto* gen_cmd = app.add_subcommand("gen-env", "generate a circuit-labelled environment");
    gen_cmd->add_option("--seed", seed, "generator seed");
    gen_cmd->add_option("--out", out_path, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            cli::ExperimentConfig cfg = load_config(config_path);
            if (seed) cfg.seeds = {*seed};
            return cli::run_train(cfg);
        }
        if (eval_cmd->parsed()) {
            if (!seed) throw ConfigError("eval requires --seed");
            cli::ExperimentConfig cfg = load_config(config_path);
            return cli::run_eval(cfg, *seed, params_path);
        }
        if (grad_cmd->parsed()) {
            if (!seed) throw ConfigError("gradcheck requires --seed");
            cli::GradcheckOptions opts;
            opts.seed = *seed;
            opts.suites = suites;
            opts.shift_override = shift_override;
            opts.output_dir = out_path;
            return cli::run_gradcheck(opts);
        }
        if (dlp_cmd->parsed()) {
            if (!seed) throw ConfigError("dlp-verify requires --seed");
            dlp_opts.seed = *seed;
            dlp_opts.output_dir = out_path;
            return cli::run_dlp_verify(dlp_opts);
        }
        if (gen_cmd->parsed()) {
            if (!seed) throw ConfigError("gen-env requires --seed");
            return cli::run_gen_env(*seed, out_path);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
