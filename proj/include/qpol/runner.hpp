#pragma once

#include <memory>
#include <string>

#include "qpol/config.hpp"

namespace qpol::cli {

inline constexpr const char* kCsvSchema = "v1";
inline constexpr const char* kOutputRootEnvVar = "QPOL_OUTPUT_ROOT";

/// Resolves the run output directory against $QPOL_OUTPUT_ROOT when set.
std::string resolve_output_dir(const std::string& configured);

std::unique_ptr<envs::Environment> make_env(const ExperimentConfig& cfg);
std::unique_ptr<train::TrainablePolicy> make_policy(const ExperimentConfig& cfg,
                                                    const envs::Environment& env,
                                                    std::uint64_t seed);

void save_parameters(const train::TrainablePolicy& policy, const std::string& path);
void load_parameters(train::TrainablePolicy& policy, const std::string& path);

/// Exit codes: 0 success, 1 config error, 2 check failure, 3 numerical abort.
int run_train(const ExperimentConfig& cfg);
int run_eval(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& params_path);

struct GradcheckOptions {
    std::uint64_t seed = 0;
    std::vector<std::string> suites = {"shift", "score"};
    double shift_override = -1.0;  // debug: inject a wrong shift angle
    std::string output_dir;
};
int run_gradcheck(const GradcheckOptions& opts);

struct DlpVerifyOptions {
    std::uint64_t seed = 0;
    int theorem3_trials = 20;
    dlp::u64 theorem3_p = 8191;
    int theorem3_training = 64;
    int theorem3_shots = 4096;
    int theorem3_k = 4;
    double min_accuracy = 0.95;   // per-trial exhaustive accuracy target
    double min_fraction = 0.9;    // required fraction of trials at target
    std::string output_dir;
};
int run_dlp_verify(const DlpVerifyOptions& opts);

int run_gen_env(std::uint64_t seed, const std::string& out_path);

}  // namespace qpol::cli
