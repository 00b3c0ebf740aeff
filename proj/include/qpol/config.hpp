#pragma once

#include <map>
#include <string>
#include <vector>

#include "qpol/train.hpp"

namespace qpol::cli {

/// Plain-text `key = value` configuration with `[section]` headers.
/// '#' starts a comment. Parsing keeps sections and keys sorted, so
/// serialize() is a canonical form and parse(serialize(parse(x))) is the
/// identity on the parsed representation.
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse_text(const std::string& text);
    static ConfigFile load(const std::string& path);
    std::string serialize() const;
    void save(const std::string& path) const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    bool operator==(const ConfigFile&) const = default;
};

enum class EnvKind {
    CartPole,
    MountainCar,
    Acrobot,
    CognitiveRadio,
    PqcSl,
    PqcCliffwalk,
    DlpSl,
    DlpCliffwalk,
    DlpChain,
};

enum class PolicyChoice { Softmax, Born, Mlp };

/// Typed, validated view of a ConfigFile. Unknown sections or keys are
/// rejected at construction.
struct ExperimentConfig {
    // [run]
    std::vector<std::uint64_t> seeds;
    long episodes = 1000;
    std::string output = "run";
    bool timing = false;  // off: wall_ms column written as 0, byte-reproducible
    int parallelism = 1;
    int eval_episodes = 100;

    // [env]
    EnvKind env_kind = EnvKind::CartPole;
    std::uint64_t env_seed = 0;           // pqc_* generator / dlp_chain chain draw
    dlp::u64 dlp_p = 101, dlp_g = 2, dlp_s = 0;
    double slip = 0.0;
    int episode_len = 1;   // dlp_sl
    int chain_len = 10;    // dlp_chain
    int channels = 4;      // cognitive_radio
    envs::CartPoleParams cartpole;
    envs::MountainCarParams mountaincar;
    envs::AcrobotParams acrobot;

    // [policy]
    PolicyChoice policy = PolicyChoice::Softmax;
    int n_qubits = 4;
    int d_enc = 5;
    pqc::Entangler entangler = pqc::Entangler::OneToOne;
    bool entangler_trainable = false;
    std::string observables = "";  // softmax grammar, actions split by '|'
    std::string partition = "ranges";
    double beta_final = 1.0;
    long anneal_episodes = 0;  // 0: anneal over all episodes
    std::vector<int> mlp_hidden = {16, 16};

    // [train]
    int batch_size = 10;
    double gamma = 1.0;
    int horizon = 0;
    bool use_baseline = true;
    double ridge = 1e-5;
    double lr_phi = 0.01, lr_w = 0.1, lr_lambda = 0.1, lr_mlp = 0.01;
    int shots = 0;
    bool freeze_lambda = false, freeze_w = false;

    static ExperimentConfig from(const ConfigFile& file);
    ConfigFile to_file() const;
};

/// Softmax observable grammar: actions split by '|'; within an action,
/// terms split by '+'; a term is '*'-joined factors where numeric factors
/// multiply into the weight and the rest is either one Pauli string
/// (Z0*Z1, X2, ...) or one projector range P<lo>..<hi>. A leading '-'
/// negates the weight.
std::vector<qsim::ObservableSpec> parse_observables(const std::string& text, int n_qubits);

/// Born partition grammar: "ranges" (equal contiguous index blocks),
/// "qubit<i>" or "parity".
qsim::ActionPartition parse_partition(const std::string& text, int n_qubits, int n_actions);

}  // namespace qpol::cli
