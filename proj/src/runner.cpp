#include "qpol/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

namespace qpol::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

// rng stream tags, one per independent random decision
constexpr std::uint64_t kInitStream = 0x11;

}  // namespace

std::string resolve_output_dir(const std::string& configured) {
    const char* root = std::getenv(kOutputRootEnvVar);
    fs::path dir = configured;
    if (root != nullptr && *root != '\0' && dir.is_relative()) dir = fs::path(root) / dir;
    fs::create_directories(dir);
    return dir.string();
}

std::unique_ptr<envs::Environment> make_env(const ExperimentConfig& cfg) {
    switch (cfg.env_kind) {
        case EnvKind::CartPole:
            return std::make_unique<envs::CartPoleEnv>(cfg.cartpole);
        case EnvKind::MountainCar:
            return std::make_unique<envs::MountainCarEnv>(cfg.mountaincar);
        case EnvKind::Acrobot:
            return std::make_unique<envs::AcrobotEnv>(cfg.acrobot);
        case EnvKind::CognitiveRadio:
            return std::make_unique<envs::CognitiveRadioEnv>(cfg.channels);
        case EnvKind::PqcSl:
            return std::make_unique<envs::PqcLabelEnv>(envs::generate_pqc_env(cfg.env_seed));
        case EnvKind::PqcCliffwalk:
            return std::make_unique<envs::PqcCliffwalkEnv>(envs::generate_pqc_env(cfg.env_seed));
        case EnvKind::DlpSl:
            return std::make_unique<envs::DlpLabelEnv>(
                dlp::DlpInstance(cfg.dlp_p, cfg.dlp_g, cfg.dlp_s), cfg.episode_len);
        case EnvKind::DlpCliffwalk:
            return std::make_unique<envs::DlpCliffwalkEnv>(
                dlp::DlpInstance(cfg.dlp_p, cfg.dlp_g, cfg.dlp_s), cfg.slip);
        case EnvKind::DlpChain:
            return std::make_unique<envs::DlpChainEnv>(
                dlp::DlpInstance(cfg.dlp_p, cfg.dlp_g, cfg.dlp_s), cfg.chain_len, cfg.env_seed);
    }
    throw ConfigError("unreachable env kind");
}

std::unique_ptr<train::TrainablePolicy> make_policy(const ExperimentConfig& cfg,
                                                    const envs::Environment& env,
                                                    std::uint64_t seed) {
    Rng rng = make_rng(seed, kInitStream);
    if (cfg.policy == PolicyChoice::Mlp) {
        std::vector<int> widths = {env.obs_dim()};
        for (int w : cfg.mlp_hidden) widths.push_back(w);
        widths.push_back(env.action_count());
        return std::make_unique<train::MlpPolicy>(std::move(widths), rng);
    }

    pqc::PqcTopology topo;
    topo.n_qubits = cfg.n_qubits;
    topo.d_enc = cfg.d_enc;
    topo.entangler = cfg.entangler;
    topo.entangler_trainable = cfg.entangler_trainable;
    topo.input_dim = env.obs_dim();
    topo.validate();

    pqc::PolicyConfig pol;
    if (cfg.policy == PolicyChoice::Softmax) {
        pol.kind = pqc::PolicyKind::Softmax;
        pol.beta = cfg.beta_final;
        pol.observables = parse_observables(cfg.observables, cfg.n_qubits);
        if (static_cast<int>(pol.observables.size()) != env.action_count())
            throw ConfigError("observable count does not match the environment's actions");
        pqc::ParamVector params = pqc::init_params(topo, pol.observables, rng);
        auto policy = std::make_unique<train::PqcPolicy>(topo, std::move(pol), std::move(params),
                                                         cfg.shots);
        policy->freeze_lambda(cfg.freeze_lambda);
        policy->freeze_w(cfg.freeze_w);
        return policy;
    }
    pol.kind = pqc::PolicyKind::Born;
    pol.partition = parse_partition(cfg.partition, cfg.n_qubits, env.action_count());
    pqc::ParamVector params = pqc::init_params(topo, 0, rng);
    auto policy =
        std::make_unique<train::PqcPolicy>(topo, std::move(pol), std::move(params), cfg.shots);
    policy->freeze_lambda(cfg.freeze_lambda);
    return policy;
}

void save_parameters(const train::TrainablePolicy& policy, const std::string& path) {
    std::ofstream out = open_out(path);
    const auto groups = policy.parameters();
    const auto names = policy.group_names();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out << names[g] << " " << groups[g].size() << "\n";
        for (double v : groups[g]) out << fmt(v) << "\n";
    }
}

void load_parameters(train::TrainablePolicy& policy, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file: " + path);
    auto groups = policy.parameters();
    const auto names = policy.group_names();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::string name;
        std::size_t count = 0;
        if (!(in >> name >> count) || name != names[g] || count != groups[g].size())
            throw ConfigError("parameter file does not match the policy layout");
        for (double& v : groups[g])
            if (!(in >> v)) throw ConfigError("parameter file truncated");
    }
    policy.set_parameters(groups);
}

namespace {

struct SeedRun {
    std::uint64_t seed;
    std::vector<train::EpisodeRecord> records;
};

void write_run_csv(const fs::path& path, std::uint64_t seed,
                   const std::vector<train::EpisodeRecord>& records,
                   const std::vector<long>& wall_ms) {
    std::ofstream out = open_out(path);
    out << "schema,seed,episode,return,return_ma10,beta,wall_ms\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << kCsvSchema << "," << seed << "," << r.episode << "," << fmt(r.ret) << ","
            << fmt(r.ret_ma10) << "," << fmt(r.beta) << "," << wall_ms[i] << "\n";
    }
}

}  // namespace

int run_train(const ExperimentConfig& cfg) {
    if (cfg.seeds.empty())
        throw ConfigError("no seeds: set [run] seeds or pass --seed explicitly");
    const fs::path dir = resolve_output_dir(cfg.output);
    cfg.to_file().save((dir / "config.cfg").string());

    std::vector<SeedRun> runs;
    for (const std::uint64_t seed : cfg.seeds) {
        auto env = make_env(cfg);
        auto policy = make_policy(cfg, *env, seed);

        train::TrainerConfig tc;
        tc.batch_size = cfg.batch_size;
        tc.gamma = cfg.gamma;
        tc.horizon = cfg.horizon;
        tc.use_baseline = cfg.use_baseline;
        tc.ridge = cfg.ridge;
        tc.total_episodes = cfg.episodes;
        tc.anneal.beta_start = 1.0;
        tc.anneal.beta_final = cfg.beta_final;
        tc.anneal.total_episodes =
            cfg.anneal_episodes > 0 ? cfg.anneal_episodes : cfg.episodes;
        if (cfg.policy == PolicyChoice::Mlp) {
            tc.learning_rates = {cfg.lr_mlp};
        } else if (cfg.policy == PolicyChoice::Softmax) {
            tc.learning_rates = {cfg.lr_phi, cfg.lr_lambda, cfg.lr_w};
        } else {
            tc.learning_rates = {cfg.lr_phi, cfg.lr_lambda};
        }

        std::vector<long> wall_ms;
        const auto t0 = std::chrono::steady_clock::now();
        auto records = train::run_reinforce(*policy, *env, tc, seed,
                                            [&](const train::EpisodeRecord&) {
                                                if (cfg.timing) {
                                                    const auto now = std::chrono::steady_clock::now();
                                                    wall_ms.push_back(
                                                        std::chrono::duration_cast<std::chrono::milliseconds>(
                                                            now - t0)
                                                            .count());
                                                } else {
                                                    wall_ms.push_back(0);
                                                }
                                            });
        write_run_csv(dir / ("seed" + std::to_string(seed) + ".csv"), seed, records, wall_ms);
        save_parameters(*policy, (dir / ("params_seed" + std::to_string(seed) + ".txt")).string());
        runs.push_back({seed, std::move(records)});
    }

    // aggregate mean/std across seeds per episode index
    const std::size_t n_eps = runs.front().records.size();
    std::ofstream agg = open_out(dir / "aggregate.csv");
    agg << "schema,episode,return_mean,return_std,ma10_mean,ma10_std\n";
    for (std::size_t e = 0; e < n_eps; ++e) {
        double mr = 0.0, mm = 0.0;
        for (const auto& run : runs) {
            mr += run.records[e].ret;
            mm += run.records[e].ret_ma10;
        }
        mr /= runs.size();
        mm /= runs.size();
        double vr = 0.0, vm = 0.0;
        for (const auto& run : runs) {
            vr += (run.records[e].ret - mr) * (run.records[e].ret - mr);
            vm += (run.records[e].ret_ma10 - mm) * (run.records[e].ret_ma10 - mm);
        }
        vr = std::sqrt(vr / runs.size());
        vm = std::sqrt(vm / runs.size());
        agg << kCsvSchema << "," << e << "," << fmt(mr) << "," << fmt(vr) << "," << fmt(mm) << ","
            << fmt(vm) << "\n";
    }
    std::cout << "train: wrote " << runs.size() << " seed runs to " << dir.string() << "\n";
    return 0;
}

int run_eval(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& params_path) {
    const fs::path dir = resolve_output_dir(cfg.output);
    auto env = make_env(cfg);
    auto policy = make_policy(cfg, *env, seed);
    if (!params_path.empty()) load_parameters(*policy, params_path);
    policy->set_beta(cfg.beta_final);

    const auto batch = train::generate_episodes(*policy, *env, cfg.eval_episodes,
                                                cfg.horizon, seed, 0x20000000ULL);
    std::ofstream out = open_out(dir / "eval.csv");
    out << "schema,seed,episode,return\n";
    double mean = 0.0;
    for (std::size_t e = 0; e < batch.size(); ++e) {
        const double ret = batch[e].undiscounted_return();
        out << kCsvSchema << "," << seed << "," << e << "," << fmt(ret) << "\n";
        mean += ret;
    }
    mean /= static_cast<double>(batch.size());
    std::cout << "eval: mean return " << fmt(mean) << " over " << batch.size() << " episodes\n";
    return 0;
}

namespace {

struct CheckRow {
    std::string suite;
    std::string check;
    double value;
    double bound;
    bool pass;
};

pqc::PqcTopology random_check_topology(Rng& rng) {
    std::uniform_int_distribution<int> nd(1, 4), dd(0, 5), ed(0, 2), bd(0, 1);
    pqc::PqcTopology t;
    t.n_qubits = nd(rng);
    t.d_enc = dd(rng);
    t.entangler = static_cast<pqc::Entangler>(ed(rng));
    t.entangler_trainable = bd(rng) == 1;
    std::uniform_int_distribution<int> idd(1, 2 * t.n_qubits);
    t.input_dim = idd(rng);
    return t;
}

qsim::ObservableSpec random_check_observable(int n, Rng& rng) {
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> wd(-1.0, 1.0);
    qsim::ObservableSpec obs;
    if (coin(rng) == 0) {
        std::string s;
        for (int q = 0; q < n; ++q) s.push_back(coin(rng) ? 'Z' : 'I');
        if (s.find('Z') == std::string::npos) s[0] = 'Z';
        obs.terms.push_back(qsim::ObsTerm::pauli_string(s, wd(rng)));
    } else {
        std::vector<std::uint64_t> basis;
        for (std::uint64_t i = 0; i < (1ULL << n); ++i)
            if (coin(rng)) basis.push_back(i);
        obs.terms.push_back(qsim::ObsTerm::projector(basis, wd(rng)));
    }
    return obs;
}

std::vector<double> random_check_input(const pqc::PqcTopology& t, Rng& rng) {
    std::uniform_real_distribution<double> sd(-2.0, 2.0);
    std::vector<double> s(t.input_dim);
    for (double& v : s) v = sd(rng);
    return s;
}

CheckRow shift_rule_suite(std::uint64_t seed, double shift_override) {
    Rng rng = make_rng(seed, 0x51);
    const double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const pqc::PqcTopology t = random_check_topology(rng);
        const pqc::ParamVector p = pqc::init_params(t, 0, rng);
        const auto s = random_check_input(t, rng);
        const qsim::ObservableSpec obs = random_check_observable(t.n_qubits, rng);
        std::uniform_int_distribution<int> pick(0, t.phi_size() + t.lam_size() - 1);
        const int idx = pick(rng);

        double shift_val, fd;
        pqc::ParamVector q = p;
        if (idx < t.phi_size()) {
            shift_val = pqc::parameter_shift_derivative(s, p, t, obs, pqc::ParamGroup::Phi, idx,
                                                        shift_override);
            q.phi[idx] += h;
            const double up = qsim::expectation(pqc::evaluate_state(t, s, q), obs);
            q.phi[idx] -= 2 * h;
            const double dn = qsim::expectation(pqc::evaluate_state(t, s, q), obs);
            fd = (up - dn) / (2 * h);
        } else {
            const int li = idx - t.phi_size();
            shift_val = pqc::parameter_shift_derivative(s, p, t, obs, pqc::ParamGroup::Lambda, li,
                                                        shift_override);
            q.lam[li] += h;
            const double up = qsim::expectation(pqc::evaluate_state(t, s, q), obs);
            q.lam[li] -= 2 * h;
            const double dn = qsim::expectation(pqc::evaluate_state(t, s, q), obs);
            fd = (up - dn) / (2 * h);
        }
        const double err = std::abs(shift_val - fd) / std::max(1e-3, std::abs(fd));
        worst = std::max(worst, err);
    }
    return {"shift", "max_relative_error_vs_fd", worst, 1e-5, worst <= 1e-5};
}

CheckRow score_identity_suite(std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x52);
    double worst = 0.0;
    int done = 0;
    while (done < 100) {
        const pqc::PqcTopology t = random_check_topology(rng);
        const auto s = random_check_input(t, rng);
        pqc::PolicyConfig cfg;
        pqc::GradVector total;
        if (done % 2 == 0) {
            cfg.kind = pqc::PolicyKind::Softmax;
            cfg.beta = 2.0;
            for (int a = 0; a < 3; ++a)
                cfg.observables.push_back(random_check_observable(t.n_qubits, rng));
            const pqc::ParamVector p = pqc::init_params(t, cfg.observables, rng);
            const auto pi = pqc::policy_probabilities(s, p, t, cfg);
            total = pqc::zero_grad(t, cfg.w_size());
            for (int a = 0; a < cfg.n_actions(); ++a)
                total.axpy(pi[a], pqc::log_policy_gradient(s, a, p, t, cfg));
        } else {
            cfg.kind = pqc::PolicyKind::Born;
            cfg.partition = qsim::ActionPartition::by_index_ranges(t.n_qubits, 2);
            const pqc::ParamVector p = pqc::init_params(t, 0, rng);
            const auto pi = pqc::policy_probabilities(s, p, t, cfg);
            if (pi[0] < 1e-6 || pi[1] < 1e-6) continue;
            total = pqc::zero_grad(t, 0);
            for (int a = 0; a < cfg.n_actions(); ++a)
                total.axpy(pi[a], pqc::log_policy_gradient(s, a, p, t, cfg));
        }
        worst = std::max(worst, total.linf());
        ++done;
    }
    return {"score", "max_linf_expected_score", worst, 1e-8, worst <= 1e-8};
}

}  // namespace

int run_gradcheck(const GradcheckOptions& opts) {
    if (opts.suites.empty())
        throw ConfigError("empty suite selection: a vacuous pass is not a pass");
    std::vector<CheckRow> rows;
    for (const std::string& suite : opts.suites) {
        if (suite == "shift")
            rows.push_back(shift_rule_suite(opts.seed, opts.shift_override));
        else if (suite == "score")
            rows.push_back(score_identity_suite(opts.seed));
        else
            throw ConfigError("unknown gradcheck suite '" + suite + "'");
    }

    const fs::path dir = resolve_output_dir(opts.output_dir.empty() ? "gradcheck" : opts.output_dir);
    std::ofstream out = open_out(dir / "gradcheck.csv");
    out << "schema,suite,check,value,bound,pass\n";
    bool all_pass = true;
    for (const CheckRow& r : rows) {
        out << kCsvSchema << "," << r.suite << "," << r.check << "," << fmt(r.value) << ","
            << fmt(r.bound) << "," << (r.pass ? "1" : "0") << "\n";
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.suite << ": " << r.check << " = "
                  << fmt(r.value) << " (bound " << fmt(r.bound) << ")\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 2;
}

namespace {

// Set-intersection oracle for the feature inner product: builds both
// superposition supports explicitly in log space.
double inner_product_by_sets(dlp::u64 x, dlp::u64 s_prime, const dlp::DlpInstance& inst, int k) {
    const dlp::u64 m = inst.p - 1;
    std::set<dlp::u64> a;
    for (dlp::u64 i = 0; i < (1ULL << k); ++i) a.insert((inst.log_of(x) + i) % m);
    std::set<dlp::u64> b;
    for (dlp::u64 i = 0; i <= (inst.p - 3) / 2; ++i) b.insert((s_prime + i) % m);
    dlp::u64 isect = 0;
    for (dlp::u64 v : a) isect += b.count(v);
    return static_cast<double>(isect) * static_cast<double>(isect) /
           (static_cast<double>(1ULL << k) * static_cast<double>((inst.p - 1) / 2));
}

dlp::u64 find_generator(dlp::u64 p) {
    for (dlp::u64 g = 2; g < p; ++g)
        if (dlp::is_generator(g, p)) return g;
    throw ConfigError("no generator found");
}

}  // namespace

int run_dlp_verify(const DlpVerifyOptions& opts) {
    const fs::path dir = resolve_output_dir(opts.output_dir.empty() ? "dlp_verify" : opts.output_dir);
    std::ofstream out = open_out(dir / "dlp_verify.csv");
    out << "schema,check,value,expected,tol,pass\n";
    bool all_pass = true;
    auto emit_row = [&](const std::string& check, double value, double expected, double tol,
                        bool pass, const char* relation) {
        out << kCsvSchema << "," << check << "," << fmt(value) << "," << fmt(expected) << ","
            << fmt(tol) << "," << (pass ? "1" : "0") << "\n";
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << check << " = " << fmt(value) << " ("
                  << relation << " " << fmt(expected) << (tol > 0.0 ? " +- " + fmt(tol) : "")
                  << ")\n";
        all_pass = all_pass && pass;
    };
    auto emit = [&](const std::string& check, double value, double expected, double tol) {
        emit_row(check, value, expected, tol, std::abs(value - expected) <= tol, "expected");
    };
    auto emit_ge = [&](const std::string& check, double value, double floor) {
        emit_row(check, value, floor, 0.0, value >= floor, "at least");
    };

    // label balance: exactly (p-1)/2 positives for every s
    for (dlp::u64 p : {11ULL, 101ULL}) {
        const dlp::u64 g = find_generator(p);
        dlp::u64 worst = 0;
        for (dlp::u64 s = 0; s < p - 1; ++s) {
            const dlp::DlpInstance inst(p, g, s);
            dlp::u64 pos = 0;
            for (dlp::u64 x = 1; x < p; ++x) pos += dlp::label(inst, x) == 1;
            worst = std::max(worst,
                             pos > (p - 1) / 2 ? pos - (p - 1) / 2 : (p - 1) / 2 - pos);
        }
        emit("label_balance_deviation_p" + std::to_string(p), static_cast<double>(worst), 0.0, 0.0);
    }

    // inner products vs the explicit set-intersection oracle, exhaustive
    for (dlp::u64 p : {7ULL, 11ULL, 101ULL}) {
        const dlp::DlpInstance inst(p, find_generator(p), 0);
        double worst = 0.0;
        for (int k = 0; (1ULL << k) <= (p - 1) / 2; ++k)
            for (dlp::u64 x = 1; x < p; ++x)
                for (dlp::u64 sp = 0; sp < p - 1; ++sp)
                    worst = std::max(worst, std::abs(dlp::feature_inner_product(x, sp, inst, k) -
                                                     inner_product_by_sets(x, sp, inst, k)));
        emit("inner_product_oracle_gap_p" + std::to_string(p), worst, 0.0, 1e-12);
    }

    // argmin training, statistical table
    const dlp::u64 p = opts.theorem3_p;
    const dlp::u64 g = find_generator(p);
    std::ofstream table = open_out(dir / "dlp_training_table.csv");
    table << "schema,trial,p,g,s,seed,s_prime,accuracy\n";
    std::ofstream instances = open_out(dir / "dlp_instances.txt");
    int hits = 0;
    for (int trial = 0; trial < opts.theorem3_trials; ++trial) {
        Rng rng = make_rng(opts.seed, 0x7000 + static_cast<std::uint64_t>(trial));
        std::uniform_int_distribution<dlp::u64> sd(0, p - 2), xd(1, p - 1);
        const dlp::DlpInstance inst(p, g, sd(rng));
        std::vector<dlp::u64> training(opts.theorem3_training);
        for (auto& x : training) x = xd(rng);
        const dlp::u64 sp =
            dlp::train_classifier(inst, training, opts.theorem3_k, opts.theorem3_shots, rng);
        const double acc = dlp::exhaustive_accuracy(inst, sp, opts.theorem3_k);
        hits += acc >= opts.min_accuracy;
        table << kCsvSchema << "," << trial << "," << p << "," << g << "," << inst.s << ","
              << opts.seed << "," << sp << "," << fmt(acc) << "\n";
        instances << p << " " << g << " " << inst.s << " " << opts.seed << "\n";
    }
    const double hit_fraction = static_cast<double>(hits) / std::max(1, opts.theorem3_trials);
    emit_ge("trained_accuracy_hits_fraction", hit_fraction, opts.min_fraction);

    // value-bound table
    std::ofstream bounds = open_out(dir / "dlp_bounds.csv");
    bounds << "schema,accuracy,slip,gamma,upper,lower,gap,v_rand\n";
    for (double gamma : {0.0, 0.5, 0.9}) {
        const dlp::BoundReport r = dlp::cliffwalk_bounds(0.51, 0.86, gamma);
        bounds << kCsvSchema << "," << fmt(r.accuracy) << "," << fmt(r.slip) << ","
               << fmt(r.gamma) << "," << fmt(r.upper) << "," << fmt(r.lower) << "," << fmt(r.gap)
               << "," << fmt(dlp::v_rand(gamma)) << "\n";
    }
    emit("gap_g_0.51_0.86_0.9", dlp::gap_g(0.51, 0.86, 0.9), 0.0995, 0.0005);
    emit("v_rand_gamma0.9", dlp::v_rand(0.9), -1.0 / 1.1, 1e-12);
    emit("v_rand_gamma0", dlp::v_rand(0.0), -0.5, 1e-12);

    return all_pass ? 0 : 2;
}

int run_gen_env(std::uint64_t seed, const std::string& out_path) {
    const envs::PqcEnvSpec spec = envs::generate_pqc_env(seed);
    fs::path path = out_path.empty() ? fs::path("pqc_env_" + std::to_string(seed) + ".txt")
                                     : fs::path(out_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out = open_out(path);
    out << "seed " << spec.seed << "\n";
    out << "n_qubits " << spec.topology.n_qubits << "\n";
    out << "d_enc " << spec.topology.d_enc << "\n";
    out << "margin " << fmt(spec.margin) << "\n";
    out << "phi " << spec.params.phi.size() << "\n";
    for (double v : spec.params.phi) out << fmt(v) << "\n";
    out << "lambda " << spec.params.lam.size() << "\n";
    for (double v : spec.params.lam) out << fmt(v) << "\n";
    out << "points " << spec.points.size() << "\n";
    for (std::size_t i = 0; i < spec.points.size(); ++i)
        out << fmt(spec.points[i][0]) << " " << fmt(spec.points[i][1]) << " " << spec.labels[i]
            << "\n";
    std::cout << "gen-env: wrote " << path.string() << "\n";
    return 0;
}

}  // namespace qpol::cli
