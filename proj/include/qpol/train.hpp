#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "qpol/envs.hpp"
#include "qpol/mlp.hpp"
#include "qpol/pqc.hpp"

namespace qpol::train {

struct Trajectory {
    std::vector<envs::Obs> states;
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<double> returns;

    std::size_t length() const { return rewards.size(); }
    double undiscounted_return() const;
};

/// Backward recursion G_t = r_{t+1} + gamma G_{t+1}, G_{H-1} = r_H.
void compute_returns(Trajectory& traj, double gamma);

/// Ridge-fitted linear state-value predictor over the features
/// [s, s^2, t/H, (t/H)^2, (t/H)^3, 1].
class BaselineModel {
  public:
    BaselineModel() = default;
    BaselineModel(int state_dim, double ridge = 1e-5);

    static std::vector<double> features(const envs::Obs& s, int t, int horizon);
    bool fitted() const { return !weights_.empty(); }
    double predict(const envs::Obs& s, int t, int horizon) const;
    void fit(const std::vector<Trajectory>& batch, int horizon);

  private:
    int state_dim_ = 0;
    double ridge_ = 1e-5;
    std::vector<double> weights_;
};

BaselineModel fit_baseline(const std::vector<Trajectory>& batch, int state_dim, int horizon,
                           double ridge = 1e-5);

/// theta <- theta + alpha * mhat / (sqrt(vhat) + eps), one moment pair per
/// parameter group with its own learning rate. Ascent direction.
class AdamOptimizer {
  public:
    AdamOptimizer() = default;
    AdamOptimizer(std::vector<std::size_t> group_sizes, std::vector<double> learning_rates,
                  double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    long step_count() const { return step_; }
    /// Consumes one gradient (ascent direction) and returns the update.
    std::vector<std::vector<double>> update(const std::vector<std::vector<double>>& grad);

  private:
    std::vector<std::vector<double>> m_, v_;
    std::vector<double> lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long step_ = 0;
};

/// A policy the REINFORCE loop can sample from and differentiate.
/// Parameters are exposed as named groups so the optimizer can run one
/// learning rate per group.
class TrainablePolicy {
  public:
    virtual ~TrainablePolicy() = default;
    virtual int n_actions() const = 0;
    virtual std::vector<std::size_t> group_sizes() const = 0;
    virtual std::vector<std::string> group_names() const = 0;
    virtual std::vector<double> action_probs(const envs::Obs& s, Rng& rng) const = 0;
    virtual std::vector<std::vector<double>> log_policy_gradient(const envs::Obs& s, int action,
                                                                 Rng& rng) const = 0;
    virtual void apply_update(const std::vector<std::vector<double>>& delta) = 0;
    virtual std::vector<std::vector<double>> parameters() const = 0;
    virtual void set_parameters(const std::vector<std::vector<double>>& p) = 0;
    virtual void set_beta(double) {}

    int sample_action(const envs::Obs& s, Rng& rng) const;
};

/// PQC policy (Born or softmax) with groups (phi, lambda[, w]).
/// shots = 0 evaluates expectations exactly; shots > 0 switches both the
/// policy and its gradients to R-shot estimates (Born sampling stays exact:
/// a single measurement already samples the true distribution).
class PqcPolicy : public TrainablePolicy {
  public:
    PqcPolicy(pqc::PqcTopology topo, pqc::PolicyConfig cfg, pqc::ParamVector params,
              int shots = 0);

    int n_actions() const override { return cfg_.n_actions(); }
    std::vector<std::size_t> group_sizes() const override;
    std::vector<std::string> group_names() const override;
    std::vector<double> action_probs(const envs::Obs& s, Rng& rng) const override;
    std::vector<std::vector<double>> log_policy_gradient(const envs::Obs& s, int action,
                                                         Rng& rng) const override;
    void apply_update(const std::vector<std::vector<double>>& delta) override;
    std::vector<std::vector<double>> parameters() const override;
    void set_parameters(const std::vector<std::vector<double>>& p) override;
    void set_beta(double beta) override { cfg_.beta = beta; }

    void freeze_lambda(bool on) { freeze_lambda_ = on; }
    void freeze_w(bool on) { freeze_w_ = on; }
    const pqc::ParamVector& params() const { return params_; }
    const pqc::PolicyConfig& config() const { return cfg_; }
    const pqc::PqcTopology& topology() const { return topo_; }

  private:
    pqc::PqcTopology topo_;
    pqc::PolicyConfig cfg_;
    pqc::ParamVector params_;
    int shots_ = 0;
    bool freeze_lambda_ = false;
    bool freeze_w_ = false;
    bool has_w() const { return cfg_.kind == pqc::PolicyKind::Softmax; }
    /// Shift-rule gradient built from R-shot expectation estimates.
    void noisy_shift_gradient(const envs::Obs& s, const qsim::ObservableSpec& obs, Rng& rng,
                              std::vector<double>& dphi, std::vector<double>& dlam) const;
    pqc::GradVector noisy_softmax_gradient(const envs::Obs& s, int action, Rng& rng) const;
};

/// Rectifier network policy; one parameter group.
class MlpPolicy : public TrainablePolicy {
  public:
    MlpPolicy(std::vector<int> widths, Rng& rng) : net_(std::move(widths), rng) {}

    int n_actions() const override { return net_.n_actions(); }
    std::vector<std::size_t> group_sizes() const override { return {net_.param_count()}; }
    std::vector<std::string> group_names() const override { return {"mlp"}; }
    std::vector<double> action_probs(const envs::Obs& s, Rng&) const override {
        return net_.probabilities(s);
    }
    std::vector<std::vector<double>> log_policy_gradient(const envs::Obs& s, int action,
                                                         Rng&) const override {
        return {net_.forward_backward(s, action).second};
    }
    void apply_update(const std::vector<std::vector<double>>& delta) override;
    std::vector<std::vector<double>> parameters() const override { return {net_.parameters()}; }
    void set_parameters(const std::vector<std::vector<double>>& p) override;

    MlpPolicyNet& net() { return net_; }

  private:
    MlpPolicyNet net_;
};

/// beta(episode): linear from beta_start to beta_final over total_episodes,
/// constant afterwards.
struct AnnealSchedule {
    double beta_start = 1.0;
    double beta_final = 1.0;
    long total_episodes = 1;
};

double anneal_beta(const AnnealSchedule& schedule, long episode);

/// N episodes sampled by acting with the policy; episode e uses the rng
/// stream derived from (seed, episode_base + e) and results are reduced in
/// episode order, so batches are identical for any worker count.
/// Environments that keep cross-episode memory force workers = 1.
std::vector<Trajectory> generate_episodes(const TrainablePolicy& policy, envs::Environment& env,
                                          int n_episodes, int horizon, std::uint64_t seed,
                                          std::uint64_t episode_base, int workers = 1);

struct GradStepStats {
    int episodes_used = 0;
    int episodes_excluded = 0;  // degenerate Born gradients
};

/// Alg: delta = (1/N) sum_i sum_t grad log pi(a|s) (G_t - V(s_t)), then one
/// Adam step per group. Episodes with degenerate Born gradients are
/// excluded and counted.
GradStepStats policy_gradient_step(TrainablePolicy& policy, const std::vector<Trajectory>& batch,
                                   const BaselineModel* baseline, AdamOptimizer& optimizer,
                                   int horizon, std::uint64_t seed, std::uint64_t stream);

struct EpisodeRecord {
    long episode = 0;
    double ret = 0.0;       // undiscounted episode reward
    double ret_ma10 = 0.0;  // trailing mean over <= 10 episodes
    double beta = 0.0;
};

struct TrainerConfig {
    int batch_size = 10;
    double gamma = 1.0;
    int horizon = 0;  // 0: use the environment's cap
    bool use_baseline = true;
    double ridge = 1e-5;
    std::vector<double> learning_rates;  // one per policy group
    AnnealSchedule anneal;
    long total_episodes = 1000;
    int workers = 1;
    /// Optional early stop, checked once per generated episode.
    std::function<bool(const EpisodeRecord&)> stop_when;
};

using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

/// Runs REINFORCE with baseline until total_episodes; deterministic given
/// the seed. Returns the per-episode records.
std::vector<EpisodeRecord> run_reinforce(TrainablePolicy& policy, envs::Environment& env,
                                         const TrainerConfig& cfg, std::uint64_t seed,
                                         const EpisodeCallback& callback = nullptr);

}  // namespace qpol::train
