#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "qpol/dlp.hpp"
#include "qpol/pqc.hpp"

namespace qpol::envs {

using Obs = std::vector<double>;

struct StepResult {
    Obs observation;
    double reward = 0.0;
    bool done = false;
};

/// Episodic environment. step() after done and before the next reset is a
/// protocol error. max_steps() == 0 means the environment has no internal
/// cap and the rollout horizon applies.
class Environment {
  public:
    virtual ~Environment() = default;

    Obs reset(Rng& rng);
    StepResult step(int action, Rng& rng);

    virtual int obs_dim() const = 0;
    virtual int action_count() const = 0;
    virtual int max_steps() const { return 0; }
    virtual std::string name() const = 0;
    /// True when state deliberately persists across episodes (chain env);
    /// such environments cannot be batch-parallelized.
    virtual bool keeps_memory() const { return false; }
    /// Independent copy for parallel rollouts.
    virtual std::unique_ptr<Environment> clone() const = 0;

  protected:
    virtual Obs do_reset(Rng& rng) = 0;
    virtual StepResult do_step(int action, Rng& rng) = 0;

  private:
    bool awaiting_reset_ = true;
    int steps_ = 0;
};

// ---- classical benchmark dynamics -----------------------------------------

struct CartPoleParams {
    double gravity = 9.8;
    double mass_cart = 1.0;
    double mass_pole = 0.1;
    double half_length = 0.5;
    double force_mag = 10.0;
    double tau = 0.02;
    double theta_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
    double x_threshold = 2.4;
    int horizon = 500;
};

struct MountainCarParams {
    double min_position = -1.2;
    double max_position = 0.6;
    double max_speed = 0.07;
    double goal_position = 0.5;
    double force = 0.001;
    double gravity = 0.0025;
    int horizon = 200;
    // reward: -1 per step, +goal_bonus on reaching the goal, plus optional
    // potential shaping height_coeff * (sin(3 p') - sin(3 p))
    double goal_bonus = 100.0;
    double height_coeff = 0.0;
};

struct AcrobotParams {
    double dt = 0.2;
    double link_length_1 = 1.0;
    double link_mass_1 = 1.0;
    double link_mass_2 = 1.0;
    double link_com_1 = 0.5;
    double link_com_2 = 0.5;
    double link_moi = 1.0;
    double gravity = 9.8;
    double max_vel_1 = 4.0 * 3.14159265358979323846;
    double max_vel_2 = 9.0 * 3.14159265358979323846;
    int horizon = 500;
};

/// One Euler step of the standard cart-pole dynamics; +1 reward per step,
/// done on pole-angle/track bounds. Throws NumericalError on NaN states.
StepResult cartpole_dynamics_step(std::array<double, 4>& state, int action,
                                  const CartPoleParams& p);
StepResult mountaincar_dynamics_step(std::array<double, 2>& state, int action,
                                     const MountainCarParams& p);
/// One RK4 step of the two-link swing-up dynamics ("book" variant).
StepResult acrobot_dynamics_step(std::array<double, 4>& state, int action,
                                 const AcrobotParams& p);

class CartPoleEnv : public Environment {
  public:
    explicit CartPoleEnv(CartPoleParams params = {}) : p_(params) {}
    int obs_dim() const override { return 4; }
    int action_count() const override { return 2; }
    int max_steps() const override { return p_.horizon; }
    std::string name() const override { return "cartpole"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<CartPoleEnv>(*this);
    }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    CartPoleParams p_;
    std::array<double, 4> state_{};
};

class MountainCarEnv : public Environment {
  public:
    explicit MountainCarEnv(MountainCarParams params = {}) : p_(params) {}
    int obs_dim() const override { return 2; }
    int action_count() const override { return 3; }
    int max_steps() const override { return p_.horizon; }
    std::string name() const override { return "mountaincar"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<MountainCarEnv>(*this);
    }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    MountainCarParams p_;
    std::array<double, 2> state_{};
};

class AcrobotEnv : public Environment {
  public:
    explicit AcrobotEnv(AcrobotParams params = {}) : p_(params) {}
    int obs_dim() const override { return 6; }
    int action_count() const override { return 3; }
    int max_steps() const override { return p_.horizon; }
    std::string name() const override { return "acrobot"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<AcrobotEnv>(*this);
    }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    AcrobotParams p_;
    std::array<double, 4> state_{};  // theta1, theta2, dtheta1, dtheta2
    Obs observe() const;
};

/// n radio channels, exactly one occupied; the occupied channel advances by
/// one slot per step. Picking the occupied channel collides (-1), any other
/// channel earns +1. Observation is the binary occupation vector.
class CognitiveRadioEnv : public Environment {
  public:
    explicit CognitiveRadioEnv(int n_channels, int horizon = 100);
    int obs_dim() const override { return n_; }
    int action_count() const override { return n_; }
    int max_steps() const override { return horizon_; }
    std::string name() const override { return "cognitive_radio"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<CognitiveRadioEnv>(*this);
    }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    int n_;
    int horizon_;
    int occupied_ = 0;
    Obs observe() const;
};

// ---- PQC-generated labelling environments ----------------------------------

/// Frozen circuit-generated binary classification task: 20 points in
/// [0,2pi]^2, 10 per label, every point clearing half the margin.
struct PqcEnvSpec {
    pqc::PqcTopology topology;   // n=2, D_enc=4
    pqc::ParamVector params;     // frozen generator parameters
    double margin = 0.3;
    std::vector<std::array<double, 2>> points;
    std::vector<int> labels;  // +-1, sign of <ZZ>
    int episode_len = 20;
    std::uint64_t seed = 0;

    double zz_expectation(const std::array<double, 2>& s) const;
};

inline constexpr int kPqcEnvRejectionCap = 1000000;

/// Samples the generator circuit from the seed and rejection-samples the
/// dataset; throws DegenerateGeneratorError past the rejection cap.
PqcEnvSpec generate_pqc_env(std::uint64_t seed);

/// Each of the 20 steps shows a uniformly drawn dataset point; matching the
/// label earns +1, mismatching -1.
class PqcLabelEnv : public Environment {
  public:
    explicit PqcLabelEnv(PqcEnvSpec spec) : spec_(std::move(spec)) {}
    int obs_dim() const override { return 2; }
    int action_count() const override { return 2; }
    int max_steps() const override { return spec_.episode_len; }
    std::string name() const override { return "pqc_sl"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<PqcLabelEnv>(*this);
    }
    const PqcEnvSpec& spec() const { return spec_; }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    PqcEnvSpec spec_;
    int current_ = 0;
    int draw(Rng& rng) const;
};

/// Fixed path through the dataset: a correct label moves one point forward
/// for +1 reward, a wrong one terminates with -1. Completing the path ends
/// the episode.
class PqcCliffwalkEnv : public Environment {
  public:
    explicit PqcCliffwalkEnv(PqcEnvSpec spec) : spec_(std::move(spec)) {}
    int obs_dim() const override { return 2; }
    int action_count() const override { return 2; }
    int max_steps() const override { return spec_.episode_len; }
    std::string name() const override { return "pqc_cliffwalk"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<PqcCliffwalkEnv>(*this);
    }
    const PqcEnvSpec& spec() const { return spec_; }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    PqcEnvSpec spec_;
    int position_ = 0;
};

// ---- DLP environments -------------------------------------------------------

/// Label +1 maps to action 0, label -1 to action 1.
inline int label_to_action(int pm_label) { return pm_label > 0 ? 0 : 1; }

/// Uniform i.i.d. states from Z_p^*; rewards +-1 for matching the concept
/// label; episode length H (default 1).
class DlpLabelEnv : public Environment {
  public:
    DlpLabelEnv(dlp::DlpInstance inst, int episode_len = 1);
    int obs_dim() const override { return 1; }
    int action_count() const override { return 2; }
    int max_steps() const override { return episode_len_; }
    std::string name() const override { return "dlp_sl"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<DlpLabelEnv>(*this);
    }
    const dlp::DlpInstance& instance() const { return inst_; }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    dlp::DlpInstance inst_;
    int episode_len_;
    dlp::u64 x_ = 1;
    dlp::u64 draw(Rng& rng) const;
};

/// Circular cliffwalk over Z_p^*: correct action moves forward (state p-1
/// wraps to 1) with reward 0, slipping to a uniform state with probability
/// delta; a wrong action ends the episode with reward -1. No internal cap.
class DlpCliffwalkEnv : public Environment {
  public:
    DlpCliffwalkEnv(dlp::DlpInstance inst, double slip_delta, double gamma_hint = 0.0);
    int obs_dim() const override { return 1; }
    int action_count() const override { return 2; }
    std::string name() const override { return "dlp_cliffwalk"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<DlpCliffwalkEnv>(*this);
    }
    const dlp::DlpInstance& instance() const { return inst_; }
    double slip() const { return slip_; }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    dlp::DlpInstance inst_;
    double slip_;
    double gamma_hint_;  // advisory, recorded for bound reports
    dlp::u64 state_ = 1;
};

/// 1-D chain: k labelled training states, one unlabelled test state, one
/// absorbing limbo state. Episodes have k+1 steps; the environment keeps
/// its position across episodes, so a failed test answer strands later
/// episodes in limbo. Observations are [x, label(or 0 at test), limbo?].
class DlpChainEnv : public Environment {
  public:
    DlpChainEnv(dlp::DlpInstance inst, int chain_len, std::uint64_t seed);
    int obs_dim() const override { return 3; }
    int action_count() const override { return 2; }
    int max_steps() const override { return chain_len_ + 1; }
    std::string name() const override { return "dlp_chain"; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<DlpChainEnv>(*this);
    }
    bool keeps_memory() const override { return true; }
    const dlp::DlpInstance& instance() const { return inst_; }
    dlp::u64 test_state() const { return test_x_; }
    bool in_limbo() const { return limbo_; }

  protected:
    Obs do_reset(Rng& rng) override;
    StepResult do_step(int action, Rng& rng) override;

  private:
    dlp::DlpInstance inst_;
    int chain_len_;
    std::vector<dlp::u64> training_x_;
    dlp::u64 test_x_ = 1;
    int position_ = 0;
    bool limbo_ = false;
    Obs observe() const;
};

}  // namespace qpol::envs
