#include "qpol/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpol::envs {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap_pi(double x) {
    while (x > kPi) x -= 2.0 * kPi;
    while (x < -kPi) x += 2.0 * kPi;
    return x;
}

void check_finite(const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(v[i])) throw NumericalError("environment state blew up");
}
}  // namespace

Obs Environment::reset(Rng& rng) {
    awaiting_reset_ = false;
    steps_ = 0;
    return do_reset(rng);
}

StepResult Environment::step(int action, Rng& rng) {
    if (awaiting_reset_) throw ProtocolError("step called on a finished episode");
    if (action < 0 || action >= action_count()) throw IndexError("action index out of range");
    StepResult r = do_step(action, rng);
    ++steps_;
    if (max_steps() > 0 && steps_ >= max_steps()) r.done = true;
    if (r.done) awaiting_reset_ = true;
    return r;
}

// ---- cart-pole ---------------------------------------------------------------

StepResult cartpole_dynamics_step(std::array<double, 4>& state, int action,
                                  const CartPoleParams& p) {
    check_finite(state.data(), 4);
    auto [x, x_dot, theta, theta_dot] = state;
    const double force = action == 1 ? p.force_mag : -p.force_mag;
    const double total_mass = p.mass_cart + p.mass_pole;
    const double polemass_length = p.mass_pole * p.half_length;
    const double cos_t = std::cos(theta), sin_t = std::sin(theta);
    const double temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p.gravity * sin_t - cos_t * temp) /
        (p.half_length * (4.0 / 3.0 - p.mass_pole * cos_t * cos_t / total_mass));
    const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

    x += p.tau * x_dot;
    x_dot += p.tau * x_acc;
    theta += p.tau * theta_dot;
    theta_dot += p.tau * theta_acc;
    state = {x, x_dot, theta, theta_dot};
    check_finite(state.data(), 4);

    const bool done = x < -p.x_threshold || x > p.x_threshold || theta < -p.theta_threshold ||
                      theta > p.theta_threshold;
    return {{x, x_dot, theta, theta_dot}, 1.0, done};
}

Obs CartPoleEnv::do_reset(Rng& rng) {
    std::uniform_real_distribution<double> init(-0.05, 0.05);
    for (double& v : state_) v = init(rng);
    return {state_[0], state_[1], state_[2], state_[3]};
}

StepResult CartPoleEnv::do_step(int action, Rng&) {
    return cartpole_dynamics_step(state_, action, p_);
}

// ---- mountain car ------------------------------------------------------------

StepResult mountaincar_dynamics_step(std::array<double, 2>& state, int action,
                                     const MountainCarParams& p) {
    check_finite(state.data(), 2);
    auto [pos, vel] = state;
    const double height_before = std::sin(3.0 * pos);
    vel += (action - 1) * p.force - p.gravity * std::cos(3.0 * pos);
    vel = std::clamp(vel, -p.max_speed, p.max_speed);
    pos += vel;
    pos = std::clamp(pos, p.min_position, p.max_position);
    if (pos <= p.min_position && vel < 0.0) vel = 0.0;
    state = {pos, vel};
    check_finite(state.data(), 2);

    const bool done = pos >= p.goal_position;
    double reward = -1.0 + p.height_coeff * (std::sin(3.0 * pos) - height_before);
    if (done) reward += p.goal_bonus;
    return {{pos, vel}, reward, done};
}

Obs MountainCarEnv::do_reset(Rng& rng) {
    std::uniform_real_distribution<double> init(-0.6, -0.4);
    state_ = {init(rng), 0.0};
    return {state_[0], state_[1]};
}

StepResult MountainCarEnv::do_step(int action, Rng&) {
    return mountaincar_dynamics_step(state_, action, p_);
}

// ---- acrobot -----------------------------------------------------------------

namespace {

std::array<double, 4> acrobot_derivs(const std::array<double, 4>& s, double torque,
                                     const AcrobotParams& p) {
    const double m1 = p.link_mass_1, m2 = p.link_mass_2;
    const double l1 = p.link_length_1;
    const double lc1 = p.link_com_1, lc2 = p.link_com_2;
    const double i1 = p.link_moi, i2 = p.link_moi;
    const double g = p.gravity;
    const double t1 = s[0], t2 = s[1], dt1 = s[2], dt2 = s[3];

    const double d1 =
        m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(t2)) + i1 + i2;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
    const double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - kPi / 2.0);
    const double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                        2 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) +
                        (m1 * lc1 + m2 * l1) * g * std::cos(t1 - kPi / 2.0) + phi2;
    const double ddt2 =
        (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
        (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    const double ddt1 = -(d2 * ddt2 + phi1) / d1;
    return {dt1, dt2, ddt1, ddt2};
}

}  // namespace

StepResult acrobot_dynamics_step(std::array<double, 4>& state, int action,
                                 const AcrobotParams& p) {
    check_finite(state.data(), 4);
    const double torque = static_cast<double>(action - 1);

    const auto k1 = acrobot_derivs(state, torque, p);
    std::array<double, 4> s2;
    for (int i = 0; i < 4; ++i) s2[i] = state[i] + 0.5 * p.dt * k1[i];
    const auto k2 = acrobot_derivs(s2, torque, p);
    std::array<double, 4> s3;
    for (int i = 0; i < 4; ++i) s3[i] = state[i] + 0.5 * p.dt * k2[i];
    const auto k3 = acrobot_derivs(s3, torque, p);
    std::array<double, 4> s4;
    for (int i = 0; i < 4; ++i) s4[i] = state[i] + p.dt * k3[i];
    const auto k4 = acrobot_derivs(s4, torque, p);
    for (int i = 0; i < 4; ++i)
        state[i] += p.dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);

    state[0] = wrap_pi(state[0]);
    state[1] = wrap_pi(state[1]);
    state[2] = std::clamp(state[2], -p.max_vel_1, p.max_vel_1);
    state[3] = std::clamp(state[3], -p.max_vel_2, p.max_vel_2);
    check_finite(state.data(), 4);

    const bool done = -std::cos(state[0]) - std::cos(state[1] + state[0]) > 1.0;
    return {{std::cos(state[0]), std::sin(state[0]), std::cos(state[1]), std::sin(state[1]),
             state[2], state[3]},
            done ? 0.0 : -1.0,
            done};
}

Obs AcrobotEnv::observe() const {
    return {std::cos(state_[0]), std::sin(state_[0]), std::cos(state_[1]), std::sin(state_[1]),
            state_[2], state_[3]};
}

Obs AcrobotEnv::do_reset(Rng& rng) {
    std::uniform_real_distribution<double> init(-0.1, 0.1);
    for (double& v : state_) v = init(rng);
    return observe();
}

StepResult AcrobotEnv::do_step(int action, Rng&) {
    return acrobot_dynamics_step(state_, action, p_);
}

// ---- cognitive radio ----------------------------------------------------------

CognitiveRadioEnv::CognitiveRadioEnv(int n_channels, int horizon)
    : n_(n_channels), horizon_(horizon) {
    if (n_channels < 2) throw ConfigError("cognitive radio needs at least 2 channels");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
}

Obs CognitiveRadioEnv::observe() const {
    Obs o(n_, 0.0);
    o[occupied_] = 1.0;
    return o;
}

Obs CognitiveRadioEnv::do_reset(Rng& rng) {
    std::uniform_int_distribution<int> init(0, n_ - 1);
    occupied_ = init(rng);
    return observe();
}

StepResult CognitiveRadioEnv::do_step(int action, Rng&) {
    const double reward = action == occupied_ ? -1.0 : 1.0;
    occupied_ = (occupied_ + 1) % n_;
    return {observe(), reward, false};
}

// ---- PQC-generated environments -------------------------------------------------

double PqcEnvSpec::zz_expectation(const std::array<double, 2>& s) const {
    static const qsim::ObservableSpec zz{{qsim::ObsTerm::pauli_z({0, 1})}};
    return qsim::expectation(pqc::evaluate_state(topology, {s[0], s[1]}, params), zz);
}

PqcEnvSpec generate_pqc_env(std::uint64_t seed) {
    PqcEnvSpec spec;
    spec.seed = seed;
    spec.topology.n_qubits = 2;
    spec.topology.d_enc = 4;
    spec.topology.entangler = pqc::Entangler::OneToOne;
    spec.topology.entangler_trainable = false;
    spec.topology.input_dim = 2;

    Rng rng = make_rng(seed, 0xC1C);
    spec.params = pqc::init_params(spec.topology, 0, rng);

    std::uniform_real_distribution<double> point(0.0, 2.0 * kPi);
    int positives = 0, negatives = 0;
    const int per_label = 10;
    for (int draws = 0; positives < per_label || negatives < per_label; ++draws) {
        if (draws >= kPqcEnvRejectionCap)
            throw DegenerateGeneratorError("rejection sampling exhausted; resample generator");
        const std::array<double, 2> s = {point(rng), point(rng)};
        const double zz = spec.zz_expectation(s);
        if (std::abs(zz) < spec.margin / 2.0) continue;
        const int lab = zz >= 0.0 ? 1 : -1;
        if (lab > 0 && positives < per_label) {
            spec.points.push_back(s);
            spec.labels.push_back(lab);
            ++positives;
        } else if (lab < 0 && negatives < per_label) {
            spec.points.push_back(s);
            spec.labels.push_back(lab);
            ++negatives;
        }
    }
    return spec;
}

int PqcLabelEnv::draw(Rng& rng) const {
    std::uniform_int_distribution<int> d(0, static_cast<int>(spec_.points.size()) - 1);
    return d(rng);
}

Obs PqcLabelEnv::do_reset(Rng& rng) {
    current_ = draw(rng);
    return {spec_.points[current_][0], spec_.points[current_][1]};
}

StepResult PqcLabelEnv::do_step(int action, Rng& rng) {
    const double reward = label_to_action(spec_.labels[current_]) == action ? 1.0 : -1.0;
    current_ = draw(rng);
    return {{spec_.points[current_][0], spec_.points[current_][1]}, reward, false};
}

Obs PqcCliffwalkEnv::do_reset(Rng&) {
    position_ = 0;
    return {spec_.points[0][0], spec_.points[0][1]};
}

StepResult PqcCliffwalkEnv::do_step(int action, Rng&) {
    if (label_to_action(spec_.labels[position_]) != action)
        return {{spec_.points[position_][0], spec_.points[position_][1]}, -1.0, true};
    ++position_;
    if (position_ >= static_cast<int>(spec_.points.size()))
        return {{spec_.points.back()[0], spec_.points.back()[1]}, 1.0, true};
    return {{spec_.points[position_][0], spec_.points[position_][1]}, 1.0, false};
}

// ---- DLP environments ------------------------------------------------------------

DlpLabelEnv::DlpLabelEnv(dlp::DlpInstance inst, int episode_len)
    : inst_(std::move(inst)), episode_len_(episode_len) {
    if (episode_len < 1) throw ConfigError("episode length must be >= 1");
}

dlp::u64 DlpLabelEnv::draw(Rng& rng) const {
    std::uniform_int_distribution<dlp::u64> d(1, inst_.p - 1);
    return d(rng);
}

Obs DlpLabelEnv::do_reset(Rng& rng) {
    x_ = draw(rng);
    return {static_cast<double>(x_)};
}

StepResult DlpLabelEnv::do_step(int action, Rng& rng) {
    const double reward = label_to_action(dlp::label(inst_, x_)) == action ? 1.0 : -1.0;
    x_ = draw(rng);
    return {{static_cast<double>(x_)}, reward, false};
}

DlpCliffwalkEnv::DlpCliffwalkEnv(dlp::DlpInstance inst, double slip_delta, double gamma_hint)
    : inst_(std::move(inst)), slip_(slip_delta), gamma_hint_(gamma_hint) {
    if (slip_ < 0.0 || slip_ > 1.0) throw ConfigError("slip probability must be in [0,1]");
    if (gamma_hint_ < 0.0 || gamma_hint_ > 1.0) throw ConfigError("gamma must be in [0,1]");
}

Obs DlpCliffwalkEnv::do_reset(Rng& rng) {
    std::uniform_int_distribution<dlp::u64> d(1, inst_.p - 1);
    state_ = d(rng);
    return {static_cast<double>(state_)};
}

StepResult DlpCliffwalkEnv::do_step(int action, Rng& rng) {
    if (label_to_action(dlp::label(inst_, state_)) != action)
        return {{static_cast<double>(state_)}, -1.0, true};
    // correct action: advance along the circular cliff, slipping to a
    // uniform state with probability delta
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (unif(rng) < slip_) {
        std::uniform_int_distribution<dlp::u64> d(1, inst_.p - 1);
        state_ = d(rng);
    } else {
        state_ = state_ == inst_.p - 1 ? 1 : state_ + 1;
    }
    return {{static_cast<double>(state_)}, 0.0, false};
}

DlpChainEnv::DlpChainEnv(dlp::DlpInstance inst, int chain_len, std::uint64_t seed)
    : inst_(std::move(inst)), chain_len_(chain_len) {
    if (chain_len < 1) throw ConfigError("chain length must be >= 1");
    Rng rng = make_rng(seed, 0xD1);
    std::uniform_int_distribution<dlp::u64> d(1, inst_.p - 1);
    training_x_.resize(chain_len_);
    for (auto& x : training_x_) x = d(rng);
    test_x_ = d(rng);
}

Obs DlpChainEnv::observe() const {
    if (limbo_) return {0.0, 0.0, 1.0};
    if (position_ < chain_len_)
        return {static_cast<double>(training_x_[position_]),
                static_cast<double>(dlp::label(inst_, training_x_[position_])), 0.0};
    return {static_cast<double>(test_x_), 0.0, 0.0};
}

Obs DlpChainEnv::do_reset(Rng&) {
    // memory persists: a failed test keeps later episodes in limbo
    position_ = 0;
    return observe();
}

StepResult DlpChainEnv::do_step(int action, Rng&) {
    if (limbo_) {
        ++position_;
        return {observe(), 0.0, position_ > chain_len_};
    }
    if (position_ < chain_len_) {
        ++position_;
        return {observe(), 0.0, false};
    }
    // test state: correct returns to the chain start, wrong falls into limbo
    const bool correct = label_to_action(dlp::label(inst_, test_x_)) == action;
    if (!correct) limbo_ = true;
    position_ = 0;
    return {observe(), correct ? 1.0 : 0.0, true};
}

}  // namespace qpol::envs
