#include "qpol/train.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace qpol::train {

double Trajectory::undiscounted_return() const {
    double s = 0.0;
    for (double r : rewards) s += r;
    return s;
}

void compute_returns(Trajectory& traj, double gamma) {
    if (traj.rewards.empty()) throw ConfigError("cannot compute returns without rewards");
    traj.returns.assign(traj.rewards.size(), 0.0);
    double acc = 0.0;
    for (auto t = static_cast<long>(traj.rewards.size()) - 1; t >= 0; --t) {
        acc = traj.rewards[t] + gamma * acc;
        traj.returns[t] = acc;
    }
}

BaselineModel::BaselineModel(int state_dim, double ridge) : state_dim_(state_dim), ridge_(ridge) {}

std::vector<double> BaselineModel::features(const envs::Obs& s, int t, int horizon) {
    std::vector<double> f;
    f.reserve(2 * s.size() + 4);
    for (double v : s) f.push_back(v);
    for (double v : s) f.push_back(v * v);
    const double u = horizon > 0 ? static_cast<double>(t) / horizon : 0.0;
    f.push_back(u);
    f.push_back(u * u);
    f.push_back(u * u * u);
    f.push_back(1.0);
    return f;
}

double BaselineModel::predict(const envs::Obs& s, int t, int horizon) const {
    if (!fitted()) return 0.0;
    const auto f = features(s, t, horizon);
    double y = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) y += weights_[i] * f[i];
    if (!std::isfinite(y)) throw NumericalError("baseline prediction is not finite");
    return y;
}

namespace {

// Solves (A + ridge I) w = b for symmetric positive definite A by Cholesky.
// The bias feature (last column) is left unpenalized so constant targets fit
// exactly; the data keeps that direction positive definite.
std::vector<double> solve_ridge(std::vector<std::vector<double>>& a, std::vector<double>& b,
                                double ridge) {
    const std::size_t n = b.size();
    for (std::size_t i = 0; i + 1 < n; ++i) a[i][i] += ridge;
    // in-place Cholesky A = L L^T
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
            if (i == j) {
                if (s <= 0.0) throw NumericalError("normal equations lost positive definiteness");
                a[i][i] = std::sqrt(s);
            } else {
                a[i][j] = s / a[j][j];
            }
        }
    }
    // forward then backward substitution
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i][k] * y[k];
        y[i] = s / a[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k][i] * w[k];
        w[i] = s / a[i][i];
    }
    return w;
}

}  // namespace

void BaselineModel::fit(const std::vector<Trajectory>& batch, int horizon) {
    if (batch.empty()) throw ConfigError("cannot fit a baseline to an empty batch");
    const std::size_t dim = features(batch.front().states.front(), 0, horizon).size();
    std::vector<std::vector<double>> ata(dim, std::vector<double>(dim, 0.0));
    std::vector<double> atb(dim, 0.0);
    for (const Trajectory& traj : batch) {
        if (traj.returns.size() != traj.states.size())
            throw ConfigError("returns must be computed before fitting the baseline");
        for (std::size_t t = 0; t < traj.states.size(); ++t) {
            const auto f = features(traj.states[t], static_cast<int>(t), horizon);
            for (std::size_t i = 0; i < dim; ++i) {
                atb[i] += f[i] * traj.returns[t];
                for (std::size_t j = 0; j <= i; ++j) ata[i][j] += f[i] * f[j];
            }
        }
    }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j) ata[i][j] = ata[j][i];
    weights_ = solve_ridge(ata, atb, ridge_);
}

BaselineModel fit_baseline(const std::vector<Trajectory>& batch, int state_dim, int horizon,
                           double ridge) {
    BaselineModel model(state_dim, ridge);
    model.fit(batch, horizon);
    return model;
}

AdamOptimizer::AdamOptimizer(std::vector<std::size_t> group_sizes,
                             std::vector<double> learning_rates, double beta1, double beta2,
                             double eps)
    : lr_(std::move(learning_rates)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr_.size() != group_sizes.size())
        throw ConfigError("need one learning rate per parameter group");
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        m_.emplace_back(group_sizes[g], 0.0);
        v_.emplace_back(group_sizes[g], 0.0);
    }
}

std::vector<std::vector<double>> AdamOptimizer::update(
    const std::vector<std::vector<double>>& grad) {
    if (grad.size() != m_.size()) throw ConfigError("gradient group count mismatch");
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, step_);
    const double bc2 = 1.0 - std::pow(beta2_, step_);
    std::vector<std::vector<double>> delta(grad.size());
    for (std::size_t g = 0; g < grad.size(); ++g) {
        if (grad[g].size() != m_[g].size()) throw ConfigError("gradient size mismatch");
        delta[g].resize(grad[g].size());
        for (std::size_t i = 0; i < grad[g].size(); ++i) {
            m_[g][i] = beta1_ * m_[g][i] + (1.0 - beta1_) * grad[g][i];
            v_[g][i] = beta2_ * v_[g][i] + (1.0 - beta2_) * grad[g][i] * grad[g][i];
            const double mhat = m_[g][i] / bc1;
            const double vhat = v_[g][i] / bc2;
            delta[g][i] = lr_[g] * mhat / (std::sqrt(vhat) + eps_);
        }
    }
    return delta;
}

int TrainablePolicy::sample_action(const envs::Obs& s, Rng& rng) const {
    const auto probs = action_probs(s, rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        acc += probs[a];
        if (u < acc) return static_cast<int>(a);
    }
    return static_cast<int>(probs.size()) - 1;
}

PqcPolicy::PqcPolicy(pqc::PqcTopology topo, pqc::PolicyConfig cfg, pqc::ParamVector params,
                     int shots)
    : topo_(topo), cfg_(std::move(cfg)), params_(std::move(params)), shots_(shots) {
    pqc::validate_sizes(topo_, params_);
    if (has_w() && static_cast<int>(params_.w.size()) != cfg_.w_size())
        throw ConfigError("w size does not match the observable terms");
}

std::vector<std::size_t> PqcPolicy::group_sizes() const {
    std::vector<std::size_t> sizes = {params_.phi.size(), params_.lam.size()};
    if (has_w()) sizes.push_back(params_.w.size());
    return sizes;
}

std::vector<std::string> PqcPolicy::group_names() const {
    std::vector<std::string> names = {"phi", "lambda"};
    if (has_w()) names.push_back("w");
    return names;
}

std::vector<double> PqcPolicy::action_probs(const envs::Obs& s, Rng& rng) const {
    if (shots_ <= 0 || cfg_.kind == pqc::PolicyKind::Born)
        return pqc::policy_probabilities(s, params_, topo_, cfg_);
    // shot mode: the softmax acts on R-shot estimates of each <O_a>
    std::vector<double> est;
    std::size_t w_at = 0;
    for (const auto& obs : cfg_.observables) {
        qsim::ObservableSpec weighted = obs;
        for (auto& t : weighted.terms) t.weight = params_.w[w_at++];
        est.push_back(pqc::noisy_expectation(s, params_, topo_, weighted, shots_, rng));
    }
    return pqc::softmax(est, cfg_.beta);
}

std::vector<std::vector<double>> PqcPolicy::log_policy_gradient(const envs::Obs& s, int action,
                                                                Rng& rng) const {
    pqc::GradVector g;
    if (shots_ <= 0) {
        g = pqc::log_policy_gradient(s, action, params_, topo_, cfg_);
    } else if (cfg_.kind == pqc::PolicyKind::Born) {
        // R-shot estimates of <P_a> and its shifted expectations
        const auto& partition = *cfg_.partition;
        qsim::ObservableSpec proj;
        proj.terms.push_back(qsim::ObsTerm::projector(partition.projectors()[action]));
        const double pa = pqc::noisy_expectation(s, params_, topo_, proj, shots_, rng);
        if (pa <= pqc::kBornProbFloor)
            throw DegenerateGradientError("estimated Born probability at or below 1e-12");
        g = pqc::zero_grad(topo_, 0);
        noisy_shift_gradient(s, proj, rng, g.phi, g.lam);
        g.scale(1.0 / pa);
    } else {
        g = noisy_softmax_gradient(s, action, rng);
    }
    if (freeze_lambda_) std::fill(g.lam.begin(), g.lam.end(), 0.0);
    if (freeze_w_) std::fill(g.w.begin(), g.w.end(), 0.0);
    std::vector<std::vector<double>> out = {std::move(g.phi), std::move(g.lam)};
    if (has_w()) out.push_back(std::move(g.w));
    return out;
}

void PqcPolicy::apply_update(const std::vector<std::vector<double>>& delta) {
    if (delta.size() != group_sizes().size()) throw ConfigError("update group count mismatch");
    for (std::size_t i = 0; i < params_.phi.size(); ++i) params_.phi[i] += delta[0][i];
    for (std::size_t i = 0; i < params_.lam.size(); ++i) params_.lam[i] += delta[1][i];
    if (has_w())
        for (std::size_t i = 0; i < params_.w.size(); ++i) params_.w[i] += delta[2][i];
}

std::vector<std::vector<double>> PqcPolicy::parameters() const {
    std::vector<std::vector<double>> out = {params_.phi, params_.lam};
    if (has_w()) out.push_back(params_.w);
    return out;
}

void PqcPolicy::set_parameters(const std::vector<std::vector<double>>& p) {
    if (p.size() != group_sizes().size()) throw ConfigError("parameter group count mismatch");
    params_.phi = p[0];
    params_.lam = p[1];
    if (has_w()) params_.w = p[2];
    pqc::validate_sizes(topo_, params_);
}

void PqcPolicy::noisy_shift_gradient(const envs::Obs& s, const qsim::ObservableSpec& obs,
                                     Rng& rng, std::vector<double>& dphi,
                                     std::vector<double>& dlam) const {
    constexpr double kHalfPi = 1.5707963267948966;
    dphi.assign(params_.phi.size(), 0.0);
    dlam.assign(params_.lam.size(), 0.0);
    pqc::ParamVector shifted = params_;
    for (std::size_t i = 0; i < params_.phi.size(); ++i) {
        shifted.phi[i] = params_.phi[i] + kHalfPi;
        const double plus = pqc::noisy_expectation(s, shifted, topo_, obs, shots_, rng);
        shifted.phi[i] = params_.phi[i] - kHalfPi;
        const double minus = pqc::noisy_expectation(s, shifted, topo_, obs, shots_, rng);
        shifted.phi[i] = params_.phi[i];
        dphi[i] = 0.5 * (plus - minus);
    }
    const pqc::BuiltCircuit c = pqc::build_circuit(topo_, s, params_);
    for (std::size_t i = 0; i < params_.lam.size(); ++i) {
        const double sj = c.lam_input[i];
        if (std::abs(sj) < 1e-300) continue;  // zero input: the gate angle is pinned at 0
        // shift the effective angle lambda*s_j by +-pi/2, chain rule by s_j
        shifted.lam[i] = params_.lam[i] + kHalfPi / sj;
        const double plus = pqc::noisy_expectation(s, shifted, topo_, obs, shots_, rng);
        shifted.lam[i] = params_.lam[i] - kHalfPi / sj;
        const double minus = pqc::noisy_expectation(s, shifted, topo_, obs, shots_, rng);
        shifted.lam[i] = params_.lam[i];
        dlam[i] = sj * 0.5 * (plus - minus);
    }
}

pqc::GradVector PqcPolicy::noisy_softmax_gradient(const envs::Obs& s, int action,
                                                  Rng& rng) const {
    const auto& obs = cfg_.observables;
    std::vector<double> est;
    std::size_t w_at = 0;
    std::vector<qsim::ObservableSpec> weighted(obs.size());
    for (std::size_t a = 0; a < obs.size(); ++a) {
        weighted[a] = obs[a];
        for (auto& t : weighted[a].terms) t.weight = params_.w[w_at++];
        est.push_back(pqc::noisy_expectation(s, params_, topo_, weighted[a], shots_, rng));
    }
    const auto probs = pqc::softmax(est, cfg_.beta);

    pqc::GradVector g = pqc::zero_grad(topo_, cfg_.w_size());
    std::vector<double> dphi, dlam;
    w_at = 0;
    for (std::size_t a = 0; a < obs.size(); ++a) {
        const double coef = (static_cast<int>(a) == action ? 1.0 : 0.0) - probs[a];
        noisy_shift_gradient(s, weighted[a], rng, dphi, dlam);
        for (std::size_t i = 0; i < g.phi.size(); ++i) g.phi[i] += coef * dphi[i];
        for (std::size_t i = 0; i < g.lam.size(); ++i) g.lam[i] += coef * dlam[i];
        for (std::size_t i = 0; i < obs[a].terms.size(); ++i) {
            qsim::ObservableSpec single;
            single.terms.push_back(obs[a].terms[i]);
            single.terms[0].weight = 1.0;
            g.w[w_at + i] =
                coef * pqc::noisy_expectation(s, params_, topo_, single, shots_, rng);
        }
        w_at += obs[a].terms.size();
    }
    g.scale(cfg_.beta);
    return g;
}

double anneal_beta(const AnnealSchedule& schedule, long episode) {
    if (episode < 0) throw ConfigError("episode must be >= 0");
    if (schedule.total_episodes < 1) throw ConfigError("schedule needs >= 1 episode");
    const double frac =
        std::min(1.0, static_cast<double>(episode) / static_cast<double>(schedule.total_episodes));
    return schedule.beta_start + (schedule.beta_final - schedule.beta_start) * frac;
}

std::vector<Trajectory> generate_episodes(const TrainablePolicy& policy, envs::Environment& env,
                                          int n_episodes, int horizon, std::uint64_t seed,
                                          std::uint64_t episode_base) {
    if (n_episodes < 1) throw ConfigError("need at least one episode");
    const int cap = horizon > 0 ? horizon : env.max_steps();
    if (cap < 1) throw ConfigError("no horizon: environment is unbounded and none was given");
    std::vector<Trajectory> batch(n_episodes);
    for (int e = 0; e < n_episodes; ++e) {
        Rng rng = make_rng(seed, episode_base + static_cast<std::uint64_t>(e));
        Trajectory& traj = batch[e];
        envs::Obs obs = env.reset(rng);
        for (int t = 0; t < cap; ++t) {
            const int action = policy.sample_action(obs, rng);
            const envs::StepResult r = env.step(action, rng);
            traj.states.push_back(obs);
            traj.actions.push_back(action);
            traj.rewards.push_back(r.reward);
            obs = r.observation;
            if (r.done) break;
        }
    }
    return batch;
}

GradStepStats policy_gradient_step(TrainablePolicy& policy, const std::vector<Trajectory>& batch,
                                   const BaselineModel* baseline, AdamOptimizer& optimizer,
                                   int horizon, std::uint64_t seed, std::uint64_t stream) {
    if (batch.empty()) throw ConfigError("empty batch");
    GradStepStats stats;
    const auto sizes = policy.group_sizes();
    std::vector<std::vector<double>> total(sizes.size());
    for (std::size_t g = 0; g < sizes.size(); ++g) total[g].assign(sizes[g], 0.0);

    Rng rng = make_rng(seed, stream);
    for (const Trajectory& traj : batch) {
        if (traj.returns.size() != traj.rewards.size())
            throw ConfigError("returns must be computed before the gradient step");
        std::vector<std::vector<double>> ep(total.size());
        for (std::size_t g = 0; g < sizes.size(); ++g) ep[g].assign(sizes[g], 0.0);
        try {
            for (std::size_t t = 0; t < traj.length(); ++t) {
                const double advantage =
                    traj.returns[t] -
                    (baseline ? baseline->predict(traj.states[t], static_cast<int>(t), horizon)
                              : 0.0);
                const auto g = policy.log_policy_gradient(traj.states[t], traj.actions[t], rng);
                for (std::size_t gi = 0; gi < ep.size(); ++gi)
                    for (std::size_t i = 0; i < ep[gi].size(); ++i)
                        ep[gi][i] += advantage * g[gi][i];
            }
        } catch (const DegenerateGradientError&) {
            ++stats.episodes_excluded;
            continue;
        }
        for (std::size_t gi = 0; gi < total.size(); ++gi)
            for (std::size_t i = 0; i < total[gi].size(); ++i) total[gi][i] += ep[gi][i];
        ++stats.episodes_used;
    }
    if (stats.episodes_used == 0) return stats;

    const double scale = 1.0 / static_cast<double>(batch.size());
    for (auto& g : total)
        for (double& v : g) v *= scale;
    policy.apply_update(optimizer.update(total));
    return stats;
}

std::vector<EpisodeRecord> run_reinforce(TrainablePolicy& policy, envs::Environment& env,
                                         const TrainerConfig& cfg, std::uint64_t seed,
                                         const EpisodeCallback& callback) {
    if (cfg.learning_rates.size() != policy.group_sizes().size())
        throw ConfigError("need one learning rate per parameter group");
    AdamOptimizer optimizer(policy.group_sizes(), cfg.learning_rates);
    const int horizon = cfg.horizon > 0 ? cfg.horizon : env.max_steps();

    std::vector<EpisodeRecord> records;
    records.reserve(cfg.total_episodes);
    std::deque<double> window;
    double window_sum = 0.0;
    long episode = 0;
    std::uint64_t update_index = 0;
    bool stop = false;

    while (episode < cfg.total_episodes && !stop) {
        const double beta = anneal_beta(cfg.anneal, episode);
        policy.set_beta(beta);
        const int batch_size =
            static_cast<int>(std::min<long>(cfg.batch_size, cfg.total_episodes - episode));
        std::vector<Trajectory> batch = generate_episodes(
            policy, env, batch_size, horizon, seed, static_cast<std::uint64_t>(episode));
        for (Trajectory& traj : batch) compute_returns(traj, cfg.gamma);

        BaselineModel baseline;
        if (cfg.use_baseline) baseline = fit_baseline(batch, env.obs_dim(), horizon, cfg.ridge);
        policy_gradient_step(policy, batch, cfg.use_baseline ? &baseline : nullptr, optimizer,
                             horizon, seed, 0x9000000000000000ULL + update_index);
        ++update_index;

        for (const Trajectory& traj : batch) {
            const double ret = traj.undiscounted_return();
            window.push_back(ret);
            window_sum += ret;
            if (window.size() > 10) {
                window_sum -= window.front();
                window.pop_front();
            }
            EpisodeRecord rec;
            rec.episode = episode;
            rec.ret = ret;
            rec.ret_ma10 = window_sum / static_cast<double>(window.size());
            rec.beta = beta;
            records.push_back(rec);
            if (callback) callback(rec);
            if (cfg.stop_when && cfg.stop_when(rec)) stop = true;
            ++episode;
        }
    }
    return records;
}

void MlpPolicy::apply_update(const std::vector<std::vector<double>>& delta) {
    if (delta.size() != 1 || delta[0].size() != net_.param_count())
        throw ConfigError("update size mismatch");
    auto& p = net_.parameters();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += delta[0][i];
}

void MlpPolicy::set_parameters(const std::vector<std::vector<double>>& p) {
    if (p.size() != 1 || p[0].size() != net_.param_count())
        throw ConfigError("parameter size mismatch");
    net_.parameters() = p[0];
}

}  // namespace qpol::train
