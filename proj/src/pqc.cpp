#include "qpol/pqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpol::pqc {

using qsim::cplx;
using qsim::GateKind;
using qsim::GateOp;
using qsim::StateVector;

void PqcTopology::validate() const {
    if (n_qubits < 1 || n_qubits > qsim::kMaxQubits)
        throw ConfigError("n_qubits must be in [1, 16]");
    if (d_enc < 0) throw ConfigError("d_enc must be >= 0");
    if (input_dim < 1 || input_dim > enc_slots_per_layer())
        throw ConfigError("input_dim must be in [1, 2*n_qubits]");
}

std::vector<std::pair<int, int>> PqcTopology::entangler_pairs() const {
    std::vector<std::pair<int, int>> pairs;
    if (n_qubits < 2) return pairs;
    if (entangler == Entangler::AllToAll) {
        for (int i = 0; i < n_qubits; ++i)
            for (int j = i + 1; j < n_qubits; ++j) pairs.emplace_back(i, j);
        return pairs;
    }
    // nearest-neighbour pairs, even starts then odd starts
    for (int i = 0; i + 1 < n_qubits; i += 2) pairs.emplace_back(i, i + 1);
    for (int i = 1; i + 1 < n_qubits; i += 2) pairs.emplace_back(i, i + 1);
    if (entangler == Entangler::Circular && n_qubits > 2)
        pairs.emplace_back(n_qubits - 1, 0);
    return pairs;
}

int PqcTopology::pairs_per_layer() const { return static_cast<int>(entangler_pairs().size()); }

int PqcTopology::var_layer_params() const {
    return 2 * n_qubits + (entangler_trainable ? pairs_per_layer() : 0);
}

int PqcTopology::enc_slots_per_layer() const { return 2 * n_qubits; }

int PqcTopology::phi_size() const { return (d_enc + 1) * var_layer_params(); }

int PqcTopology::lam_size() const { return d_enc * enc_slots_per_layer(); }

ParamVector init_params(const PqcTopology& topo, int w_size, Rng& rng) {
    topo.validate();
    ParamVector p;
    std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
    p.phi.resize(topo.phi_size());
    for (double& v : p.phi) v = unif(rng);
    p.lam.assign(topo.lam_size(), 1.0);
    p.w.assign(w_size, 1.0);
    return p;
}

ParamVector init_params(const PqcTopology& topo, const std::vector<qsim::ObservableSpec>& obs,
                        Rng& rng) {
    int w_size = 0;
    for (const auto& o : obs) w_size += static_cast<int>(o.terms.size());
    ParamVector p = init_params(topo, w_size, rng);
    int k = 0;
    for (const auto& o : obs)
        for (const auto& t : o.terms) p.w[k++] = t.weight;
    return p;
}

void validate_sizes(const PqcTopology& topo, const ParamVector& p) {
    topo.validate();
    if (static_cast<int>(p.phi.size()) != topo.phi_size())
        throw ConfigError("phi size does not match topology");
    if (static_cast<int>(p.lam.size()) != topo.lam_size())
        throw ConfigError("lambda size does not match topology");
}

BuiltCircuit build_circuit(const PqcTopology& topo, const std::vector<double>& s,
                           const ParamVector& p) {
    validate_sizes(topo, p);
    if (static_cast<int>(s.size()) != topo.input_dim)
        throw ConfigError("input dimension does not match topology");
    const int n = topo.n_qubits;
    const auto pairs = topo.entangler_pairs();

    BuiltCircuit c;
    c.phi_gate.assign(p.phi.size(), -1);
    c.lam_gate.assign(p.lam.size(), -1);
    c.lam_input.assign(p.lam.size(), 0.0);

    if (topo.initial_h)
        for (int q = 0; q < n; ++q) c.gates.push_back(GateOp::h(q));

    int phi_at = 0, lam_at = 0;
    auto var_layer = [&]() {
        for (int q = 0; q < n; ++q) {
            c.phi_gate[phi_at] = static_cast<int>(c.gates.size());
            c.gates.push_back(GateOp::rz(q, p.phi[phi_at]));
            ++phi_at;
        }
        for (int q = 0; q < n; ++q) {
            c.phi_gate[phi_at] = static_cast<int>(c.gates.size());
            c.gates.push_back(GateOp::ry(q, p.phi[phi_at]));
            ++phi_at;
        }
        for (const auto& [a, b] : pairs) {
            if (topo.entangler_trainable) {
                c.phi_gate[phi_at] = static_cast<int>(c.gates.size());
                c.gates.push_back(GateOp::rzz(a, b, p.phi[phi_at]));
                ++phi_at;
            } else {
                c.gates.push_back(GateOp::cz(a, b));
            }
        }
    };
    auto enc_layer = [&]() {
        // slots 0..n-1: Ry on qubit slot; slots n..2n-1: Rz on qubit slot-n
        for (int slot = 0; slot < 2 * n; ++slot) {
            const int q = slot < n ? slot : slot - n;
            const double sj = s[topo.slot_input(slot)];
            const double angle = p.lam[lam_at] * sj;
            c.lam_gate[lam_at] = static_cast<int>(c.gates.size());
            c.lam_input[lam_at] = sj;
            c.gates.push_back(slot < n ? GateOp::ry(q, angle) : GateOp::rz(q, angle));
            ++lam_at;
        }
    };

    var_layer();
    for (int d = 0; d < topo.d_enc; ++d) {
        enc_layer();
        var_layer();
    }
    return c;
}

StateVector evaluate_state(const PqcTopology& topo, const std::vector<double>& s,
                           const ParamVector& p) {
    const BuiltCircuit c = build_circuit(topo, s, p);
    StateVector psi = qsim::init_zero(topo.n_qubits);
    qsim::apply_circuit_inplace(psi, c.gates);
    return psi;
}

int PolicyConfig::n_actions() const {
    if (kind == PolicyKind::Born) {
        if (!partition) throw ConfigError("Born policy requires a partition");
        return partition->n_actions();
    }
    if (observables.empty()) throw ConfigError("softmax policy requires observables");
    return static_cast<int>(observables.size());
}

int PolicyConfig::w_size() const {
    if (kind == PolicyKind::Born) return 0;
    int k = 0;
    for (const auto& o : observables) k += static_cast<int>(o.terms.size());
    return k;
}

std::vector<double> born_policy(const std::vector<double>& s, const ParamVector& p,
                                const PqcTopology& topo, const qsim::ActionPartition& partition) {
    const StateVector psi = evaluate_state(topo, s, p);
    return partition.probabilities(psi);
}

std::vector<double> action_expectations(const std::vector<double>& s, const ParamVector& p,
                                        const PqcTopology& topo,
                                        const std::vector<qsim::ObservableSpec>& obs) {
    const StateVector psi = evaluate_state(topo, s, p);
    std::vector<double> e;
    e.reserve(obs.size());
    std::size_t w_at = 0;
    for (const auto& o : obs) {
        double v = 0.0;
        for (const auto& t : o.terms) {
            const double w = w_at < p.w.size() ? p.w[w_at] : t.weight;
            v += w * qsim::term_expectation(psi, t);
            ++w_at;
        }
        e.push_back(v);
    }
    if (!p.w.empty() && w_at != p.w.size())
        throw ConfigError("w size does not match observable terms");
    return e;
}

std::vector<double> softmax(const std::vector<double>& values, double beta) {
    if (beta <= 0.0) throw ConfigError("beta must be > 0");
    double m = values[0] * beta;
    for (double v : values) m = std::max(m, v * beta);
    std::vector<double> out(values.size());
    double z = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = std::exp(values[i] * beta - m);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

std::vector<double> softmax_policy(const std::vector<double>& s, const ParamVector& p,
                                   const PqcTopology& topo,
                                   const std::vector<qsim::ObservableSpec>& obs, double beta) {
    return softmax(action_expectations(s, p, topo, obs), beta);
}

std::vector<double> policy_probabilities(const std::vector<double>& s, const ParamVector& p,
                                         const PqcTopology& topo, const PolicyConfig& cfg) {
    if (cfg.kind == PolicyKind::Born) return born_policy(s, p, topo, *cfg.partition);
    return softmax_policy(s, p, topo, cfg.observables, cfg.beta);
}

namespace {

double expectation_with_gate_shift(const BuiltCircuit& c, int n_qubits, int gate_pos,
                                   double delta, const qsim::ObservableSpec& obs) {
    std::vector<GateOp> gates = c.gates;
    gates[gate_pos].angle += delta;
    StateVector psi = qsim::init_zero(n_qubits);
    qsim::apply_circuit_inplace(psi, gates);
    return qsim::expectation(psi, obs);
}

}  // namespace

double parameter_shift_derivative(const std::vector<double>& s, const ParamVector& p,
                                  const PqcTopology& topo, const qsim::ObservableSpec& obs,
                                  ParamGroup group, int index, double shift) {
    const BuiltCircuit c = build_circuit(topo, s, p);
    const double h = shift > 0.0 ? shift : std::numbers::pi / 2.0;
    if (group == ParamGroup::Phi) {
        if (index < 0 || index >= static_cast<int>(p.phi.size()))
            throw IndexError("phi index out of range");
        const int g = c.phi_gate[index];
        const double plus = expectation_with_gate_shift(c, topo.n_qubits, g, h, obs);
        const double minus = expectation_with_gate_shift(c, topo.n_qubits, g, -h, obs);
        return 0.5 * (plus - minus);
    }
    if (index < 0 || index >= static_cast<int>(p.lam.size()))
        throw IndexError("lambda index out of range");
    // shift the effective angle lambda*s_j, then chain rule by s_j
    const int g = c.lam_gate[index];
    const double plus = expectation_with_gate_shift(c, topo.n_qubits, g, h, obs);
    const double minus = expectation_with_gate_shift(c, topo.n_qubits, g, -h, obs);
    return c.lam_input[index] * 0.5 * (plus - minus);
}

double observable_weight_derivative(const std::vector<double>& s, const ParamVector& p,
                                    const PqcTopology& topo, const qsim::ObsTerm& term) {
    const StateVector psi = evaluate_state(topo, s, p);
    return qsim::term_expectation(psi, term);
}

void GradVector::scale(double c) {
    for (double& v : phi) v *= c;
    for (double& v : lam) v *= c;
    for (double& v : w) v *= c;
}

void GradVector::axpy(double c, const GradVector& g) {
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += c * g.phi[i];
    for (std::size_t i = 0; i < lam.size(); ++i) lam[i] += c * g.lam[i];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += c * g.w[i];
}

double GradVector::linf() const {
    double m = 0.0;
    for (double v : phi) m = std::max(m, std::abs(v));
    for (double v : lam) m = std::max(m, std::abs(v));
    for (double v : w) m = std::max(m, std::abs(v));
    return m;
}

GradVector zero_grad(const PqcTopology& topo, int w_size) {
    GradVector g;
    g.phi.assign(topo.phi_size(), 0.0);
    g.lam.assign(topo.lam_size(), 0.0);
    g.w.assign(w_size, 0.0);
    return g;
}

namespace {

// Applies dU/dtheta for one gate. Ry/Rz are single-qubit; Rzz is diagonal.
void apply_gate_derivative(const StateVector& in, const GateOp& g, StateVector& out) {
    const int n = in.n_qubits;
    out.n_qubits = n;
    out.amps.assign(in.dim(), cplx(0.0, 0.0));
    const std::uint64_t ma = 1ULL << (n - 1 - g.a);
    switch (g.kind) {
        case GateKind::Ry: {
            const double c = 0.5 * std::cos(g.angle / 2.0), s = 0.5 * std::sin(g.angle / 2.0);
            // d/dtheta [[c,-s],[s,c]](theta/2) = (1/2)[[-s,-c],[c,-s]]
            for (std::uint64_t i = 0; i < in.dim(); ++i) {
                if ((i & ma) == 0) {
                    const cplx a = in.amps[i], b = in.amps[i | ma];
                    out.amps[i] = -s * a - c * b;
                    out.amps[i | ma] = c * a - s * b;
                }
            }
            break;
        }
        case GateKind::Rz: {
            const cplx d0 = cplx(0.0, -0.5) * std::polar(1.0, -g.angle / 2.0);
            const cplx d1 = cplx(0.0, 0.5) * std::polar(1.0, g.angle / 2.0);
            for (std::uint64_t i = 0; i < in.dim(); ++i)
                out.amps[i] = ((i & ma) ? d1 : d0) * in.amps[i];
            break;
        }
        case GateKind::Rzz: {
            const std::uint64_t mb = 1ULL << (n - 1 - g.b);
            const cplx de = cplx(0.0, -0.5) * std::polar(1.0, -g.angle / 2.0);
            const cplx do_ = cplx(0.0, 0.5) * std::polar(1.0, g.angle / 2.0);
            for (std::uint64_t i = 0; i < in.dim(); ++i) {
                const bool same = ((i & ma) != 0) == ((i & mb) != 0);
                out.amps[i] = (same ? de : do_) * in.amps[i];
            }
            break;
        }
        default:
            throw ConfigError("gate has no angle derivative");
    }
}

cplx inner(const StateVector& a, const StateVector& b) {
    cplx s(0.0, 0.0);
    for (std::uint64_t i = 0; i < a.dim(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
    return s;
}

// One reverse sweep per Hermitian term: d<H>/d(angle_k) = 2 Re <B_k|dU_k|K_k>
// with K the pre-gate state and B the back-propagated H|psi>.
void adjoint_angle_gradient(const BuiltCircuit& c, int n_qubits, const qsim::ObsTerm& term,
                            std::vector<double>& dangle) {
    StateVector ket = qsim::init_zero(n_qubits);
    qsim::apply_circuit_inplace(ket, c.gates);
    StateVector bra;
    qsim::apply_term(ket, term, bra);
    dangle.assign(c.gates.size(), 0.0);
    StateVector scratch;
    for (int k = static_cast<int>(c.gates.size()) - 1; k >= 0; --k) {
        const GateOp& g = c.gates[k];
        qsim::apply_gate_inplace(ket, g.inverse());
        if (g.parametrized()) {
            apply_gate_derivative(ket, g, scratch);
            dangle[k] = 2.0 * inner(bra, scratch).real();
        }
        qsim::apply_gate_inplace(bra, g.inverse());
    }
}

void shift_rule_full_gradient(const std::vector<double>& s, const ParamVector& p,
                              const PqcTopology& topo, const qsim::ObservableSpec& obs,
                              std::vector<double>& dphi, std::vector<double>& dlam) {
    for (std::size_t i = 0; i < p.phi.size(); ++i)
        dphi[i] = parameter_shift_derivative(s, p, topo, obs, ParamGroup::Phi,
                                             static_cast<int>(i));
    for (std::size_t i = 0; i < p.lam.size(); ++i)
        dlam[i] = parameter_shift_derivative(s, p, topo, obs, ParamGroup::Lambda,
                                             static_cast<int>(i));
}

}  // namespace

void expectation_gradient(const std::vector<double>& s, const ParamVector& p,
                          const PqcTopology& topo, const qsim::ObservableSpec& obs,
                          std::vector<double>& dphi, std::vector<double>& dlam, GradMode mode) {
    dphi.assign(p.phi.size(), 0.0);
    dlam.assign(p.lam.size(), 0.0);
    if (mode == GradMode::ShiftRule) {
        shift_rule_full_gradient(s, p, topo, obs, dphi, dlam);
        return;
    }
    const BuiltCircuit c = build_circuit(topo, s, p);
    std::vector<double> dangle;
    for (const auto& term : obs.terms) {
        adjoint_angle_gradient(c, topo.n_qubits, term, dangle);
        for (std::size_t i = 0; i < p.phi.size(); ++i)
            dphi[i] += term.weight * dangle[c.phi_gate[i]];
        for (std::size_t i = 0; i < p.lam.size(); ++i)
            dlam[i] += term.weight * c.lam_input[i] * dangle[c.lam_gate[i]];
    }
}

GradVector log_policy_gradient(const std::vector<double>& s, int action, const ParamVector& p,
                               const PqcTopology& topo, const PolicyConfig& cfg, GradMode mode) {
    if (action < 0 || action >= cfg.n_actions()) throw IndexError("action index out of range");

    if (cfg.kind == PolicyKind::Born) {
        const auto& partition = *cfg.partition;
        const StateVector psi = evaluate_state(topo, s, p);
        const double pa = partition.probabilities(psi)[action];
        if (pa <= kBornProbFloor)
            throw DegenerateGradientError("Born policy probability at or below 1e-12");
        qsim::ObservableSpec proj;
        proj.terms.push_back(qsim::ObsTerm::projector(partition.projectors()[action]));
        GradVector g = zero_grad(topo, 0);
        expectation_gradient(s, p, topo, proj, g.phi, g.lam, mode);
        g.scale(1.0 / pa);
        return g;
    }

    // softmax: beta * (grad<O_a> - sum_a' pi(a') grad<O_a'>)
    const auto& obs = cfg.observables;
    const std::vector<double> exps = action_expectations(s, p, topo, obs);
    const std::vector<double> probs = softmax(exps, cfg.beta);
    const StateVector psi = evaluate_state(topo, s, p);

    GradVector g = zero_grad(topo, cfg.w_size());
    std::vector<double> dphi, dlam;
    int w_at = 0;
    for (int a = 0; a < static_cast<int>(obs.size()); ++a) {
        const double coef = (a == action ? 1.0 : 0.0) - probs[a];
        // weighted circuit-parameter gradient for this action's observable
        qsim::ObservableSpec weighted = obs[a];
        for (std::size_t i = 0; i < weighted.terms.size(); ++i)
            weighted.terms[i].weight = p.w[w_at + i];
        expectation_gradient(s, p, topo, weighted, dphi, dlam, mode);
        for (std::size_t i = 0; i < g.phi.size(); ++i) g.phi[i] += coef * dphi[i];
        for (std::size_t i = 0; i < g.lam.size(); ++i) g.lam[i] += coef * dlam[i];
        for (std::size_t i = 0; i < obs[a].terms.size(); ++i)
            g.w[w_at + i] = coef * qsim::term_expectation(psi, obs[a].terms[i]);
        w_at += static_cast<int>(obs[a].terms.size());
    }
    g.scale(cfg.beta);
    return g;
}

double noisy_expectation(const std::vector<double>& s, const ParamVector& p,
                         const PqcTopology& topo, const qsim::ObservableSpec& obs, int shots,
                         Rng& rng) {
    if (shots < 1) throw ConfigError("shots must be >= 1");
    const StateVector psi = evaluate_state(topo, s, p);
    double total = 0.0;
    for (const auto& term : obs.terms) {
        const double e = qsim::term_expectation(psi, term);
        double mean;
        if (term.kind == qsim::ObsTerm::Kind::Pauli) {
            // single-shot outcomes +-1 with p(+1) = (1+<H>)/2
            const double prob = std::clamp(0.5 * (1.0 + e), 0.0, 1.0);
            std::binomial_distribution<long> bin(shots, prob);
            mean = 2.0 * static_cast<double>(bin(rng)) / shots - 1.0;
        } else {
            const double prob = std::clamp(e, 0.0, 1.0);
            std::binomial_distribution<long> bin(shots, prob);
            mean = static_cast<double>(bin(rng)) / shots;
        }
        total += term.weight * mean;
    }
    return total;
}

}  // namespace qpol::pqc
