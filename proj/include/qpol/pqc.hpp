#pragma once

#include <optional>
#include <vector>

#include "qpol/qsim.hpp"

namespace qpol::pqc {

enum class Entangler { OneToOne, Circular, AllToAll };

/// Alternating-layer data re-uploading circuit: a fixed H prefix, then
/// D_enc+1 variational layers interleaved with D_enc encoding layers.
/// Each variational layer is per-qubit Rz then Ry then the entangling
/// layer (fixed CZ, or Rzz with trainable angles). Each encoding layer is
/// per-qubit Ry(lambda * s_j) then Rz(lambda' * s_j'), input components
/// assigned round-robin over the 2n (qubit, axis) slots, one lambda per gate.
struct PqcTopology {
    int n_qubits = 1;
    int d_enc = 1;
    Entangler entangler = Entangler::OneToOne;
    bool entangler_trainable = false;
    int input_dim = 1;
    bool initial_h = true;  // test switch; the architecture keeps it on

    void validate() const;
    std::vector<std::pair<int, int>> entangler_pairs() const;
    int pairs_per_layer() const;
    int var_layer_params() const;     // 2n (+pairs if trainable)
    int enc_slots_per_layer() const;  // 2n
    int phi_size() const;
    int lam_size() const;
    /// Input component index encoded by slot m of an encoding layer.
    int slot_input(int slot) const { return slot % input_dim; }
};

struct ParamVector {
    std::vector<double> phi;
    std::vector<double> lam;
    std::vector<double> w;
};

/// phi ~ U[0, 2pi], lambda = 1, w = from the observable init weights.
ParamVector init_params(const PqcTopology& topo, const std::vector<qsim::ObservableSpec>& obs,
                        Rng& rng);
ParamVector init_params(const PqcTopology& topo, int w_size, Rng& rng);

void validate_sizes(const PqcTopology& topo, const ParamVector& p);

/// Gate list plus the map from parameter coordinates to gate positions,
/// needed by the shift rule and the adjoint sweep.
struct BuiltCircuit {
    std::vector<qsim::GateOp> gates;
    std::vector<int> phi_gate;      // phi index -> gate position
    std::vector<int> lam_gate;      // lam index -> gate position
    std::vector<double> lam_input;  // lam index -> encoded component s_j
};

BuiltCircuit build_circuit(const PqcTopology& topo, const std::vector<double>& s,
                           const ParamVector& p);

qsim::StateVector evaluate_state(const PqcTopology& topo, const std::vector<double>& s,
                                 const ParamVector& p);

enum class PolicyKind { Born, Softmax };

/// Born policies read action probabilities off a projective partition;
/// softmax policies pass weighted observable expectations through
/// softmax(beta * .). Exactly one of partition/observables is used.
struct PolicyConfig {
    PolicyKind kind = PolicyKind::Softmax;
    double beta = 1.0;
    std::optional<qsim::ActionPartition> partition;       // Born
    std::vector<qsim::ObservableSpec> observables;        // Softmax terms (weights = init)
    int n_actions() const;
    int w_size() const;
};

std::vector<double> born_policy(const std::vector<double>& s, const ParamVector& p,
                                const PqcTopology& topo, const qsim::ActionPartition& partition);

/// Expectations <O_a> with trainable weights taken from p.w.
std::vector<double> action_expectations(const std::vector<double>& s, const ParamVector& p,
                                        const PqcTopology& topo,
                                        const std::vector<qsim::ObservableSpec>& obs);

std::vector<double> softmax(const std::vector<double>& values, double beta);

std::vector<double> softmax_policy(const std::vector<double>& s, const ParamVector& p,
                                   const PqcTopology& topo,
                                   const std::vector<qsim::ObservableSpec>& obs, double beta);

std::vector<double> policy_probabilities(const std::vector<double>& s, const ParamVector& p,
                                         const PqcTopology& topo, const PolicyConfig& cfg);

enum class ParamGroup { Phi, Lambda };

/// Exact derivative of <obs> w.r.t. one phi or lambda coordinate via the
/// +-pi/2 shift rule; lambda derivatives shift the effective angle
/// lambda*s_j and apply the chain rule factor s_j. `shift` is exposed only
/// so the gradcheck negative control can inject a wrong value.
double parameter_shift_derivative(const std::vector<double>& s, const ParamVector& p,
                                  const PqcTopology& topo, const qsim::ObservableSpec& obs,
                                  ParamGroup group, int index, double shift = -1.0);

/// <H_{a,i}> of the unweighted term (the w_{a,i} derivative).
double observable_weight_derivative(const std::vector<double>& s, const ParamVector& p,
                                    const PqcTopology& topo, const qsim::ObsTerm& term);

struct GradVector {
    std::vector<double> phi;
    std::vector<double> lam;
    std::vector<double> w;

    void scale(double c);
    void axpy(double c, const GradVector& g);
    double linf() const;
};

GradVector zero_grad(const PqcTopology& topo, int w_size);

enum class GradMode { Adjoint, ShiftRule };

/// d<obs>/d(phi, lambda) for an unweighted observable, exact. The adjoint
/// mode runs one reverse sweep per Hermitian term; the shift-rule mode
/// evaluates Eq. (two shifted circuits) per coordinate. Both agree to
/// machine precision on this gate set.
void expectation_gradient(const std::vector<double>& s, const ParamVector& p,
                          const PqcTopology& topo, const qsim::ObservableSpec& obs,
                          std::vector<double>& dphi, std::vector<double>& dlam,
                          GradMode mode = GradMode::Adjoint);

inline constexpr double kBornProbFloor = 1e-12;

/// grad log pi(a|s) over (phi, lambda, w) for softmax policies or
/// (phi, lambda) for Born policies. Born policies throw
/// DegenerateGradientError when <P_a> <= 1e-12.
GradVector log_policy_gradient(const std::vector<double>& s, int action, const ParamVector& p,
                               const PqcTopology& topo, const PolicyConfig& cfg,
                               GradMode mode = GradMode::Adjoint);

/// Mean of R single-shot eigenvalue samples per term (terms sampled
/// independently, weighted sum). Unbiased estimator of expectation().
double noisy_expectation(const std::vector<double>& s, const ParamVector& p,
                         const PqcTopology& topo, const qsim::ObservableSpec& obs, int shots,
                         Rng& rng);

}  // namespace qpol::pqc
