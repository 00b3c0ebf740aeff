#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "qpol/common.hpp"

namespace qpol::qsim {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 16;

/// Dense statevector over n qubits. Qubit 0 is the MOST significant bit of
/// the basis index, so |10> on two qubits is index 2 = (0,0,1,0).
struct StateVector {
    int n_qubits = 0;
    std::vector<cplx> amps;

    std::size_t dim() const { return amps.size(); }
    double norm_sq() const;
};

/// |0...0>
StateVector init_zero(int n_qubits);

enum class GateKind { H, Ry, Rz, CZ, Rzz };

/// One gate application. H/Ry/Rz use target a; CZ/Rzz use (a, b).
struct GateOp {
    GateKind kind;
    int a = 0;
    int b = -1;
    double angle = 0.0;

    static GateOp h(int q) { return {GateKind::H, q, -1, 0.0}; }
    static GateOp ry(int q, double t) { return {GateKind::Ry, q, -1, t}; }
    static GateOp rz(int q, double t) { return {GateKind::Rz, q, -1, t}; }
    static GateOp cz(int a, int b) { return {GateKind::CZ, a, b, 0.0}; }
    static GateOp rzz(int a, int b, double t) { return {GateKind::Rzz, a, b, t}; }

    bool parametrized() const {
        return kind == GateKind::Ry || kind == GateKind::Rz || kind == GateKind::Rzz;
    }
    GateOp inverse() const;
};

void apply_gate_inplace(StateVector& psi, const GateOp& g);
StateVector apply_gate(const StateVector& psi, const GateOp& g);
void apply_circuit_inplace(StateVector& psi, const std::vector<GateOp>& gates);

/// Hermitian term: either a Pauli string (eigenvalues +-1) or a projector
/// onto a set of computational basis states (eigenvalues {0,1}).
struct PauliString {
    // pauli[q] in {'I','X','Y','Z'}; size = number of qubits it talks about
    // (trailing identities may be omitted).
    std::string paulis;
};

struct ObsTerm {
    enum class Kind { Pauli, Projector };
    Kind kind = Kind::Pauli;
    double weight = 1.0;
    PauliString pauli;                      // Kind::Pauli
    std::vector<std::uint64_t> basis_set;   // Kind::Projector

    static ObsTerm pauli_z(std::vector<int> qubits, double w = 1.0);
    static ObsTerm pauli_string(std::string paulis, double w = 1.0);
    static ObsTerm projector(std::vector<std::uint64_t> basis, double w = 1.0);
    static ObsTerm projector_range(std::uint64_t lo, std::uint64_t hi, double w = 1.0);
};

struct ObservableSpec {
    std::vector<ObsTerm> terms;
};

/// H|psi> for a single unweighted term, written into `out`.
void apply_term(const StateVector& psi, const ObsTerm& term, StateVector& out);

/// <psi|term|psi> for the unweighted term.
double term_expectation(const StateVector& psi, const ObsTerm& term);

/// Sum over terms of weight * <psi|H|psi>.
double expectation(const StateVector& psi, const ObservableSpec& obs);

/// Disjoint projectors covering all 2^n basis states, one per action.
class ActionPartition {
  public:
    ActionPartition(int n_qubits, std::vector<std::vector<std::uint64_t>> projectors);

    static ActionPartition by_index_ranges(int n_qubits, int n_actions);
    static ActionPartition by_qubit(int n_qubits, int qubit);
    static ActionPartition by_parity(int n_qubits);

    int n_actions() const { return n_actions_; }
    int n_qubits() const { return n_qubits_; }
    int action_of(std::uint64_t basis_index) const { return action_of_[basis_index]; }
    std::vector<double> probabilities(const StateVector& psi) const;
    const std::vector<std::vector<std::uint64_t>>& projectors() const { return projectors_; }

  private:
    int n_qubits_;
    int n_actions_;
    std::vector<std::vector<std::uint64_t>> projectors_;
    std::vector<int> action_of_;
};

/// Born-rule measurement of the partition: samples action a with
/// probability <P_a>. Deterministic given the rng state.
int born_sample(const StateVector& psi, const ActionPartition& partition, Rng& rng);

}  // namespace qpol::qsim
