#include "qpol/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace qpol::qsim {

namespace {

// bit value of qubit q (MSB-first convention) in basis index i
inline int bit_of(std::uint64_t i, int q, int n) {
    return static_cast<int>((i >> (n - 1 - q)) & 1ULL);
}

inline std::uint64_t mask_of(int q, int n) { return 1ULL << (n - 1 - q); }

void check_target(int q, int n) {
    if (q < 0 || q >= n) throw IndexError("gate target out of range");
}

void apply_single_qubit(StateVector& psi, int q, cplx u00, cplx u01, cplx u10, cplx u11) {
    const int n = psi.n_qubits;
    check_target(q, n);
    const std::uint64_t mask = mask_of(q, n);
    const std::uint64_t dim = psi.dim();
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & mask) == 0) {
            const cplx a = psi.amps[i];
            const cplx b = psi.amps[i | mask];
            psi.amps[i] = u00 * a + u01 * b;
            psi.amps[i | mask] = u10 * a + u11 * b;
        }
    }
}

}  // namespace

double StateVector::norm_sq() const {
    double s = 0.0;
    for (const cplx& a : amps) s += std::norm(a);
    return s;
}

StateVector init_zero(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
        throw ConfigError("n_qubits must be in [1, 16]");
    StateVector psi;
    psi.n_qubits = n_qubits;
    psi.amps.assign(std::size_t{1} << n_qubits, cplx(0.0, 0.0));
    psi.amps[0] = cplx(1.0, 0.0);
    return psi;
}

GateOp GateOp::inverse() const {
    GateOp g = *this;
    if (g.parametrized()) g.angle = -g.angle;
    return g;  // H and CZ are self-inverse
}

void apply_gate_inplace(StateVector& psi, const GateOp& g) {
    const int n = psi.n_qubits;
    switch (g.kind) {
        case GateKind::H: {
            const double r = 1.0 / std::sqrt(2.0);
            apply_single_qubit(psi, g.a, r, r, r, -r);
            break;
        }
        case GateKind::Ry: {
            const double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
            apply_single_qubit(psi, g.a, c, -s, s, c);
            break;
        }
        case GateKind::Rz: {
            const cplx e0 = std::polar(1.0, -g.angle / 2.0);
            const cplx e1 = std::polar(1.0, g.angle / 2.0);
            apply_single_qubit(psi, g.a, e0, 0.0, 0.0, e1);
            break;
        }
        case GateKind::CZ: {
            check_target(g.a, n);
            check_target(g.b, n);
            if (g.a == g.b) throw IndexError("CZ targets must be distinct");
            const std::uint64_t m = mask_of(g.a, n) | mask_of(g.b, n);
            for (std::uint64_t i = 0; i < psi.dim(); ++i)
                if ((i & m) == m) psi.amps[i] = -psi.amps[i];
            break;
        }
        case GateKind::Rzz: {
            check_target(g.a, n);
            check_target(g.b, n);
            if (g.a == g.b) throw IndexError("Rzz targets must be distinct");
            // exp(-i t/2 Z(x)Z): phase by the ZZ eigenvalue of each basis state
            const cplx even = std::polar(1.0, -g.angle / 2.0);
            const cplx odd = std::polar(1.0, g.angle / 2.0);
            const std::uint64_t ma = mask_of(g.a, n), mb = mask_of(g.b, n);
            for (std::uint64_t i = 0; i < psi.dim(); ++i) {
                const bool same = ((i & ma) != 0) == ((i & mb) != 0);
                psi.amps[i] *= same ? even : odd;
            }
            break;
        }
    }
}

StateVector apply_gate(const StateVector& psi, const GateOp& g) {
    StateVector out = psi;
    apply_gate_inplace(out, g);
    return out;
}

void apply_circuit_inplace(StateVector& psi, const std::vector<GateOp>& gates) {
    for (const GateOp& g : gates) apply_gate_inplace(psi, g);
    if (std::abs(psi.norm_sq() - 1.0) > 1e-10)
        throw NumericalError("statevector norm drifted beyond 1e-10");
}

ObsTerm ObsTerm::pauli_z(std::vector<int> qubits, double w) {
    int maxq = 0;
    for (int q : qubits) maxq = std::max(maxq, q);
    std::string s(maxq + 1, 'I');
    for (int q : qubits) s[q] = 'Z';
    return pauli_string(std::move(s), w);
}

ObsTerm ObsTerm::pauli_string(std::string paulis, double w) {
    ObsTerm t;
    t.kind = Kind::Pauli;
    t.weight = w;
    t.pauli.paulis = std::move(paulis);
    for (char c : t.pauli.paulis)
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
            throw ConfigError("invalid Pauli character");
    return t;
}

ObsTerm ObsTerm::projector(std::vector<std::uint64_t> basis, double w) {
    ObsTerm t;
    t.kind = Kind::Projector;
    t.weight = w;
    t.basis_set = std::move(basis);
    return t;
}

ObsTerm ObsTerm::projector_range(std::uint64_t lo, std::uint64_t hi, double w) {
    std::vector<std::uint64_t> basis;
    for (std::uint64_t i = lo; i <= hi; ++i) basis.push_back(i);
    return projector(std::move(basis), w);
}

void apply_term(const StateVector& psi, const ObsTerm& term, StateVector& out) {
    const int n = psi.n_qubits;
    out.n_qubits = n;
    out.amps.assign(psi.dim(), cplx(0.0, 0.0));
    if (term.kind == ObsTerm::Kind::Projector) {
        for (std::uint64_t i : term.basis_set) {
            if (i >= psi.dim()) throw IndexError("projector basis index out of range");
            out.amps[i] = psi.amps[i];
        }
        return;
    }
    if (static_cast<int>(term.pauli.paulis.size()) > n)
        throw IndexError("Pauli string longer than register");
    // P = (x)_q P_q with X|b> = |1-b>, Y|b> = i(-1)^b |1-b>, Z|b> = (-1)^b |b>
    std::uint64_t flip = 0;
    for (std::size_t q = 0; q < term.pauli.paulis.size(); ++q) {
        const char c = term.pauli.paulis[q];
        if (c == 'X' || c == 'Y') flip |= mask_of(static_cast<int>(q), n);
    }
    for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        cplx coeff(1.0, 0.0);
        for (std::size_t q = 0; q < term.pauli.paulis.size(); ++q) {
            const int b = bit_of(i, static_cast<int>(q), n);
            switch (term.pauli.paulis[q]) {
                case 'Z': if (b) coeff = -coeff; break;
                case 'Y': coeff *= b ? cplx(0.0, -1.0) : cplx(0.0, 1.0); break;
                default: break;  // I, X: no coefficient
            }
        }
        out.amps[i ^ flip] += coeff * psi.amps[i];
    }
}

double term_expectation(const StateVector& psi, const ObsTerm& term) {
    // Projectors and Z-strings are diagonal; take the fast path.
    if (term.kind == ObsTerm::Kind::Projector) {
        double s = 0.0;
        for (std::uint64_t i : term.basis_set) {
            if (i >= psi.dim()) throw IndexError("projector basis index out of range");
            s += std::norm(psi.amps[i]);
        }
        return s;
    }
    bool diagonal = true;
    for (char c : term.pauli.paulis)
        if (c == 'X' || c == 'Y') diagonal = false;
    if (diagonal) {
        if (static_cast<int>(term.pauli.paulis.size()) > psi.n_qubits)
            throw IndexError("Pauli string longer than register");
        std::uint64_t zmask = 0;
        for (std::size_t q = 0; q < term.pauli.paulis.size(); ++q)
            if (term.pauli.paulis[q] == 'Z') zmask |= mask_of(static_cast<int>(q), psi.n_qubits);
        double s = 0.0;
        for (std::uint64_t i = 0; i < psi.dim(); ++i) {
            const int parity = std::popcount(i & zmask) & 1;
            s += (parity ? -1.0 : 1.0) * std::norm(psi.amps[i]);
        }
        return s;
    }
    StateVector scratch;
    apply_term(psi, term, scratch);
    cplx ip(0.0, 0.0);
    for (std::uint64_t i = 0; i < psi.dim(); ++i)
        ip += std::conj(psi.amps[i]) * scratch.amps[i];
    if (std::abs(ip.imag()) > 1e-10)
        throw NumericalError("expectation of Hermitian term has imaginary residue");
    return ip.real();
}

double expectation(const StateVector& psi, const ObservableSpec& obs) {
    double s = 0.0;
    for (const ObsTerm& t : obs.terms) s += t.weight * term_expectation(psi, t);
    return s;
}

ActionPartition::ActionPartition(int n_qubits, std::vector<std::vector<std::uint64_t>> projectors)
    : n_qubits_(n_qubits),
      n_actions_(static_cast<int>(projectors.size())),
      projectors_(std::move(projectors)) {
    const std::uint64_t dim = 1ULL << n_qubits_;
    action_of_.assign(dim, -1);
    for (int a = 0; a < n_actions_; ++a) {
        for (std::uint64_t i : projectors_[a]) {
            if (i >= dim) throw IndexError("partition basis index out of range");
            if (action_of_[i] != -1) throw ConfigError("partition projectors overlap");
            action_of_[i] = a;
        }
    }
    for (std::uint64_t i = 0; i < dim; ++i)
        if (action_of_[i] == -1) throw ConfigError("partition does not cover all basis states");
}

ActionPartition ActionPartition::by_index_ranges(int n_qubits, int n_actions) {
    const std::uint64_t dim = 1ULL << n_qubits;
    if (n_actions < 1 || static_cast<std::uint64_t>(n_actions) > dim)
        throw ConfigError("invalid action count for partition");
    std::vector<std::vector<std::uint64_t>> proj(n_actions);
    for (std::uint64_t i = 0; i < dim; ++i) {
        auto a = static_cast<int>(i * static_cast<std::uint64_t>(n_actions) / dim);
        proj[a].push_back(i);
    }
    return ActionPartition(n_qubits, std::move(proj));
}

ActionPartition ActionPartition::by_qubit(int n_qubits, int qubit) {
    if (qubit < 0 || qubit >= n_qubits) throw IndexError("partition qubit out of range");
    std::vector<std::vector<std::uint64_t>> proj(2);
    for (std::uint64_t i = 0; i < (1ULL << n_qubits); ++i)
        proj[bit_of(i, qubit, n_qubits)].push_back(i);
    return ActionPartition(n_qubits, std::move(proj));
}

ActionPartition ActionPartition::by_parity(int n_qubits) {
    std::vector<std::vector<std::uint64_t>> proj(2);
    for (std::uint64_t i = 0; i < (1ULL << n_qubits); ++i)
        proj[std::popcount(i) & 1].push_back(i);
    return ActionPartition(n_qubits, std::move(proj));
}

std::vector<double> ActionPartition::probabilities(const StateVector& psi) const {
    if (psi.n_qubits != n_qubits_) throw IndexError("partition/state qubit mismatch");
    std::vector<double> p(n_actions_, 0.0);
    for (std::uint64_t i = 0; i < psi.dim(); ++i) p[action_of_[i]] += std::norm(psi.amps[i]);
    return p;
}

int born_sample(const StateVector& psi, const ActionPartition& partition, Rng& rng) {
    if (psi.n_qubits != partition.n_qubits()) throw IndexError("partition/state qubit mismatch");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        acc += std::norm(psi.amps[i]);
        if (u < acc) return partition.action_of(i);
    }
    return partition.action_of(psi.dim() - 1);
}

}  // namespace qpol::qsim
