#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qpol/qsim.hpp"

using namespace qpol;
using namespace qpol::qsim;

namespace {

GateOp random_gate(int n, Rng& rng) {
    std::uniform_int_distribution<int> kind(0, 4);
    std::uniform_int_distribution<int> qd(0, n - 1);
    std::uniform_real_distribution<double> ang(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    const int q = qd(rng);
    switch (kind(rng)) {
        case 0: return GateOp::h(q);
        case 1: return GateOp::ry(q, ang(rng));
        case 2: return GateOp::rz(q, ang(rng));
        case 3: {
            int b = qd(rng);
            while (b == q && n > 1) b = qd(rng);
            return n > 1 ? GateOp::cz(q, b) : GateOp::ry(q, ang(rng));
        }
        default: {
            int b = qd(rng);
            while (b == q && n > 1) b = qd(rng);
            return n > 1 ? GateOp::rzz(q, b, ang(rng)) : GateOp::rz(q, ang(rng));
        }
    }
}

// Extracts the full 2^n x 2^n matrix of a gate by applying it to each basis
// state; used to check unitarity directly.
std::vector<std::vector<cplx>> gate_matrix(int n, const GateOp& g) {
    const std::uint64_t dim = 1ULL << n;
    std::vector<std::vector<cplx>> cols(dim);
    for (std::uint64_t j = 0; j < dim; ++j) {
        StateVector psi;
        psi.n_qubits = n;
        psi.amps.assign(dim, cplx(0, 0));
        psi.amps[j] = 1.0;
        apply_gate_inplace(psi, g);
        cols[j] = psi.amps;
    }
    return cols;
}

}  // namespace

TEST_CASE("init_zero puts all amplitude on basis index 0") {
    for (int n : {1, 2, 3}) {
        StateVector psi = init_zero(n);
        CHECK(psi.dim() == (1ULL << n));
        CHECK(psi.amps[0] == cplx(1.0, 0.0));
        for (std::size_t i = 1; i < psi.dim(); ++i) CHECK(psi.amps[i] == cplx(0.0, 0.0));
    }
    CHECK_THROWS_AS(init_zero(0), ConfigError);
    CHECK_THROWS_AS(init_zero(17), ConfigError);
}

TEST_CASE("elementary gate actions") {
    const double r = 1.0 / std::sqrt(2.0);

    StateVector psi = init_zero(1);
    apply_gate_inplace(psi, GateOp::h(0));
    CHECK(std::abs(psi.amps[0] - cplx(r, 0)) < 1e-15);
    CHECK(std::abs(psi.amps[1] - cplx(r, 0)) < 1e-15);

    psi = init_zero(1);
    apply_gate_inplace(psi, GateOp::ry(0, std::numbers::pi));
    CHECK(std::abs(psi.amps[0]) < 1e-15);
    CHECK(std::abs(psi.amps[1] - cplx(1, 0)) < 1e-15);

    // CZ on |11>: |11> is basis index 3 under the MSB-first convention
    psi = init_zero(2);
    apply_gate_inplace(psi, GateOp::ry(0, std::numbers::pi));
    apply_gate_inplace(psi, GateOp::ry(1, std::numbers::pi));
    apply_gate_inplace(psi, GateOp::cz(0, 1));
    CHECK(std::abs(psi.amps[3] - cplx(-1, 0)) < 1e-14);

    CHECK_THROWS_AS(apply_gate_inplace(psi, GateOp::ry(2, 1.0)), IndexError);
    CHECK_THROWS_AS(apply_gate_inplace(psi, GateOp::cz(0, 0)), IndexError);
}

TEST_CASE("gate matrices are unitary") {
    Rng rng = make_rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2;
        const GateOp g = random_gate(n, rng);
        const auto m = gate_matrix(n, g);
        const std::uint64_t dim = 1ULL << n;
        for (std::uint64_t i = 0; i < dim; ++i) {
            for (std::uint64_t j = 0; j < dim; ++j) {
                cplx dot(0, 0);
                for (std::uint64_t k = 0; k < dim; ++k) dot += std::conj(m[i][k]) * m[j][k];
                CHECK(std::abs(dot - (i == j ? cplx(1, 0) : cplx(0, 0))) < 1e-12);
            }
        }
    }
}

TEST_CASE("expectation values") {
    StateVector zero = init_zero(1);
    ObservableSpec z{{ObsTerm::pauli_z({0})}};
    CHECK(expectation(zero, z) == doctest::Approx(1.0).epsilon(1e-12));

    // <ZZ> on the Bell state (|00>+|11>)/sqrt(2)
    StateVector bell = init_zero(2);
    bell.amps = {cplx(1 / std::sqrt(2.0), 0), 0, 0, cplx(1 / std::sqrt(2.0), 0)};
    ObservableSpec zz{{ObsTerm::pauli_z({0, 1})}};
    CHECK(expectation(bell, zz) == doctest::Approx(1.0).epsilon(1e-12));

    // projector on |11> measured on H(x)H|00>
    StateVector hh = init_zero(2);
    apply_gate_inplace(hh, GateOp::h(0));
    apply_gate_inplace(hh, GateOp::h(1));
    ObservableSpec p11{{ObsTerm::projector({3})}};
    CHECK(expectation(hh, p11) == doctest::Approx(0.25).epsilon(1e-12));

    // <X> on |+> and <Y> on |0>
    StateVector plus = init_zero(1);
    apply_gate_inplace(plus, GateOp::h(0));
    ObservableSpec x{{ObsTerm::pauli_string("X")}};
    CHECK(expectation(plus, x) == doctest::Approx(1.0).epsilon(1e-12));
    ObservableSpec y{{ObsTerm::pauli_string("Y")}};
    CHECK(std::abs(expectation(zero, y)) < 1e-12);

    // weighted sums and the empty projector
    ObservableSpec combo{{ObsTerm::pauli_z({0}, 0.5), ObsTerm::projector({}, 3.0)}};
    CHECK(expectation(zero, combo) == doctest::Approx(0.5).epsilon(1e-12));

    ObservableSpec bad{{ObsTerm::projector({4})}};
    CHECK_THROWS_AS(expectation(zero, bad), IndexError);
}

TEST_CASE("partition validation and probabilities") {
    CHECK_THROWS_AS(ActionPartition(2, {{0, 1}, {1, 2, 3}}), ConfigError);
    CHECK_THROWS_AS(ActionPartition(2, {{0, 1}, {2}}), ConfigError);
    CHECK_THROWS_AS(ActionPartition(2, {{0, 1}, {2, 5}}), IndexError);

    const ActionPartition halves = ActionPartition::by_index_ranges(2, 2);
    CHECK(halves.action_of(0) == 0);
    CHECK(halves.action_of(3) == 1);

    // Bell state, parity partition: even-parity action has probability 1
    StateVector bell = init_zero(2);
    bell.amps = {cplx(1 / std::sqrt(2.0), 0), 0, 0, cplx(1 / std::sqrt(2.0), 0)};
    const ActionPartition parity = ActionPartition::by_parity(2);
    const auto probs = parity.probabilities(bell);
    double even_direct = 0.0;  // oracle: direct summation of |amp|^2
    for (std::uint64_t i : {0ULL, 3ULL}) even_direct += std::norm(bell.amps[i]);
    CHECK(probs[0] == doctest::Approx(even_direct).epsilon(1e-12));
    CHECK(probs[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("born_sample follows the Born rule") {
    Rng rng = make_rng(7);
    const ActionPartition parity = ActionPartition::by_parity(1);

    StateVector zero = init_zero(1);
    for (int i = 0; i < 100; ++i) CHECK(born_sample(zero, parity, rng) == 0);

    StateVector plus = init_zero(1);
    apply_gate_inplace(plus, GateOp::h(0));
    const int n_draws = 100000;
    int odd = 0;
    for (int i = 0; i < n_draws; ++i) odd += born_sample(plus, parity, rng);
    const double sigma = std::sqrt(0.25 * n_draws);
    CHECK(std::abs(odd - 0.5 * n_draws) < 3.0 * sigma);

    // deterministic given the seed
    Rng a = make_rng(123), b = make_rng(123);
    for (int i = 0; i < 50; ++i) CHECK(born_sample(plus, parity, a) == born_sample(plus, parity, b));
}

TEST_CASE("norm preserved over 1000 random circuits") {
    Rng rng = make_rng(42);
    std::uniform_int_distribution<int> nd(1, 4);
    std::uniform_int_distribution<int> len(1, 60);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = nd(rng);
        StateVector psi = init_zero(n);
        const int m = len(rng);
        for (int k = 0; k < m; ++k) apply_gate_inplace(psi, random_gate(n, rng));
        CHECK(std::abs(psi.norm_sq() - 1.0) < 1e-9);
    }
}

TEST_CASE("partition completeness on random states") {
    Rng rng = make_rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3;
        StateVector psi = init_zero(n);
        for (int k = 0; k < 30; ++k) apply_gate_inplace(psi, random_gate(n, rng));
        for (int actions : {2, 3, 5}) {
            const auto part = ActionPartition::by_index_ranges(n, actions);
            const auto probs = part.probabilities(psi);
            double sum = 0.0;
            for (double p : probs) sum += p;
            CHECK(std::abs(sum - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("sampling frequencies match projector expectations") {
    Rng rng = make_rng(44);
    const int n = 3;
    StateVector psi = init_zero(n);
    for (int k = 0; k < 25; ++k) apply_gate_inplace(psi, random_gate(n, rng));
    const auto part = ActionPartition::by_index_ranges(n, 3);
    const auto probs = part.probabilities(psi);
    const int n_draws = 100000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n_draws; ++i) ++counts[born_sample(psi, part, rng)];
    for (int a = 0; a < 3; ++a) {
        const double sigma = std::sqrt(probs[a] * (1.0 - probs[a]) * n_draws);
        CHECK(std::abs(counts[a] - probs[a] * n_draws) <= 4.0 * sigma + 1.0);
    }
}

TEST_CASE("gate then inverse returns the input state") {
    Rng rng = make_rng(45);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2;
        StateVector psi = init_zero(n);
        for (int k = 0; k < 10; ++k) apply_gate_inplace(psi, random_gate(n, rng));
        const StateVector before = psi;
        const GateOp g = random_gate(n, rng);
        apply_gate_inplace(psi, g);
        apply_gate_inplace(psi, g.inverse());
        for (std::size_t i = 0; i < psi.dim(); ++i)
            CHECK(std::abs(psi.amps[i] - before.amps[i]) < 1e-10);
    }
}
