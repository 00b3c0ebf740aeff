#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "qpol/pqc.hpp"

using namespace qpol;
using namespace qpol::pqc;
using qsim::ActionPartition;
using qsim::GateKind;
using qsim::ObservableSpec;
using qsim::ObsTerm;

namespace {

constexpr double kPi = std::numbers::pi;

PqcTopology topo_2q(int d_enc, bool trainable_ent = false) {
    PqcTopology t;
    t.n_qubits = 2;
    t.d_enc = d_enc;
    t.entangler = Entangler::OneToOne;
    t.entangler_trainable = trainable_ent;
    t.input_dim = 2;
    return t;
}

PqcTopology random_topology(Rng& rng, int max_n = 4, int max_d = 5) {
    std::uniform_int_distribution<int> nd(1, max_n), dd(0, max_d), ed(0, 2), bd(0, 1);
    PqcTopology t;
    t.n_qubits = nd(rng);
    t.d_enc = dd(rng);
    t.entangler = static_cast<Entangler>(ed(rng));
    t.entangler_trainable = bd(rng) == 1;
    std::uniform_int_distribution<int> idd(1, 2 * t.n_qubits);
    t.input_dim = idd(rng);
    return t;
}

std::vector<double> random_input(const PqcTopology& t, Rng& rng) {
    std::uniform_real_distribution<double> sd(-2.0, 2.0);
    std::vector<double> s(t.input_dim);
    for (double& v : s) v = sd(rng);
    return s;
}

ObservableSpec random_observable(int n, Rng& rng) {
    std::uniform_int_distribution<int> nterms(1, 2), coin(0, 1);
    std::uniform_real_distribution<double> wd(-1.0, 1.0);
    ObservableSpec obs;
    for (int t = 0; t < nterms(rng); ++t) {
        if (coin(rng) == 0) {
            std::string s;
            for (int q = 0; q < n; ++q) s.push_back(coin(rng) ? 'Z' : 'I');
            if (s.find('Z') == std::string::npos) s[0] = 'Z';
            obs.terms.push_back(ObsTerm::pauli_string(s, wd(rng)));
        } else {
            std::vector<std::uint64_t> basis;
            for (std::uint64_t i = 0; i < (1ULL << n); ++i)
                if (coin(rng)) basis.push_back(i);
            obs.terms.push_back(ObsTerm::projector(basis, wd(rng)));
        }
    }
    return obs;
}

// central-difference oracle over one phi coordinate of an expectation
double fd_phi(const std::vector<double>& s, ParamVector p, const PqcTopology& t,
              const ObservableSpec& obs, int i, double h = 1e-5) {
    p.phi[i] += h;
    const double up = qsim::expectation(evaluate_state(t, s, p), obs);
    p.phi[i] -= 2 * h;
    const double dn = qsim::expectation(evaluate_state(t, s, p), obs);
    return (up - dn) / (2 * h);
}

double fd_lam(const std::vector<double>& s, ParamVector p, const PqcTopology& t,
              const ObservableSpec& obs, int i, double h = 1e-5) {
    p.lam[i] += h;
    const double up = qsim::expectation(evaluate_state(t, s, p), obs);
    p.lam[i] -= 2 * h;
    const double dn = qsim::expectation(evaluate_state(t, s, p), obs);
    return (up - dn) / (2 * h);
}

using Mat4 = std::array<std::array<std::complex<double>, 4>, 4>;

Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

}  // namespace

TEST_CASE("parameter sizes follow the topology") {
    PqcTopology t = topo_2q(1);
    CHECK(t.phi_size() == 8);  // 2 layers x (2 Rz + 2 Ry)
    CHECK(t.lam_size() == 4);
    t.entangler_trainable = true;
    CHECK(t.phi_size() == 10);  // + 1 Rzz angle per layer

    Rng rng = make_rng(1);
    ParamVector p = init_params(topo_2q(1), 0, rng);
    CHECK(p.phi.size() == 8);
    CHECK(p.lam == std::vector<double>(4, 1.0));
    p.phi.pop_back();
    CHECK_THROWS_AS(validate_sizes(topo_2q(1), p), ConfigError);

    PqcTopology bad = topo_2q(1);
    bad.input_dim = 5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("gate sequence matches the n=2, D_enc=1 layout") {
    const PqcTopology t = topo_2q(1);
    ParamVector p;
    p.phi = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    p.lam = {1.1, 1.2, 1.3, 1.4};
    const std::vector<double> s = {0.9, -0.7};
    const BuiltCircuit c = build_circuit(t, s, p);

    // H,H; Rz,Rz; Ry,Ry; CZ; Ry(l*s),Ry; Rz(l*s),Rz; Rz,Rz; Ry,Ry; CZ
    REQUIRE(c.gates.size() == 16);
    CHECK(c.gates[0].kind == GateKind::H);
    CHECK(c.gates[1].kind == GateKind::H);
    CHECK(c.gates[2].kind == GateKind::Rz);
    CHECK(c.gates[2].angle == doctest::Approx(0.1));
    CHECK(c.gates[3].kind == GateKind::Rz);
    CHECK(c.gates[3].a == 1);
    CHECK(c.gates[4].kind == GateKind::Ry);
    CHECK(c.gates[4].angle == doctest::Approx(0.3));
    CHECK(c.gates[6].kind == GateKind::CZ);
    CHECK(c.gates[7].kind == GateKind::Ry);
    CHECK(c.gates[7].angle == doctest::Approx(1.1 * 0.9));
    CHECK(c.gates[8].kind == GateKind::Ry);
    CHECK(c.gates[8].angle == doctest::Approx(1.2 * -0.7));
    CHECK(c.gates[9].kind == GateKind::Rz);
    CHECK(c.gates[9].angle == doctest::Approx(1.3 * 0.9));
    CHECK(c.gates[10].kind == GateKind::Rz);
    CHECK(c.gates[10].angle == doctest::Approx(1.4 * -0.7));
    CHECK(c.gates[15].kind == GateKind::CZ);

    CHECK(c.lam_input == std::vector<double>{0.9, -0.7, 0.9, -0.7});
}

TEST_CASE("D_enc=0 output is independent of the input") {
    PqcTopology t = topo_2q(0);
    t.input_dim = 2;
    Rng rng = make_rng(2);
    const ParamVector p = init_params(t, 0, rng);
    const auto a = evaluate_state(t, {0.0, 0.0}, p);
    const auto b = evaluate_state(t, {1.7, -2.3}, p);
    for (std::size_t i = 0; i < a.dim(); ++i) CHECK(std::abs(a.amps[i] - b.amps[i]) < 1e-15);
}

TEST_CASE("all-zero parameters reduce to H(x)H with CZ phases") {
    // oracle: explicit 4x4 matrix product CZ * (H(x)H) applied twice round
    const double r = 1.0 / std::sqrt(2.0);
    Mat4 hh{};
    const double hm[2][2] = {{r, r}, {r, -r}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) hh[i][j] = hm[i >> 1][j >> 1] * hm[i & 1][j & 1];
    Mat4 cz{};
    for (int i = 0; i < 4; ++i) cz[i][i] = (i == 3) ? -1.0 : 1.0;
    // circuit: H layer, var(CZ), enc(identity), var(CZ)
    const Mat4 u = matmul(cz, matmul(cz, hh));
    std::array<std::complex<double>, 4> expected{};
    for (int i = 0; i < 4; ++i) expected[i] = u[i][0];

    PqcTopology t = topo_2q(1);
    ParamVector p;
    p.phi.assign(t.phi_size(), 0.0);
    p.lam.assign(t.lam_size(), 0.0);
    const auto psi = evaluate_state(t, {0.4, 0.5}, p);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(psi.amps[i] - expected[i]) < 1e-14);

    ObservableSpec zz{{ObsTerm::pauli_z({0, 1})}};
    CHECK(std::abs(qsim::expectation(psi, zz)) < 1e-14);
}

TEST_CASE("born_policy single-qubit rotation closed form") {
    PqcTopology t;
    t.n_qubits = 1;
    t.d_enc = 0;
    t.input_dim = 1;
    t.initial_h = false;  // test switch
    const ActionPartition part = ActionPartition::by_qubit(1, 0);
    for (double theta : {0.3, 1.2, 2.7}) {
        ParamVector p;
        p.phi = {0.0, theta};  // Rz(0) then Ry(theta)
        p.lam = {};
        const auto probs = born_policy({0.0}, p, t, part);
        CHECK(probs[0] == doctest::Approx(std::cos(theta / 2) * std::cos(theta / 2)).epsilon(1e-12));
        CHECK(probs[1] == doctest::Approx(std::sin(theta / 2) * std::sin(theta / 2)).epsilon(1e-12));
    }
}

TEST_CASE("born_policy sums to one; D_enc=0 first-qubit split is uniform") {
    PqcTopology t = topo_2q(0);
    ParamVector p;
    p.phi.assign(t.phi_size(), 0.0);
    p.lam.assign(t.lam_size(), 0.0);
    const auto probs = born_policy({0.0, 0.0}, p, t, ActionPartition::by_qubit(2, 0));
    CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng = make_rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const PqcTopology rt = random_topology(rng);
        const ParamVector rp = init_params(rt, 0, rng);
        const auto s = random_input(rt, rng);
        const auto pr = born_policy(s, rp, rt, ActionPartition::by_index_ranges(rt.n_qubits, 2));
        CHECK(pr[0] + pr[1] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(pr[0] >= 0.0);
    }
}

TEST_CASE("softmax basics") {
    CHECK(softmax({0.7, 0.7, 0.7}, 2.0) == std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});
    const auto nearly_uniform = softmax({0.9, -0.4, 0.1}, 1e-12);
    for (double v : nearly_uniform) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-10));
    CHECK_THROWS_AS(softmax({0.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(softmax({0.0}, -1.0), ConfigError);
}

TEST_CASE("softmax_policy matches the 2-action logistic closed form") {
    const PqcTopology t = topo_2q(2);
    Rng rng = make_rng(0);
    std::vector<ObservableSpec> obs = {{{ObsTerm::pauli_z({0, 1}, 1.0)}},
                                       {{ObsTerm::pauli_z({0, 1}, -1.0)}}};
    const ParamVector p = init_params(t, obs, rng);
    const std::vector<double> s = {0.8, -1.1};
    const double v = action_expectations(s, p, t, obs)[0];
    for (double beta : {0.5, 1.0, 4.0}) {
        const auto pi = softmax_policy(s, p, t, obs, beta);
        const double sigma = 1.0 / (1.0 + std::exp(-2.0 * beta * v));
        CHECK(pi[0] == doctest::Approx(sigma).epsilon(1e-12));
        CHECK(pi[1] == doctest::Approx(1.0 - sigma).epsilon(1e-12));
    }
}

TEST_CASE("softmax argmax equals expectation argmax for any beta") {
    Rng rng = make_rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const PqcTopology t = random_topology(rng, 3, 3);
        std::vector<ObservableSpec> obs;
        for (int a = 0; a < 3; ++a) obs.push_back(random_observable(t.n_qubits, rng));
        const ParamVector p = init_params(t, obs, rng);
        const auto s = random_input(t, rng);
        const auto e = action_expectations(s, p, t, obs);
        const int ref = static_cast<int>(std::max_element(e.begin(), e.end()) - e.begin());
        for (double beta : {0.01, 1.0, 25.0}) {
            const auto pi = softmax(e, beta);
            CHECK(static_cast<int>(std::max_element(pi.begin(), pi.end()) - pi.begin()) == ref);
        }
    }
}

TEST_CASE("parameter shift reproduces analytic single-qubit derivatives") {
    PqcTopology t;
    t.n_qubits = 1;
    t.d_enc = 0;
    t.input_dim = 1;
    t.initial_h = false;
    ObservableSpec z{{ObsTerm::pauli_z({0})}};
    // <Z> of Ry(theta)|0> is cos(theta); derivative -sin(theta)
    for (double theta : {0.2, 1.1, 2.9}) {
        ParamVector p;
        p.phi = {0.0, theta};
        const double d = parameter_shift_derivative({0.0}, p, t, z, ParamGroup::Phi, 1);
        CHECK(d == doctest::Approx(-std::sin(theta)).epsilon(1e-10));
        const double fd = 0.5 * (std::cos(theta + kPi / 2) - std::cos(theta - kPi / 2));
        CHECK(d == doctest::Approx(fd).epsilon(1e-10));
    }
    // encoding gate: <Z> = cos(lambda*s), d/dlambda = -s sin(lambda*s)
    PqcTopology te = t;
    te.d_enc = 1;
    for (double lam : {0.7, 1.8}) {
        const double s0 = 1.3;
        ParamVector p;
        p.phi = {0.0, 0.0, 0.0, 0.0};
        p.lam = {lam, 0.0};  // slot 0 Ry, slot 1 Rz (Rz does not move <Z>)
        const double d = parameter_shift_derivative({s0}, p, te, z, ParamGroup::Lambda, 0);
        CHECK(d == doctest::Approx(-s0 * std::sin(lam * s0)).epsilon(1e-10));
    }
}

TEST_CASE("derivative of a parameter outside the observable light cone is zero") {
    // Z on qubit 0 cannot see rotations on qubit 1 when no entangler mixes them
    PqcTopology t = topo_2q(0);
    t.initial_h = true;
    Rng rng = make_rng(6);
    ParamVector p = init_params(t, 0, rng);
    ObservableSpec z0{{ObsTerm::pauli_z({0})}};
    // phi[1] is the Rz on qubit 1, phi[3] the Ry on qubit 1; CZ is diagonal so
    // it never routes qubit-1 amplitude into a qubit-0 Z expectation
    CHECK(std::abs(parameter_shift_derivative({0.0, 0.0}, p, t, z0, ParamGroup::Phi, 1)) < 1e-10);
    CHECK(std::abs(parameter_shift_derivative({0.0, 0.0}, p, t, z0, ParamGroup::Phi, 3)) < 1e-10);
    CHECK_THROWS_AS(parameter_shift_derivative({0.0, 0.0}, p, t, z0, ParamGroup::Phi, 99),
                    IndexError);
}

TEST_CASE("parameter shift matches central finite differences on 100 random circuits") {
    Rng rng = make_rng(7);
    int done = 0;
    while (done < 100) {
        const PqcTopology t = random_topology(rng, 4, 5);
        const ParamVector p = init_params(t, 0, rng);
        const auto s = random_input(t, rng);
        const ObservableSpec obs = random_observable(t.n_qubits, rng);
        std::uniform_int_distribution<int> pick(0, t.phi_size() + t.lam_size() - 1);
        const int idx = pick(rng);
        double shift, fd;
        if (idx < t.phi_size()) {
            shift = parameter_shift_derivative(s, p, t, obs, ParamGroup::Phi, idx);
            fd = fd_phi(s, p, t, obs, idx);
        } else {
            shift = parameter_shift_derivative(s, p, t, obs, ParamGroup::Lambda, idx - t.phi_size());
            fd = fd_lam(s, p, t, obs, idx - t.phi_size());
        }
        CHECK(std::abs(shift - fd) <= 1e-9 + 1e-6 * std::abs(fd));
        ++done;
    }
}

TEST_CASE("adjoint gradient equals the shift rule on random circuits") {
    Rng rng = make_rng(8);
    for (int trial = 0; trial < 25; ++trial) {
        const PqcTopology t = random_topology(rng, 3, 3);
        const ParamVector p = init_params(t, 0, rng);
        const auto s = random_input(t, rng);
        const ObservableSpec obs = random_observable(t.n_qubits, rng);
        std::vector<double> aphi, alam, sphi, slam;
        expectation_gradient(s, p, t, obs, aphi, alam, GradMode::Adjoint);
        expectation_gradient(s, p, t, obs, sphi, slam, GradMode::ShiftRule);
        for (std::size_t i = 0; i < aphi.size(); ++i) CHECK(std::abs(aphi[i] - sphi[i]) < 1e-10);
        for (std::size_t i = 0; i < alam.size(); ++i) CHECK(std::abs(alam[i] - slam[i]) < 1e-10);
    }
}

TEST_CASE("observable weight derivative is the bare term expectation") {
    PqcTopology t;
    t.n_qubits = 1;
    t.d_enc = 0;
    t.input_dim = 1;
    t.initial_h = false;
    ParamVector p;
    p.phi = {0.0, 0.0};  // identity circuit: state |0>
    CHECK(observable_weight_derivative({0.0}, p, t, ObsTerm::pauli_z({0})) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(observable_weight_derivative({0.0}, p, t, ObsTerm::projector({})) == 0.0);

    Rng rng = make_rng(0);
    const PqcTopology t2 = topo_2q(2);
    const ParamVector p2 = init_params(t2, 0, rng);
    const std::vector<double> s = {0.4, 0.9};
    const ObsTerm zz = ObsTerm::pauli_z({0, 1});
    CHECK(observable_weight_derivative(s, p2, t2, zz) ==
          doctest::Approx(qsim::term_expectation(evaluate_state(t2, s, p2), zz)).epsilon(1e-12));
}

TEST_CASE("log policy gradient: symmetric softmax gives the zero vector") {
    const PqcTopology t = topo_2q(1);
    Rng rng = make_rng(9);
    std::vector<ObservableSpec> obs = {{{ObsTerm::pauli_z({0}, 1.0)}},
                                       {{ObsTerm::pauli_z({0}, 1.0)}}};
    const ParamVector p = init_params(t, obs, rng);
    PolicyConfig cfg;
    cfg.kind = PolicyKind::Softmax;
    cfg.observables = obs;
    cfg.beta = 2.0;
    const GradVector g = log_policy_gradient({0.3, 0.4}, 0, p, t, cfg);
    // identical observables with identical weights: pi is uniform and the
    // phi/lambda parts cancel; w parts cancel pairwise in the score identity
    for (double v : g.phi) CHECK(std::abs(v) < 1e-12);
    for (double v : g.lam) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("log policy gradient matches finite differences of log pi") {
    Rng rng = make_rng(10);
    const double h = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
        const PqcTopology t = random_topology(rng, 3, 2);
        std::vector<ObservableSpec> obs;
        for (int a = 0; a < 2; ++a) obs.push_back(random_observable(t.n_qubits, rng));
        ParamVector p = init_params(t, obs, rng);
        const auto s = random_input(t, rng);
        PolicyConfig cfg;
        cfg.kind = PolicyKind::Softmax;
        cfg.observables = obs;
        cfg.beta = 1.5;
        const int action = trial % 2;
        const GradVector g = log_policy_gradient(s, action, p, t, cfg);
        auto log_pi = [&](const ParamVector& q) {
            return std::log(softmax_policy(s, q, t, obs, cfg.beta)[action]);
        };
        auto check_coord = [&](double got, double up, double dn) {
            const double fd = (up - dn) / (2 * h);
            CHECK(std::abs(got - fd) <= 1e-7 + 1e-5 * std::abs(fd));
        };
        for (std::size_t i = 0; i < p.phi.size(); ++i) {
            ParamVector q = p;
            q.phi[i] += h;
            const double up = log_pi(q);
            q.phi[i] -= 2 * h;
            check_coord(g.phi[i], up, log_pi(q));
        }
        for (std::size_t i = 0; i < p.lam.size(); ++i) {
            ParamVector q = p;
            q.lam[i] += h;
            const double up = log_pi(q);
            q.lam[i] -= 2 * h;
            check_coord(g.lam[i], up, log_pi(q));
        }
        for (std::size_t i = 0; i < p.w.size(); ++i) {
            ParamVector q = p;
            q.w[i] += h;
            const double up = log_pi(q);
            q.w[i] -= 2 * h;
            check_coord(g.w[i], up, log_pi(q));
        }
    }
}

TEST_CASE("Born log policy gradient matches finite differences and flags degeneracy") {
    Rng rng = make_rng(11);
    const double h = 1e-5;
    int done = 0;
    while (done < 8) {
        const PqcTopology t = random_topology(rng, 3, 2);
        ParamVector p = init_params(t, 0, rng);
        const auto s = random_input(t, rng);
        PolicyConfig cfg;
        cfg.kind = PolicyKind::Born;
        cfg.partition = ActionPartition::by_index_ranges(t.n_qubits, 2);
        const auto probs = born_policy(s, p, t, *cfg.partition);
        if (probs[0] < 1e-3 || probs[1] < 1e-3) continue;
        const int action = done % 2;
        const GradVector g = log_policy_gradient(s, action, p, t, cfg);
        auto log_pi = [&](const ParamVector& q) {
            return std::log(born_policy(s, q, t, *cfg.partition)[action]);
        };
        for (std::size_t i = 0; i < p.phi.size(); ++i) {
            ParamVector q = p;
            q.phi[i] += h;
            const double up = log_pi(q);
            q.phi[i] -= 2 * h;
            const double fd = (up - log_pi(q)) / (2 * h);
            CHECK(std::abs(g.phi[i] - fd) <= 1e-7 + 1e-5 * std::abs(fd));
        }
        ++done;
    }

    // a projector that the prepared state never reaches: <P_a> = 0 exactly
    PqcTopology t1;
    t1.n_qubits = 1;
    t1.d_enc = 0;
    t1.input_dim = 1;
    t1.initial_h = false;
    ParamVector p1;
    p1.phi = {0.0, 0.0};
    PolicyConfig cfg1;
    cfg1.kind = PolicyKind::Born;
    cfg1.partition = ActionPartition::by_qubit(1, 0);
    CHECK_THROWS_AS(log_policy_gradient({0.0}, 1, p1, t1, cfg1), DegenerateGradientError);
}

TEST_CASE("score identity holds over 100 random configurations") {
    Rng rng = make_rng(12);
    int done = 0;
    while (done < 100) {
        const PqcTopology t = random_topology(rng, 3, 2);
        const auto s = random_input(t, rng);
        PolicyConfig cfg;
        GradVector total;
        if (done % 2 == 0) {
            cfg.kind = PolicyKind::Softmax;
            for (int a = 0; a < 3; ++a) cfg.observables.push_back(random_observable(t.n_qubits, rng));
            cfg.beta = 2.0;
            const ParamVector p = init_params(t, cfg.observables, rng);
            const auto pi = policy_probabilities(s, p, t, cfg);
            total = zero_grad(t, cfg.w_size());
            for (int a = 0; a < cfg.n_actions(); ++a)
                total.axpy(pi[a], log_policy_gradient(s, a, p, t, cfg));
        } else {
            cfg.kind = PolicyKind::Born;
            cfg.partition = ActionPartition::by_index_ranges(t.n_qubits, 2);
            const ParamVector p = init_params(t, 0, rng);
            const auto pi = policy_probabilities(s, p, t, cfg);
            if (pi[0] < 1e-6 || pi[1] < 1e-6) continue;
            total = zero_grad(t, 0);
            for (int a = 0; a < cfg.n_actions(); ++a)
                total.axpy(pi[a], log_policy_gradient(s, a, p, t, cfg));
        }
        CHECK(total.linf() < 1e-8);
        ++done;
    }
}

TEST_CASE("softmax total variation obeys the 2 sinh(2 beta eps) bound") {
    Rng rng = make_rng(13);
    std::uniform_real_distribution<double> ed(-1.0, 1.0);
    for (double beta : {1.0, 5.0}) {
        for (double eps : {1e-3, 1e-2}) {
            const double bound = 2.0 * std::sinh(2.0 * beta * eps);
            for (int trial = 0; trial < 1000; ++trial) {
                const std::vector<double> e = {ed(rng), ed(rng), ed(rng)};
                const auto base = softmax(e, beta);
                for (int signs = 0; signs < 8; ++signs) {
                    std::vector<double> pert = e;
                    for (int a = 0; a < 3; ++a) pert[a] += ((signs >> a) & 1) ? eps : -eps;
                    const auto noisy = softmax(pert, beta);
                    double tv = 0.0;
                    for (int a = 0; a < 3; ++a) tv += std::abs(noisy[a] - base[a]);
                    CHECK(tv <= bound);
                }
            }
        }
    }
}

TEST_CASE("approximate log policy gradient stays within 3 beta eps in l-inf") {
    Rng rng = make_rng(14);
    std::uniform_real_distribution<double> ed(-1.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    const int n_actions = 3, n_coords = 6;
    const double max_norm = 1.0;  // |d<O_a>/d theta_i| <= max_a ||O_a|| = 1
    for (double beta : {1.0, 5.0}) {
        for (double eps : {1e-3, 1e-4}) {
            const double eps_prime = eps / (4.0 * beta * max_norm);
            for (int trial = 0; trial < 400; ++trial) {
                std::vector<double> e(n_actions);
                for (double& v : e) v = ed(rng);
                std::vector<std::vector<double>> d(n_actions, std::vector<double>(n_coords));
                for (auto& row : d)
                    for (double& v : row) v = ed(rng);
                std::vector<double> e_pert = e;
                auto d_pert = d;
                for (double& v : e_pert) v += coin(rng) ? eps_prime : -eps_prime;
                for (auto& row : d_pert)
                    for (double& v : row) v += coin(rng) ? eps : -eps;

                const int action = trial % n_actions;
                const auto pi = softmax(e, beta);
                const auto pi_pert = softmax(e_pert, beta);
                for (int i = 0; i < n_coords; ++i) {
                    double exact = d[action][i], approx = d_pert[action][i];
                    for (int a = 0; a < n_actions; ++a) {
                        exact -= pi[a] * d[a][i];
                        approx -= pi_pert[a] * d_pert[a][i];
                    }
                    CHECK(std::abs(beta * exact - beta * approx) <= 3.0 * beta * eps + 1e-6);
                }
            }
        }
    }
}

TEST_CASE("noisy expectation: degenerate, binomial and bias behaviour") {
    Rng rng = make_rng(15);
    PqcTopology t1;
    t1.n_qubits = 1;
    t1.d_enc = 0;
    t1.input_dim = 1;
    t1.initial_h = false;
    ParamVector p1;
    p1.phi = {0.0, 0.0};
    ObservableSpec z{{ObsTerm::pauli_z({0})}};
    // <Z> = 1 state: zero-variance outcome even at huge R
    CHECK(noisy_expectation({0.0}, p1, t1, z, 1000000, rng) == 1.0);
    CHECK_THROWS_AS(noisy_expectation({0.0}, p1, t1, z, 0, rng), ConfigError);

    // projector expectation 0.25 on CZ H(x)H |00>, R = 1e4: within 3 sigma
    PqcTopology t2 = topo_2q(0);
    ParamVector p2;
    p2.phi.assign(t2.phi_size(), 0.0);
    p2.lam.assign(0, 0.0);
    ObservableSpec proj{{ObsTerm::projector({3})}};
    const double est = noisy_expectation({0.0, 0.0}, p2, t2, proj, 10000, rng);
    CHECK(std::abs(est - 0.25) < 0.013);

    // unbiasedness: mean of 1000 estimates at R=100 within 3 sigma / sqrt(1000)
    const double exact = 0.25;
    const double sigma = std::sqrt(exact * (1 - exact) / 100.0);
    double mean = 0.0;
    for (int i = 0; i < 1000; ++i) mean += noisy_expectation({0.0, 0.0}, p2, t2, proj, 100, rng);
    mean /= 1000.0;
    CHECK(std::abs(mean - exact) < 3.0 * sigma / std::sqrt(1000.0));
}
