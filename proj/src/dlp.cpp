#include "qpol/dlp.hpp"

#include <algorithm>
#include <cmath>

namespace qpol::dlp {

u64 mod_exp(u64 base, u64 exponent, u64 modulus) {
    if (modulus < 2) throw DomainError("modulus must be >= 2");
    u64 result = 1 % modulus;
    base %= modulus;
    while (exponent > 0) {
        if (exponent & 1) result = static_cast<u64>((__uint128_t)result * base % modulus);
        base = static_cast<u64>((__uint128_t)base * base % modulus);
        exponent >>= 1;
    }
    return result;
}

bool is_prime(u64 p) {
    if (p < 2) return false;
    for (u64 d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

bool is_generator(u64 g, u64 p) {
    if (g < 1 || g >= p) return false;
    u64 x = 1;
    for (u64 i = 1; i < p - 1; ++i) {
        x = static_cast<u64>((__uint128_t)x * g % p);
        if (x == 1) return false;
    }
    return static_cast<u64>((__uint128_t)x * g % p) == 1;
}

DlpInstance::DlpInstance(u64 p_, u64 g_, u64 s_) : p(p_), g(g_), s(s_) {
    if (p > kOracleMaxP) throw OracleRefusedError("p beyond desk-scale brute-force range");
    if (!is_prime(p) || p < 3) throw ConfigError("p must be an odd prime");
    if (s >= p - 1) throw ConfigError("s must lie in Z_{p-1}");
    n_bits = 0;
    while ((1ULL << n_bits) < p - 1) ++n_bits;
    // build the log table and verify g generates the full group
    log_.assign(p, p);  // p marks "unset"
    u64 x = 1;
    for (u64 e = 0; e < p - 1; ++e) {
        if (log_[x] != p) throw ConfigError("g is not a generator of Z_p^*");
        log_[x] = e;
        x = static_cast<u64>((__uint128_t)x * g % p);
    }
    if (x != 1) throw ConfigError("g is not a generator of Z_p^*");
}

u64 DlpInstance::log_of(u64 x) const {
    if (x < 1 || x >= p) throw DomainError("x must lie in Z_p^*");
    return log_[x];
}

u64 discrete_log_bruteforce(u64 x, const DlpInstance& inst) {
    if (inst.p > kOracleMaxP) throw OracleRefusedError("p beyond brute-force range");
    return inst.log_of(x);
}

int label(const DlpInstance& inst, u64 x) {
    const u64 m = inst.p - 1;
    const u64 offset = (inst.log_of(x) + m - inst.s) % m;
    return offset <= (inst.p - 3) / 2 ? 1 : -1;
}

u64 circular_overlap(u64 a, u64 la, u64 b, u64 lb, u64 m) {
    a %= m;
    b %= m;
    // linear overlaps of [a, a+la) with the three unwrapped copies of [b, b+lb)
    u64 total = 0;
    for (int shift = -1; shift <= 1; ++shift) {
        const long long bs = static_cast<long long>(b) + shift * static_cast<long long>(m);
        const long long lo = std::max(static_cast<long long>(a), bs);
        const long long hi = std::min(static_cast<long long>(a + la), bs + static_cast<long long>(lb));
        if (hi > lo) total += static_cast<u64>(hi - lo);
    }
    return total;
}

double delta_gap(const DlpInstance& inst, int k) {
    return static_cast<double>(1ULL << (k + 1)) / static_cast<double>(inst.p - 1);
}

double feature_inner_product(u64 x, u64 s_prime, const DlpInstance& inst, int k) {
    const u64 m = inst.p - 1;
    if (k < 0 || (1ULL << k) > m / 2) throw ConfigError("need 1 <= 2^k <= (p-1)/2");
    const u64 span = 1ULL << k;
    const u64 half = (inst.p - 1) / 2;
    const u64 overlap = circular_overlap(inst.log_of(x), span, s_prime % m, half, m);
    return static_cast<double>(overlap) * static_cast<double>(overlap) /
           (static_cast<double>(span) * static_cast<double>(half));
}

int classify(u64 x, u64 s_prime, const DlpInstance& inst, int k) {
    const double v = feature_inner_product(x, s_prime, inst, k);
    return v / delta_gap(inst, k) >= 0.5 ? 1 : -1;
}

double noisy_inner_product(double true_value, int shots, Rng& rng) {
    if (shots < 1) throw ConfigError("shots must be >= 1");
    if (true_value < 0.0 || true_value > 1.0) throw DomainError("inner product must be in [0,1]");
    std::binomial_distribution<long> bin(shots, true_value);
    return static_cast<double>(bin(rng)) / shots;
}

int noisy_classify(u64 x, u64 s_prime, const DlpInstance& inst, int k, int shots, Rng& rng) {
    const double v = feature_inner_product(x, s_prime, inst, k);
    const double est = noisy_inner_product(v, shots, rng);
    return est / delta_gap(inst, k) >= 0.5 ? 1 : -1;
}

u64 train_classifier(const DlpInstance& inst, const std::vector<u64>& training_set, int k,
                     int shots, Rng& rng) {
    if (training_set.empty()) throw ConfigError("training set must be non-empty");
    std::vector<int> labels;
    labels.reserve(training_set.size());
    for (u64 x : training_set) labels.push_back(label(inst, x));

    u64 best_s = 0;
    int best_loss = -1;  // loss counted in units of |h - f| in {0, 2}
    std::vector<u64> candidates;
    candidates.reserve(training_set.size());
    for (u64 x : training_set) candidates.push_back(inst.log_of(x));
    // fixed candidate order with per-candidate derived rng streams keeps the
    // argmin reproducible under any parallel schedule
    const u64 base_seed = rng();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const u64 sp = candidates[c];
        Rng crng = make_rng(base_seed, c);
        int loss = 0;
        for (std::size_t i = 0; i < training_set.size(); ++i) {
            const int h = shots > 0 ? noisy_classify(training_set[i], sp, inst, k, shots, crng)
                                    : classify(training_set[i], sp, inst, k);
            if (h != labels[i]) loss += 2;
        }
        if (best_loss < 0 || loss < best_loss || (loss == best_loss && sp < best_s)) {
            best_loss = loss;
            best_s = sp;
        }
    }
    return best_s;
}

double exhaustive_accuracy(const DlpInstance& inst, u64 s_prime, int k) {
    u64 correct = 0;
    for (u64 x = 1; x < inst.p; ++x)
        if (classify(x, s_prime, inst, k) == label(inst, x)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(inst.p - 1);
}

double v_rand(double gamma) { return -1.0 / (2.0 - gamma); }

double gap_g(double x, double slip, double gamma) {
    if (x < 0.0 || x > 1.0) throw DomainError("accuracy must be in [0,1]");
    if (slip < 0.0 || slip > 1.0) throw DomainError("slip must be in [0,1]");
    if (gamma < 0.0 || gamma >= 1.0) throw DomainError("gamma must be in [0,1)");
    if (x * gamma * slip >= 1.0) throw DomainError("pole: x*gamma*slip must be < 1");
    return (x - 1.0) / (1.0 - slip * gamma * x) + 1.0 / (2.0 - gamma);
}

BoundReport cliffwalk_bounds(double accuracy, double slip, double gamma) {
    BoundReport r;
    r.accuracy = accuracy;
    r.slip = slip;
    r.gamma = gamma;
    r.gap = gap_g(accuracy, slip, gamma);
    r.upper = (accuracy - 1.0) / (1.0 - accuracy * gamma * slip);
    r.lower = (accuracy - 1.0) / (1.0 - gamma);
    return r;
}

int DlpAgent::classify_pm(u64 x, Rng& rng) const {
    if (votes <= 1) {
        return shots > 0 ? noisy_classify(x, s_prime, *inst, k, shots, rng)
                         : classify(x, s_prime, *inst, k);
    }
    if (votes % 2 == 0) throw ConfigError("vote count must be odd");
    int plus = 0;
    for (int v = 0; v < votes; ++v) {
        const int h = shots > 0 ? noisy_classify(x, s_prime, *inst, k, shots, rng)
                                : classify(x, s_prime, *inst, k);
        if (h > 0) ++plus;
    }
    return plus * 2 > votes ? 1 : -1;
}

int DlpAgent::act(u64 x, Rng& rng) const { return classify_pm(x, rng) > 0 ? 0 : 1; }

}  // namespace qpol::dlp
