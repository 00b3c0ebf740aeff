#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qpol/common.hpp"

namespace qpol::dlp {

using u64 = std::uint64_t;

/// base^exponent mod modulus by square-and-multiply.
u64 mod_exp(u64 base, u64 exponent, u64 modulus);

bool is_prime(u64 p);
bool is_generator(u64 g, u64 p);

/// (p, g, s): prime modulus, generator of Z_p^*, secret segment offset.
/// Desk scale only; the constructor brute-checks that g generates Z_p^*.
struct DlpInstance {
    u64 p = 0;
    u64 g = 0;
    u64 s = 0;
    int n_bits = 0;  // ceil(log2(p-1))

    DlpInstance(u64 p, u64 g, u64 s);

    /// log table x -> log_g(x), built once (size p-1).
    const std::vector<u64>& log_table() const { return log_; }
    u64 log_of(u64 x) const;

  private:
    std::vector<u64> log_;
};

inline constexpr u64 kOracleMaxP = 1ULL << 24;

/// The unique y < p-1 with g^y = x (mod p). Brute force; refuses large p.
u64 discrete_log_bruteforce(u64 x, const DlpInstance& inst);

/// +1 iff log_g(x) lies in the closed interval [s, s+(p-3)/2] mod (p-1).
int label(const DlpInstance& inst, u64 x);

/// Circular-interval overlap |I| of [a, a+la-1] and [b, b+lb-1] mod m.
u64 circular_overlap(u64 a, u64 la, u64 b, u64 lb, u64 m);

/// |<phi(x)|phi_{s'}>|^2 = |I|^2 / (2^k (p-1)/2), computed in log space.
/// phi(x) spans logs [log x, log x + 2^k - 1]; phi_{s'} spans
/// [s', s' + (p-3)/2].
double feature_inner_product(u64 x, u64 s_prime, const DlpInstance& inst, int k);

/// Delta = 2^{k+1}/(p-1): the inner product value on interior positives and
/// the classifier's decision gap.
double delta_gap(const DlpInstance& inst, int k);

/// +1 iff inner/Delta >= 1/2 (ties to +1).
int classify(u64 x, u64 s_prime, const DlpInstance& inst, int k);

/// Binomial(R, q)/R: unbiased single-shot sampling of a projector
/// expectation q in [0,1].
double noisy_inner_product(double true_value, int shots, Rng& rng);

/// classify() on a shot-noise estimate of the inner product.
int noisy_classify(u64 x, u64 s_prime, const DlpInstance& inst, int k, int shots, Rng& rng);

/// Candidate-argmin training over s' = log_g(x), x in X, using the noisy
/// 0-1 training loss (|X|^2 classifier calls). shots <= 0 runs noiseless.
/// Ties break toward the smallest s'.
u64 train_classifier(const DlpInstance& inst, const std::vector<u64>& training_set, int k,
                     int shots, Rng& rng);

/// Exhaustive accuracy of the noiseless classifier h_{s'} against f_s.
double exhaustive_accuracy(const DlpInstance& inst, u64 s_prime, int k);

struct BoundReport {
    double accuracy = 0.0;
    double slip = 0.0;
    double gamma = 0.0;
    double upper = 0.0;  // (Acc-1)/(1 - Acc*gamma*slip)
    double lower = 0.0;  // (Acc-1)/(1-gamma)
    double gap = 0.0;    // g(x,delta,gamma) = (x-1)/(1-delta*gamma*x) + 1/(2-gamma)
};

double v_rand(double gamma);  // -1/(2-gamma)
double gap_g(double x, double slip, double gamma);
BoundReport cliffwalk_bounds(double accuracy, double slip, double gamma);

/// Action map backed by the interval classifier, optionally boosted by a
/// majority vote over an odd number of noisy evaluations. Labels +1 -> 0,
/// -1 -> 1 to match the DLP environments' action indexing.
struct DlpAgent {
    const DlpInstance* inst = nullptr;
    u64 s_prime = 0;
    int k = 0;
    int shots = 0;  // <= 0: noiseless
    int votes = 1;  // odd; > 1 enables majority-vote boosting

    int classify_pm(u64 x, Rng& rng) const;
    int act(u64 x, Rng& rng) const;
};

}  // namespace qpol::dlp
