#include "qpol/mlp.hpp"

#include <cmath>

namespace qpol::train {

MlpPolicyNet::MlpPolicyNet(std::vector<int> widths, Rng& rng) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw ConfigError("network needs input and output widths");
    for (int w : widths_)
        if (w < 1) throw ConfigError("layer widths must be positive");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        layer_offset_.push_back(total);
        total += static_cast<std::size_t>(widths_[l + 1]) * widths_[l] + widths_[l + 1];
    }
    params_.resize(total);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const double bound = std::sqrt(6.0 / (widths_[l] + widths_[l + 1]));
        std::uniform_real_distribution<double> init(-bound, bound);
        std::size_t at = layer_offset_[l];
        for (int i = 0; i < widths_[l + 1] * widths_[l]; ++i) params_[at++] = init(rng);
        // biases start at zero
    }
}

double MlpPolicyNet::weight(int layer, int out, int in) const {
    return params_[layer_offset_[layer] + static_cast<std::size_t>(out) * widths_[layer] + in];
}

double MlpPolicyNet::bias(int layer, int out) const {
    return params_[layer_offset_[layer] +
                   static_cast<std::size_t>(widths_[layer + 1]) * widths_[layer] + out];
}

std::vector<double> MlpPolicyNet::probabilities(const std::vector<double>& input) const {
    if (static_cast<int>(input.size()) != widths_.front())
        throw ConfigError("input width mismatch");
    std::vector<double> act = input;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        std::vector<double> next(widths_[l + 1]);
        for (int o = 0; o < widths_[l + 1]; ++o) {
            double z = bias(static_cast<int>(l), o);
            for (int i = 0; i < widths_[l]; ++i) z += weight(static_cast<int>(l), o, i) * act[i];
            next[o] = z;
        }
        const bool last = l + 2 == widths_.size();
        if (!last)
            for (double& z : next) z = std::max(0.0, z);
        act = std::move(next);
    }
    // softmax with max subtraction
    double m = act[0];
    for (double z : act) m = std::max(m, z);
    double sum = 0.0;
    for (double& z : act) {
        z = std::exp(z - m);
        sum += z;
    }
    for (double& z : act) z /= sum;
    return act;
}

std::pair<std::vector<double>, std::vector<double>> MlpPolicyNet::forward_backward(
    const std::vector<double>& input, int action) const {
    if (static_cast<int>(input.size()) != widths_.front())
        throw ConfigError("input width mismatch");
    if (action < 0 || action >= n_actions()) throw IndexError("action index out of range");

    // forward, keeping activations and pre-activations
    std::vector<std::vector<double>> acts = {input};
    std::vector<std::vector<double>> pre;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        std::vector<double> z(widths_[l + 1]);
        for (int o = 0; o < widths_[l + 1]; ++o) {
            double v = bias(static_cast<int>(l), o);
            for (int i = 0; i < widths_[l]; ++i)
                v += weight(static_cast<int>(l), o, i) * acts.back()[i];
            z[o] = v;
        }
        pre.push_back(z);
        const bool last = l + 2 == widths_.size();
        if (!last)
            for (double& v : z) v = std::max(0.0, v);
        acts.push_back(std::move(z));
    }
    std::vector<double> probs = acts.back();
    double m = probs[0];
    for (double z : probs) m = std::max(m, z);
    double sum = 0.0;
    for (double& z : probs) {
        z = std::exp(z - m);
        sum += z;
    }
    for (double& z : probs) z /= sum;

    // d log pi(a) / d logits = e_a - pi
    std::vector<double> grad(params_.size(), 0.0);
    std::vector<double> delta(probs.size());
    for (std::size_t o = 0; o < probs.size(); ++o)
        delta[o] = (static_cast<int>(o) == action ? 1.0 : 0.0) - probs[o];

    for (int l = static_cast<int>(widths_.size()) - 2; l >= 0; --l) {
        const std::vector<double>& in_act = acts[l];
        std::size_t at = layer_offset_[l];
        for (int o = 0; o < widths_[l + 1]; ++o)
            for (int i = 0; i < widths_[l]; ++i)
                grad[at++] = delta[o] * in_act[i];
        for (int o = 0; o < widths_[l + 1]; ++o) grad[at++] = delta[o];
        if (l > 0) {
            std::vector<double> prev(widths_[l], 0.0);
            for (int i = 0; i < widths_[l]; ++i) {
                double v = 0.0;
                for (int o = 0; o < widths_[l + 1]; ++o) v += weight(l, o, i) * delta[o];
                prev[i] = pre[l - 1][i] > 0.0 ? v : 0.0;  // rectifier gate
            }
            delta = std::move(prev);
        }
    }
    return {std::move(probs), std::move(grad)};
}

}  // namespace qpol::train
