#pragma once

#include <vector>

#include "qpol/common.hpp"

namespace qpol::train {

/// Fully-connected rectifier network with a softmax head; the comparator
/// policy. Weights are flattened into one parameter group.
class MlpPolicyNet {
  public:
    /// widths = {input, hidden..., n_actions}
    MlpPolicyNet(std::vector<int> widths, Rng& rng);

    int input_dim() const { return widths_.front(); }
    int n_actions() const { return widths_.back(); }
    std::size_t param_count() const { return params_.size(); }

    std::vector<double> probabilities(const std::vector<double>& input) const;
    /// (probabilities, d log pi(a|input) / d params) via backprop.
    std::pair<std::vector<double>, std::vector<double>> forward_backward(
        const std::vector<double>& input, int action) const;

    const std::vector<double>& parameters() const { return params_; }
    std::vector<double>& parameters() { return params_; }
    void zero_parameters() { params_.assign(params_.size(), 0.0); }

  private:
    std::vector<int> widths_;
    std::vector<double> params_;  // per layer: weights row-major, then biases
    std::vector<std::size_t> layer_offset_;

    double weight(int layer, int out, int in) const;
    double bias(int layer, int out) const;
};

}  // namespace qpol::train
