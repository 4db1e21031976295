#ifndef ADAMIXUP_SGD_HPP
#define ADAMIXUP_SGD_HPP

#include <unordered_map>
#include <vector>

#include "adamixup/tensor.hpp"

namespace adamixup {

struct SgdConfig {
    double learning_rate = 0.01;
    double momentum = 0.0;     // in [0,1)
    double weight_decay = 0.0; // L2, added to the gradient
    int64_t batch_size = 64;

    void validate() const;
};

/// Minibatch SGD with classic momentum: v <- mu*v + g, w <- w - lr*v.
/// Velocity is keyed by parameter identity, so disjoint parameter subsets can
/// be stepped through one optimizer without interfering.
class SgdOptimizer {
public:
    explicit SgdOptimizer(SgdConfig config);

    // Applies one update to each parameter and clears its gradient.
    // Throws ContractError if any parameter has no populated gradient.
    void step(const std::vector<TensorPtr>& params);

    const SgdConfig& config() const { return config_; }

private:
    SgdConfig config_;
    std::unordered_map<Tensor*, std::vector<double>> velocity_;
};

} // namespace adamixup

#endif
