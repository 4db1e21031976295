#include "adamixup/sgd.hpp"

#include <cmath>

namespace adamixup {

void SgdConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ContractError("sgd: learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ContractError("sgd: momentum must be in [0,1)");
    if (weight_decay < 0.0) throw ContractError("sgd: weight_decay must be >= 0");
    if (batch_size < 1) throw ContractError("sgd: batch_size must be >= 1");
}

SgdOptimizer::SgdOptimizer(SgdConfig config) : config_(config) { config_.validate(); }

void SgdOptimizer::step(const std::vector<TensorPtr>& params) {
    for (const auto& p : params) {
        if (p->grad.empty()) {
            throw ContractError("sgd_step: parameter '" + p->name + "' has no gradient");
        }
    }
    for (const auto& p : params) {
        auto& v = velocity_[p.get()];
        if (v.size() != p->values.size()) v.assign(p->values.size(), 0.0);
        for (size_t i = 0; i < p->values.size(); ++i) {
            double g = p->grad[i] + config_.weight_decay * p->values[i];
            v[i] = config_.momentum * v[i] + g;
            p->values[i] -= config_.learning_rate * v[i];
            if (!std::isfinite(p->values[i])) {
                throw NumericError("sgd_step: parameter '" + p->name + "' became non-finite");
            }
        }
        p->zero_grad();
    }
}

} // namespace adamixup
