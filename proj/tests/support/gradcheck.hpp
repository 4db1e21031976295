#ifndef ADAMIXUP_TESTS_GRADCHECK_HPP
#define ADAMIXUP_TESTS_GRADCHECK_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "adamixup/ops.hpp"
#include "adamixup/rng.hpp"
#include "adamixup/tensor.hpp"

namespace adamixup::testing {

// Central finite differences against the tape's analytic gradients. The
// oracle only evaluates the forward pass (under NoGradGuard), so it stays
// independent of the backward implementation it is checking.
struct GradCheckResult {
    bool ok = true;
    double worst_rel_err = 0.0;
    std::string detail;
};

// make_loss rebuilds the scalar loss from the current values of `inputs`.
inline GradCheckResult check_gradients(const std::function<TensorPtr()>& make_loss,
                                       const std::vector<TensorPtr>& inputs,
                                       double tol = 1e-5, double step = 1e-4) {
    GradCheckResult result;
    Graph::tape().clear();
    for (const auto& t : inputs) t->zero_grad();
    auto loss = make_loss();
    backward(loss);

    for (const auto& t : inputs) {
        std::vector<double> analytic = t->grad.empty()
                                           ? std::vector<double>(t->values.size(), 0.0)
                                           : t->grad;
        for (size_t i = 0; i < t->values.size(); ++i) {
            const double saved = t->values[i];
            double plus, minus;
            {
                NoGradGuard guard;
                t->values[i] = saved + step;
                plus = make_loss()->values[0];
                t->values[i] = saved - step;
                minus = make_loss()->values[0];
            }
            t->values[i] = saved;
            const double fd = (plus - minus) / (2.0 * step);
            const double rel = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(fd));
            if (rel > result.worst_rel_err) result.worst_rel_err = rel;
            if (rel > tol) {
                result.ok = false;
                result.detail = "tensor '" + t->name + "' index " + std::to_string(i) +
                                ": analytic " + std::to_string(analytic[i]) + " vs fd " +
                                std::to_string(fd);
            }
        }
        t->zero_grad();
    }
    return result;
}

// Random tensor with entries in [lo, hi], kept away from zero when
// avoid_zero is set (relu/max_pool kinks break finite differences).
inline TensorPtr random_tensor(Rng& rng, std::vector<int64_t> shape, double lo, double hi,
                               bool requires_grad, bool avoid_zero = false) {
    const int64_t n = Tensor::extent_product(shape);
    std::vector<double> vals(static_cast<size_t>(n));
    for (auto& v : vals) {
        do {
            v = rng.uniform_in(lo, hi);
        } while (avoid_zero && std::abs(v) < 5e-3);
    }
    return Tensor::create(std::move(shape), std::move(vals), requires_grad);
}

} // namespace adamixup::testing

#endif
