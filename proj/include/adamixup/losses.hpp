#ifndef ADAMIXUP_LOSSES_HPP
#define ADAMIXUP_LOSSES_HPP

#include <vector>

#include "adamixup/dataset.hpp"
#include "adamixup/mixing.hpp"
#include "adamixup/nets.hpp"
#include "adamixup/tensor.hpp"

namespace adamixup {

struct LossReport {
    double classification_loss = 0.0; // on real examples
    double mixup_loss = 0.0;          // on mixed examples vs their soft labels
    double intrusion_loss = 0.0;
    double total = 0.0;

    void validate() const; // all finite and >= 0
};

/// Mean over the batch of -sum_y target_y * log pred_y. Predictions below
/// 1e-12 at a supported target class are clamped and counted as numeric
/// warnings.
double cross_entropy(const std::vector<SoftLabel>& pred, const std::vector<SoftLabel>& target);

/// Tape-side cross entropy over row-stacked distributions [B,C].
TensorPtr cross_entropy_t(const TensorPtr& pred, const TensorPtr& target);

/// Intrusion loss from discriminator outputs: mixed examples should score as
/// outside the manifold (label 1), real ones as inside (label 0). The mixed
/// term averages folds 2..k_max with weight 1/(k_max-1). Non-negative; zero
/// only in the perfect-separation limit.
double intrusion_loss(const std::vector<std::vector<double>>& p1_mixed_per_fold,
                      const std::vector<double>& p1_real);

/// Net-forward convenience: scores real and per-fold mixed feature batches.
double intrusion_loss(const IntrusionDiscriminator& disc, const TensorPtr& real_features,
                      const std::vector<TensorPtr>& mixed_features_per_fold);

/// Tape-side builder on already-computed discriminator outputs.
TensorPtr intrusion_loss_t(const std::vector<TensorPtr>& p1_mixed_per_fold,
                           const TensorPtr& p1_real);

/// Full objective: total = L_D + w_mix * L_D' + w_intr * L_intr.
/// `disc` may be null (no discriminator: intrusion term is zero).
LossReport total_loss(const Classifier& cls, const IntrusionDiscriminator* disc,
                      const Batch& real, const std::vector<std::vector<MixedExample>>& mixed,
                      double w_mix, double w_intr);

/// Stacks one-hot targets for a label batch as a [B,C] tensor.
TensorPtr one_hot_rows(const std::vector<int>& labels, int num_classes);

/// Stacks mixed-example features/soft labels for scoring.
TensorPtr stack_mixed_features(const std::vector<MixedExample>& mixed);
TensorPtr stack_mixed_soft_labels(const std::vector<MixedExample>& mixed, int num_classes);

} // namespace adamixup

#endif
