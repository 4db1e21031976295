#ifndef ADAMIXUP_MIXING_HPP
#define ADAMIXUP_MIXING_HPP

#include <utility>
#include <vector>

#include "adamixup/dataset.hpp"
#include "adamixup/nets.hpp"
#include "adamixup/rng.hpp"

namespace adamixup {

/// Convex-combination coefficients over k >= 2 source examples.
struct MixPolicy {
    std::vector<double> weights;

    int fold() const { return static_cast<int>(weights.size()); }
    bool degenerate() const;
    void validate() const; // simplex membership within 1e-9
};

/// A mixed training example: convex combination of source features, the same
/// combination of their one-hot labels, and the policy that produced it.
struct MixedExample {
    TensorPtr features;
    SoftLabel soft_label;
    int fold = 2;
    MixPolicy policy;
    std::vector<size_t> sources; // dataset indices, mixing order
};

struct MixupBaselineConfig {
    double beta_param = 1.0; // Beta(a,a) concentration of the drawn policy

    void validate() const;
};

/// gamma = delta * epsilon + alpha for epsilon in (0,1); lands strictly
/// inside (alpha, alpha + delta).
double sample_gamma(const PolicyRegion& region, double epsilon);

/// Batched tape-side version: gradients reach alpha and delta
/// (d gamma/d alpha = 1, d gamma/d delta = epsilon).
TensorPtr sample_gamma_batch(const TensorPtr& alpha, const TensorPtr& delta,
                             const std::vector<double>& epsilon);

/// gamma*x1 + (1-gamma)*x2 elementwise, gamma in (0,1).
TensorPtr mix2(const TensorPtr& x1, const TensorPtr& x2, double gamma);

/// Fold k policy from a fold k-1 policy: [gamma*prev ; 1-gamma].
MixPolicy compose_policy(const MixPolicy& prev, double gamma);

std::vector<std::pair<size_t, size_t>> draw_pairs(size_t dataset_size, size_t count, Rng& rng);

/// One fold-2 mixed example per pair; the policy comes from the generator's
/// region on the pair and a fresh epsilon per example. Pairs may carry equal
/// labels; distinctness is deliberately not enforced.
std::vector<MixedExample> make_fold2_batch(const PolicyRegionGenerator& gen, const Dataset& ds,
                                           const std::vector<std::pair<size_t, size_t>>& pairs,
                                           Rng& rng);

/// Fold-k (k >= 3) mixes: pairs one previously mixed fold k-1 example with a
/// fresh original, composing the policies recursively.
std::vector<MixedExample> make_foldk_batch(const PolicyRegionGenerator& gen, const Dataset& ds,
                                           const std::vector<MixedExample>& pool, int fold,
                                           size_t count, Rng& rng);

/// Standard MixUp baseline: the policy is Beta(a, a), no learned regions.
std::vector<MixedExample> standard_mixup_batch(const MixupBaselineConfig& config,
                                               const Dataset& ds,
                                               const std::vector<std::pair<size_t, size_t>>& pairs,
                                               Rng& rng);

enum class IntrusionVerdict { Clean, Intruding };

/// Exact brute-force intrusion test: the mix intrudes iff some real example
/// with a different argmax label lies within `radius` of it.
IntrusionVerdict intrusion_oracle(const Dataset& ds, const MixedExample& mixed, double radius);

double intrusion_rate(const Dataset& ds, const std::vector<MixedExample>& mixed, double radius);

} // namespace adamixup

#endif
