#ifndef ADAMIXUP_NETS_HPP
#define ADAMIXUP_NETS_HPP

#include <memory>
#include <string>
#include <vector>

#include "adamixup/dataset.hpp"
#include "adamixup/tensor.hpp"

namespace adamixup {

/// Fold-2 policy region: gamma ranges over the interval (alpha, alpha+delta).
/// Produced by a softmax triplet, so alpha > 0, delta > 0, alpha + delta < 1.
struct PolicyRegion {
    double alpha = 0.0;
    double delta = 0.0;

    void validate() const;
};

struct ModelConfig {
    int conv1 = 32;  // first conv block filters (image trunks)
    int conv2 = 64;  // second conv block filters
    int hidden = 128; // dense feature width; also the width of vector trunks
};

/// Shared feature extractor. Images: conv3x3-relu-pool2 twice, then
/// flatten-dense-relu. Vectors: two dense-relu layers. pair_input doubles the
/// input channels/width for networks that consume concatenated example pairs.
class Trunk {
public:
    Trunk(const std::vector<int64_t>& feature_shape, const ModelConfig& cfg, bool pair_input,
          const std::string& name_prefix, uint64_t seed);

    TensorPtr forward(const TensorPtr& batch) const;
    int64_t feature_width() const { return feature_width_; }
    bool image() const { return image_; }
    const std::vector<TensorPtr>& params() const { return params_; }

private:
    bool image_;
    int64_t feature_width_;
    std::vector<TensorPtr> params_; // image: w1,b1,w2,b2,fcw,fcb; vector: w1,b1,w2,b2
};

// Kaiming-uniform fan-in init; the stream is derived from (seed, name) so a
// parameter's draw depends only on its name, not on construction order.
TensorPtr init_param(std::vector<int64_t> shape, int64_t fan_in, const std::string& name,
                     uint64_t seed);

/// Classification model H: trunk plus a softmax head over the classes.
class Classifier {
public:
    Classifier(std::shared_ptr<Trunk> trunk, int num_classes, uint64_t seed);

    TensorPtr forward(const TensorPtr& batch) const; // [B,|Y|], rows sum to 1
    std::vector<SoftLabel> classify(const TensorPtr& batch) const; // value side, no tape

    const std::shared_ptr<Trunk>& trunk() const { return trunk_; }
    std::vector<TensorPtr> head_params() const { return {head_w_, head_b_}; }
    std::vector<TensorPtr> params() const;
    int num_classes() const { return num_classes_; }

private:
    std::shared_ptr<Trunk> trunk_;
    TensorPtr head_w_, head_b_;
    int num_classes_;
};

/// Binary out-of-manifold scorer: shares the classifier's trunk storage and
/// adds a single-logit sigmoid head. Output is p(1|x), 1 = outside.
class IntrusionDiscriminator {
public:
    IntrusionDiscriminator(std::shared_ptr<Trunk> trunk, uint64_t seed);

    TensorPtr forward(const TensorPtr& batch) const; // [B], entries in (0,1)
    std::vector<double> discriminate(const TensorPtr& batch) const;

    const std::shared_ptr<Trunk>& trunk() const { return trunk_; }
    std::vector<TensorPtr> head_params() const { return {head_w_, head_b_}; }

private:
    std::shared_ptr<Trunk> trunk_;
    TensorPtr head_w_, head_b_;
};

/// Policy region generator pi_2: maps an example pair to a softmax triplet
/// (alpha, delta, rest); the third value is discarded. Owns its trunk, which
/// has the classifier architecture widened for pair input.
class PolicyRegionGenerator {
public:
    PolicyRegionGenerator(const std::vector<int64_t>& feature_shape, const ModelConfig& cfg,
                          uint64_t seed);

    // Tape-side: (alpha[B], delta[B]) with gradients into the generator.
    std::pair<TensorPtr, TensorPtr> forward_region(const TensorPtr& x1,
                                                   const TensorPtr& x2) const;
    // Value-side convenience.
    std::vector<PolicyRegion> policy_region(const TensorPtr& x1, const TensorPtr& x2) const;

    std::vector<TensorPtr> params() const;
    const std::shared_ptr<Trunk>& trunk() const { return trunk_; }

private:
    std::shared_ptr<Trunk> trunk_;
    TensorPtr head_w_, head_b_;
};

} // namespace adamixup

#endif
