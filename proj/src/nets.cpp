#include "adamixup/nets.hpp"

#include <cmath>

#include "adamixup/ops.hpp"
#include "adamixup/rng.hpp"

namespace adamixup {

void PolicyRegion::validate() const {
    if (!(alpha > 0.0) || !(delta > 0.0) || !(alpha + delta < 1.0)) {
        throw ContractError("PolicyRegion: need alpha > 0, delta > 0, alpha + delta < 1 (got " +
                            std::to_string(alpha) + ", " + std::to_string(delta) + ")");
    }
}

TensorPtr init_param(std::vector<int64_t> shape, int64_t fan_in, const std::string& name,
                     uint64_t seed) {
    Rng rng = Rng::stream(seed, "init-" + name);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    const int64_t n = Tensor::extent_product(shape);
    std::vector<double> vals(static_cast<size_t>(n));
    for (auto& v : vals) v = rng.uniform_in(-bound, bound);
    auto t = Tensor::create(std::move(shape), std::move(vals), /*requires_grad=*/true);
    t->name = name;
    return t;
}

namespace {

TensorPtr zero_param(std::vector<int64_t> shape, const std::string& name) {
    auto t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
    t->name = name;
    return t;
}

TensorPtr dense(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b) {
    return add(matmul(x, w), b);
}

} // namespace

Trunk::Trunk(const std::vector<int64_t>& feature_shape, const ModelConfig& cfg, bool pair_input,
             const std::string& name_prefix, uint64_t seed) {
    if (cfg.conv1 < 1 || cfg.conv2 < 1 || cfg.hidden < 1) {
        throw ContractError("ModelConfig: widths must be >= 1");
    }
    image_ = feature_shape.size() == 3;
    if (!image_ && feature_shape.size() != 1) {
        throw ShapeError("Trunk: feature shape must be [C,H,W] or [F]");
    }
    if (image_) {
        const int64_t in_ch = feature_shape[0] * (pair_input ? 2 : 1);
        const int64_t h = feature_shape[1], w = feature_shape[2];
        const int64_t h1 = (h - 2) / 2, w1 = (w - 2) / 2;     // conv3 then pool2
        const int64_t h2 = (h1 - 2) / 2, w2 = (w1 - 2) / 2;
        if (h2 < 1 || w2 < 1) {
            throw ShapeError("Trunk: image too small for two conv+pool blocks");
        }
        const int64_t flat = cfg.conv2 * h2 * w2;
        params_.push_back(init_param({cfg.conv1, in_ch, 3, 3}, in_ch * 9,
                                     name_prefix + "conv1_w", seed));
        params_.push_back(zero_param({cfg.conv1}, name_prefix + "conv1_b"));
        params_.push_back(init_param({cfg.conv2, cfg.conv1, 3, 3}, cfg.conv1 * 9,
                                     name_prefix + "conv2_w", seed));
        params_.push_back(zero_param({cfg.conv2}, name_prefix + "conv2_b"));
        params_.push_back(init_param({flat, cfg.hidden}, flat, name_prefix + "fc_w", seed));
        params_.push_back(zero_param({cfg.hidden}, name_prefix + "fc_b"));
    } else {
        const int64_t in = feature_shape[0] * (pair_input ? 2 : 1);
        params_.push_back(init_param({in, cfg.hidden}, in, name_prefix + "fc1_w", seed));
        params_.push_back(zero_param({cfg.hidden}, name_prefix + "fc1_b"));
        params_.push_back(init_param({cfg.hidden, cfg.hidden}, cfg.hidden,
                                     name_prefix + "fc2_w", seed));
        params_.push_back(zero_param({cfg.hidden}, name_prefix + "fc2_b"));
    }
    feature_width_ = cfg.hidden;
}

TensorPtr Trunk::forward(const TensorPtr& batch) const {
    if (image_) {
        auto h1 = max_pool(relu(conv2d(batch, params_[0], params_[1])), 2);
        auto h2 = max_pool(relu(conv2d(h1, params_[2], params_[3])), 2);
        return relu(dense(flatten(h2), params_[4], params_[5]));
    }
    auto h1 = relu(dense(batch, params_[0], params_[1]));
    return relu(dense(h1, params_[2], params_[3]));
}

Classifier::Classifier(std::shared_ptr<Trunk> trunk, int num_classes, uint64_t seed)
    : trunk_(std::move(trunk)), num_classes_(num_classes) {
    if (num_classes < 2) throw ContractError("Classifier: need at least 2 classes");
    head_w_ = init_param({trunk_->feature_width(), num_classes}, trunk_->feature_width(),
                         "cls/head_w", seed);
    head_b_ = zero_param({num_classes}, "cls/head_b");
}

TensorPtr Classifier::forward(const TensorPtr& batch) const {
    return softmax(dense(trunk_->forward(batch), head_w_, head_b_));
}

std::vector<SoftLabel> Classifier::classify(const TensorPtr& batch) const {
    NoGradGuard guard;
    auto probs = forward(batch);
    const int64_t rows = probs->shape[0], cols = probs->shape[1];
    std::vector<SoftLabel> out(static_cast<size_t>(rows));
    for (int64_t r = 0; r < rows; ++r) {
        out[static_cast<size_t>(r)].probs.assign(
            probs->values.begin() + r * cols, probs->values.begin() + (r + 1) * cols);
    }
    return out;
}

std::vector<TensorPtr> Classifier::params() const {
    auto all = trunk_->params();
    all.push_back(head_w_);
    all.push_back(head_b_);
    return all;
}

IntrusionDiscriminator::IntrusionDiscriminator(std::shared_ptr<Trunk> trunk, uint64_t seed)
    : trunk_(std::move(trunk)) {
    head_w_ = init_param({trunk_->feature_width(), 1}, trunk_->feature_width(), "disc/head_w",
                         seed);
    head_b_ = zero_param({1}, "disc/head_b");
}

TensorPtr IntrusionDiscriminator::forward(const TensorPtr& batch) const {
    auto logits = dense(trunk_->forward(batch), head_w_, head_b_); // [B,1]
    return sigmoid(select_column(logits, 0));
}

std::vector<double> IntrusionDiscriminator::discriminate(const TensorPtr& batch) const {
    NoGradGuard guard;
    return forward(batch)->values;
}

PolicyRegionGenerator::PolicyRegionGenerator(const std::vector<int64_t>& feature_shape,
                                             const ModelConfig& cfg, uint64_t seed)
    : trunk_(std::make_shared<Trunk>(feature_shape, cfg, /*pair_input=*/true, "gen/trunk/",
                                     seed)) {
    head_w_ = init_param({trunk_->feature_width(), 3}, trunk_->feature_width(), "gen/head_w",
                         seed);
    head_b_ = zero_param({3}, "gen/head_b");
}

std::pair<TensorPtr, TensorPtr> PolicyRegionGenerator::forward_region(
    const TensorPtr& x1, const TensorPtr& x2) const {
    if (x1->shape != x2->shape) {
        throw ShapeError("policy_region: pair shapes differ: " + x1->shape_str() + " vs " +
                         x2->shape_str());
    }
    // Logits are bounded so the softmax triplet stays strictly positive in
    // floating point; a saturated region cannot round gamma onto {0,1}.
    auto logits = clamp(dense(trunk_->forward(concat(x1, x2)), head_w_, head_b_), -15.0, 15.0);
    auto triplet = softmax(logits); // [B,3]
    return {select_column(triplet, 0), select_column(triplet, 1)};
}

std::vector<PolicyRegion> PolicyRegionGenerator::policy_region(const TensorPtr& x1,
                                                               const TensorPtr& x2) const {
    NoGradGuard guard;
    auto [alpha, delta] = forward_region(x1, x2);
    std::vector<PolicyRegion> out(alpha->values.size());
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = {alpha->values[i], delta->values[i]};
        out[i].validate();
    }
    return out;
}

std::vector<TensorPtr> PolicyRegionGenerator::params() const {
    auto all = trunk_->params();
    all.push_back(head_w_);
    all.push_back(head_b_);
    return all;
}

} // namespace adamixup
