#include "adamixup/mixing.hpp"

#include <algorithm>
#include <cmath>

#include "adamixup/ops.hpp"

namespace adamixup {

bool MixPolicy::degenerate() const {
    for (double w : weights) {
        if (w == 1.0) return true;
    }
    return false;
}

void MixPolicy::validate() const {
    if (weights.size() < 2) throw ContractError("MixPolicy: fold must be >= 2");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ContractError("MixPolicy: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ContractError("MixPolicy: weights sum to " + std::to_string(total));
    }
}

void MixupBaselineConfig::validate() const {
    if (!(beta_param > 0.0)) throw ContractError("mixup: beta_param must be > 0");
}

double sample_gamma(const PolicyRegion& region, double epsilon) {
    region.validate();
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
        throw ContractError("sample_gamma: epsilon must lie in (0,1)");
    }
    return region.delta * epsilon + region.alpha;
}

TensorPtr sample_gamma_batch(const TensorPtr& alpha, const TensorPtr& delta,
                             const std::vector<double>& epsilon) {
    if (alpha->shape != delta->shape || alpha->shape.size() != 1) {
        throw ShapeError("sample_gamma_batch: alpha/delta must be matching vectors");
    }
    if (epsilon.size() != alpha->values.size()) {
        throw ShapeError("sample_gamma_batch: epsilon count mismatch");
    }
    for (double e : epsilon) {
        if (!(e > 0.0) || !(e < 1.0)) {
            throw ContractError("sample_gamma_batch: epsilon must lie in (0,1)");
        }
    }
    auto eps = Tensor::vector(std::vector<double>(epsilon));
    return add(mul(delta, eps), alpha);
}

TensorPtr mix2(const TensorPtr& x1, const TensorPtr& x2, double gamma) {
    if (x1->shape != x2->shape) {
        throw ShapeError("mix2: shapes differ: " + x1->shape_str() + " vs " + x2->shape_str());
    }
    if (!(gamma > 0.0) || !(gamma < 1.0)) {
        throw ContractError("mix2: gamma must lie in (0,1)");
    }
    auto out = Tensor::zeros(x1->shape);
    for (size_t i = 0; i < out->values.size(); ++i) {
        out->values[i] = gamma * x1->values[i] + (1.0 - gamma) * x2->values[i];
    }
    return out;
}

MixPolicy compose_policy(const MixPolicy& prev, double gamma) {
    prev.validate();
    if (!(gamma > 0.0) || !(gamma < 1.0)) {
        throw ContractError("compose_policy: gamma must lie in (0,1)");
    }
    MixPolicy next;
    next.weights.reserve(prev.weights.size() + 1);
    for (double w : prev.weights) next.weights.push_back(gamma * w);
    next.weights.push_back(1.0 - gamma);
    return next;
}

std::vector<std::pair<size_t, size_t>> draw_pairs(size_t dataset_size, size_t count, Rng& rng) {
    if (dataset_size < 2) throw ContractError("draw_pairs: need at least 2 examples");
    std::vector<std::pair<size_t, size_t>> pairs(count);
    for (auto& p : pairs) {
        p.first = rng.uniform_index(dataset_size);
        p.second = rng.uniform_index(dataset_size);
    }
    return pairs;
}

namespace {

SoftLabel mix_soft(const SoftLabel& a, const SoftLabel& b, double gamma) {
    SoftLabel out;
    out.probs.resize(a.probs.size());
    for (size_t i = 0; i < out.probs.size(); ++i) {
        out.probs[i] = gamma * a.probs[i] + (1.0 - gamma) * b.probs[i];
    }
    return out;
}

} // namespace

std::vector<MixedExample> make_fold2_batch(const PolicyRegionGenerator& gen, const Dataset& ds,
                                           const std::vector<std::pair<size_t, size_t>>& pairs,
                                           Rng& rng) {
    if (pairs.empty()) return {};
    std::vector<size_t> left, right;
    left.reserve(pairs.size());
    right.reserve(pairs.size());
    for (const auto& p : pairs) {
        left.push_back(p.first);
        right.push_back(p.second);
    }
    auto x1 = stack_features(ds, left);
    auto x2 = stack_features(ds, right);
    auto regions = gen.policy_region(x1, x2);

    std::vector<MixedExample> out;
    out.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        const double gamma = sample_gamma(regions[i], rng.uniform_open01());
        const auto& a = ds.examples[pairs[i].first];
        const auto& b = ds.examples[pairs[i].second];
        MixedExample ex;
        ex.features = mix2(a.features, b.features, gamma);
        ex.soft_label = mix_soft(one_hot(a.label, ds.num_classes),
                                 one_hot(b.label, ds.num_classes), gamma);
        ex.fold = 2;
        ex.policy.weights = {gamma, 1.0 - gamma};
        ex.sources = {pairs[i].first, pairs[i].second};
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<MixedExample> make_foldk_batch(const PolicyRegionGenerator& gen, const Dataset& ds,
                                           const std::vector<MixedExample>& pool, int fold,
                                           size_t count, Rng& rng) {
    if (fold < 3) throw ContractError("make_foldk_batch: fold must be >= 3");
    if (pool.empty()) throw ContractError("make_foldk_batch: previous-fold pool is empty");
    if (count == 0) return {};

    struct Draw {
        size_t prev_idx;
        size_t new_idx;
        double epsilon;
    };
    std::vector<Draw> draws(count);
    for (auto& d : draws) {
        d.prev_idx = rng.uniform_index(pool.size());
        d.new_idx = rng.uniform_index(ds.size());
        d.epsilon = rng.uniform_open01();
    }

    const size_t per = ds.examples.front().features->values.size();
    std::vector<int64_t> shape{static_cast<int64_t>(count)};
    const auto& fshape = ds.feature_shape();
    shape.insert(shape.end(), fshape.begin(), fshape.end());
    std::vector<double> prev_vals(count * per), new_vals(count * per);
    for (size_t i = 0; i < count; ++i) {
        const auto& prev = pool[draws[i].prev_idx];
        if (prev.fold != fold - 1) {
            throw ContractError("make_foldk_batch: pool entry has fold " +
                                std::to_string(prev.fold) + ", expected " +
                                std::to_string(fold - 1));
        }
        std::copy(prev.features->values.begin(), prev.features->values.end(),
                  prev_vals.begin() + static_cast<ptrdiff_t>(i * per));
        const auto& fresh = ds.examples[draws[i].new_idx].features->values;
        std::copy(fresh.begin(), fresh.end(), new_vals.begin() + static_cast<ptrdiff_t>(i * per));
    }
    auto xprev = Tensor::create(shape, std::move(prev_vals));
    auto xnew = Tensor::create(shape, std::move(new_vals));
    auto regions = gen.policy_region(xprev, xnew);

    std::vector<MixedExample> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        const auto& prev = pool[draws[i].prev_idx];
        const auto& fresh = ds.examples[draws[i].new_idx];
        const double gamma = sample_gamma(regions[i], draws[i].epsilon);
        MixedExample ex;
        ex.features = mix2(prev.features, fresh.features, gamma);
        ex.soft_label = mix_soft(prev.soft_label, one_hot(fresh.label, ds.num_classes), gamma);
        ex.fold = fold;
        ex.policy = compose_policy(prev.policy, gamma);
        ex.sources = prev.sources;
        ex.sources.push_back(draws[i].new_idx);
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<MixedExample> standard_mixup_batch(const MixupBaselineConfig& config,
                                               const Dataset& ds,
                                               const std::vector<std::pair<size_t, size_t>>& pairs,
                                               Rng& rng) {
    config.validate();
    std::vector<MixedExample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        double lambda = rng.beta(config.beta_param, config.beta_param);
        lambda = std::clamp(lambda, 1e-12, 1.0 - 1e-12);
        const auto& a = ds.examples[p.first];
        const auto& b = ds.examples[p.second];
        MixedExample ex;
        ex.features = mix2(a.features, b.features, lambda);
        ex.soft_label = mix_soft(one_hot(a.label, ds.num_classes),
                                 one_hot(b.label, ds.num_classes), lambda);
        ex.fold = 2;
        ex.policy.weights = {lambda, 1.0 - lambda};
        ex.sources = {p.first, p.second};
        out.push_back(std::move(ex));
    }
    return out;
}

IntrusionVerdict intrusion_oracle(const Dataset& ds, const MixedExample& mixed, double radius) {
    if (radius < 0.0) throw ContractError("intrusion_oracle: radius must be >= 0");
    if (mixed.policy.degenerate()) {
        throw ContractError("intrusion_oracle: policy must be non-degenerate");
    }
    const int mixed_class = mixed.soft_label.argmax();
    const double r2 = radius * radius;
    const auto& mv = mixed.features->values;
    for (const auto& ex : ds.examples) {
        if (ex.label == mixed_class) continue;
        double d2 = 0.0;
        const auto& xv = ex.features->values;
        for (size_t i = 0; i < mv.size(); ++i) {
            const double d = mv[i] - xv[i];
            d2 += d * d;
            if (d2 > r2) break;
        }
        if (d2 <= r2) return IntrusionVerdict::Intruding;
    }
    return IntrusionVerdict::Clean;
}

double intrusion_rate(const Dataset& ds, const std::vector<MixedExample>& mixed, double radius) {
    if (mixed.empty()) throw ContractError("intrusion_rate: no mixed examples");
    size_t hits = 0;
    for (const auto& ex : mixed) {
        if (intrusion_oracle(ds, ex, radius) == IntrusionVerdict::Intruding) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(mixed.size());
}

} // namespace adamixup
