#include "adamixup/losses.hpp"

#include <cmath>

#include "adamixup/ops.hpp"

namespace adamixup {

namespace {
constexpr double kClamp = 1e-12;

thread_local uint64_t g_ce_warnings = 0;
} // namespace

void LossReport::validate() const {
    for (double v : {classification_loss, mixup_loss, intrusion_loss, total}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw NumericError("LossReport: component not finite and non-negative");
        }
    }
}

double cross_entropy(const std::vector<SoftLabel>& pred, const std::vector<SoftLabel>& target) {
    if (pred.empty() || pred.size() != target.size()) {
        throw ContractError("cross_entropy: batch sizes differ or empty");
    }
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].probs.size() != target[i].probs.size()) {
            throw ShapeError("cross_entropy: class counts differ");
        }
        for (size_t c = 0; c < pred[i].probs.size(); ++c) {
            const double t = target[i].probs[c];
            if (t == 0.0) continue;
            double p = pred[i].probs[c];
            if (p < kClamp) {
                p = kClamp;
                ++g_ce_warnings; // zero prediction at a supported class
            }
            acc -= t * std::log(p);
        }
    }
    return acc / static_cast<double>(pred.size());
}

TensorPtr cross_entropy_t(const TensorPtr& pred, const TensorPtr& target) {
    if (pred->shape != target->shape || pred->shape.size() != 2) {
        throw ShapeError("cross_entropy_t: need matching [B,C] tensors");
    }
    const double batch = static_cast<double>(pred->shape[0]);
    return scale(sum(mul(target, adamixup::log(pred))), -1.0 / batch);
}

double intrusion_loss(const std::vector<std::vector<double>>& p1_mixed_per_fold,
                      const std::vector<double>& p1_real) {
    if (p1_mixed_per_fold.empty() || p1_real.empty()) {
        throw ContractError("intrusion_loss: empty batches");
    }
    double mixed_term = 0.0;
    for (const auto& fold : p1_mixed_per_fold) {
        if (fold.empty()) throw ContractError("intrusion_loss: empty mixed fold");
        double m = 0.0;
        for (double p : fold) m += std::log(std::max(p, kClamp));
        mixed_term += m / static_cast<double>(fold.size());
    }
    mixed_term /= static_cast<double>(p1_mixed_per_fold.size());
    double real_term = 0.0;
    for (double p : p1_real) real_term += std::log(std::max(1.0 - p, kClamp));
    real_term /= static_cast<double>(p1_real.size());
    return -(mixed_term + real_term);
}

double intrusion_loss(const IntrusionDiscriminator& disc, const TensorPtr& real_features,
                      const std::vector<TensorPtr>& mixed_features_per_fold) {
    std::vector<std::vector<double>> p1_mixed;
    p1_mixed.reserve(mixed_features_per_fold.size());
    for (const auto& mixed : mixed_features_per_fold) {
        p1_mixed.push_back(disc.discriminate(mixed));
    }
    return intrusion_loss(p1_mixed, disc.discriminate(real_features));
}

TensorPtr intrusion_loss_t(const std::vector<TensorPtr>& p1_mixed_per_fold,
                           const TensorPtr& p1_real) {
    if (p1_mixed_per_fold.empty()) throw ContractError("intrusion_loss_t: no mixed folds");
    TensorPtr mixed_term;
    for (const auto& p1 : p1_mixed_per_fold) {
        auto term = mean(adamixup::log(p1));
        mixed_term = mixed_term ? add(mixed_term, term) : term;
    }
    mixed_term = scale(mixed_term, 1.0 / static_cast<double>(p1_mixed_per_fold.size()));
    auto ones = Tensor::create({p1_real->shape[0]},
                               std::vector<double>(p1_real->values.size(), 1.0));
    auto real_term = mean(adamixup::log(add(scale(p1_real, -1.0), ones)));
    return scale(add(mixed_term, real_term), -1.0);
}

LossReport total_loss(const Classifier& cls, const IntrusionDiscriminator* disc,
                      const Batch& real, const std::vector<std::vector<MixedExample>>& mixed,
                      double w_mix, double w_intr) {
    LossReport report;
    NoGradGuard guard;

    std::vector<SoftLabel> targets;
    targets.reserve(real.labels.size());
    for (int y : real.labels) targets.push_back(one_hot(y, cls.num_classes()));
    report.classification_loss = cross_entropy(cls.classify(real.features), targets);

    size_t mixed_total = 0;
    double mixed_acc = 0.0;
    std::vector<TensorPtr> mixed_feats;
    for (const auto& fold : mixed) {
        if (fold.empty()) continue;
        auto feats = stack_mixed_features(fold);
        mixed_feats.push_back(feats);
        std::vector<SoftLabel> soft;
        soft.reserve(fold.size());
        for (const auto& m : fold) soft.push_back(m.soft_label);
        mixed_acc += cross_entropy(cls.classify(feats), soft) * static_cast<double>(fold.size());
        mixed_total += fold.size();
    }
    report.mixup_loss = mixed_total ? mixed_acc / static_cast<double>(mixed_total) : 0.0;

    if (disc != nullptr && !mixed_feats.empty()) {
        report.intrusion_loss = intrusion_loss(*disc, real.features, mixed_feats);
    }
    report.total = report.classification_loss + w_mix * report.mixup_loss +
                   w_intr * report.intrusion_loss;
    report.validate();
    return report;
}

TensorPtr one_hot_rows(const std::vector<int>& labels, int num_classes) {
    std::vector<double> vals(labels.size() * static_cast<size_t>(num_classes), 0.0);
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) {
            throw ContractError("one_hot_rows: label out of range");
        }
        vals[i * static_cast<size_t>(num_classes) + static_cast<size_t>(labels[i])] = 1.0;
    }
    return Tensor::create({static_cast<int64_t>(labels.size()), num_classes}, std::move(vals));
}

TensorPtr stack_mixed_features(const std::vector<MixedExample>& mixed) {
    if (mixed.empty()) throw ContractError("stack_mixed_features: empty batch");
    const auto& shape = mixed.front().features->shape;
    const size_t per = mixed.front().features->values.size();
    std::vector<int64_t> out_shape{static_cast<int64_t>(mixed.size())};
    out_shape.insert(out_shape.end(), shape.begin(), shape.end());
    std::vector<double> vals(mixed.size() * per);
    for (size_t i = 0; i < mixed.size(); ++i) {
        std::copy(mixed[i].features->values.begin(), mixed[i].features->values.end(),
                  vals.begin() + static_cast<ptrdiff_t>(i * per));
    }
    return Tensor::create(std::move(out_shape), std::move(vals));
}

TensorPtr stack_mixed_soft_labels(const std::vector<MixedExample>& mixed, int num_classes) {
    if (mixed.empty()) throw ContractError("stack_mixed_soft_labels: empty batch");
    std::vector<double> vals(mixed.size() * static_cast<size_t>(num_classes));
    for (size_t i = 0; i < mixed.size(); ++i) {
        if (mixed[i].soft_label.probs.size() != static_cast<size_t>(num_classes)) {
            throw ShapeError("stack_mixed_soft_labels: class count mismatch");
        }
        std::copy(mixed[i].soft_label.probs.begin(), mixed[i].soft_label.probs.end(),
                  vals.begin() + static_cast<ptrdiff_t>(i * static_cast<size_t>(num_classes)));
    }
    return Tensor::create({static_cast<int64_t>(mixed.size()), num_classes}, std::move(vals));
}

} // namespace adamixup
