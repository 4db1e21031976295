#include "adamixup/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "adamixup/ops.hpp"

namespace adamixup {

TrainMethod train_method_from_string(const std::string& s) {
    if (s == "baseline") return TrainMethod::Baseline;
    if (s == "mixup") return TrainMethod::Mixup;
    if (s == "adamixup") return TrainMethod::AdaMixup;
    throw ContractError("unknown method '" + s + "' (expected baseline | mixup | adamixup)");
}

std::string to_string(TrainMethod m) {
    switch (m) {
        case TrainMethod::Baseline: return "baseline";
        case TrainMethod::Mixup: return "mixup";
        case TrainMethod::AdaMixup: return "adamixup";
    }
    return "?";
}

void TrainConfig::validate() const {
    sgd.validate();
    if (epochs < 1) throw ContractError("train: epochs must be >= 1");
    if (k_max < 2) throw ContractError("train: k_max must be >= 2");
    if (method != TrainMethod::AdaMixup && k_max != 2) {
        throw ContractError("train: folds above 2 require method=adamixup");
    }
    if (w_mix < 0.0 || w_intr < 0.0) throw ContractError("train: loss weights must be >= 0");
    if (!(mixed_ratio > 0.0)) throw ContractError("train: mixed_ratio must be > 0");
    if (method == TrainMethod::Mixup && !(beta_param > 0.0)) {
        throw ContractError("train: beta_param must be > 0");
    }
}

namespace {

uint64_t derive_seed(uint64_t seed, const std::string& tag, uint64_t salt) {
    return Rng::splitmix(seed ^ Rng::fnv1a(tag) ^ (salt * 0x9e3779b97f4a7c15ull));
}

struct StageStats {
    double alpha_sum = 0.0, delta_sum = 0.0, gamma_sum = 0.0;
    size_t count = 0;
};

} // namespace

struct EpochStats {
    size_t train_correct = 0;
    size_t train_total = 0;
    double loss_d_sum = 0.0, loss_dp_sum = 0.0, loss_intr_sum = 0.0;
    size_t batches = 0;
    std::vector<StageStats> stages;                 // index 0 = fold 2
    std::vector<MixedExample> oracle_mixes;         // this epoch's records
};

struct Trainer::StagePlan {
    int fold = 2;
    TensorPtr left_features;  // constants on the tape
    TensorPtr right_features;
    TensorPtr left_soft;      // [M,C]
    TensorPtr right_soft;
    std::vector<double> eps;
    std::vector<const MixedExample*> left_pool_entries; // fold >= 3
    std::vector<size_t> left_indices;                   // fold == 2
    std::vector<size_t> right_indices;
};

struct Trainer::StageForward {
    TensorPtr features;
    TensorPtr soft;
    TensorPtr alpha, delta, gamma;
};

Trainer::Trainer(const TrainConfig& config, const Dataset& train_ds, const Dataset& test_ds)
    : config_(config),
      train_ds_(train_ds),
      test_ds_(test_ds),
      opt_(config.sgd) {
    config_.validate();
    train_ds_.validate();
    test_ds_.validate();
    if (train_ds_.feature_shape() != test_ds_.feature_shape()) {
        throw ContractError("train: train/test feature shapes differ");
    }
    if (train_ds_.num_classes != test_ds_.num_classes) {
        throw ContractError("train: train/test class counts differ");
    }
    trunk_ = std::make_shared<Trunk>(train_ds_.feature_shape(), config_.model, false, "trunk/",
                                     config_.seed);
    cls_ = std::make_unique<Classifier>(trunk_, train_ds_.num_classes, config_.seed);
    if (config_.method == TrainMethod::AdaMixup) {
        gen_ = std::make_unique<PolicyRegionGenerator>(train_ds_.feature_shape(), config_.model,
                                                       config_.seed);
        if (config_.use_discriminator) {
            disc_ = std::make_unique<IntrusionDiscriminator>(trunk_, config_.seed);
        }
    }
    pools_.assign(static_cast<size_t>(config_.k_max) + 1, {});
    keep_records_ = config_.k_max >= 3 || config_.oracle_radius >= 0.0;
}

void Trainer::clear_all_grads() {
    for (const auto& p : checkpoint_tensors()) p->zero_grad();
    Graph::tape().clear();
}

std::vector<TensorPtr> Trainer::checkpoint_tensors() const {
    std::vector<TensorPtr> all = cls_->params();
    if (disc_) {
        for (const auto& p : disc_->head_params()) all.push_back(p);
    }
    if (gen_) {
        for (const auto& p : gen_->params()) all.push_back(p);
    }
    return all;
}

double classifier_error_percent(const Classifier& cls, const Dataset& ds) {
    NoGradGuard guard;
    size_t wrong = 0;
    BatchStream stream(ds, 256, 0, /*shuffle=*/false);
    while (auto batch = stream.next()) {
        auto rows = cls.classify(batch->features);
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].argmax() != batch->labels[i]) ++wrong;
        }
    }
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(ds.size());
}

double Trainer::evaluate_error(const Dataset& ds) const {
    return classifier_error_percent(*cls_, ds);
}

namespace {

size_t count_correct(const TensorPtr& probs, const std::vector<int>& labels) {
    const int64_t rows = probs->shape[0], cols = probs->shape[1];
    size_t correct = 0;
    for (int64_t r = 0; r < rows; ++r) {
        const double* p = probs->values.data() + r * cols;
        int best = 0;
        for (int64_t c = 1; c < cols; ++c) {
            if (p[c] > p[best]) best = static_cast<int>(c);
        }
        if (best == labels[static_cast<size_t>(r)]) ++correct;
    }
    return correct;
}

} // namespace

void Trainer::step_baseline(const Batch& batch, EpochStats& stats) {
    auto probs = cls_->forward(batch.features);
    stats.train_correct += count_correct(probs, batch.labels);
    stats.train_total += batch.labels.size();
    auto loss = cross_entropy_t(probs, one_hot_rows(batch.labels, train_ds_.num_classes));
    stats.loss_d_sum += loss->values[0];
    backward(loss);
    opt_.step(cls_->params());
    clear_all_grads();
}

void Trainer::step_mixup(const Batch& batch, Rng& mix_rng, EpochStats& stats) {
    const size_t mixed_count = std::max<size_t>(
        1, static_cast<size_t>(std::llround(config_.mixed_ratio *
                                            static_cast<double>(batch.size()))));
    auto pairs = draw_pairs(train_ds_.size(), mixed_count, mix_rng);
    auto mixed = standard_mixup_batch({config_.beta_param}, train_ds_, pairs, mix_rng);

    auto probs = cls_->forward(batch.features);
    stats.train_correct += count_correct(probs, batch.labels);
    stats.train_total += batch.labels.size();
    auto loss_d = cross_entropy_t(probs, one_hot_rows(batch.labels, train_ds_.num_classes));

    auto mixed_probs = cls_->forward(stack_mixed_features(mixed));
    auto loss_dp = cross_entropy_t(mixed_probs,
                                   stack_mixed_soft_labels(mixed, train_ds_.num_classes));
    stats.loss_d_sum += loss_d->values[0];
    stats.loss_dp_sum += loss_dp->values[0];

    backward(add(loss_d, scale(loss_dp, config_.w_mix)));
    opt_.step(cls_->params());
    clear_all_grads();

    if (stats.stages.empty()) stats.stages.resize(1);
    for (const auto& m : mixed) {
        stats.stages[0].gamma_sum += m.policy.weights[0];
        ++stats.stages[0].count;
    }
    if (keep_records_) {
        stats.oracle_mixes.insert(stats.oracle_mixes.end(), mixed.begin(), mixed.end());
    }
}

Trainer::StageForward Trainer::build_stage(const StagePlan& plan) const {
    StageForward fwd;
    auto [alpha, delta] = gen_->forward_region(plan.left_features, plan.right_features);
    fwd.alpha = alpha;
    fwd.delta = delta;
    fwd.gamma = sample_gamma_batch(alpha, delta, plan.eps);
    auto ones = Tensor::create({fwd.gamma->shape[0]},
                               std::vector<double>(fwd.gamma->values.size(), 1.0));
    auto one_minus = add(scale(fwd.gamma, -1.0), ones);
    fwd.features = add(rowwise_scale(plan.left_features, fwd.gamma),
                       rowwise_scale(plan.right_features, one_minus));
    {
        // Soft labels are training targets: same values, but constants on the
        // tape. The generator learns through the mixed features only.
        NoGradGuard guard;
        fwd.soft = add(rowwise_scale(plan.left_soft, fwd.gamma),
                       rowwise_scale(plan.right_soft, one_minus));
    }
    return fwd;
}

void Trainer::step_adamixup(const Batch& batch, Rng& mix_rng, EpochStats& stats) {
    const int num_classes = train_ds_.num_classes;
    const size_t mixed_count = std::max<size_t>(
        1, static_cast<size_t>(std::llround(config_.mixed_ratio *
                                            static_cast<double>(batch.size()))));
    if (stats.stages.empty()) stats.stages.resize(static_cast<size_t>(config_.k_max) - 1);

    // Extra discriminator negatives (the x3 of each triplet). Drawn for every
    // configuration so the draw stream does not depend on w_intr or on the
    // discriminator being present.
    std::vector<size_t> x3;
    x3.reserve(mixed_count);
    for (size_t i = 0; i < mixed_count; ++i) x3.push_back(mix_rng.uniform_index(train_ds_.size()));

    // ---- sub-step (A): minimize L_D + w_mix * L_D' over classifier + generator
    auto real_probs = cls_->forward(batch.features);
    stats.train_correct += count_correct(real_probs, batch.labels);
    stats.train_total += batch.labels.size();
    auto loss_d = cross_entropy_t(real_probs, one_hot_rows(batch.labels, num_classes));

    std::vector<StagePlan> plans;
    TensorPtr mixed_ce_sum; // sum over all mixed examples of -t.log(p)
    size_t mixed_total = 0;
    for (int fold = 2; fold <= config_.k_max; ++fold) {
        StagePlan plan;
        plan.fold = fold;
        plan.eps.reserve(mixed_count);
        if (fold == 2) {
            auto pairs = draw_pairs(train_ds_.size(), mixed_count, mix_rng);
            std::vector<size_t> left, right;
            for (const auto& p : pairs) {
                left.push_back(p.first);
                right.push_back(p.second);
            }
            plan.left_indices = left;
            plan.right_indices = right;
            plan.left_features = stack_features(train_ds_, left);
            plan.right_features = stack_features(train_ds_, right);
            std::vector<int> llab, rlab;
            for (size_t i : left) llab.push_back(train_ds_.examples[i].label);
            for (size_t i : right) rlab.push_back(train_ds_.examples[i].label);
            plan.left_soft = one_hot_rows(llab, num_classes);
            plan.right_soft = one_hot_rows(rlab, num_classes);
        } else {
            const auto& pool = pools_[static_cast<size_t>(fold) - 1];
            if (pool.empty()) {
                throw ContractError("adamixup: fold " + std::to_string(fold) +
                                    " pool unexpectedly empty");
            }
            std::vector<const MixedExample*> prev;
            std::vector<size_t> fresh;
            for (size_t i = 0; i < mixed_count; ++i) {
                prev.push_back(&pool[mix_rng.uniform_index(pool.size())]);
                fresh.push_back(mix_rng.uniform_index(train_ds_.size()));
            }
            plan.left_pool_entries = prev;
            plan.right_indices = fresh;
            std::vector<MixedExample> prev_vals;
            prev_vals.reserve(prev.size());
            for (const auto* p : prev) prev_vals.push_back(*p);
            plan.left_features = stack_mixed_features(prev_vals);
            plan.left_soft = stack_mixed_soft_labels(prev_vals, num_classes);
            plan.right_features = stack_features(train_ds_, fresh);
            std::vector<int> rlab;
            for (size_t i : fresh) rlab.push_back(train_ds_.examples[i].label);
            plan.right_soft = one_hot_rows(rlab, num_classes);
        }
        for (size_t i = 0; i < mixed_count; ++i) plan.eps.push_back(mix_rng.uniform_open01());

        auto fwd = build_stage(plan);
        auto mixed_probs = cls_->forward(fwd.features);
        auto ce_sum = scale(sum(mul(fwd.soft, adamixup::log(mixed_probs))), -1.0);
        mixed_ce_sum = mixed_ce_sum ? add(mixed_ce_sum, ce_sum) : ce_sum;
        mixed_total += mixed_count;

        // record this stage's mixes (values from the pre-update forward)
        auto& st = stats.stages[static_cast<size_t>(fold) - 2];
        const size_t per = train_ds_.examples.front().features->values.size();
        for (size_t i = 0; i < mixed_count; ++i) {
            st.alpha_sum += fwd.alpha->values[i];
            st.delta_sum += fwd.delta->values[i];
            st.gamma_sum += fwd.gamma->values[i];
            ++st.count;
        }
        if (keep_records_) {
            for (size_t i = 0; i < mixed_count; ++i) {
                const double gamma = fwd.gamma->values[i];
                MixedExample ex;
                ex.features = Tensor::create(
                    train_ds_.feature_shape(),
                    std::vector<double>(fwd.features->values.begin() +
                                            static_cast<ptrdiff_t>(i * per),
                                        fwd.features->values.begin() +
                                            static_cast<ptrdiff_t>((i + 1) * per)));
                ex.soft_label.probs.assign(
                    fwd.soft->values.begin() + static_cast<ptrdiff_t>(i) * num_classes,
                    fwd.soft->values.begin() + static_cast<ptrdiff_t>(i + 1) * num_classes);
                ex.fold = fold;
                if (fold == 2) {
                    ex.policy.weights = {gamma, 1.0 - gamma};
                    ex.sources = {plan.left_indices[i], plan.right_indices[i]};
                } else {
                    ex.policy = compose_policy(plan.left_pool_entries[i]->policy, gamma);
                    ex.sources = plan.left_pool_entries[i]->sources;
                    ex.sources.push_back(plan.right_indices[i]);
                }
                if (fold < config_.k_max) {
                    pools_[static_cast<size_t>(fold)].push_back(ex);
                }
                if (config_.oracle_radius >= 0.0) stats.oracle_mixes.push_back(std::move(ex));
            }
        }
        plans.push_back(std::move(plan));
    }

    auto loss_dp = scale(mixed_ce_sum, 1.0 / static_cast<double>(mixed_total));
    stats.loss_d_sum += loss_d->values[0];
    stats.loss_dp_sum += loss_dp->values[0];
    backward(add(loss_d, scale(loss_dp, config_.w_mix)));
    {
        auto params = cls_->params();
        for (const auto& p : gen_->params()) params.push_back(p);
        opt_.step(params);
    }
    clear_all_grads();

    // ---- sub-step (B): minimize w_intr * L_intr over discriminator head,
    // shared trunk (unless frozen) and generator; same pairs and epsilons.
    if (disc_ && config_.w_intr > 0.0) {
        std::vector<TensorPtr> p1_mixed;
        p1_mixed.reserve(plans.size());
        for (const auto& plan : plans) {
            auto fwd = build_stage(plan);
            p1_mixed.push_back(disc_->forward(fwd.features));
        }
        std::vector<size_t> neg = batch.indices;
        neg.insert(neg.end(), x3.begin(), x3.end());
        auto p1_real = disc_->forward(stack_features(train_ds_, neg));
        auto loss_intr = intrusion_loss_t(p1_mixed, p1_real);
        stats.loss_intr_sum += loss_intr->values[0];
        backward(scale(loss_intr, config_.w_intr));

        std::vector<TensorPtr> params = disc_->head_params();
        for (const auto& p : gen_->params()) params.push_back(p);
        if (config_.train_trunk_in_intrusion) {
            for (const auto& p : trunk_->params()) params.push_back(p);
        }
        opt_.step(params);
        clear_all_grads();
    }
}

MetricsRow Trainer::run_epoch(int epoch) {
    for (auto& pool : pools_) pool.clear(); // rebuilt every epoch
    EpochStats stats;
    Rng mix_rng(derive_seed(config_.seed, "mix", static_cast<uint64_t>(epoch)));
    BatchStream stream(train_ds_, config_.sgd.batch_size,
                       derive_seed(config_.seed, "shuffle", static_cast<uint64_t>(epoch)),
                       /*shuffle=*/true);
    size_t batch_index = 0;
    while (auto batch = stream.next()) {
        try {
            switch (config_.method) {
                case TrainMethod::Baseline: step_baseline(*batch, stats); break;
                case TrainMethod::Mixup: step_mixup(*batch, mix_rng, stats); break;
                case TrainMethod::AdaMixup: step_adamixup(*batch, mix_rng, stats); break;
            }
        } catch (const NumericError& e) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                               ", batch " + std::to_string(batch_index) + ": " + e.what());
        }
        ++stats.batches;
        ++batch_index;
    }

    MetricsRow row;
    row.epoch = epoch;
    row.train_error = stats.train_total
                          ? 100.0 * (1.0 - static_cast<double>(stats.train_correct) /
                                               static_cast<double>(stats.train_total))
                          : 0.0;
    row.test_error = evaluate_error(test_ds_);
    const double nb = static_cast<double>(std::max<size_t>(1, stats.batches));
    row.loss_d = stats.loss_d_sum / nb;
    row.loss_dp = stats.loss_dp_sum / nb;
    row.loss_intr = stats.loss_intr_sum / nb;

    double alpha_acc = 0.0, delta_acc = 0.0, gamma_acc = 0.0;
    size_t stages_counted = 0;
    for (const auto& st : stats.stages) {
        if (st.count == 0) continue;
        const double n = static_cast<double>(st.count);
        row.fold_alpha.push_back(st.alpha_sum / n);
        row.fold_delta.push_back(st.delta_sum / n);
        alpha_acc += st.alpha_sum / n;
        delta_acc += st.delta_sum / n;
        gamma_acc += st.gamma_sum / n;
        ++stages_counted;
    }
    if (stages_counted > 0) {
        const double ns = static_cast<double>(stages_counted);
        row.mean_alpha = config_.method == TrainMethod::AdaMixup ? alpha_acc / ns : 0.0;
        row.mean_delta = config_.method == TrainMethod::AdaMixup ? delta_acc / ns : 0.0;
        row.mean_gamma = gamma_acc / ns;
    }
    if (config_.method != TrainMethod::AdaMixup) {
        row.fold_alpha.clear();
        row.fold_delta.clear();
    }
    if (config_.oracle_radius >= 0.0 && !stats.oracle_mixes.empty()) {
        row.oracle_rate = intrusion_rate(train_ds_, stats.oracle_mixes, config_.oracle_radius);
    }
    return row;
}

double evaluate_protocol(const std::vector<double>& values, int window) {
    if (window < 1) throw ContractError("evaluate_protocol: window must be >= 1");
    if (static_cast<int>(values.size()) < window) {
        throw ContractError("evaluate_protocol: table has " + std::to_string(values.size()) +
                            " rows, need >= " + std::to_string(window));
    }
    std::vector<double> tail(values.end() - window, values.end());
    std::sort(tail.begin(), tail.end());
    const size_t n = tail.size();
    if (n % 2 == 1) return tail[n / 2];
    return 0.5 * (tail[n / 2 - 1] + tail[n / 2]);
}

RunArtifacts train(Trainer& trainer, const std::function<void(const MetricsRow&)>& on_epoch) {
    RunArtifacts artifacts;
    const int epochs = trainer.config().epochs;
    for (int e = 1; e <= epochs; ++e) {
        auto row = trainer.run_epoch(e);
        if (on_epoch) on_epoch(row);
        artifacts.metrics.push_back(std::move(row));
    }
    std::vector<double> errors;
    errors.reserve(artifacts.metrics.size());
    for (const auto& row : artifacts.metrics) errors.push_back(row.test_error);
    artifacts.protocol_window = std::min<int>(10, epochs);
    artifacts.protocol_error = evaluate_protocol(errors, artifacts.protocol_window);
    return artifacts;
}

} // namespace adamixup
