#ifndef ADAMIXUP_TRAINER_HPP
#define ADAMIXUP_TRAINER_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "adamixup/dataset.hpp"
#include "adamixup/losses.hpp"
#include "adamixup/mixing.hpp"
#include "adamixup/nets.hpp"
#include "adamixup/sgd.hpp"

namespace adamixup {

enum class TrainMethod { Baseline, Mixup, AdaMixup };

TrainMethod train_method_from_string(const std::string& s);
std::string to_string(TrainMethod m);

struct TrainConfig {
    TrainMethod method = TrainMethod::AdaMixup;
    int k_max = 2;   // highest mixing fold; 2 unless method == AdaMixup
    int epochs = 10;
    SgdConfig sgd;
    double w_mix = 1.0;        // weight of the mixed-example loss
    double w_intr = 1.0;       // weight of the intrusion loss
    double mixed_ratio = 1.0;  // mixed examples per real example, per fold
    double beta_param = 1.0;   // Beta(a,a) parameter (mixup method only)
    uint64_t seed = 1;
    bool use_discriminator = true;        // false: build without a discriminator
    bool train_trunk_in_intrusion = true; // false: freeze the shared trunk in sub-step B
    ModelConfig model;
    double oracle_radius = -1.0; // >= 0 enables the per-epoch intrusion-oracle rate

    void validate() const;
};

struct MetricsRow {
    int epoch = 0;
    double train_error = 0.0; // percent
    double test_error = 0.0;  // percent
    double mean_alpha = 0.0;
    double mean_delta = 0.0;
    double mean_gamma = 0.0;
    double loss_d = 0.0;
    double loss_dp = 0.0;
    double loss_intr = 0.0;
    double oracle_rate = -1.0;              // -1 when not computed
    std::vector<double> fold_alpha;         // per mixing stage 2..k_max
    std::vector<double> fold_delta;
};

/// Owns the networks and optimizer state for one run. Strictly
/// single-threaded; all draws derive from (config.seed, purpose, epoch).
class Trainer {
public:
    Trainer(const TrainConfig& config, const Dataset& train_ds, const Dataset& test_ds);

    MetricsRow run_epoch(int epoch); // 1-based

    double evaluate_error(const Dataset& ds) const; // percent, read-only

    Classifier& classifier() { return *cls_; }
    PolicyRegionGenerator* generator() { return gen_.get(); }
    IntrusionDiscriminator* discriminator() { return disc_.get(); }
    const std::shared_ptr<Trunk>& trunk() const { return trunk_; }
    std::vector<TensorPtr> checkpoint_tensors() const;
    const TrainConfig& config() const { return config_; }

private:
    struct StagePlan;
    struct StageForward;

    void step_baseline(const Batch& batch, struct EpochStats& stats);
    void step_mixup(const Batch& batch, Rng& mix_rng, struct EpochStats& stats);
    void step_adamixup(const Batch& batch, Rng& mix_rng, struct EpochStats& stats);

    StageForward build_stage(const StagePlan& plan) const;
    void clear_all_grads();

    TrainConfig config_;
    const Dataset& train_ds_;
    const Dataset& test_ds_;
    std::shared_ptr<Trunk> trunk_;
    std::unique_ptr<Classifier> cls_;
    std::unique_ptr<IntrusionDiscriminator> disc_;
    std::unique_ptr<PolicyRegionGenerator> gen_;
    SgdOptimizer opt_;
    std::vector<std::vector<MixedExample>> pools_; // per-fold, rebuilt each epoch
    bool keep_records_;
};

/// Argmax error rate of a classifier over a dataset, in percent. Fixed batch
/// order, read-only; the single evaluation path shared by training and eval.
double classifier_error_percent(const Classifier& cls, const Dataset& ds);

/// Median of the last `window` values; even windows average the two central
/// order statistics. Throws ContractError when the table is shorter than the
/// window.
double evaluate_protocol(const std::vector<double>& values, int window = 10);

struct RunArtifacts {
    std::vector<MetricsRow> metrics;
    double protocol_error = 0.0;   // evaluate_protocol over the test-error column
    int protocol_window = 0;
};

/// Full training run; on_epoch fires after each epoch for incremental
/// metrics emission. Aborts with NumericError if the run diverges.
RunArtifacts train(Trainer& trainer,
                   const std::function<void(const MetricsRow&)>& on_epoch = nullptr);

} // namespace adamixup

#endif
