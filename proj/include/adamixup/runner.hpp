#ifndef ADAMIXUP_RUNNER_HPP
#define ADAMIXUP_RUNNER_HPP

#include <filesystem>
#include <string>

#include "adamixup/run_config.hpp"
#include "adamixup/trainer.hpp"

namespace adamixup {

/// A trained model restored from a checkpoint, with enough architecture
/// metadata to rebuild the networks.
struct RestoredModel {
    TrainConfig train;                  // method/model fields from the checkpoint
    std::vector<int64_t> feature_shape;
    int num_classes = 0;
    std::shared_ptr<Trunk> trunk;
    std::unique_ptr<Classifier> classifier;
    std::unique_ptr<IntrusionDiscriminator> discriminator;
    std::unique_ptr<PolicyRegionGenerator> generator;
};

struct TrainRunResult {
    RunArtifacts artifacts;
    std::filesystem::path run_dir;
};

// Throwing front-ends, used directly by tests and the acceptance suite.
TrainRunResult run_train(const RunConfig& config);
double run_eval(const std::string& checkpoint_path, const std::string& data_spec);
void run_export_mixed(const std::string& checkpoint_path, const std::string& data_spec,
                      int count, const std::string& out_dir, uint64_t seed = 1);
std::filesystem::path run_sweep(const std::string& config_path, const std::string& grid_spec);

void save_model_checkpoint(const std::string& path, const Trainer& trainer,
                           const Dataset& train_ds);
RestoredModel load_model_checkpoint(const std::string& path);

std::filesystem::path resolve_output_dir(const RunConfig& config,
                                         const std::string& config_path);

// CLI entry points. Exit codes: 0 success, 1 config/usage error,
// 2 runtime or numeric failure.
int cmd_train(const std::string& config_path);
int cmd_eval(const std::string& checkpoint_path, const std::string& data_spec);
int cmd_export_mixed(const std::string& checkpoint_path, const std::string& data_spec,
                     int count, const std::string& out_dir, uint64_t seed);
int cmd_sweep(const std::string& config_path, const std::string& grid_spec);

} // namespace adamixup

#endif
