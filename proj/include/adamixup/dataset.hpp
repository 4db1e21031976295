#ifndef ADAMIXUP_DATASET_HPP
#define ADAMIXUP_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adamixup/tensor.hpp"

namespace adamixup {

/// Distribution over the class set; entries sum to 1 within 1e-9.
/// Degenerate soft labels are one-hot.
struct SoftLabel {
    std::vector<double> probs;

    int argmax() const;
    bool degenerate() const;
    void validate() const;
};

SoftLabel one_hot(int label, int num_classes);

/// One example: features in [0,1] (image [C,H,W] or flat vector [F]) plus a
/// class index.
struct LabeledExample {
    TensorPtr features;
    int label = 0;
};

struct Dataset {
    std::vector<LabeledExample> examples;
    int num_classes = 0;
    std::string name;

    size_t size() const { return examples.size(); }
    const std::vector<int64_t>& feature_shape() const;
    void validate() const;
};

/// Stacked minibatch: features [B, ...feature_shape].
struct Batch {
    TensorPtr features;
    std::vector<int> labels;
    std::vector<size_t> indices; // positions in the source dataset
    int64_t size() const { return static_cast<int64_t>(labels.size()); }
};

TensorPtr stack_features(const Dataset& ds, const std::vector<size_t>& indices);
Batch gather(const Dataset& ds, const std::vector<size_t>& indices);

/// One epoch of minibatches; every example appears exactly once, order
/// deterministic under the seed. Single consumer.
class BatchStream {
public:
    BatchStream(const Dataset& ds, int64_t batch_size, uint64_t seed, bool shuffle);

    std::optional<Batch> next();
    size_t num_batches() const;

private:
    const Dataset& ds_;
    std::vector<size_t> order_;
    size_t pos_ = 0;
    int64_t batch_size_;
};

/// Stratified per-class subsample; deterministic under seed. Class counts are
/// apportioned by largest remainder so proportions hold within +-1 and the
/// total equals round(fraction * size).
Dataset subsample(const Dataset& ds, double fraction, uint64_t seed);

} // namespace adamixup

#endif
