#include "adamixup/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "adamixup/rng.hpp"

namespace adamixup {

int SoftLabel::argmax() const {
    if (probs.empty()) throw ContractError("SoftLabel: empty");
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

bool SoftLabel::degenerate() const {
    int ones = 0;
    for (double p : probs) {
        if (p == 1.0) ++ones;
        else if (p != 0.0) return false;
    }
    return ones == 1;
}

void SoftLabel::validate() const {
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw ContractError("SoftLabel: negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ContractError("SoftLabel: entries sum to " + std::to_string(total));
    }
}

SoftLabel one_hot(int label, int num_classes) {
    if (num_classes < 1) throw ContractError("one_hot: num_classes must be >= 1");
    if (label < 0 || label >= num_classes) {
        throw ContractError("one_hot: label " + std::to_string(label) + " out of range [0," +
                            std::to_string(num_classes) + ")");
    }
    SoftLabel s;
    s.probs.assign(static_cast<size_t>(num_classes), 0.0);
    s.probs[static_cast<size_t>(label)] = 1.0;
    return s;
}

const std::vector<int64_t>& Dataset::feature_shape() const {
    if (examples.empty()) throw ContractError("Dataset: empty");
    return examples.front().features->shape;
}

void Dataset::validate() const {
    if (examples.empty()) throw ContractError("Dataset '" + name + "': empty");
    if (num_classes < 1) throw ContractError("Dataset '" + name + "': num_classes < 1");
    const auto& shape = examples.front().features->shape;
    for (const auto& ex : examples) {
        if (ex.features->shape != shape) {
            throw ContractError("Dataset '" + name + "': inconsistent feature shapes");
        }
        if (ex.label < 0 || ex.label >= num_classes) {
            throw ContractError("Dataset '" + name + "': label out of range");
        }
        for (double v : ex.features->values) {
            if (v < 0.0 || v > 1.0) {
                throw ContractError("Dataset '" + name + "': feature value outside [0,1]");
            }
        }
    }
}

TensorPtr stack_features(const Dataset& ds, const std::vector<size_t>& indices) {
    if (indices.empty()) throw ContractError("stack_features: empty index set");
    const auto& shape = ds.feature_shape();
    const size_t per = ds.examples.front().features->values.size();
    std::vector<int64_t> out_shape;
    out_shape.push_back(static_cast<int64_t>(indices.size()));
    out_shape.insert(out_shape.end(), shape.begin(), shape.end());
    std::vector<double> values(indices.size() * per);
    for (size_t i = 0; i < indices.size(); ++i) {
        const auto& src = ds.examples.at(indices[i]).features->values;
        std::memcpy(values.data() + i * per, src.data(), per * sizeof(double));
    }
    return Tensor::create(std::move(out_shape), std::move(values));
}

Batch gather(const Dataset& ds, const std::vector<size_t>& indices) {
    Batch b;
    b.features = stack_features(ds, indices);
    b.indices = indices;
    b.labels.reserve(indices.size());
    for (size_t idx : indices) b.labels.push_back(ds.examples.at(idx).label);
    return b;
}

BatchStream::BatchStream(const Dataset& ds, int64_t batch_size, uint64_t seed, bool shuffle)
    : ds_(ds), batch_size_(batch_size) {
    if (batch_size < 1) throw ContractError("batches: batch_size must be >= 1");
    order_.resize(ds.size());
    std::iota(order_.begin(), order_.end(), size_t{0});
    if (shuffle) {
        Rng rng = Rng::stream(seed, "batches");
        rng.shuffle(order_);
    }
}

std::optional<Batch> BatchStream::next() {
    if (pos_ >= order_.size()) return std::nullopt;
    const size_t end = std::min(order_.size(), pos_ + static_cast<size_t>(batch_size_));
    std::vector<size_t> indices(order_.begin() + static_cast<ptrdiff_t>(pos_),
                                order_.begin() + static_cast<ptrdiff_t>(end));
    pos_ = end;
    return gather(ds_, indices);
}

size_t BatchStream::num_batches() const {
    return (order_.size() + static_cast<size_t>(batch_size_) - 1) /
           static_cast<size_t>(batch_size_);
}

Dataset subsample(const Dataset& ds, double fraction, uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ContractError("subsample: fraction must be in (0,1]");
    }
    ds.validate();
    if (fraction == 1.0) return ds;

    std::vector<std::vector<size_t>> by_class(static_cast<size_t>(ds.num_classes));
    for (size_t i = 0; i < ds.examples.size(); ++i) {
        by_class[static_cast<size_t>(ds.examples[i].label)].push_back(i);
    }

    // Largest-remainder apportionment of round(fraction * N) across classes.
    const size_t target_total =
        static_cast<size_t>(std::llround(fraction * static_cast<double>(ds.size())));
    std::vector<size_t> take(by_class.size(), 0);
    std::vector<std::pair<double, size_t>> remainders;
    size_t assigned = 0;
    for (size_t c = 0; c < by_class.size(); ++c) {
        const double quota = fraction * static_cast<double>(by_class[c].size());
        take[c] = static_cast<size_t>(std::floor(quota));
        assigned += take[c];
        remainders.emplace_back(quota - std::floor(quota), c);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (size_t i = 0; assigned < target_total && i < remainders.size(); ++i, ++assigned) {
        ++take[remainders[i].second];
    }
    for (size_t c = 0; c < by_class.size(); ++c) {
        if (!by_class[c].empty() && take[c] == 0) {
            throw ContractError("subsample: fraction " + std::to_string(fraction) +
                                " yields zero examples for class " + std::to_string(c));
        }
    }

    Rng rng = Rng::stream(seed, "subsample");
    Dataset out;
    out.num_classes = ds.num_classes;
    out.name = ds.name + "-sub";
    for (size_t c = 0; c < by_class.size(); ++c) {
        auto idx = by_class[c];
        rng.shuffle(idx);
        idx.resize(take[c]);
        std::sort(idx.begin(), idx.end()); // keep original relative order
        for (size_t i : idx) out.examples.push_back(ds.examples[i]);
    }
    return out;
}

} // namespace adamixup
