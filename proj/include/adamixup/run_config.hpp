#ifndef ADAMIXUP_RUN_CONFIG_HPP
#define ADAMIXUP_RUN_CONFIG_HPP

#include <string>
#include <utility>
#include <vector>

#include "adamixup/dataset.hpp"
#include "adamixup/synthetic.hpp"
#include "adamixup/trainer.hpp"

namespace adamixup {

/// Flat sectioned key-value config text: [section], key = value, '#' comments.
/// Order-preserving so resolved configs diff cleanly.
struct Ini {
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections;

    static Ini parse_file(const std::string& path);
    static Ini parse(const std::string& text, const std::string& origin);

    const std::string* find(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
    std::string serialize() const;
};

struct DatasetSpec {
    enum class Kind { Synthetic, Idx, Csv };
    Kind kind = Kind::Synthetic;

    SyntheticManifoldSpec synthetic;  // train split; test uses a shifted seed
    int synthetic_test_per_class = 0; // 0: no synthetic test split requested
    std::string train_images, train_labels, test_images, test_labels; // idx
    std::string train_csv, test_csv;

    double fraction = 1.0; // stratified subsample of the train split
    uint64_t subsample_seed = 0;

    Dataset load_train() const;
    Dataset load_test() const;

    /// Inline form: "synthetic:generator=...,classes=...,per_class=...,noise=...,seed=..."
    /// or "idx:<images>,<labels>" or "csv:<path>". Describes a single split.
    static DatasetSpec parse_inline(const std::string& spec);
    Dataset load_single() const; // for inline specs
};

struct RunConfig {
    DatasetSpec data;
    TrainConfig train;
    std::string output_dir; // resolved against ADAMIXUP_OUT_ROOT when empty

    static RunConfig from_file(const std::string& path);
    static RunConfig from_ini(const Ini& ini, const std::string& origin);

    /// Every key with its final value; re-running on this text reproduces the
    /// run byte-for-byte.
    Ini resolved() const;
};

} // namespace adamixup

#endif
