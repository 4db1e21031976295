#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adamixup/idx.hpp"
#include "adamixup/pgm.hpp"
#include "adamixup/runner.hpp"
#include "support/digits.hpp"

using namespace adamixup;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    auto dir = fs::temp_directory_path() / "adamixup_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

const char* kBlobConfig = R"(
[dataset]
kind = synthetic
generator = gaussian-blobs
classes = 2
per_class = 60
noise = 0.08
seed = 7
test_per_class = 30

[train]
method = adamixup
epochs = 4
batch_size = 16
learning_rate = 0.1
momentum = 0.9
seed = 3
oracle_radius = 0.04

[model]
hidden = 16
)";

RunConfig blob_config(const fs::path& out_dir) {
    auto cfg = RunConfig::from_ini(Ini::parse(kBlobConfig, "test"), "test");
    cfg.output_dir = out_dir.string();
    return cfg;
}

} // namespace

TEST_CASE("train run produces a self-describing run directory") {
    const auto dir = work_dir() / "train_smoke";
    fs::remove_all(dir);
    auto result = run_train(blob_config(dir));

    CHECK(fs::exists(dir / "config.ini"));
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "metrics.jsonl"));
    CHECK(fs::exists(dir / "checkpoint.amx"));
    CHECK(fs::exists(dir / "summary.json"));

    auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    CHECK(summary["method"] == "adamixup");
    CHECK(summary["final_test_error"].get<double>() >= 0.0);
    CHECK(summary["protocol_window"] == 4);

    // header + one line per epoch
    std::istringstream csv(read_file(dir / "metrics.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 1 + 4);

    SUBCASE("metrics are byte-identical across reruns of the same config") {
        const auto dir2 = work_dir() / "train_smoke_2";
        fs::remove_all(dir2);
        run_train(blob_config(dir2));
        CHECK(read_file(dir / "metrics.csv") == read_file(dir2 / "metrics.csv"));
        CHECK(read_file(dir / "metrics.jsonl") == read_file(dir2 / "metrics.jsonl"));
    }
    SUBCASE("rerunning the stored resolved config reproduces metrics byte-for-byte") {
        const auto dir3 = work_dir() / "train_smoke_3";
        fs::remove_all(dir3);
        auto stored = RunConfig::from_file((dir / "config.ini").string());
        stored.output_dir = dir3.string();
        run_train(stored);
        CHECK(read_file(dir / "metrics.csv") == read_file(dir3 / "metrics.csv"));
    }
    SUBCASE("eval on the test split matches the summary's final-epoch error") {
        const double err = run_eval(
            (dir / "checkpoint.amx").string(),
            "synthetic:generator=gaussian-blobs,classes=2,per_class=30,noise=0.08,seed=1000010");
        CHECK(err == doctest::Approx(summary["final_epoch_test_error"].get<double>())
                         .epsilon(1e-12));
    }
    SUBCASE("corrupted checkpoint is a format error") {
        const auto bad = work_dir() / "bad.amx";
        write_file(bad, "AMX1garbage-that-is-not-a-tensor-record");
        CHECK_THROWS_AS(run_eval(bad.string(), "csv:whatever"), FormatError);
        const auto worse = work_dir() / "worse.amx";
        write_file(worse, "not a checkpoint at all");
        CHECK_THROWS_AS(run_eval(worse.string(), "csv:whatever"), FormatError);
    }
}

TEST_CASE("config validation errors are field-level") {
    CHECK_THROWS_WITH_AS(RunConfig::from_ini(Ini::parse("[dataset]\nkind = synthetic\n"
                                                        "[train]\nmethod = warp\n",
                                                        "t"),
                                             "t"),
                         doctest::Contains("method"), ContractError);
    CHECK_THROWS_WITH_AS(RunConfig::from_ini(Ini::parse("[dataset]\nkind = synthetic\n"
                                                        "[train]\nlearning_rate = fast\n",
                                                        "t"),
                                             "t"),
                         doctest::Contains("learning_rate"), ContractError);
    CHECK_THROWS_WITH_AS(
        RunConfig::from_ini(Ini::parse("[dataset]\nkind = synthetic\nbogus = 1\n", "t"), "t"),
        doctest::Contains("bogus"), ContractError);
    CHECK_THROWS_WITH_AS(RunConfig::from_ini(Ini::parse("[train]\nepochs = 1\n", "t"), "t"),
                         doctest::Contains("dataset.kind"), ContractError);
    SUBCASE("cmd_train maps config errors to exit code 1") {
        const auto bad = work_dir() / "bad.ini";
        write_file(bad, "[dataset]\nkind = nonsense\n");
        CHECK(cmd_train(bad.string()) == 1);
        CHECK(cmd_train((work_dir() / "missing.ini").string()) == 1);
    }
}

TEST_CASE("export-mixed writes PGM triples and a soft-label csv") {
    const auto dir = work_dir() / "export";
    fs::remove_all(dir);
    fs::create_directories(dir);

    // small image dataset on disk, trained for one epoch
    auto digits = adamixup::testing::make_digits_dataset(6, 5);
    write_idx(digits, (dir / "img.idx").string(), (dir / "lbl.idx").string());

    std::ostringstream cfg;
    cfg << "[dataset]\nkind = idx\n"
        << "train_images = " << (dir / "img.idx").string() << "\n"
        << "train_labels = " << (dir / "lbl.idx").string() << "\n"
        << "test_images = " << (dir / "img.idx").string() << "\n"
        << "test_labels = " << (dir / "lbl.idx").string() << "\n"
        << "[train]\nmethod = adamixup\nepochs = 1\nbatch_size = 16\n"
        << "learning_rate = 0.02\nseed = 2\n"
        << "[model]\nconv1 = 2\nconv2 = 3\nhidden = 8\n";
    auto config = RunConfig::from_ini(Ini::parse(cfg.str(), "export"), "export");
    config.output_dir = (dir / "run").string();
    run_train(config);

    const std::string spec =
        "idx:" + (dir / "img.idx").string() + "," + (dir / "lbl.idx").string();
    run_export_mixed((dir / "run" / "checkpoint.amx").string(), spec, 5,
                     (dir / "out").string(), 9);

    int pgm_count = 0;
    for (const auto& entry : fs::directory_iterator(dir / "out")) {
        if (entry.path().extension() == ".pgm") ++pgm_count;
    }
    CHECK(pgm_count == 15); // x1, x2, mix per pair

    std::istringstream labels(read_file(dir / "out" / "labels.csv"));
    std::string line;
    std::getline(labels, line); // header
    int rows = 0;
    while (std::getline(labels, line)) {
        ++rows;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        double total = 0.0;
        while (std::getline(ls, cell, ',')) total += std::stod(cell);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9)); // soft label row sums to 1
    }
    CHECK(rows == 5);

    SUBCASE("mixed pixels stay inside the elementwise envelope of the sources") {
        int64_t h = 0, w = 0;
        auto x1 = read_pgm((dir / "out" / "pair_000_x1.pgm").string(), h, w);
        auto x2 = read_pgm((dir / "out" / "pair_000_x2.pgm").string(), h, w);
        auto mix = read_pgm((dir / "out" / "pair_000_mix.pgm").string(), h, w);
        for (size_t i = 0; i < mix.size(); ++i) {
            CHECK(mix[i] >= std::min(x1[i], x2[i]) - 1e-12);
            CHECK(mix[i] <= std::max(x1[i], x2[i]) + 1e-12);
        }
    }
    SUBCASE("non-adamixup checkpoints are rejected") {
        auto base_cfg = config;
        base_cfg.train.method = TrainMethod::Baseline;
        base_cfg.output_dir = (dir / "run_base").string();
        run_train(base_cfg);
        CHECK_THROWS_WITH_AS(
            run_export_mixed((dir / "run_base" / "checkpoint.amx").string(), spec, 2,
                             (dir / "out2").string(), 1),
            doctest::Contains("adamixup"), ContractError);
    }
}

TEST_CASE("sweep runs the grid and collects a combined csv") {
    const auto dir = work_dir() / "sweep";
    fs::remove_all(dir);
    fs::create_directories(dir);

    std::string cfg = R"(
[dataset]
kind = synthetic
generator = gaussian-blobs
classes = 2
per_class = 40
noise = 0.08
seed = 7
test_per_class = 20

[train]
method = mixup
epochs = 2
batch_size = 16
learning_rate = 0.1
seed = 3

[model]
hidden = 8

[output]
)";
    cfg += "dir = " + (dir / "grid").string() + "\n";
    write_file(dir / "base.ini", cfg);

    auto root = run_sweep((dir / "base.ini").string(), "train.beta_param=0.5,1,2");
    CHECK(fs::exists(root / "beta_param-0.5" / "summary.json"));
    CHECK(fs::exists(root / "beta_param-1" / "summary.json"));
    CHECK(fs::exists(root / "beta_param-2" / "summary.json"));

    std::istringstream combined(read_file(root / "sweep.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(combined, line)) ++lines;
    CHECK(lines == 1 + 3);

    SUBCASE("empty grid is a config error") {
        CHECK_THROWS_AS(run_sweep((dir / "base.ini").string(), ""), ContractError);
        CHECK(cmd_sweep((dir / "base.ini").string(), "") == 1);
    }
    SUBCASE("subsample fraction axis works end to end") {
        std::string frac_cfg = cfg;
        frac_cfg.replace(frac_cfg.find((dir / "grid").string()), (dir / "grid").string().size(),
                         (dir / "grid_frac").string());
        write_file(dir / "base_frac.ini", frac_cfg);
        auto frac_root =
            run_sweep((dir / "base_frac.ini").string(), "dataset.fraction=0.5,1.0");
        CHECK(fs::exists(frac_root / "fraction-0.5" / "summary.json"));
        CHECK(fs::exists(frac_root / "fraction-1.0" / "summary.json"));
    }
}

TEST_CASE("fold-3 metrics expose per-stage policy columns") {
    const auto dir = work_dir() / "fold3";
    fs::remove_all(dir);
    auto cfg = blob_config(dir);
    cfg.train.k_max = 3;
    run_train(cfg);
    std::istringstream csv(read_file(dir / "metrics.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header.find("alpha1") != std::string::npos);
    CHECK(header.find("delta1") != std::string::npos);
    CHECK(header.find("alpha2") != std::string::npos);
    CHECK(header.find("delta2") != std::string::npos);
}

TEST_CASE("divergent runs exit with code 2") {
    const auto dir = work_dir() / "diverge";
    fs::remove_all(dir);
    const auto path = dir / "diverge.ini";
    fs::create_directories(dir);
    auto ini = Ini::parse(kBlobConfig, "diverge");
    ini.set("train", "learning_rate", "1e18");
    ini.set("train", "weight_decay", "1e18"); // parameter magnitudes explode
    ini.set("output", "dir", (dir / "run").string());
    write_file(path, ini.serialize());
    CHECK(cmd_train(path.string()) == 2);
}
