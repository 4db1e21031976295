#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "adamixup/csv.hpp"
#include "adamixup/dataset.hpp"
#include "adamixup/idx.hpp"
#include "adamixup/synthetic.hpp"

using namespace adamixup;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    auto dir = fs::temp_directory_path() / "adamixup_data_test";
    fs::create_directories(dir);
    return dir;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream os(path, std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("one_hot") {
    auto s = one_hot(2, 4);
    CHECK(s.probs == std::vector<double>{0, 0, 1, 0});
    CHECK(s.degenerate());
    CHECK(one_hot(0, 1).probs == std::vector<double>{1});
    CHECK_THROWS_AS(one_hot(4, 4), ContractError);
    CHECK_THROWS_AS(one_hot(-1, 4), ContractError);

    SUBCASE("argmax round-trips the label for every class") {
        for (int n = 1; n <= 12; ++n) {
            for (int label = 0; label < n; ++label) {
                CHECK(one_hot(label, n).argmax() == label);
            }
        }
    }
    SUBCASE("half-half mix of labels 1 and 5 over 10 classes") {
        auto a = one_hot(1, 10), b = one_hot(5, 10);
        SoftLabel mixed;
        mixed.probs.resize(10);
        for (int i = 0; i < 10; ++i) mixed.probs[i] = 0.5 * a.probs[i] + 0.5 * b.probs[i];
        mixed.validate();
        CHECK(mixed.probs[1] == doctest::Approx(0.5));
        CHECK(mixed.probs[5] == doctest::Approx(0.5));
        CHECK_FALSE(mixed.degenerate());
    }
}

TEST_CASE("idx loader on a hand-built 4-image fixture") {
    // 2x2 images; bytes laid out independently of the loader: big-endian
    // magic 0x00000803, count 4, rows 2, cols 2, then 16 pixels.
    std::vector<unsigned char> img = {0, 0, 8, 3, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 2};
    for (int p = 0; p < 16; ++p) img.push_back(static_cast<unsigned char>(p * 16));
    std::vector<unsigned char> lbl = {0, 0, 8, 1, 0, 0, 0, 4, 0, 1, 2, 1};
    const auto dir = test_dir();
    write_bytes(dir / "img.idx", img);
    write_bytes(dir / "lbl.idx", lbl);

    auto ds = load_idx((dir / "img.idx").string(), (dir / "lbl.idx").string());
    REQUIRE(ds.size() == 4);
    CHECK(ds.num_classes == 3);
    CHECK(ds.feature_shape() == std::vector<int64_t>{1, 2, 2});
    CHECK(ds.examples[0].features->values[1] == doctest::Approx(16.0 / 255.0));
    CHECK(ds.examples[3].features->values[3] == doctest::Approx(240.0 / 255.0));
    CHECK(ds.examples[2].label == 2);
    ds.validate();

    SUBCASE("labels file with image magic is a format error") {
        write_bytes(dir / "bad_lbl.idx", img);
        CHECK_THROWS_WITH_AS(
            load_idx((dir / "img.idx").string(), (dir / "bad_lbl.idx").string()),
            doctest::Contains("magic"), FormatError);
    }
    SUBCASE("count mismatch is a format error") {
        auto lbl3 = lbl;
        lbl3[7] = 3;
        lbl3.pop_back();
        write_bytes(dir / "short_lbl.idx", lbl3);
        CHECK_THROWS_WITH_AS(
            load_idx((dir / "img.idx").string(), (dir / "short_lbl.idx").string()),
            doctest::Contains("count"), FormatError);
    }
    SUBCASE("truncated image payload is a format error") {
        auto trunc = img;
        trunc.resize(img.size() - 4);
        write_bytes(dir / "trunc_img.idx", trunc);
        CHECK_THROWS_AS(load_idx((dir / "trunc_img.idx").string(), (dir / "lbl.idx").string()),
                        FormatError);
    }
    SUBCASE("write_idx round trip") {
        write_idx(ds, (dir / "rt_img.idx").string(), (dir / "rt_lbl.idx").string());
        auto rt = load_idx((dir / "rt_img.idx").string(), (dir / "rt_lbl.idx").string());
        REQUIRE(rt.size() == ds.size());
        for (size_t i = 0; i < ds.size(); ++i) {
            CHECK(rt.examples[i].label == ds.examples[i].label);
            CHECK(rt.examples[i].features->values == ds.examples[i].features->values);
        }
    }
}

TEST_CASE("synthetic generators") {
    SUBCASE("gaussian blobs are deterministic under a fixed seed") {
        SyntheticManifoldSpec spec{ManifoldKind::GaussianBlobs, 2, 50, 0.1, 7};
        auto a = generate_synthetic(spec);
        auto b = generate_synthetic(spec);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a.examples[i].features->values == b.examples[i].features->values);
            CHECK(a.examples[i].label == b.examples[i].label);
        }
        a.validate();
    }
    SUBCASE("two moons with zero noise lie exactly on the canonical arcs") {
        SyntheticManifoldSpec spec{ManifoldKind::TwoMoons, 2, 80, 0.0, 3};
        auto ds = generate_synthetic(spec);
        for (const auto& ex : ds.examples) {
            const double x = 3.0 * ex.features->values[0] - 1.0;
            const double y = 1.5 * ex.features->values[1] - 0.5;
            if (ex.label == 0) {
                CHECK(std::abs(x * x + y * y - 1.0) < 1e-9);
                CHECK(y >= -1e-12);
            } else {
                CHECK(std::abs((x - 1.0) * (x - 1.0) + (y - 0.5) * (y - 0.5) - 1.0) < 1e-9);
                CHECK(y <= 0.5 + 1e-12);
            }
        }
    }
    SUBCASE("ring mixture is balanced") {
        SyntheticManifoldSpec spec{ManifoldKind::RingMixture, 3, 100, 0.01, 5};
        auto ds = generate_synthetic(spec);
        REQUIRE(ds.size() == 300);
        std::vector<int> counts(3, 0);
        for (const auto& ex : ds.examples) ++counts[static_cast<size_t>(ex.label)];
        for (int c : counts) CHECK(c == 100);
        ds.validate();
    }
    SUBCASE("two-moons rejects class counts other than 2") {
        SyntheticManifoldSpec spec{ManifoldKind::TwoMoons, 3, 10, 0.0, 1};
        CHECK_THROWS_AS(generate_synthetic(spec), ContractError);
    }
}

TEST_CASE("batch stream") {
    SyntheticManifoldSpec spec{ManifoldKind::GaussianBlobs, 2, 5, 0.05, 9};
    auto ds = generate_synthetic(spec); // 10 examples

    SUBCASE("partitions 10 examples into 3,3,3,1") {
        BatchStream stream(ds, 3, 1, true);
        CHECK(stream.num_batches() == 4);
        std::vector<int64_t> sizes;
        std::vector<size_t> seen;
        while (auto b = stream.next()) {
            sizes.push_back(b->size());
            seen.insert(seen.end(), b->indices.begin(), b->indices.end());
        }
        CHECK(sizes == std::vector<int64_t>{3, 3, 3, 1});
        std::sort(seen.begin(), seen.end());
        for (size_t i = 0; i < 10; ++i) CHECK(seen[i] == i); // exactly once per epoch
    }
    SUBCASE("shuffle=false preserves original order") {
        BatchStream stream(ds, 4, 99, false);
        auto b = stream.next();
        CHECK(b->indices == std::vector<size_t>{0, 1, 2, 3});
    }
    SUBCASE("same seed gives identical order") {
        BatchStream s1(ds, 3, 42, true), s2(ds, 3, 42, true);
        while (auto b1 = s1.next()) {
            auto b2 = s2.next();
            REQUIRE(b2.has_value());
            CHECK(b1->indices == b2->indices);
        }
    }
    SUBCASE("stacked features have batch-major shape") {
        BatchStream stream(ds, 4, 0, false);
        auto b = stream.next();
        CHECK(b->features->shape == std::vector<int64_t>{4, 2});
    }
}

TEST_CASE("subsample") {
    SyntheticManifoldSpec spec{ManifoldKind::GaussianBlobs, 10, 100, 0.02, 13};
    auto ds = generate_synthetic(spec);

    SUBCASE("fraction 1.0 is the identity") {
        auto out = subsample(ds, 1.0, 5);
        CHECK(out.size() == ds.size());
    }
    SUBCASE("fraction 0.2 on 100-per-class keeps 20 per class") {
        auto out = subsample(ds, 0.2, 5);
        REQUIRE(out.size() == 200);
        std::vector<int> counts(10, 0);
        for (const auto& ex : out.examples) ++counts[static_cast<size_t>(ex.label)];
        for (int c : counts) CHECK(c == 20);
    }
    SUBCASE("proportions hold within one example when not divisible") {
        auto out = subsample(ds, 0.33, 6);
        std::vector<int> counts(10, 0);
        for (const auto& ex : out.examples) ++counts[static_cast<size_t>(ex.label)];
        for (int c : counts) CHECK(std::abs(c - 33) <= 1);
    }
    SUBCASE("deterministic under seed") {
        auto a = subsample(ds, 0.4, 11);
        auto b = subsample(ds, 0.4, 11);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a.examples[i].features->values == b.examples[i].features->values);
        }
    }
    SUBCASE("fraction that empties a class is an error") {
        SyntheticManifoldSpec tiny{ManifoldKind::GaussianBlobs, 2, 2, 0.02, 1};
        auto small = generate_synthetic(tiny);
        CHECK_THROWS_AS(subsample(small, 0.1, 1), ContractError);
    }
}

// Full-scale MNIST checks run only when the real files are available.
TEST_CASE("mnist files when provided") {
    const char* dir = std::getenv("ADAMIXUP_MNIST_DIR");
    if (!dir) return;
    auto ds = load_idx(std::string(dir) + "/train-images-idx3-ubyte",
                       std::string(dir) + "/train-labels-idx1-ubyte");
    CHECK(ds.size() == 60000);
    CHECK(ds.num_classes == 10);
    auto sub = subsample(ds, 0.2, 1);
    CHECK(sub.size() == 12000);
}
