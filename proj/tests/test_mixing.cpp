#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adamixup/mixing.hpp"
#include "adamixup/ops.hpp"
#include "adamixup/synthetic.hpp"
#include "support/gradcheck.hpp"

using namespace adamixup;

namespace {

Dataset tiny_vector_dataset() {
    // Four hand-placed points, ten classes so label arithmetic is visible.
    Dataset ds;
    ds.num_classes = 10;
    ds.name = "tiny";
    auto push = [&](std::vector<double> v, int label) {
        LabeledExample ex;
        ex.features = Tensor::vector(std::move(v));
        ex.label = label;
        ds.examples.push_back(std::move(ex));
    };
    push({0.0, 0.2}, 1);
    push({0.2, 0.0}, 5);
    push({0.9, 0.9}, 1);
    push({0.5, 0.5}, 7);
    return ds;
}

} // namespace

TEST_CASE("sample_gamma") {
    PolicyRegion r{0.4, 0.2};

    CHECK(sample_gamma(r, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sample_gamma(r, 1e-9) == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(sample_gamma(r, 1.0 - 1e-9) == doctest::Approx(0.6).epsilon(1e-6));

    SUBCASE("gamma stays strictly inside (alpha, alpha+delta)") {
        Rng rng(5);
        for (int i = 0; i < 2000; ++i) {
            PolicyRegion reg{rng.uniform_in(0.01, 0.6), rng.uniform_in(0.01, 0.35)};
            const double g = sample_gamma(reg, rng.uniform_open01());
            CHECK(g > reg.alpha);
            CHECK(g < reg.alpha + reg.delta);
        }
    }
    SUBCASE("epsilon outside (0,1) is a contract error") {
        CHECK_THROWS_AS(sample_gamma(r, 0.0), ContractError);
        CHECK_THROWS_AS(sample_gamma(r, 1.0), ContractError);
        CHECK_THROWS_AS(sample_gamma(r, -0.3), ContractError);
    }
    SUBCASE("invalid region is rejected") {
        PolicyRegion bad{0.7, 0.5};
        CHECK_THROWS_AS(sample_gamma(bad, 0.5), ContractError);
    }
}

TEST_CASE("reparametrization gradients: d gamma/d alpha = 1, d gamma/d delta = eps") {
    auto alpha = Tensor::vector({0.3, 0.45}, true);
    auto delta = Tensor::vector({0.2, 0.1}, true);
    const std::vector<double> eps{0.25, 0.75};

    auto gamma = sample_gamma_batch(alpha, delta, eps);
    backward(sum(gamma));
    CHECK(alpha->grad[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(alpha->grad[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(delta->grad[0] == doctest::Approx(eps[0]).epsilon(1e-12));
    CHECK(delta->grad[1] == doctest::Approx(eps[1]).epsilon(1e-12));

    SUBCASE("matches finite differences at 1e-6") {
        alpha->zero_grad();
        delta->zero_grad();
        auto res = adamixup::testing::check_gradients(
            [&] { return sum(sample_gamma_batch(alpha, delta, eps)); }, {alpha, delta}, 1e-6);
        CHECK(res.ok);
    }
}

TEST_CASE("mix2") {
    auto x1 = Tensor::vector({0.0, 2.0});
    auto x2 = Tensor::vector({2.0, 0.0});

    CHECK(mix2(x1, x2, 0.5)->values == std::vector<double>{1.0, 1.0});

    SUBCASE("gamma near 1 approaches x1") {
        auto m = mix2(x1, x2, 1.0 - 1e-12);
        CHECK(m->values[0] == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(m->values[1] == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("mixing a point with itself is the identity") {
        Rng rng(3);
        for (int i = 0; i < 20; ++i) {
            const double g = rng.uniform_open01();
            CHECK(mix2(x1, x1, g)->values == x1->values);
        }
    }
    SUBCASE("contract and shape errors") {
        CHECK_THROWS_AS(mix2(x1, x2, 0.0), ContractError);
        CHECK_THROWS_AS(mix2(x1, x2, 1.0), ContractError);
        auto bad = Tensor::vector({1.0, 2.0, 3.0});
        CHECK_THROWS_AS(mix2(x1, bad, 0.5), ShapeError);
    }
}

TEST_CASE("compose_policy") {
    MixPolicy lambda2{{0.6, 0.4}};

    auto lambda3 = compose_policy(lambda2, 0.5);
    CHECK(lambda3.weights == std::vector<double>{0.3, 0.2, 0.5});

    SUBCASE("degenerate input stays a valid simplex point") {
        MixPolicy degen{{1.0, 0.0}};
        auto out = compose_policy(degen, 0.5);
        CHECK(out.weights == std::vector<double>{0.5, 0.0, 0.5});
        out.validate();
    }
    SUBCASE("composition preserves the simplex within 1e-12") {
        Rng rng(9);
        for (int trial = 0; trial < 500; ++trial) {
            MixPolicy p{{rng.uniform_open01(), 0.0}};
            p.weights[1] = 1.0 - p.weights[0];
            for (int fold = 3; fold <= 5; ++fold) {
                p = compose_policy(p, rng.uniform_open01());
                double total = 0.0;
                for (double w : p.weights) total += w;
                CHECK(std::abs(total - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("fold-2 batches from the generator") {
    auto ds = tiny_vector_dataset();
    PolicyRegionGenerator gen({2}, ModelConfig{.hidden = 8}, 21);

    SUBCASE("labels mix exactly like features") {
        Rng rng(1);
        auto mixed = make_fold2_batch(gen, ds, {{0, 1}}, rng);
        REQUIRE(mixed.size() == 1);
        const auto& m = mixed[0];
        const double gamma = m.policy.weights[0];
        CHECK(m.fold == 2);
        CHECK(m.soft_label.probs[1] == gamma);
        CHECK(m.soft_label.probs[5] == 1.0 - gamma);
        m.soft_label.validate();
        // same arithmetic path as mix2
        auto expect = mix2(ds.examples[0].features, ds.examples[1].features, gamma);
        CHECK(m.features->values == expect->values);
    }
    SUBCASE("equal-label pairs give exactly the one-hot label") {
        Rng rng(2);
        auto mixed = make_fold2_batch(gen, ds, {{0, 2}}, rng); // both label 1
        CHECK(mixed[0].soft_label.degenerate());
        CHECK(mixed[0].soft_label.argmax() == 1);
    }
    SUBCASE("fixed seed reproduces the batch") {
        Rng r1(7), r2(7);
        auto a = make_fold2_batch(gen, ds, {{0, 1}, {2, 3}}, r1);
        auto b = make_fold2_batch(gen, ds, {{0, 1}, {2, 3}}, r2);
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].features->values == b[i].features->values);
            CHECK(a[i].policy.weights == b[i].policy.weights);
        }
    }
}

TEST_CASE("fold-k recursion matches the direct convex combination") {
    auto ds = tiny_vector_dataset();
    PolicyRegionGenerator gen({2}, ModelConfig{.hidden = 8}, 33);

    SUBCASE("hand fold-3 expansion: 0.3a + 0.2b + 0.5c") {
        // prev fold-2 with policy [0.6, 0.4], composed with gamma = 0.5
        MixedExample prev;
        prev.features = mix2(ds.examples[0].features, ds.examples[1].features, 0.6);
        prev.soft_label.probs.assign(10, 0.0);
        prev.soft_label.probs[1] = 0.6;
        prev.soft_label.probs[5] = 0.4;
        prev.fold = 2;
        prev.policy.weights = {0.6, 0.4};
        prev.sources = {0, 1};

        auto pol = compose_policy(prev.policy, 0.5);
        auto feat = mix2(prev.features, ds.examples[3].features, 0.5);
        const auto& a = ds.examples[0].features->values;
        const auto& b = ds.examples[1].features->values;
        const auto& c = ds.examples[3].features->values;
        for (size_t j = 0; j < feat->values.size(); ++j) {
            CHECK(feat->values[j] ==
                  doctest::Approx(0.3 * a[j] + 0.2 * b[j] + 0.5 * c[j]).epsilon(1e-12));
        }
        CHECK(pol.weights[0] == doctest::Approx(0.3));
        CHECK(pol.weights[1] == doctest::Approx(0.2));
        CHECK(pol.weights[2] == doctest::Approx(0.5));

        // soft label of distinct classes carries the same weights
        SoftLabel soft;
        soft.probs.assign(10, 0.0);
        for (size_t i = 0; i < soft.probs.size(); ++i) {
            soft.probs[i] = 0.5 * prev.soft_label.probs[i] +
                            0.5 * one_hot(ds.examples[3].label, 10).probs[i];
        }
        CHECK(soft.probs[1] == doctest::Approx(0.3));
        CHECK(soft.probs[5] == doctest::Approx(0.2));
        CHECK(soft.probs[7] == doctest::Approx(0.5));
    }

    SUBCASE("recursive chains up to fold 5 equal X * lambda within 1e-10") {
        Rng rng(44);
        auto pairs = draw_pairs(ds.size(), 4, rng);
        auto pool = make_fold2_batch(gen, ds, pairs, rng);
        for (int fold = 3; fold <= 5; ++fold) {
            pool = make_foldk_batch(gen, ds, pool, fold, 4, rng);
            for (const auto& m : pool) {
                REQUIRE(m.sources.size() == static_cast<size_t>(fold));
                m.policy.validate();
                std::vector<double> direct(m.features->values.size(), 0.0);
                for (int s = 0; s < fold; ++s) {
                    const auto& src = ds.examples[m.sources[static_cast<size_t>(s)]];
                    for (size_t j = 0; j < direct.size(); ++j) {
                        direct[j] += m.policy.weights[static_cast<size_t>(s)] *
                                     src.features->values[j];
                    }
                }
                for (size_t j = 0; j < direct.size(); ++j) {
                    CHECK(std::abs(m.features->values[j] - direct[j]) < 1e-10);
                }
            }
        }
    }

    SUBCASE("empty pool is a contract error") {
        Rng rng(1);
        CHECK_THROWS_AS(make_foldk_batch(gen, ds, {}, 3, 2, rng), ContractError);
    }
}

TEST_CASE("label mixing commutes with applying the policy to stacked one-hots") {
    auto ds = tiny_vector_dataset();
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        MixPolicy p{{rng.uniform_open01(), 0.0}};
        p.weights[1] = 1.0 - p.weights[0];
        const size_t i = rng.uniform_index(ds.size());
        const size_t j = rng.uniform_index(ds.size());
        // route 1: mix the one-hot vectors
        auto a = one_hot(ds.examples[i].label, 10), b = one_hot(ds.examples[j].label, 10);
        std::vector<double> route1(10);
        for (int c = 0; c < 10; ++c) {
            route1[static_cast<size_t>(c)] = p.weights[0] * a.probs[static_cast<size_t>(c)] +
                                             p.weights[1] * b.probs[static_cast<size_t>(c)];
        }
        // route 2: G(X) * lambda as a matrix product over the stacked one-hots
        auto g = Tensor::create({10, 2},
                                [&] {
                                    std::vector<double> m(20, 0.0);
                                    m[static_cast<size_t>(ds.examples[i].label) * 2] = 1.0;
                                    m[static_cast<size_t>(ds.examples[j].label) * 2 + 1] = 1.0;
                                    return m;
                                }());
        auto lambda = Tensor::vector({p.weights[0], p.weights[1]});
        auto route2 = matmul(g, lambda);
        for (int c = 0; c < 10; ++c) {
            CHECK(std::abs(route1[static_cast<size_t>(c)] -
                           route2->values[static_cast<size_t>(c)]) < 1e-12);
        }
    }
}

TEST_CASE("standard mixup baseline") {
    auto ds = tiny_vector_dataset();

    SUBCASE("Beta(1,1) draws average to one half") {
        Rng rng(123);
        MixupBaselineConfig cfg{1.0};
        double acc = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) acc += rng.beta(cfg.beta_param, cfg.beta_param);
        CHECK(std::abs(acc / n - 0.5) < 0.01);
    }
    SUBCASE("small beta concentrates draws near the endpoints") {
        Rng rng(7);
        int middle = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const double l = rng.beta(0.05, 0.05);
            if (l > 0.2 && l < 0.8) ++middle;
        }
        CHECK(middle < n / 10);
    }
    SUBCASE("fixed seed reproduces draws; policies are valid fold-2 mixes") {
        Rng r1(9), r2(9);
        auto pairs = draw_pairs(ds.size(), 8, r1);
        auto pairs2 = draw_pairs(ds.size(), 8, r2);
        auto a = standard_mixup_batch({2.0}, ds, pairs, r1);
        auto b = standard_mixup_batch({2.0}, ds, pairs2, r2);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].policy.weights == b[i].policy.weights);
            a[i].policy.validate();
            a[i].soft_label.validate();
        }
    }
    SUBCASE("beta_param must be positive") {
        Rng rng(1);
        CHECK_THROWS_AS(standard_mixup_batch({0.0}, ds, {{0, 1}}, rng), ContractError);
    }
}

TEST_CASE("intrusion oracle") {
    auto ds = tiny_vector_dataset();

    SUBCASE("exact collision with an opposite-class point intrudes at radius 0") {
        MixedExample m;
        m.features = Tensor::vector({0.5, 0.5}); // equals example 3, label 7
        m.soft_label = one_hot(1, 10);
        m.soft_label.probs[1] = 0.6; // non-degenerate, argmax 1
        m.soft_label.probs[5] = 0.4;
        m.fold = 2;
        m.policy.weights = {0.6, 0.4};
        CHECK(intrusion_oracle(ds, m, 0.0) == IntrusionVerdict::Intruding);
    }
    SUBCASE("a point not present in the dataset is clean at radius 0") {
        MixedExample m;
        m.features = Tensor::vector({0.111, 0.222});
        m.soft_label.probs.assign(10, 0.0);
        m.soft_label.probs[1] = 0.6;
        m.soft_label.probs[5] = 0.4;
        m.fold = 2;
        m.policy.weights = {0.6, 0.4};
        CHECK(intrusion_oracle(ds, m, 0.0) == IntrusionVerdict::Clean);
    }
    SUBCASE("degenerate policies are rejected") {
        MixedExample m;
        m.features = Tensor::vector({0.5, 0.5});
        m.soft_label = one_hot(1, 10);
        m.policy.weights = {1.0, 0.0};
        CHECK_THROWS_AS(intrusion_oracle(ds, m, 0.0), ContractError);
    }
    SUBCASE("two-moons midpoint landing on the other arc intrudes at the noise scale") {
        const double noise = 0.05;
        SyntheticManifoldSpec spec{ManifoldKind::TwoMoons, 2, 500, noise, 17};
        auto moons = generate_synthetic(spec);

        // Search the exact arc geometry for an opposite-class pair whose
        // 0.55-mix lands on the class-1 arc.
        double best_dist = 1e9;
        std::array<double, 2> x1{}, x2{};
        const double gamma = 0.55;
        for (int ia = 0; ia <= 200; ++ia) {
            for (int ib = 0; ib <= 200; ++ib) {
                auto p0 = moon_point(0, M_PI * ia / 200.0);
                auto p1 = moon_point(1, M_PI * ib / 200.0);
                const double mx = gamma * p0[0] + (1 - gamma) * p1[0];
                const double my = gamma * p0[1] + (1 - gamma) * p1[1];
                // distance to the class-1 arc, measured in arc space
                const double ax = 3.0 * mx - 1.0, ay = 1.5 * my - 0.5;
                const double d =
                    std::abs(std::sqrt((ax - 1.0) * (ax - 1.0) + (ay - 0.5) * (ay - 0.5)) - 1.0);
                if (ay <= 0.5 && d < best_dist) {
                    best_dist = d;
                    x1 = p0;
                    x2 = p1;
                }
            }
        }
        REQUIRE(best_dist < 1e-2); // the mix really lands on the opposite arc

        MixedExample m;
        m.features = Tensor::vector({gamma * x1[0] + (1 - gamma) * x2[0],
                                     gamma * x1[1] + (1 - gamma) * x2[1]});
        m.soft_label.probs = {gamma, 1 - gamma}; // argmax = class 0, landing on arc 1
        m.fold = 2;
        m.policy.weights = {gamma, 1 - gamma};
        // oracle uses the dataset's own 2-class labels
        MixedExample m2 = m;
        m2.soft_label.probs = {gamma, 1 - gamma};
        CHECK(intrusion_oracle(moons, m2, noise) == IntrusionVerdict::Intruding);
    }
}

TEST_CASE("gradients flow through sampling into the generator") {
    auto ds = tiny_vector_dataset();
    PolicyRegionGenerator gen({2}, ModelConfig{.hidden = 8}, 77);

    auto x1 = stack_features(ds, {0, 2});
    auto x2 = stack_features(ds, {1, 3});
    auto [alpha, delta] = gen.forward_region(x1, x2);
    auto gamma = sample_gamma_batch(alpha, delta, {0.3, 0.8});
    auto ones = Tensor::vector({1.0, 1.0});
    auto one_minus = add(scale(gamma, -1.0), ones);
    auto mixed = add(rowwise_scale(x1, gamma), rowwise_scale(x2, one_minus));
    backward(mean(mixed));

    bool any_nonzero = false;
    for (const auto& p : gen.params()) {
        for (double g : p->grad) {
            if (g != 0.0) any_nonzero = true;
        }
        p->zero_grad();
    }
    CHECK(any_nonzero);
}

TEST_CASE("simplex invariants over random policy constructions") {
    auto ds = tiny_vector_dataset();
    PolicyRegionGenerator gen({2}, ModelConfig{.hidden = 8}, 88);
    Rng rng(99);
    auto pairs = draw_pairs(ds.size(), 50, rng);
    auto pool = make_fold2_batch(gen, ds, pairs, rng);
    for (const auto& m : pool) m.policy.validate();
    for (int fold = 3; fold <= 5; ++fold) {
        pool = make_foldk_batch(gen, ds, pool, fold, 50, rng);
        for (const auto& m : pool) {
            m.policy.validate();
            m.soft_label.validate();
        }
    }
}
