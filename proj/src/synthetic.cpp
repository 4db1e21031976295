#include "adamixup/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "adamixup/rng.hpp"

namespace adamixup {

ManifoldKind manifold_kind_from_string(const std::string& s) {
    if (s == "gaussian-blobs") return ManifoldKind::GaussianBlobs;
    if (s == "two-moons") return ManifoldKind::TwoMoons;
    if (s == "ring-mixture") return ManifoldKind::RingMixture;
    throw ContractError("unknown synthetic generator '" + s +
                        "' (expected gaussian-blobs | two-moons | ring-mixture)");
}

std::string to_string(ManifoldKind kind) {
    switch (kind) {
        case ManifoldKind::GaussianBlobs: return "gaussian-blobs";
        case ManifoldKind::TwoMoons: return "two-moons";
        case ManifoldKind::RingMixture: return "ring-mixture";
    }
    return "?";
}

void SyntheticManifoldSpec::validate() const {
    if (num_classes < 2) throw ContractError("synthetic: num_classes must be >= 2");
    if (kind == ManifoldKind::TwoMoons && num_classes != 2) {
        throw ContractError("synthetic: two-moons requires exactly 2 classes");
    }
    if (per_class < 1) throw ContractError("synthetic: per_class must be >= 1");
    if (noise < 0.0) throw ContractError("synthetic: noise must be >= 0");
}

std::vector<std::array<double, 2>> blob_centers(int num_classes) {
    std::vector<std::array<double, 2>> centers;
    centers.reserve(static_cast<size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
        const double angle = 2.0 * M_PI * c / num_classes;
        centers.push_back({0.5 + 0.22 * std::cos(angle), 0.5 + 0.22 * std::sin(angle)});
    }
    return centers;
}

std::array<double, 2> moon_point(int cls, double t) {
    double x, y;
    if (cls == 0) {
        x = std::cos(t);
        y = std::sin(t);
    } else {
        x = 1.0 - std::cos(t);
        y = 0.5 - std::sin(t);
    }
    return {(x + 1.0) / 3.0, (y + 0.5) / 1.5};
}

Dataset generate_synthetic(const SyntheticManifoldSpec& spec) {
    spec.validate();
    Rng rng = Rng::stream(spec.seed, "synthetic-" + to_string(spec.kind));

    Dataset ds;
    ds.num_classes = spec.num_classes;
    ds.name = to_string(spec.kind);
    ds.examples.reserve(static_cast<size_t>(spec.num_classes) *
                        static_cast<size_t>(spec.per_class));

    auto push = [&](double u, double v, int label) {
        u = std::clamp(u + spec.noise * rng.normal(), 0.0, 1.0);
        v = std::clamp(v + spec.noise * rng.normal(), 0.0, 1.0);
        LabeledExample ex;
        ex.features = Tensor::vector({u, v});
        ex.label = label;
        ds.examples.push_back(std::move(ex));
    };

    switch (spec.kind) {
        case ManifoldKind::GaussianBlobs: {
            const auto centers = blob_centers(spec.num_classes);
            for (int c = 0; c < spec.num_classes; ++c) {
                for (int i = 0; i < spec.per_class; ++i) {
                    push(centers[static_cast<size_t>(c)][0], centers[static_cast<size_t>(c)][1],
                         c);
                }
            }
            break;
        }
        case ManifoldKind::TwoMoons: {
            for (int c = 0; c < 2; ++c) {
                for (int i = 0; i < spec.per_class; ++i) {
                    const auto p = moon_point(c, rng.uniform_in(0.0, M_PI));
                    push(p[0], p[1], c);
                }
            }
            break;
        }
        case ManifoldKind::RingMixture: {
            for (int c = 0; c < spec.num_classes; ++c) {
                const double radius =
                    spec.num_classes == 1
                        ? 0.3
                        : 0.12 + 0.33 * static_cast<double>(c) / (spec.num_classes - 1);
                for (int i = 0; i < spec.per_class; ++i) {
                    const double theta = rng.uniform_in(0.0, 2.0 * M_PI);
                    push(0.5 + radius * std::cos(theta), 0.5 + radius * std::sin(theta), c);
                }
            }
            break;
        }
    }
    return ds;
}

} // namespace adamixup
