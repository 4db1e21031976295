#ifndef ADAMIXUP_SYNTHETIC_HPP
#define ADAMIXUP_SYNTHETIC_HPP

#include <array>
#include <string>

#include "adamixup/dataset.hpp"

namespace adamixup {

enum class ManifoldKind { GaussianBlobs, TwoMoons, RingMixture };

ManifoldKind manifold_kind_from_string(const std::string& s);
std::string to_string(ManifoldKind kind);

/// 2-D labeled manifolds with exact membership geometry, deterministic under
/// the seed. Noise is added in feature space; features are clamped to [0,1].
struct SyntheticManifoldSpec {
    ManifoldKind kind = ManifoldKind::GaussianBlobs;
    int num_classes = 2;
    int per_class = 100;
    double noise = 0.05;
    uint64_t seed = 0;

    void validate() const;
};

Dataset generate_synthetic(const SyntheticManifoldSpec& spec);

// Blob centers sit on a circle of radius 0.22 around (0.5, 0.5); exposed so
// tests and the intrusion-radius computation can use exact geometry.
std::vector<std::array<double, 2>> blob_centers(int num_classes);

// Two-moons canonical arcs in feature space. Class 0: unit upper half circle
// at the origin; class 1: unit lower half circle at (1, 0.5); both mapped by
// u=(x+1)/3, v=(y+0.5)/1.5 into the unit square.
std::array<double, 2> moon_point(int cls, double t);

} // namespace adamixup

#endif
