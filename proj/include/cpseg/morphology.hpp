#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "cpseg/grid.hpp"

namespace cpseg {

/// Per-pixel shortest Euclidean distance to a source set. dist is exact
/// (sqrt of an integer squared distance); +inf where the source set is empty.
struct DistanceField {
    int height = 0;
    int width = 0;
    std::vector<double> dist;

    double at(int r, int c) const { return dist[static_cast<size_t>(r) * width + c]; }
};

/// Connected-component labels: 0 = background, 1..count = instances in
/// raster-scan order of first-encountered pixel.
struct InstanceLabeling {
    int height = 0;
    int width = 0;
    std::vector<int32_t> labels;
    int count = 0;

    int32_t at(int r, int c) const { return labels[static_cast<size_t>(r) * width + c]; }
};

/// Exact squared Euclidean distances (integers, stored as double;
/// +inf where the source set is empty). Two-pass lower-envelope transform.
std::vector<double> edt_squared(const BinaryMask& source);

DistanceField edt(const BinaryMask& source);

/// Shortest distance from p to the set omega; +inf if omega is empty.
double min_dis(Pixel p, const BinaryMask& omega);

/// Iterative thinning to a one-pixel-wide skeleton. Preserves 8-connected
/// component count; a one-pixel-wide curve is a fixpoint up to endpoints.
BinaryMask skeletonize(const BinaryMask& mask);

InstanceLabeling connected_components(const BinaryMask& mask, int connectivity = 8);

/// Pixels whose distance to skel exceeds delta (strict). Empty skel -> full grid.
BinaryMask far_region(const BinaryMask& skel, double delta);

/// Skel_fG = skel_g AND far_region(skel_p, delta); Skel_fP symmetric.
std::pair<BinaryMask, BinaryMask> failed_skeletons(const BinaryMask& skel_p,
                                                   const BinaryMask& skel_g,
                                                   double delta);

bool has_2x2_block(const BinaryMask& mask);

/// mask AND NOT other, elementwise.
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_minus(const BinaryMask& a, const BinaryMask& b);

} // namespace cpseg
