#pragma once

#include <cstdint>
#include <utility>

#include "cpseg/grid.hpp"

namespace cpseg {

/// Configuration for curb-like synthetic scenes: thin bright ridges over a
/// textured background, partially hidden by occluder disks.
struct SceneConfig {
    int size = 128;
    int curve_count_min = 1;
    int curve_count_max = 3;
    int occluder_count_min = 2;
    int occluder_count_max = 5;
    double occluder_radius_min = 4.0;
    double occluder_radius_max = 9.0;
    double noise_std = 0.03;
    uint64_t seed = 1;
};

struct Scene {
    ProbabilityMap image; // grayscale in [0,1]
    BinaryMask gt;        // one-pixel-wide curve union, never empty
};

/// Deterministic scene generation. Occluders hide ridge evidence in the image
/// but never alter gt.
Scene gen_scene(const SceneConfig& cfg);

/// Cuts gap_count runs of gap_len consecutive pixels out of the skeleton and
/// adds ghost_count short strokes at least 8 pixels away from the original
/// skeleton. Deterministic given seed.
BinaryMask corrupt_skeleton(const BinaryMask& skel, int gap_count, int gap_len,
                            int ghost_count, uint64_t seed);

} // namespace cpseg
