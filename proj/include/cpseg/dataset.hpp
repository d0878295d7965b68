#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cpseg/grid.hpp"

namespace cpseg {

/// Polyline annotations in image coordinates, or in world coordinates with an
/// affine world->pixel transform: (col,row) = (a X + b Y + c, d X + e Y + f).
struct Annotation {
    std::vector<std::vector<std::array<double, 2>>> polylines; // vertices (x,y)
    std::optional<std::array<double, 6>> transform;
};

Annotation parse_annotation_json(const std::string& text);
Annotation load_annotation(const std::string& path);

/// 8-connected Bresenham segment; plots only in-bounds pixels. Endpoints are
/// canonicalized first so drawing is direction-independent.
void draw_segment(BinaryMask& mask, Pixel a, Pixel b);

/// Rasterize polylines into a one-pixel-wide mask. Vertices are rounded
/// half-away-from-zero; out-of-bounds portions are clipped.
BinaryMask rasterize_polylines(const Annotation& ann, int height, int width);

struct Patch {
    ProbabilityMap image;
    BinaryMask label;
    int tile_row = 0;
    int tile_col = 0;
};

/// Row-major tiling; patches with fewer than min_fg label pixels are dropped.
/// tile must divide both dimensions.
std::vector<Patch> tile_and_filter(const ProbabilityMap& image, const BinaryMask& label,
                                   int tile, size_t min_fg);

} // namespace cpseg
