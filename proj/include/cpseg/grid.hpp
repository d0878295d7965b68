#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cpseg {

struct Pixel {
    int row = 0;
    int col = 0;
    bool operator==(const Pixel&) const = default;
};

/// Per-pixel foreground probability in [0,1], row-major.
struct ProbabilityMap {
    int height = 0;
    int width = 0;
    std::vector<float> values;

    ProbabilityMap() = default;
    ProbabilityMap(int h, int w, float fill = 0.0f)
        : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("ProbabilityMap: non-positive size");
    }

    float& at(int r, int c) { return values[static_cast<size_t>(r) * width + c]; }
    float at(int r, int c) const { return values[static_cast<size_t>(r) * width + c]; }
    size_t size() const { return values.size(); }
    bool operator==(const ProbabilityMap&) const = default;
};

/// Boolean raster. Skeletons are BinaryMasks that are additionally one pixel wide.
struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int h, int w, bool fill = false)
        : height(h), width(w), bits(static_cast<size_t>(h) * w, fill ? 1 : 0) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("BinaryMask: non-positive size");
    }

    uint8_t& at(int r, int c) { return bits[static_cast<size_t>(r) * width + c]; }
    uint8_t at(int r, int c) const { return bits[static_cast<size_t>(r) * width + c]; }
    bool get(int r, int c) const { return bits[static_cast<size_t>(r) * width + c] != 0; }
    void set(int r, int c, bool v = true) { bits[static_cast<size_t>(r) * width + c] = v ? 1 : 0; }
    bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
    size_t size() const { return bits.size(); }

    size_t count() const {
        size_t n = 0;
        for (uint8_t b : bits) n += (b != 0);
        return n;
    }
    bool empty_fg() const { return count() == 0; }
    bool operator==(const BinaryMask&) const = default;
};

inline void require_same_shape(int h1, int w1, int h2, int w2, const char* what) {
    if (h1 != h2 || w1 != w2) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

/// S_Bin = (S > tau), strict.
BinaryMask threshold(const ProbabilityMap& prob, double tau);

} // namespace cpseg
