#include "cpseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>

namespace cpseg {

namespace {

struct FileCloser {
    void operator()(FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

// Reads any 8-bit PNG, expanding palette/gray-low-bit, stripping 16-bit and alpha.
std::vector<uint8_t> read_png_first_channel(const std::string& path, int& height, int& width) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("malformed PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    if (w == 0 || h == 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("zero-size image: " + path);
    }

    size_t rowbytes = png_get_rowbytes(png, info);
    size_t channels = rowbytes / w;
    std::vector<uint8_t> raw(rowbytes * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 r = 0; r < h; ++r) rows[r] = raw.data() + r * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    height = static_cast<int>(h);
    width = static_cast<int>(w);
    std::vector<uint8_t> out(static_cast<size_t>(h) * w);
    for (png_uint_32 r = 0; r < h; ++r)
        for (png_uint_32 c = 0; c < w; ++c)
            out[static_cast<size_t>(r) * w + c] = raw[r * rowbytes + c * channels];
    return out;
}

void write_png(const std::string& path, const uint8_t* data, int height, int width, int channels) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG write failed: " + path);
    }
    png_init_io(png, fp.get());
    int color = (channels == 3) ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, width, height, 8, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(height);
    for (int r = 0; r < height; ++r)
        rows[r] = const_cast<png_bytep>(data + static_cast<size_t>(r) * width * channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

uint32_t read_u32le(std::istream& in) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& out, uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace

BinaryMask load_mask(const std::string& path) {
    int h = 0, w = 0;
    std::vector<uint8_t> gray = read_png_first_channel(path, h, w);
    BinaryMask mask(h, w);
    for (size_t i = 0; i < gray.size(); ++i) mask.bits[i] = gray[i] >= 128 ? 1 : 0;
    return mask;
}

void save_mask(const BinaryMask& mask, const std::string& path) {
    std::vector<uint8_t> gray(mask.size());
    for (size_t i = 0; i < gray.size(); ++i) gray[i] = mask.bits[i] ? 255 : 0;
    write_png(path, gray.data(), mask.height, mask.width, 1);
}

ProbabilityMap load_gray(const std::string& path) {
    int h = 0, w = 0;
    std::vector<uint8_t> gray = read_png_first_channel(path, h, w);
    ProbabilityMap img(h, w);
    for (size_t i = 0; i < gray.size(); ++i) img.values[i] = static_cast<float>(gray[i]) / 255.0f;
    return img;
}

void save_gray(const ProbabilityMap& img, const std::string& path) {
    std::vector<uint8_t> gray(img.size());
    for (size_t i = 0; i < gray.size(); ++i) {
        float v = std::clamp(img.values[i], 0.0f, 1.0f);
        gray[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
    }
    write_png(path, gray.data(), img.height, img.width, 1);
}

ProbabilityMap load_prob(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CPLR", 4) != 0)
        throw std::runtime_error("bad CPLR magic in " + path);
    uint32_t h = read_u32le(in);
    uint32_t w = read_u32le(in);
    if (h == 0 || w == 0) throw std::runtime_error("zero dimension in " + path);
    uint64_t n = static_cast<uint64_t>(h) * w;
    if (n > (1ull << 31)) throw std::runtime_error("dimension overflow in " + path);

    ProbabilityMap prob(static_cast<int>(h), static_cast<int>(w));
    static_assert(sizeof(float) == 4);
    in.read(reinterpret_cast<char*>(prob.values.data()), static_cast<std::streamsize>(n * 4));
    if (!in) throw std::runtime_error("truncated CPLR payload in " + path);

    bool out_of_range = false;
    for (float& v : prob.values) {
        if (!std::isfinite(v)) throw std::runtime_error("non-finite value in " + path);
        if (v < -1e-6f || v > 1.0f + 1e-6f) out_of_range = true;
        v = std::clamp(v, 0.0f, 1.0f);
    }
    if (out_of_range)
        std::cerr << "warning: " << path << " contained values outside [0,1]; clamped\n";
    return prob;
}

void save_prob(const ProbabilityMap& prob, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write("CPLR", 4);
    write_u32le(out, static_cast<uint32_t>(prob.height));
    write_u32le(out, static_cast<uint32_t>(prob.width));
    out.write(reinterpret_cast<const char*>(prob.values.data()),
              static_cast<std::streamsize>(prob.values.size() * 4));
    if (!out) throw std::runtime_error("write failed: " + path);
}

void save_heatmap(const std::vector<double>& values, int height, int width, const std::string& path) {
    if (values.size() != static_cast<size_t>(height) * width)
        throw std::invalid_argument("save_heatmap: size mismatch");
    double lo = values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
    double hi = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    double span = hi > lo ? hi - lo : 1.0;

    std::vector<uint8_t> rgb(values.size() * 3);
    for (size_t i = 0; i < values.size(); ++i) {
        double t = (values[i] - lo) / span;
        // blue -> cyan -> yellow -> red
        double r = std::clamp(1.5 - std::abs(4.0 * t - 3.0), 0.0, 1.0);
        double g = std::clamp(1.5 - std::abs(4.0 * t - 2.0), 0.0, 1.0);
        double b = std::clamp(1.5 - std::abs(4.0 * t - 1.0), 0.0, 1.0);
        rgb[i * 3 + 0] = static_cast<uint8_t>(std::lround(r * 255));
        rgb[i * 3 + 1] = static_cast<uint8_t>(std::lround(g * 255));
        rgb[i * 3 + 2] = static_cast<uint8_t>(std::lround(b * 255));
    }
    write_png(path, rgb.data(), height, width, 3);
}

} // namespace cpseg
