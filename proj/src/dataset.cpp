#include "cpseg/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cpseg {

Annotation parse_annotation_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Annotation ann;
    if (j.contains("transform") && !j["transform"].is_null()) {
        auto t = j["transform"];
        if (!t.is_array() || t.size() != 6)
            throw std::invalid_argument("annotation: transform must have 6 entries");
        std::array<double, 6> a;
        for (size_t i = 0; i < 6; ++i) a[i] = t[i].get<double>();
        // affine must be invertible
        if (std::abs(a[0] * a[4] - a[1] * a[3]) < 1e-12)
            throw std::invalid_argument("annotation: singular transform");
        ann.transform = a;
    }
    if (!j.contains("polylines") || !j["polylines"].is_array())
        throw std::invalid_argument("annotation: missing polylines");
    for (const auto& line : j["polylines"]) {
        std::vector<std::array<double, 2>> poly;
        for (const auto& v : line) {
            if (!v.is_array() || v.size() != 2)
                throw std::invalid_argument("annotation: vertex must be [x,y]");
            poly.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        if (poly.size() < 2)
            throw std::invalid_argument("annotation: polyline needs >= 2 vertices");
        ann.polylines.push_back(std::move(poly));
    }
    if (ann.polylines.empty()) throw std::invalid_argument("annotation: no polylines");
    return ann;
}

Annotation load_annotation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_annotation_json(buf.str());
}

void draw_segment(BinaryMask& mask, Pixel a, Pixel b) {
    // canonical endpoint order so a->b and b->a rasterize identically
    if (b.row < a.row || (b.row == a.row && b.col < a.col)) std::swap(a, b);

    int r = a.row, c = a.col;
    int dx = std::abs(b.col - c), sx = c < b.col ? 1 : -1;
    int dy = -std::abs(b.row - r), sy = r < b.row ? 1 : -1;
    int err = dx + dy;
    while (true) {
        if (mask.in_bounds(r, c)) mask.set(r, c);
        if (r == b.row && c == b.col) break;
        int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            c += sx;
        }
        if (e2 <= dx) {
            err += dx;
            r += sy;
        }
    }
}

namespace {

int round_half_away(double v) {
    return static_cast<int>(v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

} // namespace

BinaryMask rasterize_polylines(const Annotation& ann, int height, int width) {
    if (ann.polylines.empty()) throw std::invalid_argument("rasterize_polylines: empty annotation");
    BinaryMask mask(height, width);
    for (const auto& poly : ann.polylines) {
        std::vector<Pixel> pts;
        pts.reserve(poly.size());
        for (const auto& v : poly) {
            double x = v[0], y = v[1];
            if (ann.transform) {
                const auto& t = *ann.transform;
                double px = t[0] * x + t[1] * y + t[2];
                double py = t[3] * x + t[4] * y + t[5];
                x = px;
                y = py;
            }
            pts.push_back({round_half_away(y), round_half_away(x)});
        }
        for (size_t i = 0; i + 1 < pts.size(); ++i)
            draw_segment(mask, pts[i], pts[i + 1]);
    }
    return mask;
}

std::vector<Patch> tile_and_filter(const ProbabilityMap& image, const BinaryMask& label,
                                   int tile, size_t min_fg) {
    require_same_shape(image.height, image.width, label.height, label.width, "tile_and_filter");
    if (tile <= 0 || image.height % tile != 0 || image.width % tile != 0)
        throw std::invalid_argument("tile_and_filter: tile must divide both dimensions");

    std::vector<Patch> out;
    for (int tr = 0; tr < image.height / tile; ++tr) {
        for (int tc = 0; tc < image.width / tile; ++tc) {
            Patch p;
            p.tile_row = tr;
            p.tile_col = tc;
            p.image = ProbabilityMap(tile, tile);
            p.label = BinaryMask(tile, tile);
            size_t fg = 0;
            for (int r = 0; r < tile; ++r) {
                for (int c = 0; c < tile; ++c) {
                    p.image.at(r, c) = image.at(tr * tile + r, tc * tile + c);
                    bool v = label.get(tr * tile + r, tc * tile + c);
                    p.label.set(r, c, v);
                    fg += v;
                }
            }
            if (fg >= min_fg) out.push_back(std::move(p));
        }
    }
    return out;
}

} // namespace cpseg
