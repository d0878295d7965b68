#include "cpseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpseg/dataset.hpp"
#include "cpseg/morphology.hpp"
#include "cpseg/rng.hpp"

namespace cpseg {

namespace {

void validate(const SceneConfig& cfg) {
    if (cfg.size < 64) throw std::invalid_argument("gen_scene: size must be >= 64");
    if (cfg.curve_count_min < 1 || cfg.curve_count_max < cfg.curve_count_min)
        throw std::invalid_argument("gen_scene: bad curve count range");
    if (cfg.occluder_count_min < 0 || cfg.occluder_count_max < cfg.occluder_count_min)
        throw std::invalid_argument("gen_scene: bad occluder count range");
    if (cfg.occluder_radius_min <= 0.0 || cfg.occluder_radius_max < cfg.occluder_radius_min)
        throw std::invalid_argument("gen_scene: bad occluder radius range");
    if (cfg.noise_std < 0.0) throw std::invalid_argument("gen_scene: negative noise_std");
}

// quadratic Bezier sampled densely and joined with Bresenham segments
void draw_curve(BinaryMask& gt, Rng& rng, int size) {
    double m = size * 0.08;
    double x0 = rng.uniform(-m, size + m), y0 = rng.uniform(-m, size + m);
    double x2 = rng.uniform(-m, size + m), y2 = rng.uniform(-m, size + m);
    double x1 = 0.5 * (x0 + x2) + rng.uniform(-0.4, 0.4) * size;
    double y1 = 0.5 * (y0 + y2) + rng.uniform(-0.4, 0.4) * size;

    int steps = 4 * size;
    Pixel prev{0, 0};
    bool have_prev = false;
    for (int s = 0; s <= steps; ++s) {
        double t = static_cast<double>(s) / steps;
        double omt = 1.0 - t;
        double x = omt * omt * x0 + 2.0 * omt * t * x1 + t * t * x2;
        double y = omt * omt * y0 + 2.0 * omt * t * y1 + t * t * y2;
        Pixel cur{static_cast<int>(std::lround(y)), static_cast<int>(std::lround(x))};
        if (have_prev && !(cur == prev)) draw_segment(gt, prev, cur);
        prev = cur;
        have_prev = true;
    }
}

// coarse random lattice, bilinearly interpolated
std::vector<double> smooth_texture(Rng& rng, int size, double amplitude) {
    int cell = 16;
    int knots = size / cell + 2;
    std::vector<double> lattice(static_cast<size_t>(knots) * knots);
    for (double& v : lattice) v = rng.uniform(-1.0, 1.0);

    std::vector<double> tex(static_cast<size_t>(size) * size);
    for (int r = 0; r < size; ++r) {
        int kr = r / cell;
        double fr = static_cast<double>(r % cell) / cell;
        for (int c = 0; c < size; ++c) {
            int kc = c / cell;
            double fc = static_cast<double>(c % cell) / cell;
            double v00 = lattice[static_cast<size_t>(kr) * knots + kc];
            double v01 = lattice[static_cast<size_t>(kr) * knots + kc + 1];
            double v10 = lattice[static_cast<size_t>(kr + 1) * knots + kc];
            double v11 = lattice[static_cast<size_t>(kr + 1) * knots + kc + 1];
            double v = v00 * (1 - fr) * (1 - fc) + v01 * (1 - fr) * fc +
                       v10 * fr * (1 - fc) + v11 * fr * fc;
            tex[static_cast<size_t>(r) * size + c] = amplitude * v;
        }
    }
    return tex;
}

} // namespace

Scene gen_scene(const SceneConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    int size = cfg.size;

    BinaryMask gt(size, size);
    for (int attempt = 0; attempt < 64; ++attempt) {
        gt = BinaryMask(size, size);
        int n_curves = static_cast<int>(rng.uniform_int(cfg.curve_count_min, cfg.curve_count_max));
        for (int i = 0; i < n_curves; ++i) draw_curve(gt, rng, size);
        gt = skeletonize(gt); // enforce one-pixel width at crossings
        // X-shaped crossings can leave a 2x2 block no thinning can resolve
        // without splitting a curve; redraw the scene in that case
        if (!gt.empty_fg() && !has_2x2_block(gt)) break;
        gt = BinaryMask(size, size);
    }
    if (gt.empty_fg()) throw std::runtime_error("gen_scene: failed to place any curve");

    // background texture, then ridge profile from the exact distance to gt
    std::vector<double> bg = smooth_texture(rng, size, 0.08);
    for (double& v : bg) v += 0.30;

    std::vector<double> d2 = edt_squared(gt);
    const double ridge_amp = 0.55;
    const double ridge_w = 1.3;
    ProbabilityMap image(size, size);
    std::vector<double> img(static_cast<size_t>(size) * size);
    for (size_t i = 0; i < img.size(); ++i)
        img[i] = bg[i] + ridge_amp * std::exp(-d2[i] / (2.0 * ridge_w * ridge_w));

    // occluder disks hide the ridge but leave gt untouched
    int n_occ = static_cast<int>(rng.uniform_int(cfg.occluder_count_min, cfg.occluder_count_max));
    for (int k = 0; k < n_occ; ++k) {
        double cr = rng.uniform(0.0, size);
        double cc = rng.uniform(0.0, size);
        double rad = rng.uniform(cfg.occluder_radius_min, cfg.occluder_radius_max);
        int r0 = std::max(0, static_cast<int>(std::floor(cr - rad)));
        int r1 = std::min(size - 1, static_cast<int>(std::ceil(cr + rad)));
        int c0 = std::max(0, static_cast<int>(std::floor(cc - rad)));
        int c1 = std::min(size - 1, static_cast<int>(std::ceil(cc + rad)));
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c)
                if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= rad * rad)
                    img[static_cast<size_t>(r) * size + c] = 0.85 * bg[static_cast<size_t>(r) * size + c];
    }

    for (size_t i = 0; i < img.size(); ++i) {
        double v = img[i];
        if (cfg.noise_std > 0.0) v += cfg.noise_std * rng.normal();
        image.values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return {std::move(image), std::move(gt)};
}

namespace {

// orders the pixels of one component along the curve by walking from an
// endpoint (or the first pixel for closed loops)
std::vector<Pixel> trace_component(const BinaryMask& skel, const InstanceLabeling& lab, int id) {
    std::vector<Pixel> pixels;
    for (int r = 0; r < skel.height; ++r)
        for (int c = 0; c < skel.width; ++c)
            if (lab.at(r, c) == id) pixels.push_back({r, c});

    auto degree = [&](Pixel p) {
        int d = 0;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                int rr = p.row + dr, cc = p.col + dc;
                if (skel.in_bounds(rr, cc) && lab.at(rr, cc) == id) ++d;
            }
        return d;
    };

    Pixel start = pixels.front();
    for (const Pixel& p : pixels)
        if (degree(p) <= 1) {
            start = p;
            break;
        }

    std::vector<Pixel> path;
    BinaryMask seen(skel.height, skel.width);
    std::vector<Pixel> stack{start};
    seen.set(start.row, start.col);
    while (!stack.empty()) {
        Pixel p = stack.back();
        stack.pop_back();
        path.push_back(p);
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                int rr = p.row + dr, cc = p.col + dc;
                if (skel.in_bounds(rr, cc) && lab.at(rr, cc) == id && !seen.get(rr, cc)) {
                    seen.set(rr, cc);
                    stack.push_back({rr, cc});
                }
            }
    }
    return path;
}

} // namespace

BinaryMask corrupt_skeleton(const BinaryMask& skel, int gap_count, int gap_len,
                            int ghost_count, uint64_t seed) {
    if (skel.empty_fg()) throw std::invalid_argument("corrupt_skeleton: empty skeleton");
    Rng rng(seed);
    BinaryMask out = skel;

    InstanceLabeling lab = connected_components(skel, 8);
    std::vector<std::vector<Pixel>> paths(lab.count);
    for (int id = 1; id <= lab.count; ++id) paths[id - 1] = trace_component(skel, lab, id);

    for (int g = 0; g < gap_count; ++g) {
        std::vector<int> eligible;
        for (int i = 0; i < lab.count; ++i)
            if (static_cast<int>(paths[i].size()) >= gap_len + 2) eligible.push_back(i);
        if (eligible.empty())
            throw std::runtime_error("corrupt_skeleton: skeleton too small for requested gaps");
        int comp = eligible[rng.uniform_int(0, static_cast<int64_t>(eligible.size()) - 1)];
        int start = static_cast<int>(
            rng.uniform_int(1, static_cast<int64_t>(paths[comp].size()) - gap_len - 1));
        for (int i = start; i < start + gap_len; ++i)
            out.set(paths[comp][i].row, paths[comp][i].col, false);
        // a component can host several gaps; keep its path but drop removed pixels
        std::vector<Pixel> remaining;
        for (int i = 0; i < static_cast<int>(paths[comp].size()); ++i)
            if (i < start || i >= start + gap_len) remaining.push_back(paths[comp][i]);
        paths[comp] = std::move(remaining);
    }

    if (ghost_count > 0) {
        std::vector<double> d2 = edt_squared(skel);
        const double clearance2 = 8.0 * 8.0; // keeps ghosts > 2*delta away for delta <= 4
        for (int g = 0; g < ghost_count; ++g) {
            for (int attempt = 0; attempt < 2000; ++attempt) {
                int r0 = static_cast<int>(rng.uniform_int(0, skel.height - 1));
                int c0 = static_cast<int>(rng.uniform_int(0, skel.width - 1));
                double ang = rng.uniform(0.0, 6.283185307179586);
                int len = static_cast<int>(rng.uniform_int(4, 8));
                int r1 = r0 + static_cast<int>(std::lround(len * std::sin(ang)));
                int c1 = c0 + static_cast<int>(std::lround(len * std::cos(ang)));
                if (!skel.in_bounds(r1, c1)) continue;

                BinaryMask stroke(skel.height, skel.width);
                draw_segment(stroke, {r0, c0}, {r1, c1});
                bool clear = true;
                for (size_t i = 0; i < stroke.size() && clear; ++i)
                    if (stroke.bits[i] && d2[i] <= clearance2) clear = false;
                if (!clear) continue;
                for (size_t i = 0; i < stroke.size(); ++i)
                    if (stroke.bits[i]) out.bits[i] = 1;
                break;
            }
        }
    }
    return out;
}

} // namespace cpseg
