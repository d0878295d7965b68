#include "cpseg/morphology.hpp"

#include <cmath>
#include <cstdlib>

namespace cpseg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared-distance transform by lower envelope of parabolas.
// f holds squared distances (or +inf); writes exact integer results into d.
void dt1d(const std::vector<double>& f, int n, std::vector<double>& d,
          std::vector<int>& v, std::vector<double>& z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        double s;
        while (true) {
            int p = v[k];
            if (f[p] == kInf) {
                // vertex at infinity is dominated everywhere
                --k;
                if (k < 0) break;
                continue;
            }
            s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
                (2.0 * q - 2.0 * p);
            if (s > z[k]) break;
            --k;
            if (k < 0) break;
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
        } else {
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = kInf;
        }
    }
    if (f[v[0]] == kInf) {
        for (int q = 0; q < n; ++q) d[q] = kInf;
        return;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

// Neighbors clockwise from north: P2..P9 of the thinning literature.
constexpr int kDr[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDc[8] = {0, 1, 1, 1, 0, -1, -1, -1};

inline void gather_neighbors(const BinaryMask& m, int r, int c, int p[8]) {
    for (int k = 0; k < 8; ++k) {
        int rr = r + kDr[k], cc = c + kDc[k];
        p[k] = (m.in_bounds(rr, cc) && m.get(rr, cc)) ? 1 : 0;
    }
}

// Yokoi connectivity number for 8-connected foreground; 1 means the pixel
// can be removed without splitting or merging components.
inline bool is_simple8(const BinaryMask& m, int r, int c) {
    // x1..x8 counterclockwise from east per the usual formulation
    int x[8];
    static constexpr int dr[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    static constexpr int dc[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    for (int k = 0; k < 8; ++k) {
        int rr = r + dr[k], cc = c + dc[k];
        x[k] = (m.in_bounds(rr, cc) && m.get(rr, cc)) ? 1 : 0;
    }
    int cnum = 0;
    for (int k = 0; k < 8; k += 2) {
        int xk = 1 - x[k];
        int xk1 = 1 - x[(k + 1) % 8];
        int xk2 = 1 - x[(k + 2) % 8];
        cnum += xk - xk * xk1 * xk2;
    }
    return cnum == 1;
}

} // namespace

std::vector<double> edt_squared(const BinaryMask& source) {
    int h = source.height, w = source.width;
    std::vector<double> g(static_cast<size_t>(h) * w);

    // column pass: 1-D distance in rows to the nearest source pixel
    for (int c = 0; c < w; ++c) {
        int last = -1;
        for (int r = 0; r < h; ++r)
            g[static_cast<size_t>(r) * w + c] = kInf;
        for (int r = 0; r < h; ++r) {
            if (source.get(r, c)) {
                last = r;
                g[static_cast<size_t>(r) * w + c] = 0.0;
            } else if (last >= 0) {
                double d = r - last;
                g[static_cast<size_t>(r) * w + c] = d * d;
            }
        }
        last = -1;
        for (int r = h - 1; r >= 0; --r) {
            if (source.get(r, c)) {
                last = r;
            } else if (last >= 0) {
                double d = last - r;
                double d2 = d * d;
                auto& cell = g[static_cast<size_t>(r) * w + c];
                if (d2 < cell) cell = d2;
            }
        }
    }

    // row pass: lower envelope over the column results
    std::vector<double> f(w), d(w), z(w + 1);
    std::vector<int> v(w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) f[c] = g[static_cast<size_t>(r) * w + c];
        dt1d(f, w, d, v, z);
        for (int c = 0; c < w; ++c) g[static_cast<size_t>(r) * w + c] = d[c];
    }
    return g;
}

DistanceField edt(const BinaryMask& source) {
    DistanceField out;
    out.height = source.height;
    out.width = source.width;
    out.dist = edt_squared(source);
    for (double& v : out.dist)
        if (v != kInf) v = std::sqrt(v);
    return out;
}

double min_dis(Pixel p, const BinaryMask& omega) {
    if (!omega.in_bounds(p.row, p.col))
        throw std::out_of_range("min_dis: pixel outside grid");
    return edt(omega).at(p.row, p.col);
}

BinaryMask skeletonize(const BinaryMask& mask) {
    BinaryMask cur = mask;
    std::vector<size_t> kill;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            kill.clear();
            for (int r = 0; r < cur.height; ++r) {
                for (int c = 0; c < cur.width; ++c) {
                    if (!cur.get(r, c)) continue;
                    int p[8];
                    gather_neighbors(cur, r, c, p);
                    // Guo-Hall two-subfield conditions; neighbor layout is
                    // p[0]=N p[1]=NE p[2]=E p[3]=SE p[4]=S p[5]=SW p[6]=W p[7]=NW
                    int n2 = p[0], n3 = p[1], n4 = p[2], n5 = p[3];
                    int n6 = p[4], n7 = p[5], n8 = p[6], n9 = p[7];
                    int cnum = ((1 - n2) & (n3 | n4)) + ((1 - n4) & (n5 | n6)) +
                               ((1 - n6) & (n7 | n8)) + ((1 - n8) & (n9 | n2));
                    if (cnum != 1) continue;
                    int m1 = (n9 | n2) + (n3 | n4) + (n5 | n6) + (n7 | n8);
                    int m2 = (n2 | n3) + (n4 | n5) + (n6 | n7) + (n8 | n9);
                    int nmin = std::min(m1, m2);
                    if (nmin < 2 || nmin > 3) continue;
                    int cond = pass == 0 ? ((n6 | n7 | (1 - n9)) & n8)
                                         : ((n2 | n3 | (1 - n5)) & n4);
                    if (cond != 0) continue;
                    kill.push_back(static_cast<size_t>(r) * cur.width + c);
                }
            }
            if (!kill.empty()) {
                changed = true;
                for (size_t i : kill) cur.bits[i] = 0;
            }
        }
    }

    // staircase cleanup: sequentially remove simple pixels that still sit
    // in a 2x2 all-foreground block
    changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r + 1 < cur.height; ++r) {
            for (int c = 0; c + 1 < cur.width; ++c) {
                if (!(cur.get(r, c) && cur.get(r, c + 1) && cur.get(r + 1, c) &&
                      cur.get(r + 1, c + 1)))
                    continue;
                const int rr[4] = {r, r, r + 1, r + 1};
                const int cc[4] = {c, c + 1, c, c + 1};
                for (int k = 0; k < 4; ++k) {
                    if (is_simple8(cur, rr[k], cc[k])) {
                        cur.set(rr[k], cc[k], false);
                        changed = true;
                        break;
                    }
                }
            }
        }
        if (!changed && has_2x2_block(cur)) {
            // locally non-simple block pixels can still be globally removable
            // when their neighborhood closes a loop elsewhere
            int n_comp = connected_components(cur, 8).count;
            for (int r = 0; r + 1 < cur.height && !changed; ++r) {
                for (int c = 0; c + 1 < cur.width && !changed; ++c) {
                    if (!(cur.get(r, c) && cur.get(r, c + 1) && cur.get(r + 1, c) &&
                          cur.get(r + 1, c + 1)))
                        continue;
                    const int rr[4] = {r, r, r + 1, r + 1};
                    const int cc[4] = {c, c + 1, c, c + 1};
                    for (int k = 0; k < 4; ++k) {
                        cur.set(rr[k], cc[k], false);
                        if (connected_components(cur, 8).count == n_comp) {
                            changed = true;
                            break;
                        }
                        cur.set(rr[k], cc[k]);
                    }
                }
            }
        }
    }
    return cur;
}

InstanceLabeling connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8)
        throw std::invalid_argument("connected_components: connectivity must be 4 or 8");
    InstanceLabeling out;
    out.height = mask.height;
    out.width = mask.width;
    out.labels.assign(mask.size(), 0);

    const int n_nbr = connectivity;
    static constexpr int dr8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dc8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dr4[4] = {-1, 0, 0, 1};
    static constexpr int dc4[4] = {0, -1, 1, 0};
    const int* dr = connectivity == 8 ? dr8 : dr4;
    const int* dc = connectivity == 8 ? dc8 : dc4;

    std::vector<Pixel> stack;
    for (int r = 0; r < mask.height; ++r) {
        for (int c = 0; c < mask.width; ++c) {
            if (!mask.get(r, c) || out.at(r, c) != 0) continue;
            ++out.count;
            out.labels[static_cast<size_t>(r) * mask.width + c] = out.count;
            stack.push_back({r, c});
            while (!stack.empty()) {
                Pixel p = stack.back();
                stack.pop_back();
                for (int k = 0; k < n_nbr; ++k) {
                    int rr = p.row + dr[k], cc = p.col + dc[k];
                    if (!mask.in_bounds(rr, cc) || !mask.get(rr, cc)) continue;
                    auto& lab = out.labels[static_cast<size_t>(rr) * mask.width + cc];
                    if (lab == 0) {
                        lab = out.count;
                        stack.push_back({rr, cc});
                    }
                }
            }
        }
    }
    return out;
}

BinaryMask far_region(const BinaryMask& skel, double delta) {
    std::vector<double> d2 = edt_squared(skel);
    double limit = delta * delta;
    BinaryMask out(skel.height, skel.width);
    for (size_t i = 0; i < d2.size(); ++i) out.bits[i] = d2[i] > limit ? 1 : 0;
    return out;
}

std::pair<BinaryMask, BinaryMask> failed_skeletons(const BinaryMask& skel_p,
                                                   const BinaryMask& skel_g,
                                                   double delta) {
    require_same_shape(skel_p.height, skel_p.width, skel_g.height, skel_g.width,
                       "failed_skeletons");
    BinaryMask fg = mask_and(skel_g, far_region(skel_p, delta));
    BinaryMask fp = mask_and(skel_p, far_region(skel_g, delta));
    return {fg, fp};
}

bool has_2x2_block(const BinaryMask& mask) {
    for (int r = 0; r + 1 < mask.height; ++r)
        for (int c = 0; c + 1 < mask.width; ++c)
            if (mask.get(r, c) && mask.get(r, c + 1) && mask.get(r + 1, c) &&
                mask.get(r + 1, c + 1))
                return true;
    return false;
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a.height, a.width, b.height, b.width, "mask_and");
    BinaryMask out(a.height, a.width);
    for (size_t i = 0; i < a.size(); ++i) out.bits[i] = a.bits[i] & b.bits[i];
    return out;
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a.height, a.width, b.height, b.width, "mask_or");
    BinaryMask out(a.height, a.width);
    for (size_t i = 0; i < a.size(); ++i) out.bits[i] = a.bits[i] | b.bits[i];
    return out;
}

BinaryMask mask_minus(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a.height, a.width, b.height, b.width, "mask_minus");
    BinaryMask out(a.height, a.width);
    for (size_t i = 0; i < a.size(); ++i) out.bits[i] = a.bits[i] & static_cast<uint8_t>(1 - b.bits[i]);
    return out;
}

} // namespace cpseg
