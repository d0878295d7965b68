#include "cpseg/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cpseg/losses.hpp"
#include "cpseg/rng.hpp"

namespace cpseg {

namespace {

constexpr std::array<std::array<int, 4>, 7> kArch = {{
    // in_c, out_c, k, stride
    {1, 8, 3, 1},   // encoder conv + relu
    {8, 8, 3, 2},   // downsample
    {8, 16, 3, 1},  // encoder conv + relu
    {16, 16, 3, 2}, // downsample
    {16, 8, 3, 1},  // decoder conv (+skip, relu)
    {8, 8, 3, 1},   // decoder conv (+skip, relu)
    {8, 1, 1, 1},   // output head
}};

void conv_forward(const Tensor& in, const ConvLayer& L, Tensor& out) {
    int k = L.k, s = L.stride, p = k / 2;
    int oh = in.h / s, ow = in.w / s;
    out = Tensor(L.out_c, oh, ow);
    for (int oc = 0; oc < L.out_c; ++oc) {
        double* outp = out.plane(oc);
        double bias = L.b[oc];
        for (int i = 0; i < oh * ow; ++i) outp[i] = bias;
        for (int ic = 0; ic < L.in_c; ++ic) {
            const double* inp = in.plane(ic);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    double wv = L.w[((static_cast<size_t>(oc) * L.in_c + ic) * k + ky) * k + kx];
                    for (int oy = 0; oy < oh; ++oy) {
                        int iy = oy * s + ky - p;
                        if (iy < 0 || iy >= in.h) continue;
                        const double* src = inp + static_cast<size_t>(iy) * in.w;
                        double* dst = outp + static_cast<size_t>(oy) * ow;
                        if (s == 1) {
                            int x0 = std::max(0, p - kx);
                            int x1 = std::min(ow, in.w + p - kx);
                            int off = kx - p;
                            for (int ox = x0; ox < x1; ++ox) dst[ox] += wv * src[ox + off];
                        } else {
                            for (int ox = 0; ox < ow; ++ox) {
                                int ix = ox * s + kx - p;
                                if (ix < 0 || ix >= in.w) continue;
                                dst[ox] += wv * src[ix];
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv_backward(const Tensor& in, const ConvLayer& L, const Tensor& dout,
                   Tensor& din, ConvLayer& grad) {
    int k = L.k, s = L.stride, p = k / 2;
    int oh = dout.h, ow = dout.w;
    din = Tensor(L.in_c, in.h, in.w);
    grad.in_c = L.in_c;
    grad.out_c = L.out_c;
    grad.k = k;
    grad.stride = s;
    grad.w.assign(L.w.size(), 0.0);
    grad.b.assign(L.b.size(), 0.0);

    for (int oc = 0; oc < L.out_c; ++oc) {
        const double* dop = dout.plane(oc);
        double db = 0.0;
        for (int i = 0; i < oh * ow; ++i) db += dop[i];
        grad.b[oc] = db;
        for (int ic = 0; ic < L.in_c; ++ic) {
            const double* inp = in.plane(ic);
            double* dip = din.plane(ic);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    size_t widx = ((static_cast<size_t>(oc) * L.in_c + ic) * k + ky) * k + kx;
                    double wv = L.w[widx];
                    double dw = 0.0;
                    for (int oy = 0; oy < oh; ++oy) {
                        int iy = oy * s + ky - p;
                        if (iy < 0 || iy >= in.h) continue;
                        const double* src = inp + static_cast<size_t>(iy) * in.w;
                        double* dsrc = dip + static_cast<size_t>(iy) * in.w;
                        const double* drow = dop + static_cast<size_t>(oy) * ow;
                        if (s == 1) {
                            int x0 = std::max(0, p - kx);
                            int x1 = std::min(ow, in.w + p - kx);
                            int off = kx - p;
                            for (int ox = x0; ox < x1; ++ox) {
                                dw += drow[ox] * src[ox + off];
                                dsrc[ox + off] += wv * drow[ox];
                            }
                        } else {
                            for (int ox = 0; ox < ow; ++ox) {
                                int ix = ox * s + kx - p;
                                if (ix < 0 || ix >= in.w) continue;
                                dw += drow[ox] * src[ix];
                                dsrc[ix] += wv * drow[ox];
                            }
                        }
                    }
                    grad.w[widx] += dw;
                }
            }
        }
    }
}

Tensor upsample2(const Tensor& in) {
    Tensor out(in.ch, in.h * 2, in.w * 2);
    for (int c = 0; c < in.ch; ++c) {
        const double* src = in.plane(c);
        double* dst = out.plane(c);
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x)
                dst[static_cast<size_t>(y) * out.w + x] =
                    src[static_cast<size_t>(y / 2) * in.w + x / 2];
    }
    return out;
}

Tensor downsum2(const Tensor& dout) {
    Tensor din(dout.ch, dout.h / 2, dout.w / 2);
    for (int c = 0; c < dout.ch; ++c) {
        const double* src = dout.plane(c);
        double* dst = din.plane(c);
        for (int y = 0; y < dout.h; ++y)
            for (int x = 0; x < dout.w; ++x)
                dst[static_cast<size_t>(y / 2) * din.w + x / 2] +=
                    src[static_cast<size_t>(y) * dout.w + x];
    }
    return din;
}

Tensor relu(const Tensor& z) {
    Tensor a = z;
    for (double& v : a.v) v = v > 0.0 ? v : 0.0;
    return a;
}

Tensor add(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
    return out;
}

void relu_mask_inplace(Tensor& grad, const Tensor& z) {
    for (size_t i = 0; i < grad.v.size(); ++i)
        if (z.v[i] <= 0.0) grad.v[i] = 0.0;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void write_u32(std::ostream& o, uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    o.write(reinterpret_cast<char*>(b), 4);
}

void write_u64(std::ostream& o, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
    o.write(reinterpret_cast<char*>(b), 8);
}

uint32_t read_u32(std::istream& in) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("checkpoint: truncated");
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

uint64_t read_u64(std::istream& in) {
    uint8_t b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("checkpoint: truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

} // namespace

PredictorParams PredictorParams::architecture() {
    PredictorParams p;
    for (size_t i = 0; i < kArch.size(); ++i) {
        auto [ic, oc, k, s] = kArch[i];
        p.layers[i].in_c = ic;
        p.layers[i].out_c = oc;
        p.layers[i].k = k;
        p.layers[i].stride = s;
        p.layers[i].w.assign(static_cast<size_t>(oc) * ic * k * k, 0.0);
        p.layers[i].b.assign(oc, 0.0);
    }
    return p;
}

PredictorParams PredictorParams::he_init(uint64_t seed) {
    PredictorParams p = architecture();
    Rng rng(seed);
    for (auto& L : p.layers) {
        double std = std::sqrt(2.0 / (static_cast<double>(L.in_c) * L.k * L.k));
        for (double& w : L.w) w = std * rng.normal();
    }
    return p;
}

size_t PredictorParams::param_count() const {
    size_t n = 0;
    for (const auto& L : layers) n += L.w.size() + L.b.size();
    return n;
}

std::vector<double> PredictorParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (const auto& L : layers) {
        flat.insert(flat.end(), L.w.begin(), L.w.end());
        flat.insert(flat.end(), L.b.begin(), L.b.end());
    }
    return flat;
}

void PredictorParams::unflatten(const std::vector<double>& flat) {
    size_t pos = 0;
    for (auto& L : layers) {
        std::copy(flat.begin() + pos, flat.begin() + pos + L.w.size(), L.w.begin());
        pos += L.w.size();
        std::copy(flat.begin() + pos, flat.begin() + pos + L.b.size(), L.b.begin());
        pos += L.b.size();
    }
}

uint64_t PredictorParams::arch_digest() {
    std::ostringstream os;
    for (const auto& [ic, oc, k, s] : kArch) os << ic << 'x' << oc << 'k' << k << 's' << s << ';';
    return fnv1a(os.str());
}

ForwardCache forward(const PredictorParams& params, const ProbabilityMap& image) {
    if (image.height % 4 != 0 || image.width % 4 != 0)
        throw std::invalid_argument("forward: dimensions must be divisible by 4");

    ForwardCache c;
    c.x0 = Tensor(1, image.height, image.width);
    for (size_t i = 0; i < image.values.size(); ++i) c.x0.v[i] = image.values[i];

    conv_forward(c.x0, params.layers[0], c.z1);
    c.a1 = relu(c.z1);
    conv_forward(c.a1, params.layers[1], c.a2);
    conv_forward(c.a2, params.layers[2], c.z3);
    c.a3 = relu(c.z3);
    conv_forward(c.a3, params.layers[3], c.a4);

    c.u5 = upsample2(c.a4);
    Tensor z5;
    conv_forward(c.u5, params.layers[4], z5);
    c.z5s = add(z5, c.a2);
    c.d5 = relu(c.z5s);
    c.u6 = upsample2(c.d5);
    Tensor z6;
    conv_forward(c.u6, params.layers[5], z6);
    c.z6s = add(z6, c.a1);
    c.d6 = relu(c.z6s);
    conv_forward(c.d6, params.layers[6], c.z7);

    c.prob = ProbabilityMap(image.height, image.width);
    for (size_t i = 0; i < c.prob.values.size(); ++i)
        c.prob.values[i] = static_cast<float>(1.0 / (1.0 + std::exp(-c.z7.v[i])));
    return c;
}

ProbabilityMap predict(const PredictorParams& params, const ProbabilityMap& image) {
    return forward(params, image).prob;
}

PredictorParams backward(const PredictorParams& params, const ForwardCache& c,
                         const std::vector<double>& grad_wrt_prob) {
    if (grad_wrt_prob.size() != c.prob.values.size())
        throw std::invalid_argument("backward: gradient shape mismatch");

    PredictorParams g = PredictorParams::architecture();

    Tensor dz7(1, c.prob.height, c.prob.width);
    for (size_t i = 0; i < dz7.v.size(); ++i) {
        double p = c.prob.values[i];
        dz7.v[i] = grad_wrt_prob[i] * p * (1.0 - p);
    }

    Tensor dd6;
    conv_backward(c.d6, params.layers[6], dz7, dd6, g.layers[6]);
    relu_mask_inplace(dd6, c.z6s); // dz6s
    Tensor skip_a1 = dd6;          // additive skip into a1

    Tensor du6;
    conv_backward(c.u6, params.layers[5], dd6, du6, g.layers[5]);
    Tensor dd5 = downsum2(du6);
    relu_mask_inplace(dd5, c.z5s); // dz5s
    Tensor skip_a2 = dd5;

    Tensor du5;
    conv_backward(c.u5, params.layers[4], dd5, du5, g.layers[4]);
    Tensor da4 = downsum2(du5);

    Tensor da3;
    conv_backward(c.a3, params.layers[3], da4, da3, g.layers[3]);
    relu_mask_inplace(da3, c.z3);

    Tensor da2;
    conv_backward(c.a2, params.layers[2], da3, da2, g.layers[2]);
    for (size_t i = 0; i < da2.v.size(); ++i) da2.v[i] += skip_a2.v[i];

    Tensor da1;
    conv_backward(c.a1, params.layers[1], da2, da1, g.layers[1]);
    for (size_t i = 0; i < da1.v.size(); ++i) da1.v[i] += skip_a1.v[i];
    relu_mask_inplace(da1, c.z1);

    Tensor dx0;
    conv_backward(c.x0, params.layers[0], da1, dx0, g.layers[0]);
    return g;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write("CPCK", 4);
    write_u32(out, 1);
    write_u64(out, PredictorParams::arch_digest());
    write_u64(out, ckpt.config_digest);
    write_u32(out, ckpt.epoch);
    write_u64(out, ckpt.adam.t);

    std::vector<double> flat = ckpt.params.flatten();
    write_u32(out, static_cast<uint32_t>(flat.size()));
    for (double v : flat) {
        float f = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_u32(out, bits);
    }
    auto write_f64vec = [&](const std::vector<double>& vec) {
        for (double v : vec) {
            uint64_t bits;
            std::memcpy(&bits, &v, 8);
            write_u64(out, bits);
        }
    };
    write_u32(out, static_cast<uint32_t>(ckpt.adam.m.size()));
    write_f64vec(ckpt.adam.m);
    write_f64vec(ckpt.adam.v);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CPCK", 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    uint32_t version = read_u32(in);
    if (version != 1) throw std::runtime_error("checkpoint: unsupported version");
    uint64_t arch = read_u64(in);
    if (arch != PredictorParams::arch_digest())
        throw std::runtime_error("checkpoint: architecture digest mismatch");

    Checkpoint ckpt;
    ckpt.config_digest = read_u64(in);
    ckpt.epoch = read_u32(in);
    ckpt.adam.t = read_u64(in);

    ckpt.params = PredictorParams::architecture();
    uint32_t n = read_u32(in);
    if (n != ckpt.params.param_count())
        throw std::runtime_error("checkpoint: parameter count mismatch");
    std::vector<double> flat(n);
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t bits = read_u32(in);
        float f;
        std::memcpy(&f, &bits, 4);
        flat[i] = f;
    }
    ckpt.params.unflatten(flat);

    uint32_t na = read_u32(in);
    ckpt.adam.m.resize(na);
    ckpt.adam.v.resize(na);
    for (uint32_t i = 0; i < na; ++i) {
        uint64_t bits = read_u64(in);
        std::memcpy(&ckpt.adam.m[i], &bits, 8);
    }
    for (uint32_t i = 0; i < na; ++i) {
        uint64_t bits = read_u64(in);
        std::memcpy(&ckpt.adam.v[i], &bits, 8);
    }
    return ckpt;
}

uint64_t TrainConfig::digest() const {
    std::ostringstream os;
    os.precision(17);
    os << loss << '|' << sigma << '|' << delta << '|' << tau_bin << '|' << gamma << '|'
       << eps << '|' << s_d << '|' << lr << '|' << lr_decay << '|' << epochs << '|' << seed
       << '|' << recompute_every << '|' << no_ce << no_dice << no_weights;
    return fnv1a(os.str());
}

Checkpoint train(const TrainConfig& config, const std::vector<TrainSample>& data,
                 TrainLog* log) {
    if (data.empty()) throw std::invalid_argument("train: no samples");
    LossKind kind = parse_loss_kind(config.loss);
    if (kind == LossKind::Cp && config.pretrained.empty())
        throw std::runtime_error("train: cp loss requires a pretrained checkpoint");

    Checkpoint ckpt;
    if (!config.pretrained.empty()) {
        ckpt = load_checkpoint(config.pretrained);
        // the new training stage owns the optimizer schedule
        ckpt.adam = AdamState{};
    } else {
        ckpt.params = PredictorParams::he_init(config.seed);
    }
    ckpt.config_digest = config.digest();

    size_t n_par = ckpt.params.param_count();
    if (ckpt.adam.m.empty()) {
        ckpt.adam.m.assign(n_par, 0.0);
        ckpt.adam.v.assign(n_par, 0.0);
    }

    CpParams cpp;
    cpp.sigma = config.sigma;
    cpp.delta = config.delta;
    cpp.tau_bin = config.tau_bin;
    cpp.eps = config.eps;
    cpp.s_d = config.s_d;
    cpp.no_ce = config.no_ce;
    cpp.no_dice = config.no_dice;
    cpp.no_weights = config.no_weights;

    BaselineParams bp;
    bp.gamma = config.gamma;
    bp.sigma = config.sigma;
    bp.eps = config.eps;
    bp.s_d = config.s_d;

    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::vector<double> flat = ckpt.params.flatten();

    std::vector<WeightMaps> weight_cache(data.size());
    std::vector<uint64_t> visits(data.size(), 0);
    std::vector<size_t> order(data.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    uint32_t start_epoch = ckpt.epoch;
    for (int e = 0; e < config.epochs; ++e) {
        uint32_t epoch = start_epoch + static_cast<uint32_t>(e);
        double lr = config.lr / (1.0 + config.lr_decay * static_cast<double>(epoch));
        Rng shuffle_rng(config.seed * 0x9e3779b97f4a7c15ull + epoch + 1);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (size_t idx : order) {
            const TrainSample& sample = data[idx];
            ForwardCache cache = forward(ckpt.params, sample.image);

            LossResult loss;
            if (kind == LossKind::Cp) {
                if (!cpp.no_weights && visits[idx] % static_cast<uint64_t>(config.recompute_every) == 0)
                    weight_cache[idx] =
                        cp_weights(cache.prob, sample.label, cpp.sigma, cpp.delta, cpp.tau_bin);
                ++visits[idx];
                loss = cp_loss_with_weights(cache.prob, sample.label, weight_cache[idx], cpp);
            } else {
                loss = baseline_loss(kind, cache.prob, sample.label, bp);
            }
            if (!std::isfinite(loss.value)) {
                std::ostringstream os;
                os << "train: non-finite loss (" << config.loss << ") at epoch " << epoch
                   << ", sample " << idx;
                throw std::runtime_error(os.str());
            }
            loss_sum += loss.value;

            PredictorParams grads = backward(ckpt.params, cache, loss.grad);
            std::vector<double> gflat = grads.flatten();

            ++ckpt.adam.t;
            double bc1 = 1.0 - std::pow(beta1, static_cast<double>(ckpt.adam.t));
            double bc2 = 1.0 - std::pow(beta2, static_cast<double>(ckpt.adam.t));
            for (size_t i = 0; i < n_par; ++i) {
                double gi = gflat[i];
                ckpt.adam.m[i] = beta1 * ckpt.adam.m[i] + (1.0 - beta1) * gi;
                ckpt.adam.v[i] = beta2 * ckpt.adam.v[i] + (1.0 - beta2) * gi * gi;
                double mhat = ckpt.adam.m[i] / bc1;
                double vhat = ckpt.adam.v[i] / bc2;
                flat[i] -= lr * mhat / (std::sqrt(vhat) + adam_eps);
            }
            ckpt.params.unflatten(flat);
        }
        if (log) log->epoch_mean_loss.push_back(loss_sum / static_cast<double>(data.size()));
    }
    ckpt.epoch = start_epoch + static_cast<uint32_t>(config.epochs);
    return ckpt;
}

} // namespace cpseg
