#include "cpseg/losses.hpp"

#include <algorithm>
#include <cmath>

namespace cpseg {

namespace {

// exp(-d/sigma) with exp(-inf) = 0 for the empty-set convention.
inline double decay(double d, double sigma) {
    if (std::isinf(d)) return 0.0;
    return std::exp(-d / sigma);
}

} // namespace

WeightMaps cp_weights(const ProbabilityMap& prob, const BinaryMask& gt,
                      double sigma, double delta, double tau_bin) {
    require_same_shape(prob.height, prob.width, gt.height, gt.width, "cp_weights");
    if (sigma <= 0.0) throw std::invalid_argument("cp_weights: sigma must be > 0");

    BinaryMask skel_p = skeletonize(threshold(prob, tau_bin));
    // GT labels are expected to be one-pixel-wide already; thin if not.
    BinaryMask skel_g = has_2x2_block(gt) ? skeletonize(gt) : gt;

    auto [skel_fg, skel_fp] = failed_skeletons(skel_p, skel_g, delta);
    DistanceField d_fg = edt(skel_fg);
    DistanceField d_u = edt(mask_or(skel_fg, skel_fp));

    WeightMaps w;
    w.height = prob.height;
    w.width = prob.width;
    w.sigma = sigma;
    w.delta = delta;
    size_t n = prob.size();
    w.u.resize(n);
    w.v.resize(n);
    w.beta.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double p = prob.values[i];
        double e_fg = decay(d_fg.dist[i], sigma);
        double e_u = decay(d_u.dist[i], sigma);
        double us = 1.0 + e_fg - p;
        double vs = e_u + p;
        w.u[i] = us * us;
        w.v[i] = vs * vs;
        w.beta[i] = 0.25 * (1.0 + e_u - 0.5 * p);
    }
    return w;
}

LossResult weighted_ce(const ProbabilityMap& prob, const BinaryMask& gt,
                       const std::vector<double>& u, const std::vector<double>& v,
                       double eps) {
    require_same_shape(prob.height, prob.width, gt.height, gt.width, "weighted_ce");
    if (u.size() != prob.size() || v.size() != prob.size())
        throw std::invalid_argument("weighted_ce: weight size mismatch");

    LossResult out;
    out.grad.assign(prob.size(), 0.0);
    double lo = eps, hi = 1.0 - eps;
    for (size_t i = 0; i < prob.size(); ++i) {
        double p = prob.values[i];
        bool clamped = p < lo || p > hi;
        double ph = std::clamp(p, lo, hi);
        if (gt.bits[i]) {
            out.value += -u[i] * std::log(ph);
            if (!clamped) out.grad[i] = -u[i] / ph;
        } else {
            out.value += -v[i] * std::log(1.0 - ph);
            if (!clamped) out.grad[i] = v[i] / (1.0 - ph);
        }
    }
    return out;
}

LossResult weighted_dice(const ProbabilityMap& prob, const BinaryMask& gt,
                         const std::vector<double>& beta, double s_d) {
    require_same_shape(prob.height, prob.width, gt.height, gt.width, "weighted_dice");
    if (beta.size() != prob.size())
        throw std::invalid_argument("weighted_dice: weight size mismatch");

    double num = 0.0, den = s_d;
    for (size_t i = 0; i < prob.size(); ++i) {
        double bp = beta[i] * prob.values[i];
        num += bp * gt.bits[i];
        den += bp * bp + gt.bits[i];
    }

    LossResult out;
    out.value = 1.0 - 2.0 * num / den;
    out.grad.resize(prob.size());
    double den2 = den * den;
    for (size_t i = 0; i < prob.size(); ++i) {
        double b = beta[i];
        out.grad[i] = -2.0 * (b * gt.bits[i] * den - 2.0 * b * b * prob.values[i] * num) / den2;
    }
    return out;
}

LossResult cp_loss_with_weights(const ProbabilityMap& prob, const BinaryMask& gt,
                                const WeightMaps& w, const CpParams& params) {
    LossResult out;
    out.grad.assign(prob.size(), 0.0);
    const std::vector<double> ones(params.no_weights ? prob.size() : 0, 1.0);

    if (!params.no_ce) {
        const auto& u = params.no_weights ? ones : w.u;
        const auto& v = params.no_weights ? ones : w.v;
        LossResult ce = weighted_ce(prob, gt, u, v, params.eps);
        out.value += ce.value;
        for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += ce.grad[i];
    }
    if (!params.no_dice) {
        const auto& beta = params.no_weights ? ones : w.beta;
        LossResult dice = weighted_dice(prob, gt, beta, params.s_d);
        out.value += dice.value;
        for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += dice.grad[i];
    }
    return out;
}

LossResult cp_loss(const ProbabilityMap& prob, const BinaryMask& gt, const CpParams& params) {
    WeightMaps w;
    if (!params.no_weights)
        w = cp_weights(prob, gt, params.sigma, params.delta, params.tau_bin);
    return cp_loss_with_weights(prob, gt, w, params);
}

LossKind parse_loss_kind(const std::string& name) {
    if (name == "bce") return LossKind::Bce;
    if (name == "focal") return LossKind::Focal;
    if (name == "balance_ce") return LossKind::BalanceCe;
    if (name == "distance_ce") return LossKind::DistanceCe;
    if (name == "dice") return LossKind::Dice;
    if (name == "cp") return LossKind::Cp;
    throw std::invalid_argument("unknown loss kind: " + name);
}

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
        case LossKind::Bce: return "bce";
        case LossKind::Focal: return "focal";
        case LossKind::BalanceCe: return "balance_ce";
        case LossKind::DistanceCe: return "distance_ce";
        case LossKind::Dice: return "dice";
        case LossKind::Cp: return "cp";
    }
    return "?";
}

LossResult baseline_loss(LossKind kind, const ProbabilityMap& prob, const BinaryMask& gt,
                         const BaselineParams& params) {
    require_same_shape(prob.height, prob.width, gt.height, gt.width, "baseline_loss");
    size_t n = prob.size();
    double lo = params.eps, hi = 1.0 - params.eps;

    switch (kind) {
        case LossKind::Bce: {
            std::vector<double> ones(n, 1.0);
            return weighted_ce(prob, gt, ones, ones, params.eps);
        }
        case LossKind::Focal: {
            LossResult out;
            out.grad.assign(n, 0.0);
            double g = params.gamma;
            for (size_t i = 0; i < n; ++i) {
                double p = prob.values[i];
                bool clamped = p < lo || p > hi;
                double ph = std::clamp(p, lo, hi);
                if (gt.bits[i]) {
                    double q = 1.0 - ph;
                    out.value += -std::pow(q, g) * std::log(ph);
                    if (!clamped)
                        out.grad[i] = g * std::pow(q, g - 1.0) * std::log(ph) - std::pow(q, g) / ph;
                } else {
                    out.value += -std::pow(ph, g) * std::log(1.0 - ph);
                    if (!clamped)
                        out.grad[i] = -g * std::pow(ph, g - 1.0) * std::log(1.0 - ph) +
                                      std::pow(ph, g) / (1.0 - ph);
                }
            }
            return out;
        }
        case LossKind::BalanceCe: {
            double n_fg = static_cast<double>(gt.count());
            double n_all = static_cast<double>(n);
            double w_fg = (n_all - n_fg) / n_all;
            double w_bg = n_fg / n_all;
            std::vector<double> u(n, w_fg), v(n, w_bg);
            return weighted_ce(prob, gt, u, v, params.eps);
        }
        case LossKind::DistanceCe: {
            BinaryMask skel_g = has_2x2_block(gt) ? skeletonize(gt) : gt;
            DistanceField d = edt(skel_g);
            std::vector<double> w(n);
            for (size_t i = 0; i < n; ++i)
                w[i] = 1.0 + (std::isinf(d.dist[i]) ? 0.0 : std::exp(-d.dist[i] / params.sigma));
            return weighted_ce(prob, gt, w, w, params.eps);
        }
        case LossKind::Dice: {
            std::vector<double> ones(n, 1.0);
            return weighted_dice(prob, gt, ones, params.s_d);
        }
        case LossKind::Cp:
            return cp_loss(prob, gt, CpParams{});
    }
    throw std::invalid_argument("baseline_loss: unknown kind");
}

} // namespace cpseg
