#pragma once

#include <string>
#include <vector>

#include "cpseg/grid.hpp"
#include "cpseg/morphology.hpp"

namespace cpseg {

/// Per-pixel coefficients of the connectivity-preserving loss:
/// u weights foreground CE terms, v background CE terms, beta the Dice terms.
struct WeightMaps {
    int height = 0;
    int width = 0;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> beta;
    double sigma = 100.0;
    double delta = 3.0;
};

struct LossResult {
    double value = 0.0;
    std::vector<double> grad; // d(value)/d(p_i), row-major
};

struct CpParams {
    double sigma = 100.0;
    double delta = 3.0;
    double tau_bin = 0.5;
    double eps = 1e-7;  // log clamp
    double s_d = 1e-7;  // dice smoothing
    bool no_ce = false;     // ablation: drop the CE term
    bool no_dice = false;   // ablation: drop the Dice term
    bool no_weights = false; // ablation: u = v = beta = 1
};

/// Weight maps of the CP-loss pipeline: binarize prob at tau_bin, skeletonize
/// prediction and ground truth, locate failed skeletons at distance delta, then
///   u_i    = [1 + exp(-d_fG/sigma) - p_i]^2
///   v_i    = [exp(-d_U/sigma) + p_i]^2
///   beta_i = 1/4 [1 + exp(-d_U/sigma) - p_i/2]
/// with d_fG the distance to Skel_fG and d_U the distance to Skel_fG u Skel_fP.
/// exp(-inf/sigma) = 0 when a failed set is empty.
WeightMaps cp_weights(const ProbabilityMap& prob, const BinaryMask& gt,
                      double sigma, double delta, double tau_bin);

/// sum_i [ -u_i g_i log p_i - v_i (1-g_i) log(1-p_i) ], p clamped to [eps, 1-eps].
/// Weights are constants under differentiation; grad is 0 where the clamp is active.
LossResult weighted_ce(const ProbabilityMap& prob, const BinaryMask& gt,
                       const std::vector<double>& u, const std::vector<double>& v,
                       double eps = 1e-7);

/// 1 - 2 * sum(beta p g) / (sum((beta p)^2) + sum(g^2) + s_d), beta constant.
LossResult weighted_dice(const ProbabilityMap& prob, const BinaryMask& gt,
                         const std::vector<double>& beta, double s_d = 1e-7);

/// Full CP-loss: weights recomputed from the current prediction, then
/// weighted CE + weighted Dice with the weights frozen.
LossResult cp_loss(const ProbabilityMap& prob, const BinaryMask& gt, const CpParams& params);

/// CP-loss evaluated against precomputed weight maps (weight-refresh interval
/// support for training).
LossResult cp_loss_with_weights(const ProbabilityMap& prob, const BinaryMask& gt,
                                const WeightMaps& w, const CpParams& params);

enum class LossKind { Bce, Focal, BalanceCe, DistanceCe, Dice, Cp };

LossKind parse_loss_kind(const std::string& name);
std::string loss_kind_name(LossKind kind);

struct BaselineParams {
    double gamma = 2.0;  // focal
    double sigma = 100.0; // distance_ce
    double eps = 1e-7;
    double s_d = 1e-7;
};

LossResult baseline_loss(LossKind kind, const ProbabilityMap& prob, const BinaryMask& gt,
                         const BaselineParams& params = {});

} // namespace cpseg
