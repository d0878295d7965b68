#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cpseg/grid.hpp"

namespace cpseg {

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double scm = 0.0;
    double delta = 3.0;
    double tau = 0.5;
    size_t n_skel_p = 0;
    size_t n_skel_g = 0;
    size_t n_skel_tp = 0;
    size_t n_skel_tg = 0;
};

struct PrfResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    size_t n_skel_p = 0;
    size_t n_skel_g = 0;
    size_t n_skel_tp = 0;
    size_t n_skel_tg = 0;
};

/// Skeleton precision / recall / F1 at tolerance delta.
/// Correct pixels are those not flagged by failed_skeletons. F1 uses the
/// smoothed formula (2PR+s)/(P+R+s) except F1 := 0 when P+R = 0.
/// Throws on empty ground-truth skeleton.
PrfResult skeleton_prf(const BinaryMask& skel_p, const BinaryMask& skel_g,
                       double delta, double s = 1e-7);

/// Skeleton-connectivity measure: each 8-connected ground-truth instance
/// contributes |Skel_tG^i| / |Skel_G| * 1/n_i, where n_i is the number of
/// predicted segments within distance < delta of the instance (0 -> 0).
double scm(const BinaryMask& skel_p, const BinaryMask& skel_g, double delta);

struct SweepRow {
    double tau = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double scm = 0.0;
};

/// Threshold sweep: for each tau, binarize, skeletonize, and evaluate
/// against the ground-truth skeleton. tau values must be strictly increasing
/// and lie in (0,1).
std::vector<SweepRow> sweep_curves(const ProbabilityMap& prob, const BinaryMask& gt,
                                   const std::vector<double>& tau_grid, double delta);

/// Unweighted per-image mean of rows sharing one tau grid.
std::vector<SweepRow> mean_rows(const std::vector<std::vector<SweepRow>>& per_image);

EvalReport evaluate(const ProbabilityMap& prob, const BinaryMask& gt, double tau, double delta);

std::string report_to_json(const EvalReport& report);
std::string rows_to_csv(const std::vector<SweepRow>& rows);

} // namespace cpseg
