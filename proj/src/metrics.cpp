#include "cpseg/metrics.hpp"

#include <cmath>
#include <sstream>

#include "cpseg/morphology.hpp"

namespace cpseg {

PrfResult skeleton_prf(const BinaryMask& skel_p, const BinaryMask& skel_g,
                       double delta, double s) {
    require_same_shape(skel_p.height, skel_p.width, skel_g.height, skel_g.width,
                       "skeleton_prf");
    PrfResult out;
    out.n_skel_p = skel_p.count();
    out.n_skel_g = skel_g.count();
    if (out.n_skel_g == 0) throw std::invalid_argument("skeleton_prf: empty ground truth");

    auto [skel_fg, skel_fp] = failed_skeletons(skel_p, skel_g, delta);
    out.n_skel_tg = out.n_skel_g - skel_fg.count();
    out.n_skel_tp = out.n_skel_p - skel_fp.count();

    out.precision = out.n_skel_p > 0
                        ? static_cast<double>(out.n_skel_tp) / static_cast<double>(out.n_skel_p)
                        : 0.0;
    out.recall = static_cast<double>(out.n_skel_tg) / static_cast<double>(out.n_skel_g);
    double pr = out.precision + out.recall;
    out.f1 = pr > 0.0 ? (2.0 * out.precision * out.recall + s) / (pr + s) : 0.0;
    return out;
}

double scm(const BinaryMask& skel_p, const BinaryMask& skel_g, double delta) {
    require_same_shape(skel_p.height, skel_p.width, skel_g.height, skel_g.width, "scm");
    size_t n_g = skel_g.count();
    if (n_g == 0) throw std::invalid_argument("scm: empty ground truth");

    InstanceLabeling instances = connected_components(skel_g, 8);
    std::vector<double> d2_to_pred = edt_squared(skel_p);
    double d2_limit = delta * delta;

    double total = 0.0;
    BinaryMask inst(skel_g.height, skel_g.width);
    for (int id = 1; id <= instances.count; ++id) {
        for (size_t i = 0; i < inst.size(); ++i)
            inst.bits[i] = instances.labels[i] == id ? 1 : 0;

        // predicted pixels within < delta of this instance
        std::vector<double> d2_to_inst = edt_squared(inst);
        BinaryMask tp_i(skel_p.height, skel_p.width);
        for (size_t i = 0; i < tp_i.size(); ++i)
            tp_i.bits[i] = (skel_p.bits[i] && d2_to_inst[i] < d2_limit) ? 1 : 0;
        int n_i = connected_components(tp_i, 8).count;

        // instance pixels retrieved within <= delta of the prediction
        size_t n_tg_i = 0;
        for (size_t i = 0; i < inst.size(); ++i)
            if (inst.bits[i] && d2_to_pred[i] <= d2_limit) ++n_tg_i;

        double c_i = n_i > 0 ? 1.0 / n_i : 0.0;
        total += static_cast<double>(n_tg_i) / static_cast<double>(n_g) * c_i;
    }
    return total;
}

std::vector<SweepRow> sweep_curves(const ProbabilityMap& prob, const BinaryMask& gt,
                                   const std::vector<double>& tau_grid, double delta) {
    for (size_t i = 0; i < tau_grid.size(); ++i) {
        if (tau_grid[i] <= 0.0 || tau_grid[i] >= 1.0)
            throw std::invalid_argument("sweep_curves: tau must lie in (0,1)");
        if (i > 0 && tau_grid[i] <= tau_grid[i - 1])
            throw std::invalid_argument("sweep_curves: tau grid must be strictly increasing");
    }
    BinaryMask skel_g = has_2x2_block(gt) ? skeletonize(gt) : gt;

    std::vector<SweepRow> rows;
    rows.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        BinaryMask skel_p = skeletonize(threshold(prob, tau));
        PrfResult prf = skeleton_prf(skel_p, skel_g, delta);
        SweepRow row;
        row.tau = tau;
        row.precision = prf.precision;
        row.recall = prf.recall;
        row.f1 = prf.f1;
        row.scm = scm(skel_p, skel_g, delta);
        rows.push_back(row);
    }
    return rows;
}

std::vector<SweepRow> mean_rows(const std::vector<std::vector<SweepRow>>& per_image) {
    if (per_image.empty()) return {};
    size_t n_tau = per_image.front().size();
    std::vector<SweepRow> mean(n_tau);
    for (const auto& rows : per_image) {
        if (rows.size() != n_tau)
            throw std::invalid_argument("mean_rows: inconsistent tau grids");
        for (size_t i = 0; i < n_tau; ++i) {
            mean[i].tau = rows[i].tau;
            mean[i].precision += rows[i].precision;
            mean[i].recall += rows[i].recall;
            mean[i].f1 += rows[i].f1;
            mean[i].scm += rows[i].scm;
        }
    }
    double n = static_cast<double>(per_image.size());
    for (auto& row : mean) {
        row.precision /= n;
        row.recall /= n;
        row.f1 /= n;
        row.scm /= n;
    }
    return mean;
}

EvalReport evaluate(const ProbabilityMap& prob, const BinaryMask& gt, double tau, double delta) {
    BinaryMask skel_g = has_2x2_block(gt) ? skeletonize(gt) : gt;
    BinaryMask skel_p = skeletonize(threshold(prob, tau));
    PrfResult prf = skeleton_prf(skel_p, skel_g, delta);

    EvalReport rep;
    rep.precision = prf.precision;
    rep.recall = prf.recall;
    rep.f1 = prf.f1;
    rep.scm = scm(skel_p, skel_g, delta);
    rep.delta = delta;
    rep.tau = tau;
    rep.n_skel_p = prf.n_skel_p;
    rep.n_skel_g = prf.n_skel_g;
    rep.n_skel_tp = prf.n_skel_tp;
    rep.n_skel_tg = prf.n_skel_tg;
    return rep;
}

std::string report_to_json(const EvalReport& r) {
    std::ostringstream os;
    os.precision(9);
    os << "{\n"
       << "  \"precision\": " << r.precision << ",\n"
       << "  \"recall\": " << r.recall << ",\n"
       << "  \"f1\": " << r.f1 << ",\n"
       << "  \"scm\": " << r.scm << ",\n"
       << "  \"delta\": " << r.delta << ",\n"
       << "  \"tau\": " << r.tau << ",\n"
       << "  \"n_skel_p\": " << r.n_skel_p << ",\n"
       << "  \"n_skel_g\": " << r.n_skel_g << ",\n"
       << "  \"n_skel_tp\": " << r.n_skel_tp << ",\n"
       << "  \"n_skel_tg\": " << r.n_skel_tg << "\n"
       << "}\n";
    return os.str();
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "tau,precision,recall,f1,scm\n";
    char buf[160];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f\n",
                      r.tau, r.precision, r.recall, r.f1, r.scm);
        os << buf;
    }
    return os.str();
}

} // namespace cpseg
