// Command-line surface over the cpseg library: synthetic data generation,
// polyline rasterization, training, prediction, evaluation, threshold sweeps,
// and weight-map inspection.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpseg/dataset.hpp"
#include "cpseg/image_io.hpp"
#include "cpseg/losses.hpp"
#include "cpseg/metrics.hpp"
#include "cpseg/model.hpp"
#include "cpseg/morphology.hpp"
#include "cpseg/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cpseg;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& what) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw std::runtime_error(what + ": unknown key '" + it.key() + "'");
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

SceneConfig parse_scene_config(const json& j) {
    reject_unknown_keys(j, {"size", "curve_count", "occluder_count", "occluder_radius",
                            "noise_std", "seed"},
                        "scene config");
    SceneConfig cfg;
    if (j.contains("size")) cfg.size = j["size"].get<int>();
    if (j.contains("curve_count")) {
        cfg.curve_count_min = j["curve_count"][0].get<int>();
        cfg.curve_count_max = j["curve_count"][1].get<int>();
    }
    if (j.contains("occluder_count")) {
        cfg.occluder_count_min = j["occluder_count"][0].get<int>();
        cfg.occluder_count_max = j["occluder_count"][1].get<int>();
    }
    if (j.contains("occluder_radius")) {
        cfg.occluder_radius_min = j["occluder_radius"][0].get<double>();
        cfg.occluder_radius_max = j["occluder_radius"][1].get<double>();
    }
    if (j.contains("noise_std")) cfg.noise_std = j["noise_std"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    return cfg;
}

json scene_config_to_json(const SceneConfig& cfg) {
    return json{{"size", cfg.size},
                {"curve_count", {cfg.curve_count_min, cfg.curve_count_max}},
                {"occluder_count", {cfg.occluder_count_min, cfg.occluder_count_max}},
                {"occluder_radius", {cfg.occluder_radius_min, cfg.occluder_radius_max}},
                {"noise_std", cfg.noise_std},
                {"seed", cfg.seed}};
}

TrainConfig parse_train_config(const json& j) {
    reject_unknown_keys(j, {"loss", "sigma", "delta", "tau_bin", "gamma", "eps", "s_d",
                            "lr", "lr_decay", "epochs", "seed", "recompute_every",
                            "no_ce", "no_dice", "no_weights", "pretrained"},
                        "train config");
    TrainConfig cfg;
    if (j.contains("loss")) cfg.loss = j["loss"].get<std::string>();
    parse_loss_kind(cfg.loss); // validate early
    if (j.contains("sigma")) cfg.sigma = j["sigma"].get<double>();
    if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
    if (j.contains("tau_bin")) cfg.tau_bin = j["tau_bin"].get<double>();
    if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
    if (j.contains("eps")) cfg.eps = j["eps"].get<double>();
    if (j.contains("s_d")) cfg.s_d = j["s_d"].get<double>();
    if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
    if (j.contains("lr_decay")) cfg.lr_decay = j["lr_decay"].get<double>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("recompute_every")) cfg.recompute_every = j["recompute_every"].get<int>();
    if (j.contains("no_ce")) cfg.no_ce = j["no_ce"].get<bool>();
    if (j.contains("no_dice")) cfg.no_dice = j["no_dice"].get<bool>();
    if (j.contains("no_weights")) cfg.no_weights = j["no_weights"].get<bool>();
    if (j.contains("pretrained")) cfg.pretrained = j["pretrained"].get<std::string>();
    return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
    return json{{"loss", cfg.loss},
                {"sigma", cfg.sigma},
                {"delta", cfg.delta},
                {"tau_bin", cfg.tau_bin},
                {"gamma", cfg.gamma},
                {"eps", cfg.eps},
                {"s_d", cfg.s_d},
                {"lr", cfg.lr},
                {"lr_decay", cfg.lr_decay},
                {"epochs", cfg.epochs},
                {"seed", cfg.seed},
                {"recompute_every", cfg.recompute_every},
                {"no_ce", cfg.no_ce},
                {"no_dice", cfg.no_dice},
                {"no_weights", cfg.no_weights},
                {"pretrained", cfg.pretrained}};
}

std::vector<double> parse_tau_grid(const std::string& spec) {
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(spec);
    if (!(is >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
        throw std::runtime_error("bad tau grid '" + spec + "' (expected start:stop:step)");
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        double tau = start + i * step;
        if (tau > stop + 1e-12) break;
        grid.push_back(std::min(tau, stop));
    }
    if (grid.empty()) throw std::runtime_error("empty tau grid");
    return grid;
}

std::vector<TrainSample> load_manifest_samples(const std::string& manifest_path) {
    json j = load_json(manifest_path);
    if (!j.contains("pairs")) throw std::runtime_error("manifest: missing 'pairs'");
    fs::path base = fs::path(manifest_path).parent_path();
    std::vector<TrainSample> samples;
    for (const auto& pair : j["pairs"]) {
        fs::path img = base / pair["image"].get<std::string>();
        fs::path lbl = base / pair["label"].get<std::string>();
        samples.push_back({load_gray(img.string()), load_mask(lbl.string())});
    }
    if (samples.empty()) throw std::runtime_error("manifest: no pairs");
    return samples;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, int count) {
    SceneConfig base = parse_scene_config(config_path.empty() ? json::object()
                                                              : load_json(config_path));
    fs::create_directories(out_dir);
    json manifest;
    manifest["config"] = scene_config_to_json(base);
    manifest["pairs"] = json::array();
    for (int i = 0; i < count; ++i) {
        SceneConfig cfg = base;
        cfg.seed = base.seed + static_cast<uint64_t>(i);
        Scene scene = gen_scene(cfg);
        char img_name[64], gt_name[64];
        std::snprintf(img_name, sizeof(img_name), "scene_%04d.png", i);
        std::snprintf(gt_name, sizeof(gt_name), "scene_%04d_gt.png", i);
        save_gray(scene.image, (fs::path(out_dir) / img_name).string());
        save_mask(scene.gt, (fs::path(out_dir) / gt_name).string());
        manifest["pairs"].push_back({{"image", img_name}, {"label", gt_name}});
    }
    write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

int cmd_rasterize(const std::string& ann_path, int width, int height, const std::string& out) {
    Annotation ann = load_annotation(ann_path);
    save_mask(rasterize_polylines(ann, height, width), out);
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out, const std::string& pretrained) {
    TrainConfig cfg = parse_train_config(load_json(config_path));
    if (!pretrained.empty()) cfg.pretrained = pretrained;
    std::vector<TrainSample> samples = load_manifest_samples(data_path);

    TrainLog log;
    Checkpoint ckpt = train(cfg, samples, &log);
    save_checkpoint(ckpt, out);

    json resolved = train_config_to_json(cfg);
    resolved["data"] = data_path;
    write_text(out + ".config.json", resolved.dump(2) + "\n");

    std::ostringstream os;
    os.precision(9);
    for (size_t e = 0; e < log.epoch_mean_loss.size(); ++e)
        os << e << "," << log.epoch_mean_loss[e] << "\n";
    write_text(out + ".log.csv", "epoch,mean_loss\n" + os.str());
    return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& image_path,
                const std::string& out) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    ProbabilityMap image = load_gray(image_path);
    save_prob(predict(ckpt.params, image), out);
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, double tau,
             double delta, const std::string& out) {
    ProbabilityMap pred = load_prob(pred_path);
    BinaryMask gt = load_mask(gt_path);
    EvalReport rep = evaluate(pred, gt, tau, delta);
    std::string text = report_to_json(rep);
    if (out.empty())
        std::cout << text;
    else
        write_text(out, text);
    return 0;
}

int cmd_curves(const std::string& pred_dir, const std::string& gt_dir,
               const std::string& grid_spec, double delta, const std::string& out) {
    std::vector<double> grid = parse_tau_grid(grid_spec);
    std::vector<fs::path> preds;
    for (const auto& entry : fs::directory_iterator(pred_dir))
        if (entry.path().extension() == ".cplr") preds.push_back(entry.path());
    std::sort(preds.begin(), preds.end());
    if (preds.empty()) throw std::runtime_error("no .cplr files in " + pred_dir);

    std::vector<std::vector<SweepRow>> per_image;
    for (const auto& pred_path : preds) {
        fs::path gt_path = fs::path(gt_dir) / (pred_path.stem().string() + ".png");
        ProbabilityMap pred = load_prob(pred_path.string());
        BinaryMask gt = load_mask(gt_path.string());
        per_image.push_back(sweep_curves(pred, gt, grid, delta));
    }
    write_text(out, rows_to_csv(mean_rows(per_image)));
    return 0;
}

int cmd_weights(const std::string& pred_path, const std::string& gt_path, double sigma,
                double delta, double tau_bin, const std::string& prefix) {
    ProbabilityMap prob = load_prob(pred_path);
    BinaryMask gt = load_mask(gt_path);
    WeightMaps w = cp_weights(prob, gt, sigma, delta, tau_bin);

    auto dump = [&](const std::vector<double>& grid, const std::string& name) {
        ProbabilityMap raster(w.height, w.width);
        for (size_t i = 0; i < grid.size(); ++i)
            raster.values[i] = static_cast<float>(std::clamp(grid[i] / 4.0, 0.0, 1.0));
        save_prob(raster, prefix + "_" + name + ".cplr");
        save_heatmap(grid, w.height, w.width, prefix + "_" + name + ".png");
    };
    dump(w.u, "u");
    dump(w.v, "v");
    dump(w.beta, "beta");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"connectivity-preserving segmentation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, ann_path, out, data_path, pretrained;
    std::string ckpt_path, image_path, pred_path, gt_path, pred_dir, gt_dir, grid_spec, prefix;
    int count = 10, width = 0, height = 0;
    double tau = 0.5, delta = 3.0, sigma = 100.0, tau_bin = 0.5;

    auto* synth = app.add_subcommand("synth", "generate synthetic scenes + manifest");
    synth->add_option("--config", config_path, "scene config JSON");
    synth->add_option("--out-dir", out_dir)->required();
    synth->add_option("--count", count)->required();

    auto* rast = app.add_subcommand("rasterize", "polyline annotations -> mask PNG");
    rast->add_option("--annotations", ann_path)->required();
    rast->add_option("--width", width)->required();
    rast->add_option("--height", height)->required();
    rast->add_option("--out", out)->required();

    auto* tr = app.add_subcommand("train", "train the segmentation model");
    tr->add_option("--config", config_path)->required();
    tr->add_option("--data", data_path, "manifest JSON")->required();
    tr->add_option("--out", out, "checkpoint path")->required();
    tr->add_option("--pretrained", pretrained);

    auto* pre = app.add_subcommand("predict", "run a checkpoint on an image");
    pre->add_option("--checkpoint", ckpt_path)->required();
    pre->add_option("--image", image_path)->required();
    pre->add_option("--out", out, "CPLR output")->required();

    auto* ev = app.add_subcommand("eval", "threshold, skeletonize, and score one prediction");
    ev->add_option("--pred", pred_path)->required();
    ev->add_option("--gt", gt_path)->required();
    ev->add_option("--tau", tau);
    ev->add_option("--delta", delta);
    ev->add_option("--out", out, "JSON report (stdout if omitted)");

    auto* cu = app.add_subcommand("curves", "P-R / F-S sweep over a directory");
    cu->add_option("--pred-dir", pred_dir)->required();
    cu->add_option("--gt-dir", gt_dir)->required();
    cu->add_option("--tau-grid", grid_spec, "start:stop:step")->required();
    cu->add_option("--delta", delta);
    cu->add_option("--out", out)->required();

    auto* we = app.add_subcommand("weights", "dump u/v/beta rasters and heatmaps");
    we->add_option("--prob", pred_path)->required();
    we->add_option("--gt", gt_path)->required();
    we->add_option("--sigma", sigma);
    we->add_option("--delta", delta);
    we->add_option("--tau-bin", tau_bin);
    we->add_option("--out-prefix", prefix)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(config_path, out_dir, count);
        if (rast->parsed()) return cmd_rasterize(ann_path, width, height, out);
        if (tr->parsed()) return cmd_train(config_path, data_path, out, pretrained);
        if (pre->parsed()) return cmd_predict(ckpt_path, image_path, out);
        if (ev->parsed()) return cmd_eval(pred_path, gt_path, tau, delta, out);
        if (cu->parsed()) return cmd_curves(pred_dir, gt_dir, grid_spec, delta, out);
        if (we->parsed()) return cmd_weights(pred_path, gt_path, sigma, delta, tau_bin, prefix);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
