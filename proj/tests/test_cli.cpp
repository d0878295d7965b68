#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cpseg/grid.hpp"
#include "cpseg/image_io.hpp"
#include "cpseg/losses.hpp"
#include "cpseg/morphology.hpp"
#include "cpseg/synth.hpp"

using namespace cpseg;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    fs::path p = fs::temp_directory_path() / "cpseg_cli_tests";
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(CPSEG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

} // namespace

TEST_CASE("cli exit codes") {
    CHECK(run_cli("") == 1);                 // missing subcommand
    CHECK(run_cli("frobnicate") == 1);       // unknown subcommand
    CHECK(run_cli("synth --count 1") == 1);  // missing required option
    fs::path dir = workdir();
    CHECK(run_cli("eval --pred " + (dir / "missing.cplr").string() + " --gt " +
                  (dir / "missing.png").string()) == 2); // data error
}

TEST_CASE("cli synth is deterministic and writes a loadable dataset") {
    fs::path dir = workdir();
    fs::path d1 = dir / "synth_a", d2 = dir / "synth_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    write_text_file(dir / "scene.json", R"({"size": 64, "seed": 7, "curve_count": [1, 2]})");
    std::string cfg = " --config " + (dir / "scene.json").string() + " --count 3";
    REQUIRE(run_cli("synth --out-dir " + d1.string() + cfg) == 0);
    REQUIRE(run_cli("synth --out-dir " + d2.string() + cfg) == 0);
    for (const char* name : {"scene_0000.png", "scene_0000_gt.png", "scene_0002_gt.png",
                             "manifest.json"}) {
        CHECK(slurp(d1 / name) == slurp(d2 / name));
    }
    BinaryMask gt = load_mask((d1 / "scene_0001_gt.png").string());
    CHECK_FALSE(gt.empty_fg());
    CHECK_FALSE(has_2x2_block(gt));
    CHECK(load_gray((d1 / "scene_0001.png").string()).height == 64);

    // unknown config keys are rejected before any output is produced
    write_text_file(dir / "bad.json", R"({"size": 64, "wat": 1})");
    CHECK(run_cli("synth --out-dir " + (dir / "synth_c").string() + " --count 1 --config " +
                  (dir / "bad.json").string()) == 2);
}

TEST_CASE("cli rasterize") {
    fs::path dir = workdir();
    write_text_file(dir / "ann.json", R"({"polylines": [[[0, 4], [8, 4]]]})");
    fs::path out = dir / "raster.png";
    REQUIRE(run_cli("rasterize --annotations " + (dir / "ann.json").string() +
                    " --width 9 --height 9 --out " + out.string()) == 0);
    BinaryMask m = load_mask(out.string());
    CHECK(m.count() == 9);
    for (int c = 0; c < 9; ++c) CHECK(m.get(4, c));
}

TEST_CASE("cli eval, curves, and weights on an exact prediction") {
    fs::path dir = workdir();
    SceneConfig cfg;
    cfg.size = 64;
    cfg.seed = 3;
    Scene scene = gen_scene(cfg);

    // an exact 0/1 probability map for the gt skeleton
    ProbabilityMap exact(64, 64, 0.0f);
    for (size_t i = 0; i < exact.size(); ++i)
        if (scene.gt.bits[i]) exact.values[i] = 1.0f;

    fs::path pred_dir = dir / "preds", gt_dir = dir / "gts";
    fs::create_directories(pred_dir);
    fs::create_directories(gt_dir);
    save_prob(exact, (pred_dir / "img0.cplr").string());
    save_mask(scene.gt, (gt_dir / "img0.png").string());

    SUBCASE("eval reports perfect scores") {
        fs::path report = dir / "report.json";
        REQUIRE(run_cli("eval --pred " + (pred_dir / "img0.cplr").string() + " --gt " +
                        (gt_dir / "img0.png").string() + " --tau 0.5 --delta 3 --out " +
                        report.string()) == 0);
        std::string text = slurp(report);
        CHECK(text.find("\"precision\": 1") != std::string::npos);
        CHECK(text.find("\"recall\": 1") != std::string::npos);
        CHECK(text.find("\"scm\": 1") != std::string::npos);
    }

    SUBCASE("curves writes one row per grid point and is reproducible") {
        fs::path csv1 = dir / "curves1.csv", csv2 = dir / "curves2.csv";
        std::string base = "curves --pred-dir " + pred_dir.string() + " --gt-dir " +
                           gt_dir.string() + " --tau-grid 0.1:0.9:0.1 --delta 3 --out ";
        REQUIRE(run_cli(base + csv1.string()) == 0);
        REQUIRE(run_cli(base + csv2.string()) == 0);
        std::string text = slurp(csv1);
        CHECK(text == slurp(csv2));
        int lines = 0;
        for (char ch : text) lines += ch == '\n';
        CHECK(lines == 10); // header + 9 rows
        CHECK(text.find("tau,precision,recall,f1,scm") == 0);
        CHECK(text.find("0.500000,1.000000,1.000000") != std::string::npos);
    }

    SUBCASE("weights dumps u/v/beta rasters consistent with the library") {
        std::string prefix = (dir / "wm").string();
        REQUIRE(run_cli("weights --prob " + (pred_dir / "img0.cplr").string() + " --gt " +
                        (gt_dir / "img0.png").string() + " --out-prefix " + prefix) == 0);
        WeightMaps w = cp_weights(exact, scene.gt, 100.0, 3.0, 0.5);
        ProbabilityMap u = load_prob(prefix + "_u.cplr");
        ProbabilityMap beta = load_prob(prefix + "_beta.cplr");
        REQUIRE(u.size() == w.u.size());
        for (size_t i = 0; i < u.size(); ++i) {
            CHECK(u.values[i] == doctest::Approx(w.u[i] / 4.0).epsilon(1e-6));
            CHECK(beta.values[i] == doctest::Approx(w.beta[i] / 4.0).epsilon(1e-6));
        }
        CHECK(fs::exists(prefix + "_v.png")); // heatmaps rendered for all three maps
    }
}

TEST_CASE("cli train then predict round trip") {
    fs::path dir = workdir();
    fs::path data_dir = dir / "train_data";
    fs::remove_all(data_dir);
    write_text_file(dir / "scene_small.json", R"({"size": 64, "seed": 11})");
    REQUIRE(run_cli("synth --out-dir " + data_dir.string() + " --count 2 --config " +
                    (dir / "scene_small.json").string()) == 0);

    write_text_file(dir / "train.json", R"({"loss": "bce", "epochs": 2, "lr": 0.0003, "seed": 1})");
    fs::path ckpt = dir / "model.ckpt";
    std::string train_cmd = "train --config " + (dir / "train.json").string() + " --data " +
                            (data_dir / "manifest.json").string() + " --out " + ckpt.string();
    REQUIRE(run_cli(train_cmd) == 0);
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(ckpt.string() + ".config.json"));
    std::string log = slurp(ckpt.string() + ".log.csv");
    CHECK(log.find("epoch,mean_loss") == 0);
    int lines = 0;
    for (char ch : log) lines += ch == '\n';
    CHECK(lines == 3); // header + 2 epochs

    // training is reproducible at the byte level
    fs::path ckpt2 = dir / "model2.ckpt";
    REQUIRE(run_cli("train --config " + (dir / "train.json").string() + " --data " +
                    (data_dir / "manifest.json").string() + " --out " + ckpt2.string()) == 0);
    CHECK(slurp(ckpt) == slurp(ckpt2));
    CHECK(slurp(ckpt.string() + ".log.csv") == slurp(ckpt2.string() + ".log.csv"));

    fs::path prob_out = dir / "pred.cplr";
    REQUIRE(run_cli("predict --checkpoint " + ckpt.string() + " --image " +
                    (data_dir / "scene_0000.png").string() + " --out " + prob_out.string()) == 0);
    ProbabilityMap prob = load_prob(prob_out.string());
    CHECK(prob.height == 64);
    for (float v : prob.values) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }

    // cp training requires a pretrained checkpoint
    write_text_file(dir / "cp.json", R"({"loss": "cp", "epochs": 1})");
    CHECK(run_cli("train --config " + (dir / "cp.json").string() + " --data " +
                  (data_dir / "manifest.json").string() + " --out " +
                  (dir / "cp.ckpt").string()) == 2);
    CHECK(run_cli("train --config " + (dir / "cp.json").string() + " --data " +
                  (data_dir / "manifest.json").string() + " --out " +
                  (dir / "cp.ckpt").string() + " --pretrained " + ckpt.string()) == 0);
}
