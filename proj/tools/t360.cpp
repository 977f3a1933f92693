// Copyright 2026-present the tactile360 authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: simulate, calibrate, train, reconstruct, evaluate.
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include "t360/config.hpp"
#include "t360/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace t360;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
    std::string config;
    std::string profile;
    std::optional<uint64_t> seed;
    std::string out = "out";
    std::optional<int> probes;
    std::vector<std::string> balls;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON run configuration");
    app->add_option("--profile", c.profile, "smoke or desk defaults")->check(CLI::IsMember({"smoke", "desk"}));
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--probes", c.probes, "number of calibration probes");
    app->add_option("--ball", c.balls, "x,y,z,r indenter (repeatable)")->allow_extra_args(false);
}

RunConfig resolve(const Common& c) {
    std::optional<Profile> profile;
    if (!c.profile.empty()) profile = profile_from_string(c.profile);
    RunConfig cfg = c.config.empty() ? RunConfig::defaults(profile.value_or(Profile::Smoke))
                                     : RunConfig::load(c.config, profile);
    if (c.seed) cfg.seed = *c.seed;
    if (c.probes) cfg.probes = *c.probes;
    if (!c.balls.empty()) {
        cfg.balls.clear();
        for (const auto& b : c.balls) cfg.balls.push_back(parse_ball(b));
    }
    cfg.validate();
    return cfg;
}

void write_manifest(const fs::path& out, const std::string& command, const RunConfig& cfg, Json extra) {
    Json m;
    m["command"] = command;
    m["seed"] = cfg.seed;
    m["seeds"] = {{"plan", cfg.plan_seed()},
                  {"pose", cfg.pose_seed()},
                  {"dataset", cfg.dataset_seed()},
                  {"train", cfg.train_seed()},
                  {"held_out", cfg.held_out_seed()}};
    m["config"] = Json::parse(cfg.to_json());
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    io::write_text(out / "manifest.json", m.dump(2) + "\n");
}

fs::path require_file(const std::string& flag, const fs::path& p) {
    if (!fs::exists(p)) throw ConfigError(flag + ": file not found: " + p.string());
    return p;
}

int cmd_simulate(const Common& c) {
    RunConfig cfg = resolve(c);
    if (cfg.balls.empty()) throw ConfigError("simulate needs at least one --ball or config key 'scene.balls'");
    SensorSetup setup = cfg.sensor();
    Prober prober(setup, setup.true_pose);
    Scene scene{cfg.balls};
    fs::path out = c.out;
    fs::create_directories(out);
    Image raw = prober.capture(scene);
    GroundTruth gt = prober.label_view().ground_truth(scene, setup.contact_epsilon);
    io::write_pnm(out / "raw.ppm", raw);
    io::write_pnm(out / "reference.ppm", prober.reference());
    io::write_sidecar(out / "depth", gt.depth);
    io::write_sidecar(out / "gradient", gt.gradient);
    io::write_mask_pgm(out / "contact.pgm", gt.contact);
    io::write_mask_pgm(out / "occlusion.pgm", gt.occlusion);
    io::write_mask_pgm(out / "valid.pgm", gt.valid);
    io::write_text(out / "camera.json", camera_to_json(setup.target, setup.true_pose));
    write_manifest(out, "simulate", cfg, {{"contact_pixels", count(gt.contact)}});
    std::cout << "simulate: " << count(gt.contact) << " contact pixels -> " << out.string() << "\n";
    return 0;
}

int cmd_calibrate(const Common& c) {
    RunConfig cfg = resolve(c);
    fs::path out = c.out;
    fs::create_directories(out);
    CalibrationRun run = run_calibration(cfg);
    {
        std::ofstream f(out / "dataset.csv", std::ios::binary);
        write_dataset_csv(f, run.dataset);
    }
    io::write_text(out / "camera.json", pose_json(run.target, run.pose));
    io::write_pnm(out / "reference.ppm", run.reference);
    Json extra;
    extra["pose"] = {{"rotation_error_deg", run.pose.rotation_error_deg},
                     {"translation_error_mm", run.pose.translation_error_mm},
                     {"inliers", run.pose.inliers.size()},
                     {"correspondences", run.pose.correspondences.size()},
                     {"inlier_rms_px", run.pose.inlier_rms}};
    extra["dataset"] = {{"rows", run.dataset.rows.size()},
                        {"contact_rows", run.dataset.contact_rows()},
                        {"non_contact_fraction", run.dataset.non_contact_fraction()},
                        {"excluded_probes", run.dataset.excluded_probes},
                        {"geometry_hash", run.dataset.geometry_hash},
                        {"camera_hash", run.dataset.camera_hash},
                        {"balance_fraction", run.dataset.balance_fraction},
                        {"seed", run.dataset.seed}};
    write_manifest(out, "calibrate", cfg, extra);
    std::cout << "calibrate: " << run.dataset.rows.size() << " rows, pose error "
              << io::num(run.pose.rotation_error_deg) << " deg / " << io::num(run.pose.translation_error_mm)
              << " mm -> " << out.string() << "\n";
    return 0;
}

int cmd_train(const Common& c, const std::string& dataset_path) {
    RunConfig cfg = resolve(c);
    fs::path out = c.out;
    fs::path ds = dataset_path.empty() ? out / "dataset.csv" : fs::path(dataset_path);
    std::ifstream f(require_file("--dataset", ds), std::ios::binary);
    CalibDataset data = read_dataset_csv(f);
    fs::create_directories(out);
    gradnet::TrainConfig tc = cfg.training;
    tc.seed = cfg.train_seed();
    gradnet::TrainResult tr = gradnet::train(data.training_set(), tc);
    gradnet::save(out / "model.json", tr.model);
    io::write_text(out / "loss.csv", loss_history_csv(tr.history));
    const auto& last = tr.history.back();
    write_manifest(out, "train", cfg,
                   {{"rows", data.rows.size()},
                    {"train_rows", tr.train_rows},
                    {"validation_rows", tr.validation_rows},
                    {"final_train_loss", last.train_loss},
                    {"final_validation_loss", last.validation_loss}});
    std::cout << "train: " << tr.history.size() << " epochs, validation loss " << io::num(last.validation_loss)
              << " -> " << out.string() << "\n";
    return 0;
}

struct ReconstructArgs {
    std::string model, raw, reference, camera;
};

int cmd_reconstruct(const Common& c, const ReconstructArgs& a) {
    RunConfig cfg = resolve(c);
    fs::path out = c.out;
    gradnet::MlpModel model = gradnet::load(require_file("--model", a.model.empty() ? out / "model.json" : fs::path(a.model)));
    Image raw = io::read_pnm(require_file("--raw", a.raw));
    Image ref = io::read_pnm(require_file("--reference", a.reference));
    fs::path cam_path = require_file("--camera", a.camera.empty() ? out / "camera.json" : fs::path(a.camera));
    CameraFile cam;
    try {
        cam = read_camera_file(cam_path);
    } catch (const Error& e) {
        throw ConfigError("--camera: " + std::string(e.what()));
    }
    if (!cam.pose) throw ConfigError("--camera: camera file is missing key 'R'");
    SensorSetup setup = cfg.sensor();
    LedRig rig = LedRig::make(setup.geometry, setup.rig);
    SceneView view(setup.geometry, rig, setup.shading, cam.camera, *cam.pose, false);
    if (raw.width() != view.width() || raw.height() != view.height())
        throw ConfigError("--raw: image size does not match the camera file");
    Reconstruction rec = reconstruct(model, raw, ref, view, cfg.roi);
    fs::create_directories(out);
    io::write_sidecar(out / "height", rec.height);
    io::write_mask_pgm(out / "mask.pgm", rec.mask);
    {
        std::ofstream f(out / "cloud.ply", std::ios::binary);
        write_ply(f, rec.cloud);
    }
    write_manifest(out, "reconstruct", cfg,
                   {{"rois", rec.rois.size()}, {"points", rec.cloud.size()}, {"flagged_pixels", rec.flagged_pixels}});
    std::cout << "reconstruct: " << rec.rois.size() << " contact regions, " << rec.cloud.size() << " points -> "
              << out.string() << "\n";
    return 0;
}

int cmd_evaluate(const Common& c, const std::string& recon_dir, const std::string& truth_dir,
                 const std::string& model_path, const std::string& camera_path) {
    RunConfig cfg = resolve(c);
    fs::path out = c.out;
    fs::create_directories(out);
    if (!recon_dir.empty() || !truth_dir.empty()) {
        if (recon_dir.empty() || truth_dir.empty()) throw ConfigError("--recon and --truth must be given together");
        fs::path r = recon_dir, t = truth_dir;
        Map height = io::read_sidecar(require_file("--recon", io::sidecar_header_path(r / "height")));
        Mask rmask = io::read_mask_pgm(require_file("--recon", r / "mask.pgm"));
        Map depth = io::read_sidecar(require_file("--truth", io::sidecar_header_path(t / "depth")));
        Mask tmask = io::read_mask_pgm(require_file("--truth", t / "contact.pgm"));
        Metrics m = evaluate(height, rmask, depth, tmask);
        // Band of the deepest ground-truth pixel's skin height is not stored, so single pairs use band 0.
        PressMetrics pm{0, 0, m};
        std::ofstream f(out / "metrics.csv", std::ios::binary);
        write_metrics_csv(f, {pm});
        Json s = {{"rms_mm", m.rms_mm}, {"peak_err_mm", m.peak_err_mm}, {"iou", m.iou}};
        io::write_text(out / "summary.json", s.dump(2) + "\n");
        std::cout << "evaluate: rms " << io::num(m.rms_mm) << " mm, peak error " << io::num(m.peak_err_mm)
                  << " mm, IoU " << io::num(m.iou) << "\n";
        return 0;
    }
    gradnet::MlpModel model =
        gradnet::load(require_file("--model", model_path.empty() ? out / "model.json" : fs::path(model_path)));
    CameraFile cam = read_camera_file(require_file("--camera", camera_path.empty() ? out / "camera.json" : fs::path(camera_path)));
    if (!cam.pose) throw ConfigError("--camera: camera file is missing key 'R'");
    Benchmark b = run_benchmark(cfg, *cam.pose, model);
    {
        std::ofstream f(out / "metrics.csv", std::ios::binary);
        write_metrics_csv(f, b.presses);
    }
    io::write_text(out / "summary.json", benchmark_summary_json(b));
    for (size_t k = 0; k < b.bands.size(); ++k)
        std::cout << "band " << k << ": n=" << b.bands[k].count << " rms median " << io::num(b.bands[k].rms_median)
                  << " mean " << io::num(b.bands[k].rms_mean) << " peak median " << io::num(b.bands[k].peak_median)
                  << " IoU median " << io::num(b.bands[k].iou_median) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surface-of-revolution vision tactile sensor: simulation, calibration and reconstruction"};
    app.require_subcommand(1);
    Common common;
    std::string dataset;
    ReconstructArgs rargs;
    std::string recon_dir, truth_dir, model_path, camera_path;

    auto* sim = app.add_subcommand("simulate", "render reference, contact image and ground truth for a scene");
    add_common(sim, common);
    auto* cal = app.add_subcommand("calibrate", "virtual probing, pose recovery and dataset assembly");
    add_common(cal, common);
    auto* trn = app.add_subcommand("train", "fit the gradient network to a calibration dataset");
    add_common(trn, common);
    trn->add_option("--dataset", dataset, "dataset CSV (default <out>/dataset.csv)");
    auto* rec = app.add_subcommand("reconstruct", "height map and point cloud from a contact image");
    add_common(rec, common);
    rec->add_option("--model", rargs.model, "model JSON (default <out>/model.json)");
    rec->add_option("--raw", rargs.raw, "undistorted contact image (PPM)")->required();
    rec->add_option("--reference", rargs.reference, "undistorted reference image (PPM)")->required();
    rec->add_option("--camera", rargs.camera, "target camera with pose (default <out>/camera.json)");
    auto* ev = app.add_subcommand("evaluate", "metrics for a reconstruction or a held-out benchmark");
    add_common(ev, common);
    ev->add_option("--recon", recon_dir, "reconstruct output directory");
    ev->add_option("--truth", truth_dir, "simulate output directory");
    ev->add_option("--model", model_path, "model JSON for the benchmark (default <out>/model.json)");
    ev->add_option("--camera", camera_path, "calibrated camera for the benchmark (default <out>/camera.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (sim->parsed()) return cmd_simulate(common);
        if (cal->parsed()) return cmd_calibrate(common);
        if (trn->parsed()) return cmd_train(common, dataset);
        if (rec->parsed()) return cmd_reconstruct(common, rargs);
        if (ev->parsed()) return cmd_evaluate(common, recon_dir, truth_dir, model_path, camera_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
