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

#include "t360/config.hpp"

#include "t360/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace t360 {

using Json = nlohmann::ordered_json;

Profile profile_from_string(const std::string& s) {
    if (s == "smoke") return Profile::Smoke;
    if (s == "desk") return Profile::Desk;
    throw ConfigError("config key 'profile' must be 'smoke' or 'desk', got '" + s + "'");
}

std::string to_string(Profile p) { return p == Profile::Smoke ? "smoke" : "desk"; }

RunConfig RunConfig::defaults(Profile profile) {
    RunConfig c;
    c.profile = profile;
    c.training.seed = 0;  // replaced by train_seed() at run time
    if (profile == Profile::Smoke) {
        c.probes = 100;
        c.held_out = 20;
        c.training.epochs = 30;
        c.training.learning_rate = 3e-3;
    } else {
        c.probes = 2000;
        c.held_out = 200;
        c.training.epochs = 120;
        c.training.learning_rate = 3e-3;
    }
    return c;
}

namespace {

// Reads an object section, rejecting unknown keys and naming the offending path.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("config key '" + path_ + "' must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.push_back(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config key '" + name(key) + "' has the wrong type");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const Json& at(const char* key) {
        seen_.push_back(key);
        return j_.at(key);
    }
    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw ConfigError("unknown config key '" + name(it.key()) + "'");
    }

private:
    const Json& j_;
    std::string path_;
    std::vector<std::string> seen_;
};

Vec3 vec3_from(const Json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("config key '" + key + "' must hold 3 numbers");
    try {
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' must hold 3 numbers");
    }
}

ProbeBall ball_from(const Json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 4) throw ConfigError("config key '" + key + "' entries must be [x, y, z, r]");
    try {
        ProbeBall b;
        b.center = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
        b.radius = j[3].get<double>();
        return b;
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' entries must be [x, y, z, r]");
    }
}

void read_geometry(Section s, GeometryParams& g) {
    std::string kind = to_string(g.kind);
    s.get("kind", kind);
    try {
        g.kind = profile_kind_from_string(kind);
    } catch (const Error&) {
        throw ConfigError("config key 'geometry.kind' must be cylinder_hemisphere, cone or spline");
    }
    s.get("radius", g.radius);
    s.get("cylinder_height", g.cylinder_height);
    s.get("height", g.height);
    s.get("gel_thickness", g.gel_thickness);
    s.get("angular_resolution", g.angular_resolution);
    s.get("axial_resolution", g.axial_resolution);
    if (s.has("control_points")) {
        const Json& cp = s.at("control_points");
        if (!cp.is_array()) throw ConfigError("config key 'geometry.control_points' must be a list of [z, r]");
        g.control_points.clear();
        for (const auto& p : cp) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ConfigError("config key 'geometry.control_points' must be a list of [z, r]");
            g.control_points.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
    }
    s.finish();
}

void read_rig(Section s, LedRigParams& r) {
    s.get("fin_thickness", r.fin_thickness);
    s.get("fin_half_width", r.fin_half_width);
    s.get("fin_z_min", r.fin_z_min);
    s.get("fin_z_max", r.fin_z_max);
    s.get("fin_clearance", r.fin_clearance);
    s.get("emitters_per_face", r.emitters_per_face);
    s.get("ring_emitters", r.ring_emitters);
    s.get("ring_radius_fraction", r.ring_radius_fraction);
    s.get("ring_z", r.ring_z);
    if (s.has("intensity")) r.intensity = vec3_from(s.at("intensity"), s.name("intensity"));
    s.finish();
}

void read_shading(Section s, ShadingParams& p) {
    s.get("kd", p.kd);
    s.get("ks", p.ks);
    s.get("shininess", p.shininess);
    s.get("ambient", p.ambient);
    s.get("inverse_square", p.inverse_square);
    s.get("reference_distance", p.reference_distance);
    s.finish();
}

void read_training(Section s, gradnet::TrainConfig& t) {
    int hidden_width = t.layers.size() > 2 ? t.layers[1] : 64;
    int hidden_layers = static_cast<int>(t.layers.size()) - 2;
    s.get("hidden_width", hidden_width);
    s.get("hidden_layers", hidden_layers);
    if (hidden_width < 1 || hidden_layers < 1)
        throw ConfigError("config keys 'training.hidden_width' and 'training.hidden_layers' must be positive");
    t.layers.assign(1, gradnet::kInputs);
    for (int i = 0; i < hidden_layers; ++i) t.layers.push_back(hidden_width);
    t.layers.push_back(gradnet::kOutputs);
    std::string act = t.hidden == gradnet::Activation::Tanh ? "tanh" : "identity";
    s.get("activation", act);
    if (act == "tanh") t.hidden = gradnet::Activation::Tanh;
    else if (act == "identity") t.hidden = gradnet::Activation::Identity;
    else throw ConfigError("config key 'training.activation' must be 'tanh' or 'identity'");
    s.get("epochs", t.epochs);
    s.get("batch_size", t.batch_size);
    s.get("learning_rate", t.learning_rate);
    s.get("beta1", t.beta1);
    s.get("beta2", t.beta2);
    s.get("eps", t.eps);
    s.get("decay", t.decay);
    s.get("plateau_patience", t.plateau_patience);
    s.get("plateau_min_delta", t.plateau_min_delta);
    s.get("validation_fraction", t.validation_fraction);
    s.finish();
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text, Profile fallback) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Section top(j, "");
    Profile profile = fallback;
    if (j.is_object() && j.contains("profile")) {
        std::string name;
        top.get("profile", name);
        profile = profile_from_string(name);
    }
    RunConfig c = defaults(profile);
    top.get("seed", c.seed);
    if (top.has("geometry")) read_geometry(Section(top.at("geometry"), "geometry"), c.geometry);
    if (top.has("rig")) read_rig(Section(top.at("rig"), "rig"), c.rig);
    if (top.has("shading")) read_shading(Section(top.at("shading"), "shading"), c.shading);
    if (top.has("camera")) {
        Section s(top.at("camera"), "camera");
        s.get("file", c.camera_file);
        s.get("fisheye_size", c.fisheye_size);
        s.get("fisheye_max_theta_deg", c.fisheye_max_theta_deg);
        s.get("base_offset", c.camera_base_offset);
        s.get("target_size", c.target_size);
        s.get("target_half_fov_deg", c.target_half_fov_deg);
        s.get("noise_sigma", c.noise_sigma);
        s.finish();
    }
    if (top.has("probing")) {
        Section s(top.at("probing"), "probing");
        s.get("probes", c.probes);
        s.get("depth", c.probe_depth);
        s.get("ball_radius", c.ball_radius);
        s.get("base_margin", c.base_margin);
        s.get("pose_probes", c.pose_probes);
        s.get("contact_epsilon", c.contact_epsilon);
        s.get("ransac_iterations", c.ransac.iterations);
        s.get("ransac_threshold_px", c.ransac.inlier_threshold);
        s.finish();
    }
    if (top.has("dataset")) {
        Section s(top.at("dataset"), "dataset");
        s.get("balance_fraction", c.balance_fraction);
        s.get("per_probe_cap", c.per_probe_cap);
        s.finish();
    }
    if (top.has("training")) read_training(Section(top.at("training"), "training"), c.training);
    if (top.has("roi")) {
        Section s(top.at("roi"), "roi");
        s.get("threshold", c.roi.threshold);
        s.get("close_iterations", c.roi.close_iterations);
        s.get("open_iterations", c.roi.open_iterations);
        s.get("min_pixels", c.roi.min_pixels);
        s.get("max_band", c.roi.max_band);
        s.finish();
    }
    if (top.has("evaluation")) {
        Section s(top.at("evaluation"), "evaluation");
        s.get("held_out", c.held_out);
        s.get("bands", c.bands);
        s.finish();
    }
    if (top.has("scene")) {
        Section s(top.at("scene"), "scene");
        if (s.has("balls")) {
            const Json& b = s.at("balls");
            if (!b.is_array()) throw ConfigError("config key 'scene.balls' must be a list");
            c.balls.clear();
            for (const auto& e : b) c.balls.push_back(ball_from(e, "scene.balls"));
        }
        s.finish();
    }
    top.finish();
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path, std::optional<Profile> profile) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    RunConfig c = from_json(ss.str(), profile.value_or(Profile::Smoke));
    if (profile && c.profile != *profile) {
        // An explicit --profile wins over the file: rebuild on the requested defaults.
        Json j = Json::parse(ss.str());
        j["profile"] = to_string(*profile);
        c = from_json(j.dump(), *profile);
    }
    // Relative camera paths resolve against the config file location.
    if (!c.camera_file.empty() && std::filesystem::path(c.camera_file).is_relative())
        c.camera_file = (path.parent_path() / c.camera_file).lexically_normal().string();
    return c;
}

std::string RunConfig::to_json() const {
    Json j;
    j["profile"] = t360::to_string(profile);
    j["seed"] = seed;
    Json g;
    g["kind"] = t360::to_string(geometry.kind);
    g["radius"] = geometry.radius;
    g["cylinder_height"] = geometry.cylinder_height;
    g["height"] = geometry.height;
    Json cp = Json::array();
    for (const auto& p : geometry.control_points) cp.push_back({p.x(), p.y()});
    g["control_points"] = cp;
    g["gel_thickness"] = geometry.gel_thickness;
    g["angular_resolution"] = geometry.angular_resolution;
    g["axial_resolution"] = geometry.axial_resolution;
    j["geometry"] = g;
    Json r;
    r["fin_thickness"] = rig.fin_thickness;
    r["fin_half_width"] = rig.fin_half_width;
    r["fin_z_min"] = rig.fin_z_min;
    r["fin_z_max"] = rig.fin_z_max;
    r["fin_clearance"] = rig.fin_clearance;
    r["emitters_per_face"] = rig.emitters_per_face;
    r["ring_emitters"] = rig.ring_emitters;
    r["ring_radius_fraction"] = rig.ring_radius_fraction;
    r["ring_z"] = rig.ring_z;
    r["intensity"] = {rig.intensity.x(), rig.intensity.y(), rig.intensity.z()};
    j["rig"] = r;
    Json s;
    s["kd"] = shading.kd;
    s["ks"] = shading.ks;
    s["shininess"] = shading.shininess;
    s["ambient"] = shading.ambient;
    s["inverse_square"] = shading.inverse_square;
    s["reference_distance"] = shading.reference_distance;
    j["shading"] = s;
    Json cam;
    cam["file"] = camera_file;
    cam["fisheye_size"] = fisheye_size;
    cam["fisheye_max_theta_deg"] = fisheye_max_theta_deg;
    cam["base_offset"] = camera_base_offset;
    cam["target_size"] = target_size;
    cam["target_half_fov_deg"] = target_half_fov_deg;
    cam["noise_sigma"] = noise_sigma;
    j["camera"] = cam;
    Json pr;
    pr["probes"] = probes;
    pr["depth"] = probe_depth;
    pr["ball_radius"] = ball_radius;
    pr["base_margin"] = base_margin;
    pr["pose_probes"] = pose_probes;
    pr["contact_epsilon"] = contact_epsilon;
    pr["ransac_iterations"] = ransac.iterations;
    pr["ransac_threshold_px"] = ransac.inlier_threshold;
    j["probing"] = pr;
    j["dataset"] = {{"balance_fraction", balance_fraction}, {"per_probe_cap", per_probe_cap}};
    Json t;
    t["hidden_width"] = training.layers.size() > 2 ? training.layers[1] : 0;
    t["hidden_layers"] = static_cast<int>(training.layers.size()) - 2;
    t["activation"] = training.hidden == gradnet::Activation::Tanh ? "tanh" : "identity";
    t["epochs"] = training.epochs;
    t["batch_size"] = training.batch_size;
    t["learning_rate"] = training.learning_rate;
    t["beta1"] = training.beta1;
    t["beta2"] = training.beta2;
    t["eps"] = training.eps;
    t["decay"] = training.decay;
    t["plateau_patience"] = training.plateau_patience;
    t["plateau_min_delta"] = training.plateau_min_delta;
    t["validation_fraction"] = training.validation_fraction;
    j["training"] = t;
    j["roi"] = {{"threshold", roi.threshold},
                {"close_iterations", roi.close_iterations},
                {"open_iterations", roi.open_iterations},
                {"min_pixels", roi.min_pixels},
                {"max_band", roi.max_band}};
    j["evaluation"] = {{"held_out", held_out}, {"bands", bands}};
    Json balls_j = Json::array();
    for (const auto& b : balls) balls_j.push_back({b.center.x(), b.center.y(), b.center.z(), b.radius});
    j["scene"] = {{"balls", balls_j}};
    return j.dump(2) + "\n";
}

void RunConfig::validate() const {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(probes >= 1, "config key 'probing.probes' must be at least 1");
    need(probe_depth > 0.0, "config key 'probing.depth' must be positive");
    need(ball_radius > 0.0, "config key 'probing.ball_radius' must be positive");
    need(pose_probes >= 4, "config key 'probing.pose_probes' must be at least 4");
    need(contact_epsilon >= 0.0, "config key 'probing.contact_epsilon' must be non-negative");
    need(ransac.iterations >= 1 && ransac.inlier_threshold > 0.0, "config keys 'probing.ransac_*' must be positive");
    need(balance_fraction >= 0.0 && balance_fraction < 1.0, "config key 'dataset.balance_fraction' must be in [0, 1)");
    need(per_probe_cap >= 1, "config key 'dataset.per_probe_cap' must be at least 1");
    need(fisheye_size >= 16 && target_size >= 16, "config keys 'camera.*_size' must be at least 16");
    need(fisheye_max_theta_deg > 0.0 && fisheye_max_theta_deg < 89.0,
         "config key 'camera.fisheye_max_theta_deg' must be in (0, 89)");
    need(target_half_fov_deg > 0.0 && target_half_fov_deg < 89.0,
         "config key 'camera.target_half_fov_deg' must be in (0, 89)");
    need(camera_base_offset > 0.0, "config key 'camera.base_offset' must be positive");
    need(noise_sigma >= 0.0, "config key 'camera.noise_sigma' must be non-negative");
    need(held_out >= 1, "config key 'evaluation.held_out' must be at least 1");
    need(bands >= 1, "config key 'evaluation.bands' must be at least 1");
    for (const auto& b : balls) need(b.radius > 0.0, "config key 'scene.balls' needs positive radii");
    try {
        shading.validate();
        gradnet::TrainConfig t = training;
        t.validate();
        SensorGeometry::make(geometry);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

SensorSetup RunConfig::sensor() const {
    SensorSetup s;
    s.geometry = SensorGeometry::make(geometry);
    s.rig = rig;
    s.shading = shading;
    s.true_pose = base_camera_pose(camera_base_offset);
    if (camera_file.empty()) {
        s.camera = default_fisheye(fisheye_size, fisheye_max_theta_deg);
    } else {
        if (!std::filesystem::exists(camera_file))
            throw ConfigError("config key 'camera.file': file not found: " + camera_file);
        CameraFile f;
        try {
            f = read_camera_file(camera_file);
        } catch (const Error& e) {
            throw ConfigError("config key 'camera.file': " + std::string(e.what()));
        }
        const auto* fish = std::get_if<FisheyeCamera>(&f.camera);
        if (!fish) throw ConfigError("config key 'camera.file': sensor camera must use model 'fisheye'");
        s.camera = *fish;
        if (f.pose) s.true_pose = *f.pose;
    }
    s.target = make_target_pinhole(target_size, target_half_fov_deg);
    s.contact_epsilon = contact_epsilon;
    s.ball_radius = ball_radius;
    s.noise_sigma = noise_sigma;
    s.noise_seed = seed ^ 0xA5A5A5A5ULL;
    return s;
}

ProbeBall parse_ball(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            double d = std::stod(item, &used);
            if (used != item.size() || !std::isfinite(d)) throw std::invalid_argument(item);
            v.push_back(d);
        } catch (const std::exception&) {
            throw ConfigError("--ball expects x,y,z,r numbers, got '" + text + "'");
        }
    }
    if (v.size() != 4 || !(v[3] > 0.0)) throw ConfigError("--ball expects x,y,z,r with r > 0, got '" + text + "'");
    ProbeBall b;
    b.center = {v[0], v[1], v[2]};
    b.radius = v[3];
    return b;
}

// ---------------------------------------------------------------------------
// Workflows

CalibrationRun run_calibration(const RunConfig& config) {
    SensorSetup setup = config.sensor();
    std::vector<SurfacePoint> plan =
        sample_surface(setup.geometry, config.probes, config.plan_seed(), config.base_margin);
    RansacConfig ransac = config.ransac;
    ransac.seed = config.pose_seed();
    std::vector<SurfacePoint> pose_plan = plan;
    if (static_cast<int>(pose_plan.size()) < config.pose_probes)
        pose_plan = sample_surface(setup.geometry, config.pose_probes, config.pose_seed(), config.base_margin);
    CalibrationRun run;
    run.pose = recover_pose(setup, pose_plan, config.pose_probes, config.probe_depth, config.pose_seed(), ransac);
    Prober prober(setup, run.pose.pose);
    DatasetBuilder builder(config.balance_fraction, config.per_probe_cap, config.dataset_seed());
    for (size_t i = 0; i < plan.size(); ++i)
        builder.add(prober.probe(static_cast<int>(i), plan[i], config.probe_depth), prober.reference());
    run.dataset = builder.finish();
    run.reference = prober.reference();
    run.target = setup.target;
    return run;
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Benchmark::Band summarize(const std::vector<const PressMetrics*>& rows) {
    Benchmark::Band b;
    b.count = static_cast<int>(rows.size());
    std::vector<double> rms, peak, iou;
    for (const auto* r : rows) {
        rms.push_back(r->metrics.rms_mm);
        peak.push_back(r->metrics.peak_err_mm);
        iou.push_back(r->metrics.iou);
        b.rms_mean += r->metrics.rms_mm;
    }
    if (!rows.empty()) b.rms_mean /= static_cast<double>(rows.size());
    b.rms_median = median(rms);
    b.peak_median = median(peak);
    b.iou_median = median(iou);
    return b;
}

}  // namespace

Benchmark run_benchmark(const RunConfig& config, const CameraPose& calibrated_pose, const gradnet::MlpModel& model) {
    SensorSetup setup = config.sensor();
    Prober prober(setup, calibrated_pose);
    LedRig rig = LedRig::make(setup.geometry, setup.rig);
    SceneView truth(setup.geometry, rig, setup.shading, setup.target, setup.true_pose, false);
    std::vector<SurfacePoint> held =
        sample_surface(setup.geometry, config.held_out, config.held_out_seed(), config.base_margin);
    const double H = setup.geometry.height();
    Benchmark b;
    for (size_t i = 0; i < held.size(); ++i) {
        Scene scene{{press_ball(held[i], config.probe_depth, config.ball_radius)}};
        Image raw = prober.capture(scene, static_cast<int>(i));
        Reconstruction rec = reconstruct(model, raw, prober.reference(), prober.label_view(), config.roi);
        GroundTruth gt = truth.ground_truth(scene, setup.contact_epsilon);
        PressMetrics pm;
        pm.probe = static_cast<int>(i);
        pm.band = height_band(held[i].z, H, config.bands);
        pm.metrics = evaluate(rec.height, rec.mask, gt.depth, gt.contact);
        b.presses.push_back(pm);
        b.press_heights.push_back(held[i].z);
    }
    for (int k = 0; k < config.bands; ++k) {
        std::vector<const PressMetrics*> rows;
        for (const auto& p : b.presses)
            if (p.band == k) rows.push_back(&p);
        b.bands.push_back(summarize(rows));
    }
    std::vector<const PressMetrics*> lower;
    for (size_t i = 0; i < b.presses.size(); ++i)
        if (b.press_heights[i] < 2.0 * H / 3.0) lower.push_back(&b.presses[i]);
    b.lower = summarize(lower);
    return b;
}

namespace {

Json band_json(const Benchmark::Band& b) {
    return {{"count", b.count},
            {"rms_median_mm", b.rms_median},
            {"rms_mean_mm", b.rms_mean},
            {"peak_err_median_mm", b.peak_median},
            {"iou_median", b.iou_median}};
}

}  // namespace

std::string benchmark_summary_json(const Benchmark& b) {
    Json j;
    Json bands = Json::array();
    for (const auto& band : b.bands) bands.push_back(band_json(band));
    j["bands"] = bands;
    j["below_two_thirds"] = band_json(b.lower);
    j["presses"] = b.presses.size();
    return j.dump(2) + "\n";
}

std::string pose_json(const PinholeCamera& target, const PoseRecovery& pose) {
    return camera_to_json(target, pose.pose);
}

std::string loss_history_csv(const std::vector<gradnet::EpochStats>& history) {
    std::string s = "epoch,train_loss,validation_loss,learning_rate\n";
    for (const auto& e : history)
        s += std::to_string(e.epoch) + ',' + io::num(e.train_loss) + ',' + io::num(e.validation_loss) + ',' +
             io::num(e.learning_rate) + '\n';
    return s;
}

PipelineResult run_full_pipeline(const RunConfig& config, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    PipelineResult res;
    CalibrationRun cal = run_calibration(config);
    {
        std::ofstream f(out / "dataset.csv", std::ios::binary);
        write_dataset_csv(f, cal.dataset);
    }
    io::write_text(out / "camera.json", pose_json(cal.target, cal.pose));
    gradnet::TrainConfig tc = config.training;
    tc.seed = config.train_seed();
    res.training = gradnet::train(cal.dataset.training_set(), tc);
    gradnet::save(out / "model.json", res.training.model);
    io::write_text(out / "loss.csv", loss_history_csv(res.training.history));
    res.benchmark = run_benchmark(config, cal.pose.pose, res.training.model);
    {
        std::ofstream f(out / "metrics.csv", std::ios::binary);
        write_metrics_csv(f, res.benchmark.presses);
    }
    io::write_text(out / "summary.json", benchmark_summary_json(res.benchmark));
    io::write_text(out / "config.json", config.to_json());
    res.pose = std::move(cal.pose);
    res.dataset_rows = cal.dataset.rows.size();
    return res;
}

}  // namespace t360
