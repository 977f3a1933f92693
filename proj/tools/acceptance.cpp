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

// Acceptance suite: one PASS / FAIL line per criterion on stdout, progress on
// stderr. Criteria 7 and 8 run the desk-scale pipeline and take tens of minutes.

#include "t360/config.hpp"
#include "t360/gradnet.hpp"
#include "t360/poisson.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

using namespace t360;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
}

void progress(const std::string& msg) { std::cerr << "[acceptance] " << msg << std::endl; }

Map dense_poisson(const Map& b) {
    const int W = b.width(), H = b.height(), n = W * H;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) {
            int i = v * W + u;
            rhs(i) = b(u, v);
            A(i, i) = -4.0;
            if (u > 0) A(i, i - 1) = 1.0;
            if (u + 1 < W) A(i, i + 1) = 1.0;
            if (v > 0) A(i, i - W) = 1.0;
            if (v + 1 < H) A(i, i + W) = 1.0;
        }
    Eigen::VectorXd h = A.partialPivLu().solve(rhs);
    Map out(W, H);
    for (int i = 0; i < n; ++i) out.values()[i] = h(i);
    return out;
}

double rel_l2(const Map& a, const Map& b) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += std::pow(a.values()[i] - b.values()[i], 2);
        den += std::pow(b.values()[i], 2);
    }
    return std::sqrt(num / den);
}

void criterion_poisson() {
    double worst = 0.0, fast_time = 0.0;
    for (int s = 0; s < 20; ++s) {
        Rng r(1000 + s);
        int w = 1 + static_cast<int>(r.index(32)), h = 1 + static_cast<int>(r.index(32));
        if (s == 0) w = h = 32;
        Map b(w, h);
        for (auto& x : b.values()) x = r.uniform(-1.0, 1.0);
        auto t0 = Clock::now();
        Map fast = poisson::solve_fast(b);
        fast_time += seconds_since(t0);
        worst = std::max(worst, rel_l2(fast, dense_poisson(b)));
    }
    const int W = 32, H = 32;
    Map e(W, H);
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u)
            e(u, v) = std::sin(3 * std::numbers::pi * (u + 1) / (W + 1)) * std::sin(2 * std::numbers::pi * (v + 1) / (H + 1));
    auto t0 = Clock::now();
    double eig = rel_l2(poisson::solve_fast(poisson::laplacian(e)), e);
    fast_time += seconds_since(t0);
    bool ok = worst < 1e-8 && eig < 1e-10 && fast_time < 1.0;
    report(1, "Poisson correctness", ok,
           fmt("dense max rel L2 %.2e (< 1e-8), eigenfunction %.2e (< 1e-10), runtime %.3f s (< 1 s)", worst, eig,
               fast_time));
}

void criterion_paraboloid() {
    const int N = 128;
    const double R = 80.0, a = 50.0, c = 63.5;
    const double base = std::sqrt(R * R - a * a);
    Map f(N, N, 2), truth(N, N);
    Mask m(N, N);
    double peak = 0.0;
    for (int v = 0; v < N; ++v)
        for (int u = 0; u < N; ++u) {
            double du = u - c, dv = v - c, r2 = du * du + dv * dv;
            if (r2 >= a * a) continue;
            double s = std::sqrt(R * R - r2);
            m(u, v) = 1;
            truth(u, v) = s - base;
            peak = std::max(peak, truth(u, v));
            f(u, v, 0) = -du / s;
            f(u, v, 1) = -dv / s;
        }
    auto t0 = Clock::now();
    Map h = poisson::solve_masked(f, m);
    double t = seconds_since(t0);
    double sum = 0.0;
    int n = 0;
    for (int v = 0; v < N; ++v)
        for (int u = 0; u < N; ++u)
            if (m(u, v)) {
                sum += std::pow(h(u, v) - truth(u, v), 2);
                ++n;
            }
    double rel = std::sqrt(sum / n) / peak;
    report(2, "Paraboloid integration", rel < 0.02 && t < 5.0,
           fmt("spherical cap 128x128 RMS %.3f%% of peak (< 2%%), runtime %.3f s (< 5 s)", 100.0 * rel, t));
}

void criterion_fisheye() {
    FisheyeCamera cam = default_fisheye(640);
    cam.k = {0.02, -0.005, 0.001, 0.0005};
    // Image radius reached at 85 degrees keeps every sample within the model's domain.
    double th = 85.0 * std::numbers::pi / 180.0, t2 = th * th;
    double rmax = cam.fx * th * (1 + t2 * (cam.k[0] + t2 * (cam.k[1] + t2 * (cam.k[2] + t2 * cam.k[3]))));
    Rng r(42);
    double worst = 0.0;
    int n = 0;
    while (n < 10000) {
        Vec2 px(r.uniform(0, cam.width), r.uniform(0, cam.height));
        if ((px - Vec2(cam.cx, cam.cy)).norm() > rmax) continue;
        worst = std::max(worst, (project(cam, unproject(cam, px)) - px).norm());
        ++n;
    }
    report(3, "Fisheye round-trip", worst < 1e-6,
           fmt("max |project(unproject(p)) - p| %.2e px over 10000 pixels, k = (0.02, -0.005, 0.001, 0.0005) (< 1e-6)",
               worst));
}

void criterion_pose() {
    const CameraModel target = make_target_pinhole(640, 72.0);
    const CameraPose truth = base_camera_pose();
    SensorGeometry geom = SensorGeometry::make({});
    double worst_r = 0.0, worst_t = 0.0;
    for (int s = 0; s < 20; ++s) {
        auto pts = sample_surface(geom, 100, 500 + s);
        Rng r(900 + s);
        std::vector<Correspondence> c;
        for (const auto& p : pts) {
            auto px = try_project(target, truth.to_camera(p.position));
            if (!px) continue;
            c.push_back({p.position, *px + 0.3 * Vec2(r.normal(), r.normal())});
        }
        int outliers = static_cast<int>(std::lround(0.3 * c.size()));
        for (int i = 0; i < outliers; ++i) c[r.index(c.size())].pixel = Vec2(r.uniform(0, 640), r.uniform(0, 640));
        RansacConfig rc;
        rc.seed = s;
        PnpResult res = estimate_pose_pnp(target, c, rc);
        worst_r = std::max(worst_r, rotation_angle_between(res.pose.R, truth.R) * 180.0 / std::numbers::pi);
        worst_t = std::max(worst_t, (res.pose.t - truth.t).norm());
    }
    RunConfig cfg = RunConfig::defaults(Profile::Desk);
    cfg.noise_sigma = 0.0;
    SensorSetup setup = cfg.sensor();
    auto plan = sample_surface(setup.geometry, cfg.pose_probes, cfg.pose_seed(), cfg.base_margin);
    RansacConfig rc = cfg.ransac;
    rc.seed = cfg.pose_seed();
    PoseRecovery rec = recover_pose(setup, plan, cfg.pose_probes, cfg.probe_depth, cfg.pose_seed(), rc);
    bool ok = worst_r < 0.1 && worst_t < 0.05 && rec.rotation_error_deg < 0.2 && rec.translation_error_mm < 0.1;
    report(4, "Pose recovery", ok,
           fmt("RANSAC PnP worst of 20 seeds %.4f deg / %.4f mm (< 0.1 / 0.05); minimum-point procedure with %zu "
               "probes %.4f deg / %.4f mm (< 0.2 / 0.1)",
               worst_r, worst_t, rec.correspondences.size(), rec.rotation_error_deg, rec.translation_error_mm));
}

void criterion_backprop() {
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
        Rng r(70 + s);
        gradnet::TrainingSet data;
        for (int i = 0; i < 30; ++i)
            data.add({r.uniform(0, 640), r.uniform(0, 640), r.uniform(-0.3, 0.3), r.uniform(-0.3, 0.3),
                      r.uniform(-0.3, 0.3)},
                     r.uniform(-0.2, 0.2), r.uniform(-0.2, 0.2));
        auto act = s % 2 ? gradnet::Activation::Identity : gradnet::Activation::Tanh;
        auto m = gradnet::MlpModel::random({gradnet::kInputs, 12, 12, gradnet::kOutputs}, 80 + s, act);
        m.shift = {320, 320, 0, 0, 0};
        m.scale = {320, 320, 0.2, 0.2, 0.2};
        m.out_scale = 0.1;
        worst = std::max(worst, gradnet::gradient_check(m, data));
    }
    report(5, "Backprop correctness", worst < 1e-4,
           fmt("max relative gradient error %.2e over 10 random models (< 1e-4)", worst));
}

void criterion_occlusion() {
    SensorGeometry geom = SensorGeometry::make({});
    double f = occlusion_fraction(geom, LedRig::make(geom), make_target_pinhole(640, 72.0), base_camera_pose());
    report(6, "Occlusion fraction", f >= 0.05 && f <= 0.15,
           fmt("%.4f of viable pixels in the undistorted image, R=10 mm, 0.7 mm fins (in [0.05, 0.15])", f));
}

std::string band_text(const Benchmark::Band& b) {
    return fmt("n=%d rms median %.3f mean %.3f peak median %.3f IoU median %.2f", b.count, b.rms_median, b.rms_mean,
               b.peak_median, b.iou_median);
}

void criterion_end_to_end(const fs::path& out) {
    RunConfig cfg = RunConfig::defaults(Profile::Desk);
    progress("criterion 7: desk pipeline (calibrate 2000 probes, train, 200 held-out presses)");
    auto t0 = Clock::now();
    PipelineResult r = run_full_pipeline(cfg, out / "desk_cylinder");
    double minutes = seconds_since(t0) / 60.0;
    const Benchmark& b = r.benchmark;
    bool thresholds = b.lower.rms_median <= 0.2 && b.lower.peak_median <= 0.3;
    bool ordering = b.bands.back().rms_mean > b.bands.front().rms_mean;
    bool ok = thresholds && ordering && minutes <= 45.0 && static_cast<int>(b.presses.size()) == cfg.held_out;
    std::string bands;
    for (size_t i = 0; i < b.bands.size(); ++i) bands += fmt("; band %zu %s", i, band_text(b.bands[i]).c_str());
    report(7, "End-to-end", ok,
           fmt("below 2/3 H: median RMS %.3f mm (<= 0.2), median peak error %.3f mm (<= 0.3) [%s]; top-band mean RMS "
               "%.3f > bottom %.3f [%s]; %zu presses; runtime %.1f min (<= 45) [%s]",
               b.lower.rms_median, b.lower.peak_median, thresholds ? "met" : "not met", b.bands.back().rms_mean,
               b.bands.front().rms_mean, ordering ? "met" : "not met", b.presses.size(), minutes,
               minutes <= 45.0 ? "met" : "not met") +
               bands);
}

void criterion_generality(const fs::path& out) {
    RunConfig cone = RunConfig::defaults(Profile::Desk);
    cone.geometry.kind = ProfileKind::Cone;
    cone.geometry.radius = 10.0;
    cone.geometry.height = 25.0;
    RunConfig spline = RunConfig::defaults(Profile::Desk);
    spline.geometry.kind = ProfileKind::Spline;
    spline.geometry.control_points = {{0, 9}, {10, 10}, {18, 7}, {25, 0}};
    std::string detail;
    bool ok = true;
    for (auto [name, cfg] : {std::pair<const char*, RunConfig>{"cone", cone}, {"spline", spline}}) {
        progress(std::string("criterion 8: desk pipeline on the ") + name);
        fs::path dir = out / (std::string("desk_") + name);
        try {
            PipelineResult r = run_full_pipeline(cfg, dir);
            const Benchmark& b = r.benchmark;
            bool emitted = fs::exists(dir / "metrics.csv") && fs::exists(dir / "summary.json") &&
                           static_cast<int>(b.presses.size()) == cfg.held_out;
            ok = ok && emitted;
            detail += fmt("%s%s: %zu presses, bottom %s, top %s", detail.empty() ? "" : "; ", name, b.presses.size(),
                          band_text(b.bands.front()).c_str(), band_text(b.bands.back()).c_str());
        } catch (const std::exception& e) {
            ok = false;
            detail += fmt("%s%s: failed: %s", detail.empty() ? "" : "; ", name, e.what());
        }
    }
    report(8, "Generality", ok, "config-only runs completed and emitted metrics; " + detail);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void criterion_determinism(const fs::path& out) {
    RunConfig cfg = RunConfig::defaults(Profile::Smoke);
    progress("criterion 9: smoke pipeline twice");
    run_full_pipeline(cfg, out / "smoke_a");
    run_full_pipeline(cfg, out / "smoke_b");
    int files = 0, differing = 0;
    size_t bytes = 0;
    for (const auto& e : fs::directory_iterator(out / "smoke_a")) {
        std::string a = slurp(e.path()), b = slurp(out / "smoke_b" / e.path().filename());
        ++files;
        bytes += a.size();
        if (a != b) ++differing;
    }
    report(9, "Determinism", files > 0 && differing == 0,
           fmt("smoke pipeline (%d probes): %d files, %zu bytes, %d differing", cfg.probes, files, bytes, differing));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite: one PASS / FAIL line per criterion"};
    std::vector<int> only;
    std::string out = "acceptance_out";
    app.add_option("--only", only, "run only these criteria (1-9)")->check(CLI::Range(1, 9));
    app.add_option("--out", out, "directory for pipeline artifacts");
    CLI11_PARSE(app, argc, argv);
    std::set<int> want(only.begin(), only.end());
    auto selected = [&](int id) { return want.empty() || want.count(id); };
    fs::create_directories(out);
    try {
        if (selected(1)) criterion_poisson();
        if (selected(2)) criterion_paraboloid();
        if (selected(3)) criterion_fisheye();
        if (selected(4)) criterion_pose();
        if (selected(5)) criterion_backprop();
        if (selected(6)) criterion_occlusion();
        if (selected(7)) criterion_end_to_end(out);
        if (selected(8)) criterion_generality(out);
        if (selected(9)) criterion_determinism(out);
    } catch (const std::exception& e) {
        std::printf("FAIL aborted: %s\n", e.what());
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
