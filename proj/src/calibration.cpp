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

#include "t360/calibration.hpp"

#include "t360/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace t360 {

// ---------------------------------------------------------------------------
// Prober

Prober::Prober(const SensorSetup& setup, const CameraPose& label_pose) : setup_(setup) {
    LedRig rig = LedRig::make(setup.geometry, setup.rig);
    raw_view_ = std::make_unique<SceneView>(setup.geometry, rig, setup.shading, setup.camera, setup.true_pose);
    label_view_ =
        std::make_unique<SceneView>(setup.geometry, rig, setup.shading, setup.target, label_pose, false);
    table_ = make_remap(setup.camera, setup.target);
    reference_ = remap(raw_view_->reference(), table_);
    scratch_ = raw_view_->reference();
}

Rect Prober::target_window(const Rect& fp) const {
    if (fp.empty()) return {};
    const float x0 = static_cast<float>(fp.x - 1), x1 = static_cast<float>(fp.x + fp.w);
    const float y0 = static_cast<float>(fp.y - 1), y1 = static_cast<float>(fp.y + fp.h);
    Rect out;
    for (int v = 0; v < table_.height; ++v)
        for (int u = 0; u < table_.width; ++u) {
            size_t i = static_cast<size_t>(v) * table_.width + u;
            float su = table_.src_u[i], sv = table_.src_v[i];
            if (su < 0.0f) continue;
            if (su > x0 && su < x1 && sv > y0 && sv < y1) out = out.empty() ? Rect{u, v, 1, 1} : out.unite({u, v, 1, 1});
        }
    return out;
}

ProbeSample Prober::probe_scene(int index, const Scene& scene, int margin) const {
    ProbeSample s;
    s.probe_index = index;
    if (!scene.balls.empty()) s.ball = scene.balls.front();
    const Rect image{0, 0, setup_.target.width, setup_.target.height};
    Rect fp_raw = raw_view_->footprint(scene);
    Rect fp_lab = label_view_->footprint(scene);
    Rect win = target_window(fp_raw);
    if (!fp_lab.empty()) win = win.empty() ? fp_lab : win.unite(fp_lab);
    if (win.empty()) {
        s.flagged = true;
        return s;
    }
    s.window = win.pad(margin).intersect(image);
    if (!fp_raw.empty()) {
        Image patch = raw_view_->render_window(scene, fp_raw);
        scratch_.paste(patch, fp_raw.x, fp_raw.y);
    }
    s.raw = remap_window(scratch_, table_, s.window);
    add_noise(s.raw, setup_.noise_sigma, frame_seed(index), s.window);
    if (!fp_raw.empty()) scratch_.paste(raw_view_->reference().crop(fp_raw), fp_raw.x, fp_raw.y);
    s.truth = label_view_->ground_truth_window(scene, s.window, setup_.contact_epsilon);
    s.flagged = count(s.truth.contact) == 0;
    return s;
}

ProbeSample Prober::probe(int index, const SurfacePoint& point, double depth) const {
    ProbeBall ball = press_ball(point, depth, setup_.ball_radius);
    ProbeSample s = probe_scene(index, Scene{{ball}});
    s.point = point;
    s.ball = ball;
    s.deepest_point = point.position - depth * point.normal;
    return s;
}

uint64_t Prober::frame_seed(int index) const {
    return setup_.noise_seed ^ (static_cast<uint64_t>(index) + 1) * 0xD1B54A32D192ED03ULL;
}

Image Prober::capture(const Scene& scene, int frame) const {
    Rect fp = raw_view_->footprint(scene);
    if (fp.empty()) {
        Image out = reference_;
        add_noise(out, setup_.noise_sigma, frame_seed(frame));
        return out;
    }
    scratch_.paste(raw_view_->render_window(scene, fp), fp.x, fp.y);
    Image out = remap(scratch_, table_);
    scratch_.paste(raw_view_->reference().crop(fp), fp.x, fp.y);
    add_noise(out, setup_.noise_sigma, frame_seed(frame));
    return out;
}

std::vector<ProbeSample> run_probing(const Prober& prober, const std::vector<SurfacePoint>& plan, double depth) {
    if (depth < 0.0) fail(ErrorCode::InvalidArgument, "indentation depth must be non-negative");
    std::vector<ProbeSample> out;
    out.reserve(plan.size());
    for (size_t i = 0; i < plan.size(); ++i) out.push_back(prober.probe(static_cast<int>(i), plan[i], depth));
    return out;
}

// ---------------------------------------------------------------------------
// Pose from minimum points

Correspondence minimum_point(const ProbeSample& sample) {
    const Map& d = sample.truth.depth;
    if (sample.flagged || count(sample.truth.contact) == 0)
        fail(ErrorCode::InvalidArgument, "minimum point needs a nonempty contact mask");
    int bu = -1, bv = -1;
    double best = -1.0;
    // Raster order visits lower (v, u) first, so strict > keeps the tie-break.
    for (int v = 0; v < d.height(); ++v)
        for (int u = 0; u < d.width(); ++u)
            if (d(u, v) > best) {
                best = d(u, v);
                bu = u;
                bv = v;
            }
    Correspondence c;
    c.pixel = Vec2(sample.window.x + bu, sample.window.y + bv);
    c.world = sample.deepest_point;
    return c;
}

PoseRecovery recover_pose(const SensorSetup& setup, const std::vector<SurfacePoint>& plan, int count_wanted,
                          double depth, uint64_t seed, const RansacConfig& ransac) {
    if (count_wanted < 4) fail(ErrorCode::InvalidArgument, "pose recovery needs at least 4 probes");
    LedRig rig = LedRig::make(setup.geometry, setup.rig);
    SceneView view(setup.geometry, rig, setup.shading, setup.target, setup.true_pose, false);
    std::vector<size_t> order(plan.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    PoseRecovery rec;
    for (size_t k = 0; k < order.size() && static_cast<int>(rec.correspondences.size()) < count_wanted; ++k) {
        const SurfacePoint& p = plan[order[k]];
        Scene scene{{press_ball(p, depth, setup.ball_radius)}};
        Rect fp = view.footprint(scene);
        if (fp.empty()) continue;
        ProbeSample s;
        s.probe_index = static_cast<int>(order[k]);
        s.point = p;
        s.deepest_point = p.position - depth * p.normal;
        s.window = fp.pad(2).intersect({0, 0, view.width(), view.height()});
        s.truth = view.ground_truth_window(scene, s.window, setup.contact_epsilon);
        if (count(s.truth.contact) == 0) continue;
        rec.correspondences.push_back(minimum_point(s));
    }
    if (rec.correspondences.size() < 4) fail(ErrorCode::Degenerate, "too few visible probes for pose recovery");
    PnpResult pnp = estimate_pose_pnp(setup.target, rec.correspondences, ransac);
    rec.pose = pnp.pose;
    rec.inliers = pnp.inliers;
    rec.inlier_rms = pnp.inlier_rms;
    rec.rotation_error_deg = rotation_angle_between(pnp.pose.R, setup.true_pose.R) * 180.0 / std::numbers::pi;
    rec.translation_error_mm = (pnp.pose.t - setup.true_pose.t).norm();
    return rec;
}

// ---------------------------------------------------------------------------
// Dataset

size_t CalibDataset::contact_rows() const {
    size_t n = 0;
    for (const auto& r : rows) n += r.contact;
    return n;
}

double CalibDataset::non_contact_fraction() const {
    if (rows.empty()) return 0.0;
    return static_cast<double>(rows.size() - contact_rows()) / static_cast<double>(rows.size());
}

gradnet::TrainingSet CalibDataset::training_set() const {
    gradnet::TrainingSet t;
    t.x.reserve(rows.size() * gradnet::kInputs);
    t.y.reserve(rows.size() * gradnet::kOutputs);
    for (const auto& r : rows) t.add({r.u, r.v, r.r, r.g, r.b}, r.gx, r.gy);
    return t;
}

DatasetBuilder::DatasetBuilder(double balance_fraction, int per_probe_cap, uint64_t seed)
    : balance_(balance_fraction), cap_(per_probe_cap), seed_(seed) {
    if (!(balance_fraction >= 0.0 && balance_fraction < 1.0))
        fail(ErrorCode::InvalidArgument, "balance fraction must lie in [0, 1)");
    if (per_probe_cap < 1) fail(ErrorCode::InvalidArgument, "per-probe cap must be positive");
    data_.seed = seed;
    data_.balance_fraction = balance_fraction;
    data_.per_probe_cap = per_probe_cap;
}

void DatasetBuilder::add(const ProbeSample& s, const Image& reference) {
    if (s.flagged) {
        ++data_.excluded_probes;
        return;
    }
    ++data_.probes;
    const GroundTruth& gt = s.truth;
    Mask near = dilate(gt.contact, 2);
    std::vector<std::pair<int, int>> contact, other;
    for (int v = 0; v < s.window.h; ++v)
        for (int u = 0; u < s.window.w; ++u) {
            if (!gt.valid(u, v) || gt.occlusion(u, v)) continue;
            if (gt.contact(u, v)) contact.emplace_back(u, v);
            else if (!near(u, v)) other.emplace_back(u, v);
        }
    Rng rng(seed_ ^ (static_cast<uint64_t>(s.probe_index) + 1) * 0x9E3779B97F4A7C15ULL);
    rng.shuffle(contact);
    if (contact.size() > static_cast<size_t>(cap_)) contact.resize(cap_);
    size_t want = static_cast<size_t>(std::llround(static_cast<double>(contact.size()) * balance_ / (1.0 - balance_)));
    rng.shuffle(other);
    if (other.size() > want) other.resize(want);
    auto emit = [&](int u, int v, bool is_contact) {
        CalibRow r;
        int iu = s.window.x + u, iv = s.window.y + v;
        r.u = static_cast<float>(iu);
        r.v = static_cast<float>(iv);
        r.r = s.raw(u, v, 0) - reference(iu, iv, 0);
        r.g = s.raw(u, v, 1) - reference(iu, iv, 1);
        r.b = s.raw(u, v, 2) - reference(iu, iv, 2);
        r.gx = is_contact ? gt.gradient(u, v, 0) : 0.0;
        r.gy = is_contact ? gt.gradient(u, v, 1) : 0.0;
        r.contact = is_contact;
        r.probe = s.probe_index;
        data_.rows.push_back(r);
    };
    for (auto [u, v] : contact) emit(u, v, true);
    for (auto [u, v] : other) emit(u, v, false);
}

CalibDataset DatasetBuilder::finish() {
    if (data_.contact_rows() == 0) fail(ErrorCode::Degenerate, "no contact rows in any probe");
    Rng rng(seed_);
    rng.shuffle(data_.rows);
    return std::move(data_);
}

CalibDataset build_dataset(const std::vector<ProbeSample>& samples, const Image& reference, double balance_fraction,
                           int per_probe_cap, uint64_t seed) {
    DatasetBuilder b(balance_fraction, per_probe_cap, seed);
    for (const auto& s : samples) b.add(s, reference);
    return b.finish();
}

void write_dataset_csv(std::ostream& os, const CalibDataset& data) {
    os << "u,v,r,g,b,gx,gy,contact\n";
    std::string line;
    for (const auto& r : data.rows) {
        line.clear();
        line += io::num(r.u);
        line += ',';
        line += io::num(r.v);
        line += ',';
        line += io::num(r.r);
        line += ',';
        line += io::num(r.g);
        line += ',';
        line += io::num(r.b);
        line += ',';
        line += io::num(r.gx);
        line += ',';
        line += io::num(r.gy);
        line += ',';
        line += r.contact ? '1' : '0';
        line += '\n';
        os << line;
    }
}

CalibDataset read_dataset_csv(std::istream& is) {
    CalibDataset d;
    std::string line;
    int lineno = 0;
    if (!std::getline(is, line)) fail(ErrorCode::Parse, "dataset is empty (missing header)");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "u,v,r,g,b,gx,gy,contact")
        fail(ErrorCode::Parse, "line 1: expected header u,v,r,g,b,gx,gy,contact");
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double f[8];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int k = 0; k < 8; ++k) {
            auto res = std::from_chars(p, end, f[k]);
            bool sep_ok = k < 7 ? (res.ptr < end && *res.ptr == ',') : res.ptr == end;
            if (res.ec != std::errc() || !sep_ok || !std::isfinite(f[k]))
                fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": malformed dataset row");
            p = res.ptr + 1;
        }
        if (f[7] != 0.0 && f[7] != 1.0)
            fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": contact flag must be 0 or 1");
        CalibRow r;
        r.u = static_cast<float>(f[0]);
        r.v = static_cast<float>(f[1]);
        r.r = static_cast<float>(f[2]);
        r.g = static_cast<float>(f[3]);
        r.b = static_cast<float>(f[4]);
        r.gx = f[5];
        r.gy = f[6];
        r.contact = f[7] == 1.0;
        d.rows.push_back(r);
    }
    return d;
}

std::string geometry_hash(const SensorGeometry& geom) { return hex64(fnv1a(geom.canonical())); }

std::string camera_hash(const CameraModel& cam) { return hex64(fnv1a(camera_canonical(cam))); }

}  // namespace t360
