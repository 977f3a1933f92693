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

#include "t360/simulator.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace t360 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMarchSteps = 200;
constexpr int kBisections = 56;

// Entry and exit of a ray against an axis-aligned slab |coord| < half.
bool slab_interval(double o, double d, double half, double& t0, double& t1) {
    if (d == 0.0) {
        if (std::abs(o) >= half) return false;
        t0 = -kInf;
        t1 = kInf;
        return true;
    }
    double a = (-half - o) / d, b = (half - o) / d;
    t0 = std::min(a, b);
    t1 = std::max(a, b);
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// LED rig

LedRig LedRig::make(const SensorGeometry& geom, const LedRigParams& params) {
    if (params.fin_thickness < 0.0) fail(ErrorCode::InvalidArgument, "fin_thickness must be non-negative");
    if (params.emitters_per_face < 0 || params.ring_emitters < 0)
        fail(ErrorCode::InvalidArgument, "emitter counts must be non-negative");
    if (params.intensity.minCoeff() < 0.0) fail(ErrorCode::InvalidArgument, "intensities must be non-negative");
    LedRig rig;
    rig.params_ = params;
    rig.geom_ = geom;
    rig.params_.fin_z_max = std::min(params.fin_z_max, geom.height() - params.fin_clearance);

    const LedRigParams& p = rig.params_;
    const int n = p.emitters_per_face;
    if (n > 0 && p.fin_z_max > p.fin_z_min) {
        int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        int rows = (n + cols - 1) / cols;
        const double half = p.fin_thickness / 2.0;
        for (int fin = 0; fin < 2; ++fin) {
            for (int side = 0; side < 2; ++side) {
                double sgn = side == 0 ? 1.0 : -1.0;
                for (int k = 0; k < n; ++k) {
                    int i = k % cols, j = k / cols;
                    double z = p.fin_z_min + (j + 0.5) / rows * (p.fin_z_max - p.fin_z_min);
                    double ext = rig.fin_extent(z);
                    double s = std::clamp(-p.fin_half_width + (i + 0.5) / cols * 2.0 * p.fin_half_width, -ext, ext);
                    Emitter e;
                    e.channel = fin;
                    if (fin == 0) {  // red fin in the XZ plane, faces +-y
                        e.position = Vec3(s, sgn * half, z);
                        e.direction = Vec3(0.0, sgn, 0.0);
                    } else {  // green fin in the YZ plane, faces +-x
                        e.position = Vec3(sgn * half, s, z);
                        e.direction = Vec3(sgn, 0.0, 0.0);
                    }
                    rig.emitters_.push_back(e);
                    ++rig.per_channel_[fin];
                }
            }
        }
    }
    double ring_r = p.ring_radius_fraction * geom.radius_at(0.0);
    for (int k = 0; k < p.ring_emitters; ++k) {
        double phi = 2.0 * std::numbers::pi * k / p.ring_emitters;
        Emitter e;
        e.channel = 2;
        e.position = Vec3(ring_r * std::cos(phi), ring_r * std::sin(phi), p.ring_z);
        e.direction = Vec3(0.0, 0.0, 1.0);
        rig.emitters_.push_back(e);
        ++rig.per_channel_[2];
    }
    return rig;
}

double LedRig::fin_extent(double z) const {
    if (!(z >= params_.fin_z_min && z <= params_.fin_z_max)) return 0.0;
    return std::clamp(geom_.radius_or_zero(z) - params_.fin_clearance, 0.0, params_.fin_half_width);
}

double LedRig::fin_hit(const Vec3& o, const Vec3& d, double t_min, double t_max) const {
    const double half = params_.fin_thickness / 2.0;
    if (!(half > 0.0)) return kInf;
    double best = kInf;
    // fin 0 is the slab |y| < half with |x| <= extent(z); fin 1 swaps x and y.
    for (int fin = 0; fin < 2; ++fin) {
        int across = fin == 0 ? 1 : 0, along = fin == 0 ? 0 : 1;
        double t0, t1;
        if (!slab_interval(o[across], d[across], half, t0, t1)) continue;
        // Height limits bound the interval too.
        double z0, z1;
        if (d.z() != 0.0) {
            double a = (params_.fin_z_min - o.z()) / d.z(), b = (params_.fin_z_max - o.z()) / d.z();
            z0 = std::min(a, b);
            z1 = std::max(a, b);
        } else {
            if (o.z() < params_.fin_z_min || o.z() > params_.fin_z_max) continue;
            z0 = -kInf;
            z1 = kInf;
        }
        double lo = std::max({t0, z0, t_min}), hi = std::min({t1, z1, t_max, best});
        if (!(lo < hi)) continue;
        auto inside = [&](double t) {
            Vec3 x = o + t * d;
            return std::abs(x[along]) <= fin_extent(x.z());
        };
        int n = std::clamp(static_cast<int>(std::ceil((hi - lo) / 0.05)), 1, 4000);
        double prev = lo;
        if (inside(lo)) {
            best = std::min(best, lo);
            continue;
        }
        for (int k = 1; k <= n; ++k) {
            double t = lo + (hi - lo) * k / n;
            if (inside(t)) {
                double a = prev, b = t;
                for (int it = 0; it < 40; ++it) {
                    double m = 0.5 * (a + b);
                    (inside(m) ? b : a) = m;
                }
                best = std::min(best, b);
                break;
            }
            prev = t;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Shading and scenes

void ShadingParams::validate() const {
    if (kd < 0.0 || ks < 0.0) fail(ErrorCode::InvalidArgument, "kd and ks must be non-negative");
    if (kd + ks > 1.5) fail(ErrorCode::InvalidArgument, "kd + ks must not exceed 1.5");
    if (shininess < 1.0) fail(ErrorCode::InvalidArgument, "specular exponent must be at least 1");
    if (ambient < 0.0 || ambient > 1.0) fail(ErrorCode::InvalidArgument, "ambient must lie in [0, 1]");
    if (!(reference_distance > 0.0)) fail(ErrorCode::InvalidArgument, "reference distance must be positive");
}

Scene threaded_rod(const Vec3& center, const Vec3& axis, double ball_radius, double pitch, int count) {
    if (count < 1 || !(pitch > 0.0) || !(ball_radius > 0.0))
        fail(ErrorCode::InvalidArgument, "threaded rod needs positive pitch, radius and count");
    Vec3 a = axis.normalized();
    Scene s;
    for (int k = 0; k < count; ++k) s.balls.push_back({center + (k - 0.5 * (count - 1)) * pitch * a, ball_radius});
    return s;
}

// ---------------------------------------------------------------------------
// Scene view

SceneView::SceneView(const SensorGeometry& geom, const LedRig& rig, const ShadingParams& shading,
                     const CameraModel& camera, const CameraPose& pose, bool shade_reference)
    : geom_(geom), rig_(rig), shading_(shading), camera_(camera), pose_(pose) {
    shading_.validate();
    width_ = camera_width(camera);
    height_ = camera_height(camera);
    origin_ = pose.center();
    const size_t n = static_cast<size_t>(width_) * height_;
    rays_.assign(n, Vec3::Zero());
    t_enter_.assign(n, 0.0);
    t_surface_.assign(n, 0.0);
    t_fin_.assign(n, kInf);
    valid_ = Mask(width_, height_);
    occluded_ = Mask(width_, height_);
    const double H = geom.height();
    const Vec3 o = origin_;
    auto inside = [&](const Vec3& x) {
        if (!(x.z() >= 0.0 && x.z() <= H)) return false;
        return std::hypot(x.x(), x.y()) < geom.radius_at(x.z());
    };
    const double rmax = geom.max_radius();
    for (int v = 0; v < height_; ++v) {
        for (int u = 0; u < width_; ++u) {
            size_t i = index(u, v);
            Vec3 dc;
            try {
                dc = unproject(camera, Vec2(u, v));
            } catch (const Error&) {
                continue;
            }
            Vec3 d = pose.R.transpose() * dc;
            rays_[i] = d;
            // Enter through the open base unless the camera already sits inside.
            double t_in;
            if (inside(o)) {
                t_in = 0.0;
            } else {
                if (!(d.z() > 0.0) || o.z() > 0.0) continue;
                t_in = -o.z() / d.z();
                Vec3 x = o + t_in * d;
                if (!(std::hypot(x.x(), x.y()) < geom.radius_at(0.0))) continue;
            }
            // Bound the path by the enclosing cylinder.
            double t_out = kInf;
            if (d.z() > 0.0) t_out = (H - o.z()) / d.z();
            double a = d.x() * d.x() + d.y() * d.y();
            if (a > 0.0) {
                double b = o.x() * d.x() + o.y() * d.y();
                double c = o.x() * o.x() + o.y() * o.y() - rmax * rmax;
                double disc = b * b - a * c;
                if (disc > 0.0) t_out = std::min(t_out, (-b + std::sqrt(disc)) / a);
            }
            if (!(t_out > t_in) || !std::isfinite(t_out)) continue;
            t_out += 1e-6;
            // March, then bisect the first exit.
            double step = (t_out - t_in) / kMarchSteps;
            double lo = t_in, hi = -1.0;
            for (int k = 1; k <= kMarchSteps; ++k) {
                double t = t_in + k * step;
                if (!inside(o + t * d)) {
                    hi = t;
                    break;
                }
                lo = t;
            }
            if (hi < 0.0) continue;
            for (int it = 0; it < kBisections; ++it) {
                double m = 0.5 * (lo + hi);
                (inside(o + m * d) ? lo : hi) = m;
            }
            double t_s = 0.5 * (lo + hi);
            Vec3 hit = o + t_s * d;
            if (hit.z() <= 1e-9) continue;  // left through the base plane
            valid_(u, v) = 1;
            t_enter_[i] = t_in;
            t_surface_[i] = t_s;
            t_fin_[i] = rig_.fin_hit(o, d, t_in, t_s);
            occluded_(u, v) = t_fin_[i] < t_s;
        }
    }
    reference_ = Image(width_, height_, 3);
    if (shade_reference) {
        Scene none;
        for (int v = 0; v < height_; ++v)
            for (int u = 0; u < width_; ++u) shade_pixel(index(u, v), none, &reference_(u, v, 0));
    }
}

Vec3 SceneView::surface_hit(int u, int v) const {
    size_t i = index(u, v);
    return origin_ + t_surface_[i] * rays_[i];
}

double SceneView::deformed_t(size_t i, const Scene& scene) const {
    double t = t_surface_[i];
    const Vec3& d = rays_[i];
    for (const auto& ball : scene.balls) {
        Vec3 w = origin_ - ball.center;
        double b = d.dot(w);
        double disc = b * b - (w.squaredNorm() - ball.radius * ball.radius);
        if (disc <= 0.0) continue;
        double te = -b - std::sqrt(disc);
        if (te > t_enter_[i] && te < t) t = te;
    }
    return t;
}

Vec3 SceneView::shade(const Vec3& x, const Vec3& n) const {
    Vec3 view = (origin_ - x).normalized();
    Vec3 out = Vec3::Zero();
    const double ref2 = shading_.reference_distance * shading_.reference_distance;
    for (const auto& e : rig_.emitters()) {
        Vec3 L = e.position - x;
        double d2 = L.squaredNorm();
        if (!(d2 > 0.0)) continue;
        Vec3 l = L / std::sqrt(d2);
        double emit = -e.direction.dot(l);
        if (emit <= 0.0) continue;
        double ndl = n.dot(l);
        if (ndl <= 0.0) continue;
        Vec3 r = 2.0 * ndl * n - l;
        double spec = std::pow(std::max(0.0, r.dot(view)), shading_.shininess);
        double att = shading_.inverse_square ? ref2 / d2 : 1.0;
        double scale = rig_.params().intensity[e.channel] / rig_.emitters_in_channel(e.channel);
        out[e.channel] += scale * emit * att * (shading_.kd * ndl + shading_.ks * spec);
    }
    return out;
}

void SceneView::shade_pixel(size_t i, const Scene& scene, float* rgb) const {
    int u = static_cast<int>(i % width_), v = static_cast<int>(i / width_);
    if (!valid_(u, v)) {
        rgb[0] = rgb[1] = rgb[2] = 0.0f;
        return;
    }
    double t = deformed_t(i, scene);
    if (t_fin_[i] < t) {
        rgb[0] = rgb[1] = rgb[2] = 0.5f;
        return;
    }
    Vec3 x = origin_ + t * rays_[i];
    Vec3 n;
    const ProbeBall* hit_ball = nullptr;
    if (t < t_surface_[i]) {
        for (const auto& ball : scene.balls)
            if (hit_ball == nullptr || std::abs((x - ball.center).norm() - ball.radius) <
                                           std::abs((x - hit_ball->center).norm() - hit_ball->radius))
                hit_ball = &ball;
    }
    if (hit_ball) {
        n = (x - hit_ball->center).normalized();
    } else {
        double z = std::clamp(x.z(), 0.0, geom_.height());
        Vec2 mn = geom_.meridian_normal(z);
        double phi = std::atan2(x.y(), x.x());
        n = -Vec3(mn.x() * std::cos(phi), mn.x() * std::sin(phi), mn.y());
    }
    Vec3 c = shade(x, n);
    for (int k = 0; k < 3; ++k)
        rgb[k] = static_cast<float>(std::clamp(shading_.ambient + c[k], 0.0, 1.0));
}

Rect SceneView::footprint(const Scene& scene) const {
    int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
    if (scene.empty()) return {};
    for (int v = 0; v < height_; ++v)
        for (int u = 0; u < width_; ++u) {
            if (!valid_(u, v)) continue;
            size_t i = index(u, v);
            if (deformed_t(i, scene) < t_surface_[i]) {
                x0 = std::min(x0, u);
                y0 = std::min(y0, v);
                x1 = std::max(x1, u);
                y1 = std::max(y1, v);
            }
        }
    if (x1 < 0) return {};
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

Image SceneView::render(const Scene& scene) const {
    Image out = reference_;
    Rect fp = footprint(scene);
    for (int v = fp.y; v < fp.y + fp.h; ++v)
        for (int u = fp.x; u < fp.x + fp.w; ++u) shade_pixel(index(u, v), scene, &out(u, v, 0));
    return out;
}

Image SceneView::render_window(const Scene& scene, const Rect& window) const {
    Rect w = window.intersect({0, 0, width_, height_});
    if (!(w == window)) fail(ErrorCode::OutOfRange, "render window exceeds the image");
    Image out = reference_.crop(window);
    for (int v = 0; v < window.h; ++v)
        for (int u = 0; u < window.w; ++u) {
            size_t i = index(window.x + u, window.y + v);
            if (!valid_(window.x + u, window.y + v)) continue;
            if (deformed_t(i, scene) < t_surface_[i]) shade_pixel(i, scene, &out(u, v, 0));
        }
    return out;
}

Map depth_gradient(const Map& depth, const Mask& valid) {
    const int w = depth.width(), h = depth.height();
    Map g(w, h, 2);
    for (int v = 1; v + 1 < h; ++v)
        for (int u = 1; u + 1 < w; ++u) {
            bool ok = true;
            for (int dv = -1; dv <= 1 && ok; ++dv)
                for (int du = -1; du <= 1 && ok; ++du) ok = valid(u + du, v + dv) != 0;
            if (!ok) continue;
            g(u, v, 0) = (depth(u + 1, v) - depth(u - 1, v)) / 2.0;
            g(u, v, 1) = (depth(u, v + 1) - depth(u, v - 1)) / 2.0;
        }
    return g;
}

GroundTruth SceneView::ground_truth(const Scene& scene, double contact_epsilon) const {
    return ground_truth_window(scene, {0, 0, width_, height_}, contact_epsilon);
}

GroundTruth SceneView::ground_truth_window(const Scene& scene, const Rect& window, double contact_epsilon) const {
    const Rect image{0, 0, width_, height_};
    if (!(window.intersect(image) == window)) fail(ErrorCode::OutOfRange, "ground-truth window exceeds the image");
    // One extra ring so gradients on the window edge see their neighbors.
    Rect outer = window.pad(1).intersect(image);
    Map depth(outer.w, outer.h);
    Mask valid(outer.w, outer.h);
    for (int v = 0; v < outer.h; ++v)
        for (int u = 0; u < outer.w; ++u) {
            int iu = outer.x + u, iv = outer.y + v;
            if (!valid_(iu, iv)) continue;
            valid(u, v) = 1;
            size_t i = index(iu, iv);
            depth(u, v) = t_surface_[i] - deformed_t(i, scene);
        }
    Map grad = depth_gradient(depth, valid);
    Rect inner{window.x - outer.x, window.y - outer.y, window.w, window.h};
    GroundTruth gt;
    gt.window = window;
    gt.depth = depth.crop(inner);
    gt.gradient = grad.crop(inner);
    gt.valid = valid.crop(inner);
    gt.occlusion = occluded_.crop(window);
    gt.contact = Mask(window.w, window.h);
    for (int v = 0; v < window.h; ++v)
        for (int u = 0; u < window.w; ++u) gt.contact(u, v) = gt.depth(u, v) > contact_epsilon;
    return gt;
}

// ---------------------------------------------------------------------------
// Free functions

Image render(const SensorGeometry& geom, const LedRig& rig, const ShadingParams& shading, const CameraModel& camera,
             const CameraPose& pose, const Scene& scene) {
    SceneView view(geom, rig, shading, camera, pose);
    return view.render(scene);
}

GroundTruth render_ground_truth(const SensorGeometry& geom, const CameraModel& camera, const CameraPose& pose,
                                const Scene& scene, double contact_epsilon) {
    SceneView view(geom, LedRig::make(geom), ShadingParams{}, camera, pose, false);
    return view.ground_truth(scene, contact_epsilon);
}

void add_noise(Image& image, double sigma, uint64_t seed, const Rect& window) {
    if (!(sigma > 0.0)) return;
    for (int v = 0; v < image.height(); ++v)
        for (int u = 0; u < image.width(); ++u) {
            uint64_t key = seed ^ (static_cast<uint64_t>(window.x + u) * 0x9E3779B97F4A7C15ULL) ^
                           (static_cast<uint64_t>(window.y + v) * 0xC2B2AE3D27D4EB4FULL);
            Rng rng(key);
            for (int c = 0; c < image.channels(); ++c) {
                double val = image(u, v, c) + sigma * rng.normal();
                image(u, v, c) = static_cast<float>(std::clamp(val, 0.0, 1.0));
            }
        }
}

double occlusion_fraction(const SceneView& view) {
    int valid = count(view.valid());
    if (valid == 0) return 0.0;
    return static_cast<double>(count(mask_and(view.valid(), view.occlusion()))) / valid;
}

double occlusion_fraction(const SensorGeometry& geom, const LedRig& rig, const CameraModel& camera,
                          const CameraPose& pose) {
    return occlusion_fraction(SceneView(geom, rig, ShadingParams{}, camera, pose, false));
}

ChannelEnergy channel_directionality(const SceneView& view, double z_lo, double z_hi, int presses, double depth,
                                     double ball_radius, uint64_t seed) {
    const auto& geom = view.geometry();
    if (!(z_lo >= 0.0 && z_hi <= geom.height() && z_lo < z_hi) || presses < 1)
        fail(ErrorCode::InvalidArgument, "band must lie inside [0, H] and presses must be positive");
    Rng rng(seed);
    ChannelEnergy out;
    for (int k = 0; k < presses; ++k) {
        double z = z_lo + (k + rng.uniform(0.25, 0.75)) / presses * (z_hi - z_lo);
        double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        Scene scene{{press_ball(geom.surface_point(z, phi), depth, ball_radius)}};
        Rect fp = view.footprint(scene);
        if (fp.empty()) {
            ++out.presses;
            continue;
        }
        Image img = view.render_window(scene, fp);
        Image ref = view.reference().crop(fp);
        for (int v = 0; v < fp.h; ++v)
            for (int u = 0; u < fp.w; ++u)
                for (int c = 0; c < 3; ++c) {
                    double d = static_cast<double>(img(u, v, c)) - ref(u, v, c);
                    out.mean_energy[c] += d * d;
                }
        ++out.presses;
    }
    out.mean_energy /= static_cast<double>(out.presses);
    return out;
}

CameraPose base_camera_pose(double below) {
    CameraPose p;
    p.R = Mat3::Identity();
    p.t = Vec3(0.0, 0.0, below);
    return p;
}

FisheyeCamera default_fisheye(int size, double max_theta_deg) {
    FisheyeCamera cam;
    cam.width = cam.height = size;
    cam.cx = cam.cy = 0.5 * (size - 1);
    cam.k = {0.02, -0.005, 0.001, 0.0};
    double theta = max_theta_deg * std::numbers::pi / 180.0;
    cam.fx = cam.fy = cam.cx / cam.distort(theta);
    return cam;
}

}  // namespace t360
