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

#include "t360/optics.hpp"

#include "t360/io.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <numbers>

namespace t360 {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

void FisheyeCamera::validate() const {
    if (!(fx > 0.0 && fy > 0.0)) fail(ErrorCode::InvalidArgument, "camera focal lengths must be positive");
    if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "camera image size must be positive");
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
        fail(ErrorCode::InvalidArgument, "principal point outside the image");
}

void PinholeCamera::validate() const {
    if (!(fx > 0.0 && fy > 0.0)) fail(ErrorCode::InvalidArgument, "camera focal lengths must be positive");
    if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "camera image size must be positive");
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
        fail(ErrorCode::InvalidArgument, "principal point outside the image");
}

double FisheyeCamera::distort(double theta) const {
    double t2 = theta * theta;
    return theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))));
}

double FisheyeCamera::distort_derivative(double theta) const {
    double t2 = theta * theta;
    return 1.0 + t2 * (3.0 * k[0] + t2 * (5.0 * k[1] + t2 * (7.0 * k[2] + t2 * 9.0 * k[3])));
}

int camera_width(const CameraModel& cam) {
    return std::visit([](const auto& c) { return c.width; }, cam);
}
int camera_height(const CameraModel& cam) {
    return std::visit([](const auto& c) { return c.height; }, cam);
}

CameraPose CameraPose::look_at(const Vec3& center, const Vec3& forward, const Vec3& right) {
    Vec3 z = forward.normalized();
    Vec3 x = (right - right.dot(z) * z).normalized();
    Vec3 y = z.cross(x);
    CameraPose pose;
    pose.R.row(0) = x.transpose();
    pose.R.row(1) = y.transpose();
    pose.R.row(2) = z.transpose();
    pose.t = -pose.R * center;
    return pose;
}

Mat3 orthonormalize(const Mat3& R) {
    Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 U = svd.matrixU(), V = svd.matrixV();
    Mat3 out = U * V.transpose();
    if (out.determinant() < 0) {
        U.col(2) *= -1.0;
        out = U * V.transpose();
    }
    return out;
}

Mat3 rotation_exp(const Vec3& w) {
    double angle = w.norm();
    if (angle < 1e-300) return Mat3::Identity();
    return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
    Mat3 d = a.transpose() * b;
    double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
    // acos is ill-conditioned near zero; use the skew part there.
    Vec3 s(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
    return std::atan2(0.5 * s.norm(), c);
}

namespace {

bool incidence_ok(const Vec3& xc) {
    if (!(xc.z() > 0.0)) return false;
    double theta = std::atan2(std::hypot(xc.x(), xc.y()), xc.z());
    return theta < kMaxIncidenceDeg * kDeg;
}

void check_in_front(const Vec3& xc) {
    if (!(xc.z() > 0.0)) fail(ErrorCode::OutOfRange, "point is behind the camera");
    if (!incidence_ok(xc)) fail(ErrorCode::OutOfRange, "incidence angle at or beyond 89 degrees");
}

Vec2 project_fisheye_unchecked(const FisheyeCamera& cam, const Vec3& xc) {
    double r = std::hypot(xc.x(), xc.y());
    if (r == 0.0) return {cam.cx, cam.cy};
    double theta = std::atan2(r, xc.z());
    double td = cam.distort(theta);
    return {cam.cx + cam.fx * td * xc.x() / r, cam.cy + cam.fy * td * xc.y() / r};
}

Vec2 project_pinhole_unchecked(const PinholeCamera& cam, const Vec3& xc) {
    return {cam.cx + cam.fx * xc.x() / xc.z(), cam.cy + cam.fy * xc.y() / xc.z()};
}

}  // namespace

Vec2 project(const FisheyeCamera& cam, const Vec3& xc) {
    check_in_front(xc);
    return project_fisheye_unchecked(cam, xc);
}

Vec2 project(const PinholeCamera& cam, const Vec3& xc) {
    check_in_front(xc);
    return project_pinhole_unchecked(cam, xc);
}

Vec2 project(const CameraModel& cam, const Vec3& xc) {
    return std::visit([&](const auto& c) { return project(c, xc); }, cam);
}

Vec2 project(const CameraModel& cam, const CameraPose& pose, const Vec3& world) {
    return project(cam, pose.to_camera(world));
}

Vec2 project(const FisheyeCamera& cam, const CameraPose& pose, const Vec3& world) {
    return project(cam, pose.to_camera(world));
}

std::optional<Vec2> try_project(const CameraModel& cam, const Vec3& xc) {
    if (!incidence_ok(xc)) return std::nullopt;
    if (const auto* f = std::get_if<FisheyeCamera>(&cam)) return project_fisheye_unchecked(*f, xc);
    return project_pinhole_unchecked(std::get<PinholeCamera>(cam), xc);
}

Vec3 unproject(const FisheyeCamera& cam, const Vec2& px) {
    double mx = (px.x() - cam.cx) / cam.fx;
    double my = (px.y() - cam.cy) / cam.fy;
    double td = std::hypot(mx, my);
    if (td == 0.0) return {0.0, 0.0, 1.0};
    double theta = td;
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        double f = cam.distort(theta) - td;
        if (std::abs(f) < 1e-12) {
            converged = true;
            break;
        }
        double df = cam.distort_derivative(theta);
        if (!(df > 0.0)) break;
        theta -= f / df;
        if (!(theta > 0.0 && theta < std::numbers::pi)) break;
    }
    if (!converged && std::abs(cam.distort(theta) - td) < 1e-12) converged = true;
    if (!converged)
        fail(ErrorCode::NoConvergence, "fisheye unprojection did not converge (distortion outside the valid regime)");
    double s = std::sin(theta) / td;
    return {mx * s, my * s, std::cos(theta)};
}

Vec3 unproject(const PinholeCamera& cam, const Vec2& px) {
    return Vec3((px.x() - cam.cx) / cam.fx, (px.y() - cam.cy) / cam.fy, 1.0).normalized();
}

Vec3 unproject(const CameraModel& cam, const Vec2& px) {
    return std::visit([&](const auto& c) { return unproject(c, px); }, cam);
}

PinholeCamera make_target_pinhole(int size, double max_theta_deg) {
    if (size < 2) fail(ErrorCode::InvalidArgument, "target size must be at least 2");
    if (!(max_theta_deg > 0.0 && max_theta_deg < kMaxIncidenceDeg))
        fail(ErrorCode::InvalidArgument, "target half field of view must be in (0, 89) degrees");
    PinholeCamera p;
    p.width = p.height = size;
    p.cx = p.cy = 0.5 * (size - 1);
    p.fx = p.fy = p.cx / std::tan(max_theta_deg * kDeg);
    return p;
}

RemapTable make_remap(const CameraModel& source, const CameraModel& target) {
    RemapTable t;
    t.width = camera_width(target);
    t.height = camera_height(target);
    t.src_u.assign(static_cast<size_t>(t.width) * t.height, -1.0f);
    t.src_v.assign(t.src_u.size(), -1.0f);
    const int sw = camera_width(source), sh = camera_height(source);
    auto snap = [](double x) {
        double r = std::round(x);
        return std::abs(x - r) < 1e-6 ? r : x;
    };
    for (int v = 0; v < t.height; ++v) {
        for (int u = 0; u < t.width; ++u) {
            Vec3 ray;
            try {
                ray = unproject(target, Vec2(u, v));
            } catch (const Error&) {
                continue;
            }
            auto src = try_project(source, ray);
            if (!src) continue;
            double su = snap(src->x()), sv = snap(src->y());
            if (su < 0.0 || sv < 0.0 || su > sw - 1 || sv > sh - 1) continue;
            size_t i = static_cast<size_t>(v) * t.width + u;
            t.src_u[i] = static_cast<float>(su);
            t.src_v[i] = static_cast<float>(sv);
        }
    }
    return t;
}

namespace {

void sample_bilinear(const Image& src, float su, float sv, float* out) {
    int x0 = static_cast<int>(std::floor(su)), y0 = static_cast<int>(std::floor(sv));
    float ax = su - x0, ay = sv - y0;
    int x1 = std::min(x0 + 1, src.width() - 1), y1 = std::min(y0 + 1, src.height() - 1);
    for (int c = 0; c < src.channels(); ++c) {
        if (ax == 0.0f && ay == 0.0f) {
            out[c] = src(x0, y0, c);
            continue;
        }
        float top = src(x0, y0, c) + ax * (src(x1, y0, c) - src(x0, y0, c));
        float bottom = src(x0, y1, c) + ax * (src(x1, y1, c) - src(x0, y1, c));
        out[c] = top + ay * (bottom - top);
    }
}

}  // namespace

Image remap(const Image& src, const RemapTable& table) {
    return remap_window(src, table, {0, 0, table.width, table.height});
}

Image remap_window(const Image& src, const RemapTable& table, const Rect& window) {
    Image out(window.w, window.h, src.channels());
    float px[4];
    for (int v = 0; v < window.h; ++v) {
        for (int u = 0; u < window.w; ++u) {
            int tu = window.x + u, tv = window.y + v;
            if (tu < 0 || tv < 0 || tu >= table.width || tv >= table.height) continue;
            size_t i = static_cast<size_t>(tv) * table.width + tu;
            if (table.src_u[i] < 0.0f) continue;
            sample_bilinear(src, table.src_u[i], table.src_v[i], px);
            for (int c = 0; c < src.channels(); ++c) out(u, v, c) = px[c];
        }
    }
    return out;
}

Image undistort_image(const FisheyeCamera& camera, const Image& image, const CameraModel& target) {
    if (image.width() != camera.width || image.height() != camera.height)
        fail(ErrorCode::InvalidArgument, "image size does not match the camera");
    return remap(image, make_remap(camera, target));
}

double reprojection_rms(const CameraModel& cam, const CameraPose& pose, const std::vector<Correspondence>& corr) {
    if (corr.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& c : corr) {
        auto px = try_project(cam, pose.to_camera(c.world));
        if (!px) return std::numeric_limits<double>::infinity();
        sum += (*px - c.pixel).squaredNorm();
    }
    return std::sqrt(sum / corr.size());
}

namespace {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

FisheyeCamera with_params(const FisheyeCamera& base, const Vec8& p) {
    FisheyeCamera c = base;
    c.fx = p[0];
    c.fy = p[1];
    c.cx = p[2];
    c.cy = p[3];
    for (int i = 0; i < 4; ++i) c.k[i] = p[4 + i];
    return c;
}

Vec8 params_of(const FisheyeCamera& c) {
    Vec8 p;
    p << c.fx, c.fy, c.cx, c.cy, c.k[0], c.k[1], c.k[2], c.k[3];
    return p;
}

// Residuals and analytic Jacobian of the fisheye projection with respect to
// the intrinsics, for camera-frame points.
double intrinsic_system(const FisheyeCamera& cam, const std::vector<Vec3>& xc, const std::vector<Correspondence>& corr,
                        Mat8* jtj, Vec8* jtr) {
    double cost = 0.0;
    if (jtj) jtj->setZero();
    if (jtr) jtr->setZero();
    for (size_t i = 0; i < xc.size(); ++i) {
        const Vec3& x = xc[i];
        double r = std::hypot(x.x(), x.y());
        double theta = std::atan2(r, x.z());
        double a = r > 0 ? x.x() / r : 0.0, b = r > 0 ? x.y() / r : 0.0;
        double td = cam.distort(theta);
        double ex = cam.cx + cam.fx * td * a - corr[i].pixel.x();
        double ey = cam.cy + cam.fy * td * b - corr[i].pixel.y();
        cost += ex * ex + ey * ey;
        if (!jtj) continue;
        Eigen::Matrix<double, 2, 8> J = Eigen::Matrix<double, 2, 8>::Zero();
        J(0, 0) = td * a;
        J(1, 1) = td * b;
        J(0, 2) = 1.0;
        J(1, 3) = 1.0;
        double tp = theta * theta * theta;
        for (int k = 0; k < 4; ++k) {
            J(0, 4 + k) = cam.fx * a * tp;
            J(1, 4 + k) = cam.fy * b * tp;
            tp *= theta * theta;
        }
        *jtj += J.transpose() * J;
        *jtr += J.transpose() * Eigen::Vector2d(ex, ey);
    }
    return cost;
}

}  // namespace

FisheyeCamera refine_intrinsics(const std::vector<Correspondence>& corr, const FisheyeCamera& initial,
                                const CameraPose& fixed_pose, RefineReport* report) {
    initial.validate();
    if (corr.size() < 12) fail(ErrorCode::InvalidArgument, "refine_intrinsics needs at least 12 correspondences");
    std::vector<Vec3> xc;
    xc.reserve(corr.size());
    for (const auto& c : corr) {
        Vec3 x = fixed_pose.to_camera(c.world);
        check_in_front(x);
        xc.push_back(x);
    }
    double span = 0.0;
    for (size_t i = 0; i < xc.size(); ++i)
        for (size_t j = i + 1; j < xc.size(); ++j) {
            double c = std::clamp(xc[i].normalized().dot(xc[j].normalized()), -1.0, 1.0);
            span = std::max(span, std::acos(c));
        }
    if (span < 60.0 * kDeg)
        fail(ErrorCode::Degenerate, "ill-conditioned intrinsics: correspondences span only " +
                                        io::num(span / kDeg) + " degrees of field of view (need 60)");

    Vec8 p = params_of(initial);
    Mat8 jtj;
    Vec8 jtr;
    double cost = intrinsic_system(with_params(initial, p), xc, corr, &jtj, &jtr);
    {
        // Column-scaled conditioning of the normal equations.
        Vec8 d = jtj.diagonal().cwiseSqrt().cwiseMax(1e-300);
        Mat8 scaled = d.cwiseInverse().asDiagonal() * jtj * d.cwiseInverse().asDiagonal();
        Eigen::SelfAdjointEigenSolver<Mat8> es(scaled);
        double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (!(lo > 1e-14 * hi)) fail(ErrorCode::Degenerate, "ill-conditioned normal equations for intrinsics");
    }

    RefineReport rep;
    rep.rms_history.push_back(std::sqrt(cost / corr.size()));
    double lambda = 1e-3;
    for (int it = 0; it < 200; ++it) {
        ++rep.iterations;
        Mat8 A = jtj;
        A.diagonal() += lambda * jtj.diagonal();
        Vec8 step = A.ldlt().solve(-jtr);
        if (!step.allFinite() || step.norm() < 1e-10) break;
        Vec8 trial = p + step;
        FisheyeCamera cand = with_params(initial, trial);
        Mat8 jtj2;
        Vec8 jtr2;
        double c2 = (cand.fx > 0 && cand.fy > 0) ? intrinsic_system(cand, xc, corr, &jtj2, &jtr2)
                                                 : std::numeric_limits<double>::infinity();
        if (c2 < cost) {
            p = trial;
            cost = c2;
            jtj = jtj2;
            jtr = jtr2;
            lambda /= 10.0;
            ++rep.accepted_steps;
            rep.rms_history.push_back(std::sqrt(cost / corr.size()));
        } else {
            lambda *= 10.0;
            if (lambda > 1e16) break;
        }
    }
    if (report) *report = rep;
    return with_params(initial, p);
}

// ---------------------------------------------------------------------------
// Camera files

std::string camera_to_json(const CameraModel& cam, const std::optional<CameraPose>& pose) {
    nlohmann::ordered_json j;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            j["model"] = std::is_same_v<T, FisheyeCamera> ? "fisheye" : "pinhole";
            j["fx"] = c.fx;
            j["fy"] = c.fy;
            j["cx"] = c.cx;
            j["cy"] = c.cy;
            if constexpr (std::is_same_v<T, FisheyeCamera>)
                j["k"] = {c.k[0], c.k[1], c.k[2], c.k[3]};
            else
                j["k"] = {0.0, 0.0, 0.0, 0.0};
            j["width"] = c.width;
            j["height"] = c.height;
        },
        cam);
    if (pose) {
        std::vector<double> R(9), t(3);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) R[r * 3 + c] = pose->R(r, c);
        for (int r = 0; r < 3; ++r) t[r] = pose->t[r];
        j["R"] = R;
        j["t"] = t;
    }
    return j.dump(2) + "\n";
}

CameraFile camera_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("camera file is not valid JSON: ") + e.what());
    }
    auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) fail(ErrorCode::Parse, std::string("camera file is missing key '") + key + "'");
        return j[key];
    };
    CameraFile out;
    try {
        std::string model = j.value("model", "fisheye");
        if (model == "fisheye") {
            FisheyeCamera c;
            c.fx = need("fx");
            c.fy = need("fy");
            c.cx = need("cx");
            c.cy = need("cy");
            const auto& k = need("k");
            if (!k.is_array() || k.size() != 4) fail(ErrorCode::Parse, "camera key 'k' must hold 4 coefficients");
            for (int i = 0; i < 4; ++i) c.k[i] = k[i];
            c.width = need("width");
            c.height = need("height");
            c.validate();
            out.camera = c;
        } else if (model == "pinhole") {
            PinholeCamera c;
            c.fx = need("fx");
            c.fy = need("fy");
            c.cx = need("cx");
            c.cy = need("cy");
            c.width = need("width");
            c.height = need("height");
            c.validate();
            out.camera = c;
        } else {
            fail(ErrorCode::Parse, "camera key 'model' must be 'fisheye' or 'pinhole'");
        }
        if (j.contains("R") || j.contains("t")) {
            const auto& R = need("R");
            const auto& t = need("t");
            if (!R.is_array() || R.size() != 9) fail(ErrorCode::Parse, "camera key 'R' must hold 9 values");
            if (!t.is_array() || t.size() != 3) fail(ErrorCode::Parse, "camera key 't' must hold 3 values");
            CameraPose pose;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) pose.R(r, c) = R[r * 3 + c];
            for (int r = 0; r < 3; ++r) pose.t[r] = t[r];
            out.pose = pose;
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("camera file has a bad value: ") + e.what());
    }
    return out;
}

CameraFile read_camera_file(const std::filesystem::path& path) { return camera_from_json(io::read_text(path)); }

std::string camera_canonical(const CameraModel& cam) { return camera_to_json(cam); }

}  // namespace t360
