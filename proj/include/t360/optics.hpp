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

// Equidistant fisheye camera (theta-polynomial distortion), the pinhole
// target used after undistortion, and pose recovery.

#pragma once

#include "t360/common.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace t360 {

struct FisheyeCamera {
    double fx = 300.0, fy = 300.0;
    double cx = 0.0, cy = 0.0;
    std::array<double, 4> k{0.0, 0.0, 0.0, 0.0};
    int width = 0, height = 0;

    void validate() const;
    /// theta_d = theta (1 + k1 theta^2 + k2 theta^4 + k3 theta^6 + k4 theta^8)
    double distort(double theta) const;
    double distort_derivative(double theta) const;
};

struct PinholeCamera {
    double fx = 300.0, fy = 300.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    void validate() const;
};

using CameraModel = std::variant<FisheyeCamera, PinholeCamera>;

int camera_width(const CameraModel& cam);
int camera_height(const CameraModel& cam);

/// World-to-camera rigid transform: x_cam = R x_world + t.
struct CameraPose {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    Vec3 to_camera(const Vec3& x) const { return R * x + t; }
    Vec3 center() const { return -R.transpose() * t; }
    /// Camera looking along `forward` from `center`; image +x follows `right`.
    static CameraPose look_at(const Vec3& center, const Vec3& forward, const Vec3& right);
};

/// Nearest rotation in the Frobenius sense (det +1).
Mat3 orthonormalize(const Mat3& R);
Mat3 rotation_exp(const Vec3& w);
/// Angle of R_a^T R_b in radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

constexpr double kMaxIncidenceDeg = 89.0;

/// Camera-frame projection. Throws for points behind the camera or beyond
/// the 89 degree incidence limit.
Vec2 project(const FisheyeCamera& cam, const Vec3& xc);
Vec2 project(const PinholeCamera& cam, const Vec3& xc);
Vec2 project(const CameraModel& cam, const Vec3& xc);
Vec2 project(const CameraModel& cam, const CameraPose& pose, const Vec3& world);
Vec2 project(const FisheyeCamera& cam, const CameraPose& pose, const Vec3& world);
std::optional<Vec2> try_project(const CameraModel& cam, const Vec3& xc);

/// Unit ray in the camera frame. The fisheye inverse runs Newton on the
/// theta polynomial (at most 50 steps, |residual| < 1e-12).
Vec3 unproject(const FisheyeCamera& cam, const Vec2& px);
Vec3 unproject(const PinholeCamera& cam, const Vec2& px);
Vec3 unproject(const CameraModel& cam, const Vec2& px);

/// Per-target-pixel source coordinates; negative entries mean "outside".
struct RemapTable {
    int width = 0, height = 0;
    std::vector<float> src_u, src_v;
};

RemapTable make_remap(const CameraModel& source, const CameraModel& target);
/// Bilinear remap; target pixels mapping outside the source become 0.
Image remap(const Image& src, const RemapTable& table);
/// Same as remap but only for target pixels inside `window`, returning a
/// window-sized image.
Image remap_window(const Image& src, const RemapTable& table, const Rect& window);
Image undistort_image(const FisheyeCamera& camera, const Image& image, const CameraModel& target);

/// Pinhole target sharing the fisheye's optical axis whose square image
/// covers incidence angles up to `max_theta_deg`.
PinholeCamera make_target_pinhole(int size, double max_theta_deg);

struct Correspondence {
    Vec3 world;
    Vec2 pixel;
};

struct RefineReport {
    int iterations = 0;
    int accepted_steps = 0;
    std::vector<double> rms_history;  // initial value, then after each accepted step
};

/// Levenberg-Marquardt on (fx, fy, cx, cy, k1..k4) with the pose held fixed.
FisheyeCamera refine_intrinsics(const std::vector<Correspondence>& corr, const FisheyeCamera& initial,
                                const CameraPose& fixed_pose, RefineReport* report = nullptr);

double reprojection_rms(const CameraModel& cam, const CameraPose& pose, const std::vector<Correspondence>& corr);

struct RansacConfig {
    int iterations = 2000;
    double inlier_threshold = 1.0;  // px
    uint64_t seed = 0;
};

struct PnpResult {
    CameraPose pose;
    std::vector<int> inliers;  // ascending indices
    double inlier_rms = 0.0;
};

/// RANSAC over 4-point hypotheses (orthogonal-iteration resection seeded by a
/// scaled ray alignment), then Levenberg-Marquardt on the inliers.
PnpResult estimate_pose_pnp(const CameraModel& cam, const std::vector<Correspondence>& corr, const RansacConfig& cfg);

/// Pose from bearing vectors for a (small) set of points. Returns nothing on
/// degenerate input. Exposed for tests.
std::optional<CameraPose> resect_orthogonal_iteration(const std::vector<Vec3>& bearings,
                                                      const std::vector<Vec3>& world, int max_iterations = 100);

/// Reprojection-error Levenberg-Marquardt over the 6 pose parameters.
CameraPose refine_pose(const CameraModel& cam, const std::vector<Correspondence>& corr, const CameraPose& initial,
                       int max_iterations = 100);

// Camera files: {fx, fy, cx, cy, k: [4], width, height} plus optional
// {R: [9] row-major, t: [3]} and {model: "fisheye" | "pinhole"}.
struct CameraFile {
    CameraModel camera;
    std::optional<CameraPose> pose;
};
std::string camera_to_json(const CameraModel& cam, const std::optional<CameraPose>& pose = std::nullopt);
CameraFile camera_from_json(const std::string& text);
CameraFile read_camera_file(const std::filesystem::path& path);
std::string camera_canonical(const CameraModel& cam);

}  // namespace t360
