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

// Ray-cast stand-in for the physical sensor. A camera below the base looks up
// into the revolved skin; two orthogonal LED fins (red in XZ, green in YZ)
// and a blue ring at the base light the inner surface. Balls pressed into the
// skin remove material (rigid boolean subtraction).

#pragma once

#include "t360/common.hpp"
#include "t360/geometry.hpp"
#include "t360/optics.hpp"

#include <optional>
#include <vector>

namespace t360 {

struct Emitter {
    Vec3 position;
    Vec3 direction;  // unit; emission falls off as max(0, cos) around it
    int channel = 0;  // 0 red, 1 green, 2 blue
};

struct LedRigParams {
    double fin_thickness = 0.7;    // mm, board plus LEDs on both faces
    double fin_half_width = 6.0;   // mm, horizontal half extent of each fin
    double fin_z_min = 0.0;        // mm, fins rise from the base board
    double fin_z_max = 15.0;       // mm
    double fin_clearance = 2.0;    // mm kept between fin edge and skin
    int emitters_per_face = 16;    // laid out on a 4 x 4 grid
    int ring_emitters = 24;
    double ring_radius_fraction = 0.8;  // of r(0)
    double ring_z = 0.2;               // mm
    Vec3 intensity{3.0, 3.0, 2.5};     // per-channel radiant intensity scalars
};

/// Emitters and fin slabs for one geometry. Fins are rectangles clipped so
/// that every fin point stays `fin_clearance` inside the skin.
class LedRig {
public:
    static LedRig make(const SensorGeometry& geom, const LedRigParams& params = {});

    const LedRigParams& params() const { return params_; }
    const std::vector<Emitter>& emitters() const { return emitters_; }
    int emitters_in_channel(int c) const { return per_channel_[c]; }

    /// Smallest t > t_min where the ray enters a fin slab, or +inf.
    double fin_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const;
    /// Fin half extent at height z (0 where the fin is absent).
    double fin_extent(double z) const;

private:
    LedRigParams params_;
    SensorGeometry geom_ = SensorGeometry::make({});
    std::vector<Emitter> emitters_;
    int per_channel_[3] = {0, 0, 0};
};

struct ShadingParams {
    double kd = 0.4;
    double ks = 0.5;
    double shininess = 16.0;
    double ambient = 0.02;
    bool inverse_square = true;
    double reference_distance = 10.0;  // mm, distance at which attenuation is 1

    void validate() const;
};

/// Rigid indenters. A threaded rod is approximated by a row of balls.
struct Scene {
    std::vector<ProbeBall> balls;
    bool empty() const { return balls.empty(); }
};

/// Balls along `axis` at `pitch` spacing, centered on `center`.
Scene threaded_rod(const Vec3& center, const Vec3& axis, double ball_radius, double pitch, int count);

struct GroundTruth {
    Rect window;            // region covered by the maps below (image coordinates)
    Map depth;              // mm along the camera ray
    Map gradient;           // 2 channels, mm / px
    Mask contact;
    Mask occlusion;
    Mask valid;
};

/// Per-pixel scene cache for one camera: rays, undeformed skin hits, normals,
/// fin occlusion and the no-contact reference image.
class SceneView {
public:
    SceneView(const SensorGeometry& geom, const LedRig& rig, const ShadingParams& shading, const CameraModel& camera,
              const CameraPose& pose, bool shade_reference = true);

    int width() const { return width_; }
    int height() const { return height_; }
    const CameraModel& camera() const { return camera_; }
    const CameraPose& pose() const { return pose_; }
    const SensorGeometry& geometry() const { return geom_; }
    const Vec3& origin() const { return origin_; }

    const Mask& valid() const { return valid_; }
    const Mask& occlusion() const { return occluded_; }
    const Image& reference() const { return reference_; }

    /// World-frame unit ray of pixel (u, v).
    const Vec3& ray(int u, int v) const { return rays_[index(u, v)]; }
    /// Distance along the ray to the undeformed skin (valid pixels only).
    double surface_t(int u, int v) const { return t_surface_[index(u, v)]; }

    /// Full image with the scene pressed in.
    Image render(const Scene& scene) const;
    /// Pixels whose rays reach some ball before the skin (bounding box).
    Rect footprint(const Scene& scene) const;
    /// Rendered image restricted to `window` (same values as render()).
    Image render_window(const Scene& scene, const Rect& window) const;

    GroundTruth ground_truth(const Scene& scene, double contact_epsilon = 0.01) const;
    GroundTruth ground_truth_window(const Scene& scene, const Rect& window, double contact_epsilon = 0.01) const;

    /// Undeformed skin point seen by pixel (u, v).
    Vec3 surface_hit(int u, int v) const;

private:
    size_t index(int u, int v) const { return static_cast<size_t>(v) * width_ + u; }
    double deformed_t(size_t i, const Scene& scene) const;
    Vec3 shade(const Vec3& x, const Vec3& n) const;
    void shade_pixel(size_t i, const Scene& scene, float* rgb) const;

    SensorGeometry geom_;
    LedRig rig_;
    ShadingParams shading_;
    CameraModel camera_;
    CameraPose pose_;
    Vec3 origin_;
    int width_ = 0, height_ = 0;
    std::vector<Vec3> rays_;
    std::vector<double> t_enter_, t_surface_, t_fin_;
    Mask valid_, occluded_;
    Image reference_;
};

/// One-shot render of a full image (builds a SceneView).
Image render(const SensorGeometry& geom, const LedRig& rig, const ShadingParams& shading, const CameraModel& camera,
             const CameraPose& pose, const Scene& scene = {});
GroundTruth render_ground_truth(const SensorGeometry& geom, const CameraModel& camera, const CameraPose& pose,
                                const Scene& scene, double contact_epsilon = 0.01);

/// Additive Gaussian noise, clipped to [0, 1]. Each pixel draws from its own
/// stream keyed by (seed, pixel position), so windows and full images agree.
/// For a cropped image, `window` gives its placement in the full frame.
void add_noise(Image& image, double sigma, uint64_t seed, const Rect& window = {});

/// Fraction of valid pixels whose view of the skin is blocked by a fin.
double occlusion_fraction(const SceneView& view);
double occlusion_fraction(const SensorGeometry& geom, const LedRig& rig, const CameraModel& camera,
                          const CameraPose& pose);

struct ChannelEnergy {
    Vec3 mean_energy = Vec3::Zero();  // mean over presses of sum of squared difference per channel
    int presses = 0;
};

/// Difference-image energy per channel for presses sampled on the skin band
/// [z_lo, z_hi].
ChannelEnergy channel_directionality(const SceneView& view, double z_lo, double z_hi, int presses, double depth,
                                     double ball_radius, uint64_t seed);

/// Central differences of `depth` (mm / px); zero where the 3x3 neighborhood
/// is not entirely valid. Pixels outside the map count as invalid.
Map depth_gradient(const Map& depth, const Mask& valid);

/// Standard camera placement: on the axis `below` mm under the base, looking +z.
CameraPose base_camera_pose(double below = 2.0);
/// Fisheye whose square image spans incidence angles up to `max_theta_deg`.
FisheyeCamera default_fisheye(int size = 640, double max_theta_deg = 80.0);

}  // namespace t360
