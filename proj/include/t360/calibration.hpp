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

// Virtual probing: press a ball at planned surface points, render and
// undistort the sensor image, recover the camera pose from minimum-point
// correspondences, and assemble (u, v, dRGB) -> (Gx, Gy) training rows.

#pragma once

#include "t360/common.hpp"
#include "t360/geometry.hpp"
#include "t360/gradnet.hpp"
#include "t360/optics.hpp"
#include "t360/simulator.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace t360 {

/// Everything that describes the physical sensor being calibrated.
struct SensorSetup {
    SensorGeometry geometry = SensorGeometry::make({});
    LedRigParams rig;
    ShadingParams shading;
    FisheyeCamera camera = default_fisheye();
    CameraPose true_pose = base_camera_pose();
    PinholeCamera target = make_target_pinhole(640, 72.0);
    double contact_epsilon = 0.01;
    double ball_radius = 2.0;
    double noise_sigma = 0.0;
    uint64_t noise_seed = 0;
};

struct ProbeSample {
    int probe_index = 0;
    SurfacePoint point;        // planned surface point
    ProbeBall ball;
    Vec3 deepest_point;        // world position of the deepest indentation point
    Rect window;               // target-image region covered below
    Image raw;                 // undistorted contact image over `window`
    GroundTruth truth;         // labels over `window`
    bool flagged = false;      // empty contact mask
};

/// Renders probes for one sensor. Images come from the true pose; labels
/// (ground truth, occlusion) from `label_pose`, normally the recovered one.
class Prober {
public:
    Prober(const SensorSetup& setup, const CameraPose& label_pose);

    const SensorSetup& setup() const { return setup_; }
    const SceneView& raw_view() const { return *raw_view_; }
    const SceneView& label_view() const { return *label_view_; }
    const RemapTable& remap_table() const { return table_; }
    /// Undistorted no-contact reference in the target camera.
    const Image& reference() const { return reference_; }

    ProbeSample probe(int index, const SurfacePoint& point, double depth) const;
    /// Arbitrary scene; `margin` pads the window around the changed pixels.
    ProbeSample probe_scene(int index, const Scene& scene, int margin = 12) const;
    /// Full-size undistorted contact image for a scene. `frame` keys the
    /// sensor noise when the setup enables it.
    Image capture(const Scene& scene, int frame = 0) const;

private:
    uint64_t frame_seed(int index) const;
    Rect target_window(const Rect& raw_footprint) const;

    SensorSetup setup_;
    std::unique_ptr<SceneView> raw_view_, label_view_;
    RemapTable table_;
    Image reference_;
    mutable Image scratch_;  // raw reference with the current probe pasted in
};

std::vector<ProbeSample> run_probing(const Prober& prober, const std::vector<SurfacePoint>& plan, double depth);

/// Argmax of the sample's depth map (ties: lowest v, then u) paired with its
/// deepest indentation point.
Correspondence minimum_point(const ProbeSample& sample);

struct PoseRecovery {
    CameraPose pose;
    std::vector<Correspondence> correspondences;
    std::vector<int> inliers;
    double inlier_rms = 0.0;
    double rotation_error_deg = 0.0;
    double translation_error_mm = 0.0;
};

/// Probes `count` plan points (seeded choice) with labels from the true pose,
/// takes their minimum points and solves RANSAC PnP in the target camera.
PoseRecovery recover_pose(const SensorSetup& setup, const std::vector<SurfacePoint>& plan, int count, double depth,
                          uint64_t seed, const RansacConfig& ransac);

struct CalibRow {
    float u = 0, v = 0;
    float r = 0, g = 0, b = 0;
    double gx = 0, gy = 0;
    uint8_t contact = 0;
    int probe = 0;
};

struct CalibDataset {
    std::vector<CalibRow> rows;
    std::string geometry_hash, camera_hash;
    uint64_t seed = 0;
    double balance_fraction = 0.25;
    int per_probe_cap = 400;
    int excluded_probes = 0;
    int probes = 0;

    size_t contact_rows() const;
    double non_contact_fraction() const;
    gradnet::TrainingSet training_set() const;
};

/// Streaming assembly so samples need not be kept in memory.
class DatasetBuilder {
public:
    DatasetBuilder(double balance_fraction, int per_probe_cap, uint64_t seed);
    void add(const ProbeSample& sample, const Image& reference);
    /// Shuffles deterministically and returns the dataset.
    CalibDataset finish();

private:
    double balance_;
    int cap_;
    uint64_t seed_;
    CalibDataset data_;
};

CalibDataset build_dataset(const std::vector<ProbeSample>& samples, const Image& reference, double balance_fraction,
                           int per_probe_cap, uint64_t seed);

void write_dataset_csv(std::ostream& os, const CalibDataset& data);
/// Parses `u,v,r,g,b,gx,gy,contact`; errors name the 1-based line number.
CalibDataset read_dataset_csv(std::istream& is);

std::string geometry_hash(const SensorGeometry& geom);
std::string camera_hash(const CameraModel& cam);

}  // namespace t360
