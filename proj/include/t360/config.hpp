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

// Run configuration: one JSON document with profile defaults and command-line
// overrides, plus the batch workflows shared by the CLI and the acceptance
// runner.

#pragma once

#include "t360/calibration.hpp"
#include "t360/gradnet.hpp"
#include "t360/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace t360 {

/// Thrown for malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::Parse, what) {}
};

enum class Profile { Smoke, Desk };
Profile profile_from_string(const std::string& s);
std::string to_string(Profile p);

struct RunConfig {
    Profile profile = Profile::Smoke;
    uint64_t seed = 1;

    GeometryParams geometry;
    LedRigParams rig;
    ShadingParams shading;
    std::string camera_file;       // empty: built-in fisheye
    int fisheye_size = 640;
    double fisheye_max_theta_deg = 80.0;
    double camera_base_offset = 2.0;  // mm below the base plane
    int target_size = 640;
    double target_half_fov_deg = 72.0;
    double noise_sigma = 0.0;
    double contact_epsilon = 0.01;

    int probes = 100;
    double probe_depth = 1.0;
    double ball_radius = 2.0;
    double base_margin = 2.0;
    int pose_probes = 100;
    RansacConfig ransac;

    double balance_fraction = 0.25;
    int per_probe_cap = 400;

    gradnet::TrainConfig training;

    RoiParams roi;
    int held_out = 20;
    int bands = 3;

    std::vector<ProbeBall> balls;  // simulate scene

    static RunConfig defaults(Profile profile);
    /// Applies the JSON object on top of the profile named in it (or `fallback`).
    static RunConfig from_json(const std::string& text, Profile fallback = Profile::Smoke);
    static RunConfig load(const std::filesystem::path& path, std::optional<Profile> profile = std::nullopt);
    /// Resolved configuration; round-trips through from_json.
    std::string to_json() const;

    void validate() const;
    /// Builds the sensor description, reading the camera file when given.
    SensorSetup sensor() const;

    uint64_t plan_seed() const { return seed; }
    uint64_t pose_seed() const { return seed ^ 0x9E3779B97F4A7C15ULL; }
    uint64_t dataset_seed() const { return seed + 17; }
    uint64_t train_seed() const { return seed + 29; }
    uint64_t held_out_seed() const { return seed + 1000003; }
};

/// Parses "x,y,z,r".
ProbeBall parse_ball(const std::string& text);

struct CalibrationRun {
    PoseRecovery pose;
    CalibDataset dataset;
    Image reference;
    PinholeCamera target;
};

CalibrationRun run_calibration(const RunConfig& config);

/// Held-out presses reconstructed with `model` through the calibrated pose and
/// scored against ground truth from the true pose.
struct Benchmark {
    std::vector<PressMetrics> presses;
    std::vector<double> press_heights;
    struct Band {
        int count = 0;
        double rms_median = 0.0, rms_mean = 0.0, peak_median = 0.0, iou_median = 0.0;
    };
    std::vector<Band> bands;
    /// Presses strictly below two thirds of the sensor height.
    Band lower;
};

Benchmark run_benchmark(const RunConfig& config, const CameraPose& calibrated_pose, const gradnet::MlpModel& model);

std::string benchmark_summary_json(const Benchmark& b);
std::string pose_json(const PinholeCamera& target, const PoseRecovery& pose);
std::string loss_history_csv(const std::vector<gradnet::EpochStats>& history);

struct PipelineResult {
    PoseRecovery pose;
    size_t dataset_rows = 0;
    gradnet::TrainResult training;
    Benchmark benchmark;
};

/// Every artifact of a calibrate, train and evaluate run written under `out`.
PipelineResult run_full_pipeline(const RunConfig& config, const std::filesystem::path& out);

}  // namespace t360
