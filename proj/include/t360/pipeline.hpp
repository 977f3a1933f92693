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

// Runtime reconstruction: difference image, contact regions, predicted
// gradients, Poisson heights and the point cloud lifted onto the skin.

#pragma once

#include "t360/common.hpp"
#include "t360/gradnet.hpp"
#include "t360/simulator.hpp"

#include <iosfwd>
#include <vector>

namespace t360 {

/// Signed per-channel difference, zero on occluded pixels.
Image difference_image(const Image& raw, const Image& reference, const Mask& occlusion);

struct RoiParams {
    double threshold = 0.03;  // on the L1 norm of the difference
    int close_iterations = 2;
    int open_iterations = 1;
    int min_pixels = 25;
    int max_band = 15;        // widest occluded run bridged inside an ROI
};

struct ContactRoi {
    Mask mask;   // full image size
    Rect bbox;
    int pixel_count = 0;
};

/// Threshold, bridge short occluded runs, close, open, keep components of at
/// least `min_pixels` (raster order of first pixel). Empty result: no contact.
std::vector<ContactRoi> extract_roi(const Image& diff, const Mask& valid, const Mask& occlusion,
                                    const RoiParams& params = {});

struct CloudPoint {
    Vec3 position;
    double indentation = 0.0;
};

struct Reconstruction {
    std::vector<ContactRoi> rois;
    Map height;                  // mm along the camera ray, full image
    Map gradient;                // predicted (inpainted) gradients, 2 channels
    Mask mask;                   // union of ROI masks
    std::vector<CloudPoint> cloud;
    int flagged_pixels = 0;      // occluded ROI pixels the inpainting could not bridge
    bool contact() const { return !rois.empty(); }
};

/// `view` supplies rays, skin hits and masks for the undistorted camera with
/// the calibrated pose.
Reconstruction reconstruct(const gradnet::MlpModel& model, const Image& raw, const Image& reference,
                           const SceneView& view, const RoiParams& params = {});

struct Metrics {
    double rms_mm = 0.0;
    double peak_err_mm = 0.0;
    double iou = 1.0;
};

/// RMS over the union of both masks, absolute difference of the maxima, IoU.
Metrics evaluate(const Map& height, const Mask& recon_mask, const Map& truth_depth, const Mask& truth_mask);

/// Band index of height z for `bands` equal slices of [0, H] (last band closed).
int height_band(double z, double H, int bands = 3);

struct PressMetrics {
    int probe = 0;
    int band = 0;
    Metrics metrics;
};

void write_metrics_csv(std::ostream& os, const std::vector<PressMetrics>& rows);
void write_ply(std::ostream& os, const std::vector<CloudPoint>& cloud);

}  // namespace t360
