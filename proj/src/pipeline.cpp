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

#include "t360/pipeline.hpp"

#include "t360/io.hpp"
#include "t360/poisson.hpp"

#include <cmath>
#include <ostream>

namespace t360 {

Image difference_image(const Image& raw, const Image& reference, const Mask& occlusion) {
    if (!raw.same_shape(reference)) fail(ErrorCode::InvalidArgument, "raw and reference images differ in size");
    if (occlusion.width() != raw.width() || occlusion.height() != raw.height())
        fail(ErrorCode::InvalidArgument, "occlusion mask does not match the images");
    Image d(raw.width(), raw.height(), raw.channels());
    for (int v = 0; v < raw.height(); ++v)
        for (int u = 0; u < raw.width(); ++u) {
            if (occlusion(u, v)) continue;
            for (int c = 0; c < raw.channels(); ++c) d(u, v, c) = raw(u, v, c) - reference(u, v, c);
        }
    return d;
}

std::vector<ContactRoi> extract_roi(const Image& diff, const Mask& valid, const Mask& occlusion,
                                    const RoiParams& params) {
    const int W = diff.width(), H = diff.height();
    if (valid.width() != W || occlusion.width() != W || valid.height() != H || occlusion.height() != H)
        fail(ErrorCode::InvalidArgument, "masks do not match the difference image");
    Mask hot(W, H);
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) {
            if (!valid(u, v)) continue;
            double l1 = 0.0;
            for (int c = 0; c < diff.channels(); ++c) l1 += std::abs(diff(u, v, c));
            hot(u, v) = l1 > params.threshold;
        }
    Rect box = bounding_box(hot);
    if (box.empty()) return {};
    // Morphology only needs a neighborhood of the thresholded pixels.
    Rect region = box.pad(params.max_band + params.close_iterations + params.open_iterations + 4).intersect(hot.bounds());
    Mask m = hot.crop(region);
    Mask bridged = m;
    for (int v = 0; v < region.h; ++v)
        for (int u = 0; u < region.w; ++u) {
            int iu = region.x + u, iv = region.y + v;
            if (!occlusion(iu, iv)) continue;
            poisson::RunInfo r = poisson::occlusion_runs(occlusion, iu, iv);
            bool h = r.left >= 0 && r.right >= 0 && r.right - r.left - 1 <= params.max_band && hot(r.left, iv) &&
                     hot(r.right, iv);
            bool vert = r.up >= 0 && r.down >= 0 && r.down - r.up - 1 <= params.max_band && hot(iu, r.up) &&
                        hot(iu, r.down);
            if (h || vert) bridged(u, v) = 1;
        }
    m = erode(dilate(bridged, params.close_iterations), params.close_iterations);
    m = dilate(erode(m, params.open_iterations), params.open_iterations);
    m = mask_and(m, valid.crop(region));
    Grid<int> labels;
    int n = label_components(m, labels);
    std::vector<int> sizes(n + 1, 0);
    for (int v = 0; v < region.h; ++v)
        for (int u = 0; u < region.w; ++u) ++sizes[labels(u, v)];
    std::vector<ContactRoi> out;
    for (int l = 1; l <= n; ++l) {
        if (sizes[l] < params.min_pixels) continue;
        ContactRoi roi;
        roi.mask = Mask(W, H);
        for (int v = 0; v < region.h; ++v)
            for (int u = 0; u < region.w; ++u)
                if (labels(u, v) == l) roi.mask(region.x + u, region.y + v) = 1;
        roi.bbox = bounding_box(roi.mask);
        roi.pixel_count = sizes[l];
        out.push_back(std::move(roi));
    }
    return out;
}

Reconstruction reconstruct(const gradnet::MlpModel& model, const Image& raw, const Image& reference,
                           const SceneView& view, const RoiParams& params) {
    const int W = view.width(), H = view.height();
    if (raw.width() != W || raw.height() != H) fail(ErrorCode::InvalidArgument, "image does not match the camera");
    Image diff = difference_image(raw, reference, view.occlusion());
    Reconstruction rec;
    rec.height = Map(W, H);
    rec.gradient = Map(W, H, 2);
    rec.mask = Mask(W, H);
    rec.rois = extract_roi(diff, view.valid(), view.occlusion(), params);
    for (const auto& roi : rec.rois) {
        Rect box = roi.bbox.pad(3).intersect({0, 0, W, H});
        Mask rm = roi.mask.crop(box);
        Mask occ = view.occlusion().crop(box);
        std::vector<double> x;
        std::vector<std::pair<int, int>> where;
        for (int v = 0; v < box.h; ++v)
            for (int u = 0; u < box.w; ++u) {
                if (!rm(u, v) || occ(u, v)) continue;
                int iu = box.x + u, iv = box.y + v;
                x.insert(x.end(), {static_cast<double>(iu), static_cast<double>(iv), diff(iu, iv, 0), diff(iu, iv, 1),
                                   diff(iu, iv, 2)});
                where.emplace_back(u, v);
            }
        Map field(box.w, box.h, 2);
        std::vector<double> g = gradnet::predict_batch(model, x);
        for (size_t k = 0; k < where.size(); ++k) {
            field(where[k].first, where[k].second, 0) = g[2 * k];
            field(where[k].first, where[k].second, 1) = g[2 * k + 1];
        }
        poisson::InpaintResult filled = poisson::inpaint_occluded(field, occ, params.max_band);
        for (int v = 0; v < box.h; ++v)
            for (int u = 0; u < box.w; ++u) {
                if (!rm(u, v)) {
                    filled.field(u, v, 0) = filled.field(u, v, 1) = 0.0;
                } else if (filled.flagged(u, v)) {
                    ++rec.flagged_pixels;
                }
            }
        Map h = poisson::solve_masked(filled.field, rm);
        for (int v = 0; v < box.h; ++v)
            for (int u = 0; u < box.w; ++u) {
                if (!rm(u, v)) continue;
                int iu = box.x + u, iv = box.y + v;
                double hv = std::max(h(u, v), 0.0);
                rec.height(iu, iv) = hv;
                rec.gradient(iu, iv, 0) = filled.field(u, v, 0);
                rec.gradient(iu, iv, 1) = filled.field(u, v, 1);
                rec.mask(iu, iv) = 1;
                CloudPoint p;
                p.indentation = hv;
                p.position = view.origin() + (view.surface_t(iu, iv) - hv) * view.ray(iu, iv);
                rec.cloud.push_back(p);
            }
    }
    return rec;
}

Metrics evaluate(const Map& height, const Mask& recon_mask, const Map& truth, const Mask& truth_mask) {
    if (!height.same_shape(truth) || recon_mask.width() != truth_mask.width() ||
        recon_mask.height() != truth_mask.height() || recon_mask.width() != height.width() ||
        recon_mask.height() != height.height())
        fail(ErrorCode::InvalidArgument, "evaluation inputs differ in size");
    Metrics m;
    double sum = 0.0;
    int n = 0;
    double peak_h = 0.0, peak_t = 0.0;
    for (int v = 0; v < height.height(); ++v)
        for (int u = 0; u < height.width(); ++u) {
            peak_h = std::max(peak_h, height(u, v));
            peak_t = std::max(peak_t, truth(u, v));
            if (!recon_mask(u, v) && !truth_mask(u, v)) continue;
            double d = height(u, v) - truth(u, v);
            sum += d * d;
            ++n;
        }
    m.rms_mm = n ? std::sqrt(sum / n) : 0.0;
    m.peak_err_mm = std::abs(peak_h - peak_t);
    m.iou = iou(recon_mask, truth_mask);
    return m;
}

int height_band(double z, double H, int bands) {
    if (bands < 1 || !(H > 0.0)) fail(ErrorCode::InvalidArgument, "need positive band count and height");
    int b = static_cast<int>(std::floor(z / H * bands));
    return std::clamp(b, 0, bands - 1);
}

void write_metrics_csv(std::ostream& os, const std::vector<PressMetrics>& rows) {
    os << "probe,band,rms_mm,peak_err_mm,iou\n";
    for (const auto& r : rows)
        os << r.probe << ',' << r.band << ',' << io::num(r.metrics.rms_mm) << ',' << io::num(r.metrics.peak_err_mm)
           << ',' << io::num(r.metrics.iou) << '\n';
}

void write_ply(std::ostream& os, const std::vector<CloudPoint>& cloud) {
    os << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
       << "\nproperty double x\nproperty double y\nproperty double z\nproperty double indentation\nend_header\n";
    for (const auto& p : cloud)
        os << io::num(p.position.x()) << ' ' << io::num(p.position.y()) << ' ' << io::num(p.position.z()) << ' '
           << io::num(p.indentation) << '\n';
}

}  // namespace t360
