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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace t360;

namespace {

SensorGeometry cylinder() { return SensorGeometry::make({}); }

SensorGeometry cone() {
    GeometryParams p;
    p.kind = ProfileKind::Cone;
    return SensorGeometry::make(p);
}

// Small camera keeps the renders quick; geometry is resolution independent.
FisheyeCamera small_camera() { return default_fisheye(240); }

const SceneView& cylinder_view() {
    static const SceneView view(cylinder(), LedRig::make(cylinder()), ShadingParams{}, small_camera(),
                                base_camera_pose());
    return view;
}

double image_energy(const Image& img, int c) {
    double e = 0.0;
    for (int v = 0; v < img.height(); ++v)
        for (int u = 0; u < img.width(); ++u) e += static_cast<double>(img(u, v, c)) * img(u, v, c);
    return e;
}

// Exact along-ray indentation for a ball cutting the cylinder wall (radius 10):
// far crossing of the ray with the cylinder minus near crossing with the ball.
double analytic_depth(const Vec3& o, const Vec3& d, const ProbeBall& ball) {
    double a = d.x() * d.x() + d.y() * d.y();
    double b = o.x() * d.x() + o.y() * d.y();
    double c = o.x() * o.x() + o.y() * o.y() - 100.0;
    double t_cyl = (-b + std::sqrt(b * b - a * c)) / a;
    Vec3 oc = o - ball.center;
    double bb = oc.dot(d), cc = oc.squaredNorm() - ball.radius * ball.radius, disc = bb * bb - cc;
    if (disc <= 0.0) return 0.0;
    double t_ball = -bb - std::sqrt(disc);
    return t_ball < t_cyl ? t_cyl - t_ball : 0.0;
}

}  // namespace

TEST_CASE("LED rig layout") {
    LedRig rig = LedRig::make(cylinder());
    CHECK(rig.emitters_in_channel(0) == 32);
    CHECK(rig.emitters_in_channel(1) == 32);
    CHECK(rig.emitters_in_channel(2) == 24);
    for (const Emitter& e : rig.emitters()) {
        CHECK(std::abs(e.direction.norm() - 1.0) < 1e-12);
        if (e.channel == 0) CHECK(e.position.y() == doctest::Approx(0.35 * e.direction.y() / std::abs(e.direction.y())));
        if (e.channel == 1) CHECK(e.position.x() == doctest::Approx(0.35 * e.direction.x() / std::abs(e.direction.x())));
        if (e.channel == 2) {
            CHECK(e.direction == Vec3(0, 0, 1));
            CHECK(std::hypot(e.position.x(), e.position.y()) == doctest::Approx(8.0));
        }
    }
    // Every fin point keeps the clearance to the skin.
    for (double z = 0.0; z <= 15.0; z += 0.25) CHECK(rig.fin_extent(z) <= cylinder().radius_or_zero(z) - 2.0 + 1e-12);
    ShadingParams bad;
    bad.kd = 1.2;
    bad.ks = 0.5;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("reference self-difference is zero") {
    const SceneView& view = cylinder_view();
    Image again = view.render({});
    CHECK(again == view.reference());
    CHECK(render(cylinder(), LedRig::make(cylinder()), ShadingParams{}, small_camera(), base_camera_pose()) ==
          view.reference());
    for (float x : again.values()) CHECK((x >= 0.0f && x <= 1.0f));
    GroundTruth gt = view.ground_truth({});
    for (double d : gt.depth.values()) CHECK(d == 0.0);
    CHECK(count(gt.contact) == 0);
}

TEST_CASE("difference image is confined to the dilated contact and occlusion") {
    const SceneView& view = cylinder_view();
    Scene scene{{press_ball(cylinder().surface_point(12.0, 0.3), 1.0, 2.0)}};
    Image img = view.render(scene);
    GroundTruth gt = view.ground_truth(scene);
    CHECK(count(gt.contact) > 20);
    Mask allowed = mask_or(dilate(gt.contact, 2), view.occlusion());
    int changed = 0, stray = 0;
    for (int v = 0; v < img.height(); ++v)
        for (int u = 0; u < img.width(); ++u)
            for (int c = 0; c < 3; ++c)
                if (img(u, v, c) != view.reference()(u, v, c)) {
                    ++changed;
                    if (!allowed(u, v)) ++stray;
                }
    CHECK(changed > 0);
    CHECK(stray == 0);
    Rect fp = view.footprint(scene);
    CHECK(view.render_window(scene, fp) == img.crop(fp));
}

TEST_CASE("ground truth") {
    const SceneView& view = cylinder_view();
    ProbeBall ball = press_ball(cylinder().surface_point(12.0, 0.0), 1.0, 2.0);
    GroundTruth gt = view.ground_truth({{ball}});
    SUBCASE("depth matches the analytic ray oracle") {
        double worst = 0.0, peak = 0.0;
        for (int v = 0; v < view.height(); ++v)
            for (int u = 0; u < view.width(); ++u) {
                if (!view.valid()(u, v)) continue;
                worst = std::max(worst, std::abs(gt.depth(u, v) - analytic_depth(view.origin(), view.ray(u, v), ball)));
                peak = std::max(peak, gt.depth(u, v));
            }
        CHECK(worst < 1e-5);
        // Oblique rays lengthen the 1 mm radial dent; the along-ray value exceeds 1 mm.
        CHECK(peak >= 1.0);
        CHECK(peak < 2.5);
    }
    SUBCASE("masks and gradients") {
        CHECK(count(mask_andnot(gt.contact, gt.valid)) == 0);
        Map g = depth_gradient(gt.depth, gt.valid);
        CHECK(g == gt.gradient);
        for (int v = 0; v < view.height(); ++v)
            for (int u = 0; u < view.width(); ++u)
                CHECK(static_cast<bool>(gt.contact(u, v)) == (gt.depth(u, v) > 0.01));
        GroundTruth windowed = view.ground_truth_window({{ball}}, view.footprint({{ball}}).pad(3));
        Rect w = windowed.window;
        for (int v = 0; v < w.h; ++v)
            for (int u = 0; u < w.w; ++u) CHECK(windowed.depth(u, v) == gt.depth(w.x + u, w.y + v));
    }
}

TEST_CASE("depth gradient stencil") {
    Map d(5, 5);
    for (int v = 0; v < 5; ++v)
        for (int u = 0; u < 5; ++u) d(u, v) = 0.5 * u - 0.25 * v;
    Mask valid(5, 5, 1, 1);
    valid(4, 4) = 0;
    Map g = depth_gradient(d, valid);
    CHECK(g(2, 2, 0) == 0.5);
    CHECK(g(2, 2, 1) == -0.25);
    CHECK(g(0, 2, 0) == 0.0);  // neighborhood leaves the grid
    CHECK(g(3, 3, 0) == 0.0);  // neighborhood touches an invalid pixel
}

namespace {

// Largest deviation between a press and its quarter-turn image, with red and
// green exchanged. Pixels occluded in either image are skipped.
double quarter_turn_deviation(const SceneView& view, const Scene& scene, const Scene& turned, int* compared) {
    Image a = view.render(scene), b = view.render(turned);
    const Image& ref = view.reference();
    const int n = view.width();
    double worst = 0.0;
    *compared = 0;
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) {
            int u2 = n - 1 - v, v2 = u;  // +90 deg about the principal point
            if (view.occlusion()(u, v) || view.occlusion()(u2, v2)) continue;
            double dr = a(u, v, 0) - ref(u, v, 0), dg = b(u2, v2, 1) - ref(u2, v2, 1);
            double dg1 = a(u, v, 1) - ref(u, v, 1), dr2 = b(u2, v2, 0) - ref(u2, v2, 0);
            double db = a(u, v, 2) - ref(u, v, 2), db2 = b(u2, v2, 2) - ref(u2, v2, 2);
            worst = std::max({worst, std::abs(dr - dg), std::abs(dg1 - dr2), std::abs(db - db2)});
            if (dr != 0.0) ++(*compared);
        }
    return worst;
}

}  // namespace

TEST_CASE("quarter-turn symmetry with equal red and green") {
    SensorGeometry geom = cylinder();
    const double half_pi = 0.5 * std::numbers::pi;
    int compared = 0;
    SUBCASE("apex press, see-through fins") {
        // The apex sits in the fins' central blind disc, so fins are made transparent.
        LedRigParams p;
        p.fin_thickness = 0.0;
        SceneView view(geom, LedRig::make(geom, p), ShadingParams{}, small_camera(), base_camera_pose());
        Scene apex{{press_ball(geom.surface_point(geom.height(), 0.0), 1.0, 2.0)}};
        CHECK(quarter_turn_deviation(view, apex, apex, &compared) <= 1e-6);
        CHECK(compared > 0);
    }
    SUBCASE("side press, standard rig") {
        Scene a{{press_ball(geom.surface_point(9.0, 0.4), 1.0, 2.0)}};
        Scene b{{press_ball(geom.surface_point(9.0, 0.4 + half_pi), 1.0, 2.0)}};
        CHECK(quarter_turn_deviation(cylinder_view(), a, b, &compared) <= 1e-6);
        CHECK(compared > 0);
    }
}

TEST_CASE("fin occlusion fraction") {
    SensorGeometry geom = cylinder();
    CameraModel target = make_target_pinhole(640, 72.0);
    CameraPose pose = base_camera_pose();
    LedRigParams p;
    double base = occlusion_fraction(geom, LedRig::make(geom, p), target, pose);
    CHECK(base >= 0.05);
    CHECK(base <= 0.15);
    p.fin_thickness = 1.4;
    CHECK(occlusion_fraction(geom, LedRig::make(geom, p), target, pose) > base);
    p.fin_thickness = 0.0;
    CHECK(occlusion_fraction(geom, LedRig::make(geom, p), target, pose) == 0.0);
    // Occluded pixels render gray.
    const SceneView& view = cylinder_view();
    for (int v = 0; v < view.height(); ++v)
        for (int u = 0; u < view.width(); ++u)
            if (view.occlusion()(u, v) && view.valid()(u, v))
                for (int c = 0; c < 3; ++c) CHECK(view.reference()(u, v, c) == 0.5f);
}

TEST_CASE("channel directionality") {
    SensorGeometry geom = cylinder();
    SUBCASE("all channels respond in the lowest third") {
        ChannelEnergy e = channel_directionality(cylinder_view(), 0.0, geom.height() / 3.0, 12, 1.0, 2.0, 5);
        CHECK(e.presses == 12);
        for (int c = 0; c < 3; ++c) CHECK(e.mean_energy[c] > 5.0);
    }
    SUBCASE("blue floods the cone tip") {
        // The tip lies inside the fins' central blind disc, so the statistic is
        // taken with see-through fins: emitters unchanged, no occlusion.
        SensorGeometry c = cone();
        LedRigParams p;
        p.fin_thickness = 0.0;
        SceneView view(c, LedRig::make(c, p), ShadingParams{}, small_camera(), base_camera_pose());
        ChannelEnergy e = channel_directionality(view, 0.9 * c.height(), c.height(), 12, 1.0, 2.0, 5);
        CHECK(e.mean_energy[2] > 0.0);
        CHECK(e.mean_energy[0] + e.mean_energy[1] < 0.2 * e.mean_energy[2]);
    }
    SUBCASE("zero blue intensity gives zero blue energy") {
        LedRigParams p;
        p.intensity = Vec3(3.0, 3.0, 0.0);
        SceneView view(geom, LedRig::make(geom, p), ShadingParams{}, small_camera(), base_camera_pose());
        ChannelEnergy e = channel_directionality(view, 0.0, geom.height() / 3.0, 4, 1.0, 2.0, 5);
        CHECK(e.mean_energy[2] == 0.0);
        CHECK(e.mean_energy[0] > 0.0);
    }
}

TEST_CASE("channel energy is monotone in its intensity") {
    SensorGeometry geom = cylinder();
    double previous = -1.0;
    for (double red : {0.0, 0.5, 1.5, 3.0, 6.0}) {
        LedRigParams p;
        p.intensity = Vec3(red, 3.0, 2.5);
        Image img = render(geom, LedRig::make(geom, p), ShadingParams{}, default_fisheye(120), base_camera_pose());
        double e = image_energy(img, 0);
        CHECK(e >= previous);
        previous = e;
    }
}

TEST_CASE("noise is keyed per pixel") {
    Image a(16, 12, 3, 0.5f);
    Rect w{3, 2, 5, 4};
    Image b = a.crop(w);
    add_noise(a, 0.01, 7);
    add_noise(b, 0.01, 7, w);
    CHECK(b == a.crop(w));
    Image other(16, 12, 3, 0.5f);
    add_noise(other, 0.01, 8);
    CHECK(other != a);
    Image z(4, 4, 3, 0.5f);
    add_noise(z, 0.0, 7);
    for (float x : z.values()) CHECK(x == 0.5f);
}
