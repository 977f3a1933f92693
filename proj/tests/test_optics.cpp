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
#include "t360/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace t360;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

FisheyeCamera test_camera(std::array<double, 4> k = {0.02, -0.005, 0.001, 0.0}) {
    FisheyeCamera c;
    c.fx = c.fy = 300.0;
    c.cx = c.cy = 319.5;
    c.k = k;
    c.width = c.height = 640;
    return c;
}

// World points seen from the pose at incidence up to 75 degrees, with optional pixel noise.
std::vector<Correspondence> synthesize(const FisheyeCamera& cam, const CameraPose& pose, int n, double sigma,
                                       uint64_t seed) {
    Rng r(seed);
    std::vector<Correspondence> out;
    while (static_cast<int>(out.size()) < n) {
        double th = r.uniform(0.0, 75.0 * kPi / 180.0), ps = r.uniform(-kPi, kPi), d = r.uniform(5.0, 20.0);
        Vec3 xc(d * std::sin(th) * std::cos(ps), d * std::sin(th) * std::sin(ps), d * std::cos(th));
        Vec3 xw = pose.R.transpose() * (xc - pose.t);
        Vec2 px = project(cam, xc);
        px += Vec2(sigma * r.normal(), sigma * r.normal());
        out.push_back({xw, px});
    }
    return out;
}

CameraPose tilted_pose() {
    CameraPose p;
    p.R = rotation_exp(Vec3(0.05, -0.03, 0.4));
    p.t = Vec3(0.3, -0.2, 2.0);
    return p;
}

}  // namespace

TEST_CASE("fisheye projection formula") {
    FisheyeCamera c = test_camera({0, 0, 0, 0});
    CHECK((project(c, Vec3(0, 0, 5)) - Vec2(c.cx, c.cy)).norm() < 1e-12);
    Vec3 x(std::sin(0.5), 0.0, std::cos(0.5));
    CHECK(project(c, x).x() == Approx(c.cx + 150.0));
    c.k = {0.05, 0, 0, 0};
    CHECK(project(c, x).x() - c.cx == Approx(151.875));
    CHECK_THROWS_AS(project(c, Vec3(0, 0, -1)), Error);
    CHECK_THROWS_AS(project(c, Vec3(1, 0, 0.001)), Error);
}

TEST_CASE("fisheye unprojection") {
    FisheyeCamera c = test_camera({0, 0, 0, 0});
    CHECK((unproject(c, Vec2(c.cx, c.cy)) - Vec3(0, 0, 1)).norm() < 1e-15);
    Rng r(3);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Vec2 px(r.uniform(0, 640), r.uniform(0, 640));
        if ((px - Vec2(c.cx, c.cy)).norm() > 300.0 * 80.0 * kPi / 180.0) continue;
        worst = std::max(worst, (project(c, unproject(c, px)) - px).norm());
    }
    CHECK(worst < 1e-9);
    FisheyeCamera d = test_camera();
    worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double th = r.uniform(0.0, 80.0 * kPi / 180.0), ps = r.uniform(-kPi, kPi);
        Vec2 px = project(d, Vec3(std::sin(th) * std::cos(ps), std::sin(th) * std::sin(ps), std::cos(th)));
        worst = std::max(worst, (project(d, unproject(d, px)) - px).norm());
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("undistortion") {
    FisheyeCamera cam = test_camera();
    cam.width = cam.height = 64;
    cam.cx = cam.cy = 31.5;
    cam.fx = cam.fy = 30.0;
    SUBCASE("identity target reproduces the input") {
        Image img(64, 64, 3);
        Rng r(5);
        for (auto& x : img.values()) x = static_cast<float>(r.uniform());
        CHECK(undistort_image(cam, img, cam) == img);
    }
    SUBCASE("constant input stays constant") {
        Image img(64, 64, 3, 0.25f);
        PinholeCamera t = make_target_pinhole(48, 60.0);
        Image out = undistort_image(cam, img, t);
        RemapTable tab = make_remap(cam, t);
        for (int v = 0; v < 48; ++v)
            for (int u = 0; u < 48; ++u)
                if (tab.src_u[v * 48 + u] >= 0.0f) CHECK(out(u, v, 0) == Approx(0.25f).epsilon(1e-6));
    }
}

TEST_CASE("undistorted checkerboard edges are straight") {
    // Plane z = 10 in the camera frame with 4 mm squares, imaged through k1 = 0.1.
    FisheyeCamera cam = test_camera({0.1, 0, 0, 0});
    Image img(640, 640, 1);
    for (int v = 0; v < 640; ++v)
        for (int u = 0; u < 640; ++u) {
            Vec3 ray = unproject(cam, Vec2(u, v));
            if (ray.z() < 0.2) continue;
            Vec3 p = ray * (10.0 / ray.z());
            int sx = static_cast<int>(std::floor(p.x() / 4.0)), sy = static_cast<int>(std::floor(p.y() / 4.0));
            img(u, v) = ((sx + sy) & 1) ? 1.0f : 0.0f;
        }
    PinholeCamera t = make_target_pinhole(400, 60.0);
    Image out = undistort_image(cam, img, t);
    // The vertical edge x = 8 mm projects to column cx + fx * 0.8; detect it row by row.
    const double expected = t.cx + t.fx * 0.8;
    std::vector<Vec2> edge;
    for (int v = static_cast<int>(t.cy - 0.6 * t.fy); v <= static_cast<int>(t.cy + 0.6 * t.fy); ++v) {
        int u0 = static_cast<int>(expected) - 4;
        for (int u = u0; u < u0 + 8; ++u) {
            float a = out(u, v), b = out(u + 1, v);
            if ((a - 0.5f) * (b - 0.5f) < 0.0f) {
                edge.emplace_back(u + (0.5 - a) / (b - a), v);
                break;
            }
        }
    }
    REQUIRE(edge.size() > 50);
    // Least-squares line u = a + b v.
    double sv = 0, su = 0, svv = 0, suv = 0;
    for (const auto& e : edge) {
        sv += e.y();
        su += e.x();
        svv += e.y() * e.y();
        suv += e.x() * e.y();
    }
    double n = static_cast<double>(edge.size());
    double b = (n * suv - sv * su) / (n * svv - sv * sv), a = (su - b * sv) / n;
    double worst = 0.0;
    for (const auto& e : edge) worst = std::max(worst, std::abs(e.x() - (a + b * e.y())));
    CHECK(worst < 0.5);
}

TEST_CASE("intrinsic refinement") {
    FisheyeCamera truth = test_camera();
    CameraPose pose = tilted_pose();
    SUBCASE("optimal start stays put") {
        auto c = synthesize(truth, pose, 50, 0.0, 1);
        RefineReport rep;
        FisheyeCamera out = refine_intrinsics(c, truth, pose, &rep);
        CHECK(reprojection_rms(out, pose, c) < 1e-9);
        CHECK(std::abs(out.fx - truth.fx) < 1e-9);
    }
    SUBCASE("recovers fx from a 10 percent error") {
        auto c = synthesize(truth, pose, 50, 0.0, 2);
        FisheyeCamera init = truth;
        init.fx = 270.0;
        RefineReport rep;
        FisheyeCamera out = refine_intrinsics(c, init, pose, &rep);
        CHECK(std::abs(out.fx - 300.0) < 1e-4);
        for (size_t i = 1; i < rep.rms_history.size(); ++i) CHECK(rep.rms_history[i] <= rep.rms_history[i - 1]);
    }
    SUBCASE("noise sensitivity") {
        // Observed worst case over these seeds is 3.9 x 3 sigma / sqrt(n); 5 is the pinned ceiling.
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            auto c = synthesize(truth, base_camera_pose(2.0), 200, 0.2, 100 + s);
            worst = std::max(worst, std::abs(refine_intrinsics(c, truth, base_camera_pose(2.0)).fx - 300.0));
        }
        CHECK(worst < 5.0 * 3.0 * 0.2 / std::sqrt(200.0));
    }
    SUBCASE("degenerate inputs") {
        auto c = synthesize(truth, pose, 8, 0.0, 3);
        CHECK_THROWS_AS(refine_intrinsics(c, truth, pose), Error);
        std::vector<Correspondence> narrow;
        for (int i = 0; i < 20; ++i) {
            Vec3 xc(0.01 * i, 0.02 * (i % 3), 10.0);
            narrow.push_back({pose.R.transpose() * (xc - pose.t), project(truth, xc)});
        }
        CHECK_THROWS_AS(refine_intrinsics(narrow, truth, pose), Error);
    }
}

TEST_CASE("RANSAC PnP") {
    FisheyeCamera cam = test_camera();
    CameraPose pose = tilted_pose();
    SUBCASE("exact on clean data") {
        auto c = synthesize(cam, pose, 100, 0.0, 4);
        RansacConfig rc;
        rc.seed = 1;
        PnpResult r = estimate_pose_pnp(cam, c, rc);
        CHECK(rotation_angle_between(r.pose.R, pose.R) < 1e-6);
        CHECK((r.pose.t - pose.t).norm() < 1e-6);
        CHECK(r.inliers.size() == 100);
        CHECK((r.pose.R.transpose() * r.pose.R - Mat3::Identity()).norm() < 1e-9);
    }
    SUBCASE("outliers and noise") {
        auto c = synthesize(cam, pose, 100, 0.3, 5);
        Rng r(6);
        for (int i = 0; i < 30; ++i) c[i].pixel = Vec2(r.uniform(0, 640), r.uniform(0, 640));
        RansacConfig rc;
        rc.seed = 2;
        PnpResult res = estimate_pose_pnp(cam, c, rc);
        CHECK(rotation_angle_between(res.pose.R, pose.R) * 180.0 / kPi < 0.1);
        CHECK((res.pose.t - pose.t).norm() < 0.05);
    }
    SUBCASE("inlier count grows with the threshold") {
        auto c = synthesize(cam, pose, 60, 0.5, 7);
        RansacConfig a, b;
        a.inlier_threshold = 0.5;
        b.inlier_threshold = 2.0;
        CHECK(estimate_pose_pnp(cam, c, a).inliers.size() <= estimate_pose_pnp(cam, c, b).inliers.size());
    }
    SUBCASE("identical correspondences are degenerate") {
        std::vector<Correspondence> c(10, {Vec3(1, 2, 10), Vec2(330, 340)});
        CHECK_THROWS_AS(estimate_pose_pnp(cam, c, RansacConfig{}), Error);
    }
}

TEST_CASE("camera files") {
    FisheyeCamera cam = test_camera();
    CameraPose pose = tilted_pose();
    CameraFile f = camera_from_json(camera_to_json(cam, pose));
    const auto* back = std::get_if<FisheyeCamera>(&f.camera);
    REQUIRE(back);
    CHECK(back->fx == cam.fx);
    CHECK(back->k == cam.k);
    REQUIRE(f.pose);
    CHECK((f.pose->R - pose.R).norm() == 0.0);
    try {
        camera_from_json(R"({"fx": 1, "fy": 1, "cx": 0, "cy": 0, "k": [0, 0, 0, 0], "width": 4})");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("'height'") != std::string::npos);
    }
}
