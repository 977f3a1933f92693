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

#include "t360/calibration.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace t360;

namespace {

SensorSetup small_setup() {
    SensorSetup s;
    s.camera = default_fisheye(320);
    s.target = make_target_pinhole(320, 72.0);
    return s;
}

const Prober& prober() {
    static const SensorSetup setup = small_setup();
    static const Prober p(setup, setup.true_pose);
    return p;
}

std::vector<SurfacePoint> four_points(const SensorGeometry& g) {
    return {g.surface_point(4.0, 0.4), g.surface_point(8.0, 2.0), g.surface_point(12.0, 3.5),
            g.surface_point(6.0, 5.2)};
}

const std::vector<ProbeSample>& hundred_samples() {
    static const std::vector<ProbeSample> s =
        run_probing(prober(), sample_surface(prober().setup().geometry, 100, 3), 1.0);
    return s;
}

}  // namespace

TEST_CASE("probing") {
    const SensorGeometry& g = prober().setup().geometry;
    SUBCASE("four presses give four contact samples") {
        auto samples = run_probing(prober(), four_points(g), 1.0);
        REQUIRE(samples.size() == 4);
        for (size_t i = 0; i < 4; ++i) {
            CHECK(samples[i].probe_index == static_cast<int>(i));
            CHECK_FALSE(samples[i].flagged);
            CHECK(count(samples[i].truth.contact) > 0);
            CHECK(samples[i].raw.width() == samples[i].window.w);
            CHECK((samples[i].deepest_point - (samples[i].point.position - samples[i].point.normal)).norm() < 1e-12);
        }
    }
    SUBCASE("zero depth flags every sample") {
        for (const auto& s : run_probing(prober(), four_points(g), 0.0)) {
            CHECK(s.flagged);
            CHECK(count(s.truth.contact) == 0);
        }
    }
    SUBCASE("windowed capture matches the full capture") {
        ProbeSample s = prober().probe(0, g.surface_point(7.0, 1.0), 1.0);
        Image full = prober().capture(Scene{{s.ball}});
        CHECK(s.raw == full.crop(s.window));
    }
}

TEST_CASE("minimum point") {
    const SensorGeometry& g = prober().setup().geometry;
    SUBCASE("radial press maps to the deepest cap point") {
        SurfacePoint p = g.surface_point(9.0, 0.7);
        ProbeSample s = prober().probe(0, p, 1.0);
        Correspondence c = minimum_point(s);
        Vec3 axisward = -Vec3(p.position.x(), p.position.y(), 0.0).normalized();
        CHECK((c.world - (s.ball.center + s.ball.radius * axisward)).norm() < 1e-12);
        // The pixel sees the deepest point to within the depth map's grid.
        Vec2 px = project(prober().setup().target, prober().setup().true_pose, c.world);
        CHECK((px - c.pixel).norm() < 2.0);
    }
    SUBCASE("ties resolve to the smallest (v, u)") {
        ProbeSample s;
        s.window = {10, 20, 4, 3};
        s.truth.depth = Map(4, 3);
        s.truth.contact = Mask(4, 3);
        s.truth.depth(3, 0) = 0.5;
        s.truth.depth(1, 2) = 0.5;
        s.truth.depth(0, 1) = 0.5;
        s.truth.contact(3, 0) = 1;
        s.deepest_point = Vec3(1, 2, 3);
        Correspondence c = minimum_point(s);
        CHECK(c.pixel == Vec2(13, 20));
        CHECK(c.world == Vec3(1, 2, 3));
        s.truth.contact = Mask(4, 3);
        CHECK_THROWS_AS(minimum_point(s), Error);
    }
}

TEST_CASE("pose recovery from minimum points") {
    const SensorSetup& setup = prober().setup();
    auto plan = sample_surface(setup.geometry, 100, 11);
    PoseRecovery r = recover_pose(setup, plan, 100, 1.0, 5, RansacConfig{});
    CHECK(r.correspondences.size() <= 100);
    CHECK(r.correspondences.size() >= 80);
    CHECK(r.rotation_error_deg < 0.4);
    CHECK(r.translation_error_mm < 0.3);
    CHECK_THROWS_AS(recover_pose(setup, plan, 3, 1.0, 5, RansacConfig{}), Error);
}

TEST_CASE("dataset assembly") {
    const auto& samples = hundred_samples();
    const Image& ref = prober().reference();
    CalibDataset d = build_dataset(samples, ref, 0.25, 400, 9);
    SUBCASE("balance and cap") {
        CHECK(d.non_contact_fraction() == doctest::Approx(0.25).epsilon(0.04));
        CHECK(std::abs(d.non_contact_fraction() - 0.25) <= 0.01);
        std::map<int, int> per_probe;
        for (const auto& r : d.rows)
            if (r.contact) ++per_probe[r.probe];
        for (auto [probe, n] : per_probe) CHECK(n <= 400);
        CHECK(d.probes + d.excluded_probes == 100);
        CalibDataset only = build_dataset(samples, ref, 0.0, 400, 9);
        CHECK(only.contact_rows() == only.rows.size());
    }
    SUBCASE("rows lie on visible pixels and carry exact labels") {
        std::map<int, const ProbeSample*> by_index;
        for (const auto& s : samples) by_index[s.probe_index] = &s;
        const SceneView& label = prober().label_view();
        for (const auto& r : d.rows) {
            int u = static_cast<int>(r.u), v = static_cast<int>(r.v);
            CHECK(label.valid()(u, v));
            CHECK_FALSE(label.occlusion()(u, v));
            const ProbeSample& s = *by_index.at(r.probe);
            int lu = u - s.window.x, lv = v - s.window.y;
            if (r.contact) {
                CHECK(s.truth.contact(lu, lv));
                CHECK(r.gx == s.truth.gradient(lu, lv, 0));
                CHECK(r.gy == s.truth.gradient(lu, lv, 1));
            } else {
                CHECK(r.gx == 0.0);
                CHECK(r.gy == 0.0);
            }
            CHECK(r.r == s.raw(lu, lv, 0) - ref(u, v, 0));
        }
    }
    SUBCASE("CSV is deterministic and round-trips") {
        std::ostringstream a, b;
        write_dataset_csv(a, d);
        write_dataset_csv(b, build_dataset(samples, ref, 0.25, 400, 9));
        CHECK(a.str() == b.str());
        std::istringstream in(a.str());
        CalibDataset back = read_dataset_csv(in);
        REQUIRE(back.rows.size() == d.rows.size());
        std::ostringstream c;
        write_dataset_csv(c, back);
        CHECK(c.str() == a.str());
        gradnet::TrainingSet ts = back.training_set();
        CHECK(ts.rows() == d.rows.size());
    }
    SUBCASE("malformed CSV names the line") {
        std::istringstream in("u,v,r,g,b,gx,gy,contact\n1,2,0,0,0,0,0,1\n1,2,x,0,0,0,0,1\n");
        try {
            read_dataset_csv(in);
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    CHECK_THROWS_AS(build_dataset({}, ref, 0.25, 400, 9), Error);
}

TEST_CASE("hashes identify geometry and camera") {
    SensorGeometry a = SensorGeometry::make({});
    GeometryParams p;
    p.radius = 11.0;
    CHECK(geometry_hash(a) == geometry_hash(SensorGeometry::make({})));
    CHECK(geometry_hash(a) != geometry_hash(SensorGeometry::make(p)));
    CHECK(camera_hash(default_fisheye(320)) != camera_hash(default_fisheye(640)));
}
