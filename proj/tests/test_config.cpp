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

#include "t360/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace t360;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& json) {
    try {
        RunConfig::from_json(json);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("profiles") {
    RunConfig smoke = RunConfig::defaults(Profile::Smoke), desk = RunConfig::defaults(Profile::Desk);
    CHECK(smoke.probes == 100);
    CHECK(desk.probes == 2000);
    CHECK(desk.held_out == 200);
    CHECK(profile_from_string("desk") == Profile::Desk);
    CHECK(to_string(Profile::Smoke) == "smoke");
    CHECK_THROWS_AS(profile_from_string("huge"), ConfigError);
    smoke.validate();
    desk.validate();
}

TEST_CASE("parsing") {
    RunConfig c = RunConfig::from_json(R"({"profile": "desk", "seed": 5,
        "geometry": {"kind": "cone", "radius": 9, "height": 30},
        "probing": {"probes": 40, "depth": 0.8},
        "training": {"hidden_width": 16, "hidden_layers": 3, "epochs": 7},
        "scene": {"balls": [[10.5, 0, 8, 2]]}})");
    CHECK(c.profile == Profile::Desk);
    CHECK(c.seed == 5);
    CHECK(c.geometry.kind == ProfileKind::Cone);
    CHECK(c.geometry.height == 30.0);
    CHECK(c.probes == 40);
    CHECK(c.probe_depth == 0.8);
    CHECK(c.held_out == 200);  // untouched keys keep the profile value
    CHECK(c.training.layers == std::vector<int>{5, 16, 16, 16, 2});
    CHECK(c.training.epochs == 7);
    REQUIRE(c.balls.size() == 1);
    CHECK(c.balls[0].center == Vec3(10.5, 0, 8));
    CHECK(c.seed + 17 == c.dataset_seed());

    CHECK(error_of(R"({"probing": {"probs": 3}})").find("'probing.probs'") != std::string::npos);
    CHECK(error_of(R"({"colour": 1})").find("'colour'") != std::string::npos);
    CHECK(error_of(R"({"probing": {"probes": "many"}})").find("'probing.probes'") != std::string::npos);
    CHECK(error_of(R"({"probing": {"probes": 0}})") != "");
    CHECK(error_of("{not json") != "");

    CHECK(parse_ball("1,2,3,0.5").radius == 0.5);
    CHECK_THROWS_AS(parse_ball("1,2,3"), ConfigError);
}

TEST_CASE("round trip") {
    RunConfig c = RunConfig::defaults(Profile::Desk);
    c.seed = 77;
    c.geometry.kind = ProfileKind::Spline;
    c.geometry.control_points = {{0, 9}, {10, 10}, {18, 7}, {25, 0}};
    c.balls = {{Vec3(1, 2, 3), 1.5}};
    c.training.learning_rate = 1.0 / 3.0;
    std::string text = c.to_json();
    CHECK(RunConfig::from_json(text).to_json() == text);
}

TEST_CASE("camera file") {
    fs::path dir = fs::temp_directory_path() / "t360_test_config";
    fs::create_directories(dir);
    {
        std::ofstream(dir / "run.json") << R"({"camera": {"file": "missing.json"}})";
    }
    RunConfig c = RunConfig::load(dir / "run.json");
    try {
        c.sensor();
        FAIL("expected a missing-file error");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("'camera.file'") != std::string::npos);
        CHECK(msg.find("missing.json") != std::string::npos);
    }
    CHECK_THROWS_AS(RunConfig::load(dir / "absent.json"), ConfigError);
    RunConfig d = RunConfig::load(dir / "run.json", Profile::Desk);
    CHECK(d.probes == 2000);
    fs::remove_all(dir);
}
