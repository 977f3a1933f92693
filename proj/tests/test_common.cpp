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

#include "t360/common.hpp"
#include "t360/io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace t360;

TEST_CASE("rect operations") {
    Rect a{0, 0, 4, 4}, b{2, 2, 4, 4};
    CHECK(a.intersect(b) == Rect{2, 2, 2, 2});
    CHECK(a.unite(b) == Rect{0, 0, 6, 6});
    CHECK(a.pad(1) == Rect{-1, -1, 6, 6});
    CHECK(Rect{0, 0, 2, 2}.intersect(Rect{5, 5, 1, 1}).empty());
}

TEST_CASE("grid crop and paste round-trip") {
    Map m(5, 4, 2);
    for (int v = 0; v < 4; ++v)
        for (int u = 0; u < 5; ++u) m(u, v, 1) = u + 10 * v;
    Map c = m.crop({1, 1, 3, 2});
    CHECK(c(0, 0, 1) == 11);
    CHECK(c(2, 1, 1) == 23);
    Map z(5, 4, 2);
    z.paste(c, 1, 1);
    CHECK(z(3, 2, 1) == 23);
    CHECK(z(0, 0, 1) == 0);
}

TEST_CASE("morphology treats the outside as background") {
    Mask m(5, 5);
    m(2, 2) = 1;
    Mask d = dilate(m);
    CHECK(count(d) == 9);
    CHECK(count(erode(d)) == 1);
    Mask full(3, 3, 1, 1);
    CHECK(count(erode(full)) == 1);
}

TEST_CASE("component labels follow raster order and 8-connectivity") {
    Mask m(6, 4);
    m(4, 0) = 1;
    m(0, 1) = 1;
    m(1, 2) = 1;  // diagonal neighbour of (0, 1)
    Grid<int> labels;
    CHECK(label_components(m, labels) == 2);
    CHECK(labels(4, 0) == 1);
    CHECK(labels(0, 1) == 2);
    CHECK(labels(1, 2) == 2);
}

TEST_CASE("iou and bounding box") {
    Mask a(4, 4), b(4, 4);
    a(0, 0) = a(1, 0) = 1;
    b(1, 0) = b(2, 0) = 1;
    CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(Mask(4, 4), Mask(4, 4)) == 1.0);
    CHECK(bounding_box(b) == Rect{1, 0, 2, 1});
}

TEST_CASE("rng is deterministic and roughly uniform") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(1);
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double x = r.normal();
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.03);
    CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("image files round-trip") {
    auto dir = std::filesystem::temp_directory_path() / "t360_test_io";
    std::filesystem::create_directories(dir);
    Image img(7, 3, 3);
    for (int v = 0; v < 3; ++v)
        for (int u = 0; u < 7; ++u)
            for (int c = 0; c < 3; ++c) img(u, v, c) = static_cast<float>((u * 3 + v * 5 + c * 40) % 256) / 255.0f;
    io::write_pnm(dir / "a.ppm", img);
    Image back = io::read_pnm(dir / "a.ppm");
    REQUIRE(back.same_shape(img));
    for (size_t i = 0; i < img.size(); ++i) CHECK(back.values()[i] == doctest::Approx(img.values()[i]).epsilon(1e-6));

    Mask m(4, 2);
    m(1, 1) = 1;
    io::write_mask_pgm(dir / "m.pgm", m);
    CHECK(io::read_mask_pgm(dir / "m.pgm") == m);

    Map d(3, 2);
    d(2, 1) = 0.25;
    io::write_sidecar(dir / "d", d);
    Map dd = io::read_sidecar(io::sidecar_header_path(dir / "d"));
    CHECK(dd(2, 1) == 0.25);
    std::filesystem::remove_all(dir);
}

TEST_CASE("base64 of doubles is lossless") {
    std::vector<double> v{0.0, -1.5, 1e-300, 3.141592653589793};
    CHECK(io::base64_to_doubles(io::doubles_to_base64(v)) == v);
    CHECK(io::base64_encode("foobar") == "Zm9vYmFy");
    CHECK(io::base64_decode("Zm9vYg==") == "foob");
}
