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

#include "t360/poisson.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace t360;
using namespace t360::poisson;

namespace {

// Dense direct solve of the 5-point Laplacian with zero Dirichlet values outside the grid.
Map dense_solve(const Map& b) {
    const int W = b.width(), H = b.height(), n = W * H;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) {
            int i = v * W + u;
            rhs(i) = b(u, v);
            A(i, i) = -4.0;
            if (u > 0) A(i, i - 1) = 1.0;
            if (u + 1 < W) A(i, i + 1) = 1.0;
            if (v > 0) A(i, i - W) = 1.0;
            if (v + 1 < H) A(i, i + W) = 1.0;
        }
    Eigen::VectorXd h = A.partialPivLu().solve(rhs);
    Map out(W, H);
    for (int i = 0; i < n; ++i) out.values()[i] = h(i);
    return out;
}

double rel_l2(const Map& a, const Map& b) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a.values()[i] - b.values()[i]) * (a.values()[i] - b.values()[i]);
        den += b.values()[i] * b.values()[i];
    }
    return std::sqrt(num / den);
}

Map random_map(int w, int h, uint64_t seed, int channels = 1) {
    Map m(w, h, channels);
    Rng r(seed);
    for (auto& x : m.values()) x = r.uniform(-1.0, 1.0);
    return m;
}

// Gradient of a paraboloid bump h = max(0, 1 - r^2 / a^2).
Map paraboloid_field(int n, double u0, double v0, double a, Map* height) {
    Map f(n, n, 2);
    if (height) *height = Map(n, n);
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) {
            double du = u - u0, dv = v - v0, r2 = du * du + dv * dv;
            if (r2 >= a * a) continue;
            f(u, v, 0) = -2.0 * du / (a * a);
            f(u, v, 1) = -2.0 * dv / (a * a);
            if (height) (*height)(u, v) = 1.0 - r2 / (a * a);
        }
    return f;
}

}  // namespace

TEST_CASE("divergence stencils") {
    Map c(6, 5, 2, 0.7);
    Map d = divergence(c);
    for (double x : d.values()) CHECK(x == 0.0);
    Map lin(6, 5, 2);
    for (int v = 0; v < 5; ++v)
        for (int u = 0; u < 6; ++u) lin(u, v, 0) = u;
    d = divergence(lin);
    for (int v = 0; v < 5; ++v)
        for (int u = 0; u < 6; ++u) CHECK(d(u, v) == doctest::Approx(1.0));
    // Independent evaluation of the same central / one-sided stencil.
    Map f = random_map(7, 6, 9, 2);
    d = divergence(f);
    for (int v = 0; v < 6; ++v)
        for (int u = 0; u < 7; ++u) {
            double dx = u == 0 ? f(1, v, 0) - f(0, v, 0)
                        : u == 6 ? f(6, v, 0) - f(5, v, 0)
                                 : 0.5 * (f(u + 1, v, 0) - f(u - 1, v, 0));
            double dy = v == 0 ? f(u, 1, 1) - f(u, 0, 1)
                        : v == 5 ? f(u, 5, 1) - f(u, 4, 1)
                                 : 0.5 * (f(u, v + 1, 1) - f(u, v - 1, 1));
            CHECK(d(u, v) == dx + dy);
        }
}

TEST_CASE("fast solve matches the dense oracle") {
    CHECK(rel_l2(solve_fast(random_map(8, 8, 1)), dense_solve(random_map(8, 8, 1))) < 1e-8);
    for (int s = 0; s < 20; ++s) {
        Rng r(100 + s);
        int w = 1 + static_cast<int>(r.index(32)), h = 1 + static_cast<int>(r.index(32));
        Map b = random_map(w, h, 200 + s);
        Map ref = dense_solve(b);
        CHECK(rel_l2(solve_fast(b), ref) < 1e-8);
        CHECK(rel_l2(solve_fast(b, DstBackend::Direct), ref) < 1e-8);
    }
}

TEST_CASE("discrete eigenfunction is recovered") {
    const int W = 24, H = 17;
    Map hs(W, H);
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u)
            hs(u, v) = std::sin(std::numbers::pi * (u + 1) / (W + 1)) * std::sin(std::numbers::pi * (v + 1) / (H + 1));
    Map h = solve_fast(laplacian(hs));
    CHECK(rel_l2(h, hs) < 1e-10);
    Map zero = solve_fast(Map(W, H));
    for (double x : zero.values()) CHECK(x == 0.0);
}

TEST_CASE("linearity and residual") {
    Map b1 = random_map(20, 13, 3), b2 = random_map(20, 13, 4);
    Map comb(20, 13);
    for (size_t i = 0; i < comb.size(); ++i) comb.values()[i] = 2.0 * b1.values()[i] - 0.5 * b2.values()[i];
    Map h1 = solve_fast(b1), h2 = solve_fast(b2), hc = solve_fast(comb);
    double worst = 0.0, bmax = 0.0;
    for (size_t i = 0; i < hc.size(); ++i)
        worst = std::max(worst, std::abs(hc.values()[i] - (2.0 * h1.values()[i] - 0.5 * h2.values()[i])));
    CHECK(worst < 1e-12);
    Map lap = laplacian(h1);
    worst = 0.0;
    for (size_t i = 0; i < lap.size(); ++i) {
        worst = std::max(worst, std::abs(lap.values()[i] - b1.values()[i]));
        bmax = std::max(bmax, std::abs(b1.values()[i]));
    }
    CHECK(worst < 1e-9 * bmax);
}

TEST_CASE("masked solve") {
    SUBCASE("paraboloid over a disc") {
        Map truth;
        Map f = paraboloid_field(96, 47.3, 45.8, 36.0, &truth);
        Mask m(96, 96);
        for (int v = 0; v < 96; ++v)
            for (int u = 0; u < 96; ++u) m(u, v) = truth(u, v) > 0.0;
        Map h = solve_masked(f, m);
        double s = 0.0;
        int n = 0;
        for (int v = 0; v < 96; ++v)
            for (int u = 0; u < 96; ++u) {
                if (!m(u, v)) {
                    CHECK(h(u, v) == 0.0);
                    continue;
                }
                s += (h(u, v) - truth(u, v)) * (h(u, v) - truth(u, v));
                ++n;
            }
        CHECK(std::sqrt(s / n) < 0.02);
    }
    SUBCASE("full rectangle equals the fast solve on the embedding") {
        Map f = random_map(10, 9, 5, 2);
        Mask all(10, 9, 1, 1);
        Map h = solve_masked(f, all);
        Map ref = solve_field(f);
        for (size_t i = 0; i < h.size(); ++i) CHECK(h.values()[i] == doctest::Approx(ref.values()[i]).epsilon(1e-12));
    }
    SUBCASE("disjoint blobs do not interact") {
        Map f = random_map(40, 20, 6, 2);
        Mask a(40, 20), b(40, 20);
        for (int v = 3; v < 15; ++v)
            for (int u = 2; u < 12; ++u) a(u, v) = 1;
        for (int v = 4; v < 17; ++v)
            for (int u = 24; u < 37; ++u) b(u, v) = 1;
        Map both = solve_masked(f, mask_or(a, b));
        Map ha = solve_masked(f, a);
        Map f2 = f;
        for (int v = 0; v < 20; ++v)
            for (int u = 20; u < 40; ++u) f2(u, v, 0) = f2(u, v, 1) = 5.0;
        Map hb = solve_masked(f2, mask_or(a, b));
        for (int v = 0; v < 20; ++v)
            for (int u = 0; u < 40; ++u)
                if (a(u, v)) {
                    CHECK(std::abs(both(u, v) - ha(u, v)) < 1e-6);
                    CHECK(std::abs(hb(u, v) - ha(u, v)) < 1e-6);
                }
    }
    CHECK_THROWS_AS(solve_masked(Map(4, 4, 2), Mask(4, 4)), Error);
}

TEST_CASE("occlusion inpainting") {
    Map f(40, 30, 2);
    for (int v = 0; v < 30; ++v)
        for (int u = 0; u < 40; ++u) {
            f(u, v, 0) = std::sin(0.1 * u) + 0.05 * v;
            f(u, v, 1) = std::cos(0.07 * v) * 0.5;
        }
    SUBCASE("no occlusion leaves the field unchanged") {
        InpaintResult r = inpaint_occluded(f, Mask(40, 30));
        CHECK(r.field == f);
        CHECK(r.flagged_count == 0);
    }
    SUBCASE("five pixel band") {
        Mask occ(40, 30);
        for (int v = 0; v < 30; ++v)
            for (int u = 18; u < 23; ++u) occ(u, v) = 1;
        Map holed = f;
        for (int v = 0; v < 30; ++v)
            for (int u = 18; u < 23; ++u) holed(u, v, 0) = holed(u, v, 1) = 0.0;
        InpaintResult r = inpaint_occluded(holed, occ);
        double num = 0.0, den = 0.0;
        for (int v = 0; v < 30; ++v)
            for (int u = 18; u < 23; ++u)
                for (int c = 0; c < 2; ++c) {
                    num += std::pow(r.field(u, v, c) - f(u, v, c), 2);
                    den += f(u, v, c) * f(u, v, c);
                }
        CHECK(std::sqrt(num / den) < 0.05);
        for (int v = 0; v < 30; ++v)
            for (int u = 0; u < 40; ++u)
                if (!occ(u, v)) CHECK(r.field(u, v, 0) == holed(u, v, 0));
    }
    SUBCASE("fully occluded field is flagged") {
        InpaintResult r = inpaint_occluded(f, Mask(40, 30, 1, 1));
        CHECK(r.flagged_count == 40 * 30);
        for (double x : r.field.values()) CHECK(x == 0.0);
    }
    SUBCASE("wide band is flagged") {
        Mask occ(60, 60);
        for (int v = 0; v < 60; ++v)
            for (int u = 10; u < 20; ++u) occ(u, v) = 1;
        for (int v = 10; v < 30; ++v)
            for (int u = 0; u < 60; ++u) occ(u, v) = 1;
        InpaintResult r = inpaint_occluded(Map(60, 60, 2, 1.0), occ);
        CHECK(r.flagged(15, 20) == 1);
        CHECK(r.field(15, 20, 0) == 0.0);
        CHECK(r.flagged(15, 50) == 0);
        CHECK(r.field(15, 50, 0) == doctest::Approx(1.0));
    }
}
