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

#include <cmath>
#include <cstdio>
#include <numbers>

namespace t360 {

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

Rect Rect::intersect(const Rect& o) const {
    int x0 = std::max(x, o.x), y0 = std::max(y, o.y);
    int x1 = std::min(x + w, o.x + o.w), y1 = std::min(y + h, o.y + o.h);
    if (x1 <= x0 || y1 <= y0) return {};
    return {x0, y0, x1 - x0, y1 - y0};
}

Rect Rect::unite(const Rect& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    int x0 = std::min(x, o.x), y0 = std::min(y, o.y);
    int x1 = std::max(x + w, o.x + o.w), y1 = std::max(y + h, o.y + o.h);
    return {x0, y0, x1 - x0, y1 - y0};
}

int count(const Mask& m) {
    int n = 0;
    for (auto v : m.values()) n += v != 0;
    return n;
}

namespace {

template <typename Op>
Mask combine(const Mask& a, const Mask& b, Op op) {
    if (!a.same_shape(b)) fail(ErrorCode::InvalidArgument, "mask shape mismatch");
    Mask out(a.width(), a.height());
    for (size_t i = 0; i < a.size(); ++i) out.values()[i] = op(a.values()[i] != 0, b.values()[i] != 0) ? 1 : 0;
    return out;
}

Mask morph(const Mask& m, bool grow) {
    Mask out(m.width(), m.height());
    for (int v = 0; v < m.height(); ++v) {
        for (int u = 0; u < m.width(); ++u) {
            bool any = false, all = true;
            for (int dv = -1; dv <= 1; ++dv) {
                for (int du = -1; du <= 1; ++du) {
                    int uu = u + du, vv = v + dv;
                    // Outside pixels count as background for both operations.
                    bool on = uu >= 0 && vv >= 0 && uu < m.width() && vv < m.height() && m(uu, vv);
                    any = any || on;
                    all = all && on;
                }
            }
            out(u, v) = grow ? any : all;
        }
    }
    return out;
}

}  // namespace

Mask mask_and(const Mask& a, const Mask& b) {
    return combine(a, b, [](bool x, bool y) { return x && y; });
}
Mask mask_andnot(const Mask& a, const Mask& b) {
    return combine(a, b, [](bool x, bool y) { return x && !y; });
}
Mask mask_or(const Mask& a, const Mask& b) {
    return combine(a, b, [](bool x, bool y) { return x || y; });
}

Mask dilate(const Mask& m, int iterations) {
    Mask out = m;
    for (int i = 0; i < iterations; ++i) out = morph(out, true);
    return out;
}

Mask erode(const Mask& m, int iterations) {
    Mask out = m;
    for (int i = 0; i < iterations; ++i) out = morph(out, false);
    return out;
}

Rect bounding_box(const Mask& m) {
    int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
    for (int v = 0; v < m.height(); ++v)
        for (int u = 0; u < m.width(); ++u)
            if (m(u, v)) {
                x0 = std::min(x0, u);
                y0 = std::min(y0, v);
                x1 = std::max(x1, u);
                y1 = std::max(y1, v);
            }
    if (x1 < 0) return {};
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

double iou(const Mask& a, const Mask& b) {
    int inter = count(mask_and(a, b));
    int uni = count(mask_or(a, b));
    return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

int label_components(const Mask& m, Grid<int>& labels) {
    labels = Grid<int>(m.width(), m.height());
    int next = 0;
    std::vector<std::pair<int, int>> stack;
    for (int v = 0; v < m.height(); ++v) {
        for (int u = 0; u < m.width(); ++u) {
            if (!m(u, v) || labels(u, v)) continue;
            ++next;
            labels(u, v) = next;
            stack.assign(1, {u, v});
            while (!stack.empty()) {
                auto [cu, cv] = stack.back();
                stack.pop_back();
                for (int dv = -1; dv <= 1; ++dv)
                    for (int du = -1; du <= 1; ++du) {
                        int uu = cu + du, vv = cv + dv;
                        if (uu < 0 || vv < 0 || uu >= m.width() || vv >= m.height()) continue;
                        if (!m(uu, vv) || labels(uu, vv)) continue;
                        labels(uu, vv) = next;
                        stack.push_back({uu, vv});
                    }
            }
        }
    }
    return next;
}

namespace {
uint64_t splitmix(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

// xoshiro256**
Rng::Rng(uint64_t seed) {
    for (auto& s : s_) s = splitmix(seed);
}

uint64_t Rng::next_u64() {
    uint64_t result = rotl(s_[1] * 5, 7) * 9;
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

size_t Rng::index(size_t n) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "Rng::index on empty range");
    // Lemire-style rejection keeps the draw unbiased.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<size_t>(x % n);
}

uint64_t fnv1a(const std::string& bytes, uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace t360
