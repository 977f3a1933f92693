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

#include "t360/simd.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace t360::poisson {

namespace {

void check_field(const Map& field) {
    if (field.channels() != 2) fail(ErrorCode::InvalidArgument, "gradient field must have 2 channels");
    for (double x : field.values())
        if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "gradient field contains non-finite values");
}

void split(const Map& field, std::vector<double>& gx, std::vector<double>& gy) {
    const size_t n = static_cast<size_t>(field.width()) * field.height();
    gx.resize(n);
    gy.resize(n);
    for (size_t i = 0; i < n; ++i) {
        gx[i] = field.values()[2 * i];
        gy[i] = field.values()[2 * i + 1];
    }
}

// Unnormalized DST-I of length n along a strided line, O(n^2).
void dst1_direct(const double* in, double* out, int n, const std::vector<double>& table) {
    // table[(j+1)(k+1) mod 2(n+1)] = sin(pi * idx / (n+1))
    const int period = 2 * (n + 1);
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += in[j] * table[static_cast<size_t>((j + 1) * (k + 1)) % period];
        out[k] = 2.0 * s;
    }
}

std::vector<double> sine_table(int n) {
    std::vector<double> t(2 * (n + 1));
    for (size_t i = 0; i < t.size(); ++i) t[i] = std::sin(std::numbers::pi * static_cast<double>(i) / (n + 1));
    return t;
}

// 2D DST-I of a row-major h x w array.
void dst2(std::vector<double>& a, int w, int h, DstBackend backend) {
    if (backend == DstBackend::Fftw) {
        std::vector<double> out(a.size());
        fftw_plan plan = fftw_plan_r2r_2d(h, w, a.data(), out.data(), FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
        if (!plan) fail(ErrorCode::InvalidArgument, "FFTW could not plan the sine transform");
        fftw_execute(plan);
        fftw_destroy_plan(plan);
        a.swap(out);
        return;
    }
    std::vector<double> tw = sine_table(w), th = sine_table(h);
    std::vector<double> line_in(std::max(w, h)), line_out(std::max(w, h));
    for (int v = 0; v < h; ++v) {
        dst1_direct(a.data() + static_cast<size_t>(v) * w, line_out.data(), w, tw);
        std::copy(line_out.begin(), line_out.begin() + w, a.begin() + static_cast<size_t>(v) * w);
    }
    for (int u = 0; u < w; ++u) {
        for (int v = 0; v < h; ++v) line_in[v] = a[static_cast<size_t>(v) * w + u];
        dst1_direct(line_in.data(), line_out.data(), h, th);
        for (int v = 0; v < h; ++v) a[static_cast<size_t>(v) * w + u] = line_out[v];
    }
}

}  // namespace

Map divergence(const Map& field) {
    check_field(field);
    std::vector<double> gx, gy;
    split(field, gx, gy);
    Map out(field.width(), field.height());
    if (out.empty()) return out;
    simd::kernels().divergence(gx.data(), gy.data(), out.data(), field.width(), field.height());
    return out;
}

Map laplacian(const Map& h) {
    if (h.channels() != 1) fail(ErrorCode::InvalidArgument, "laplacian needs a single-channel map");
    Map out(h.width(), h.height());
    if (out.empty()) return out;
    simd::kernels().laplacian5(h.data(), out.data(), h.width(), h.height());
    return out;
}

void dst1_rows(Map& m, DstBackend backend) {
    const int w = m.width();
    if (w == 0) return;
    std::vector<double> line(w), out(w);
    std::vector<double> table = sine_table(w);
    for (int v = 0; v < m.height(); ++v) {
        for (int u = 0; u < w; ++u) line[u] = m(u, v);
        if (backend == DstBackend::Fftw) {
            fftw_plan plan = fftw_plan_r2r_1d(w, line.data(), out.data(), FFTW_RODFT00, FFTW_ESTIMATE);
            fftw_execute(plan);
            fftw_destroy_plan(plan);
        } else {
            dst1_direct(line.data(), out.data(), w, table);
        }
        for (int u = 0; u < w; ++u) m(u, v) = out[u];
    }
}

Map solve_fast(const Map& b, DstBackend backend) {
    if (b.channels() != 1) fail(ErrorCode::InvalidArgument, "solve_fast needs a single-channel right-hand side");
    const int w = b.width(), h = b.height();
    Map out(w, h);
    if (out.empty()) return out;
    for (double x : b.values())
        if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "right-hand side contains non-finite values");
    std::vector<double> a = b.values();
    dst2(a, w, h, backend);
    std::vector<double> lx(w), ly(h);
    for (int k = 0; k < w; ++k) lx[k] = 2.0 * std::cos(std::numbers::pi * (k + 1) / (w + 1)) - 2.0;
    for (int k = 0; k < h; ++k) ly[k] = 2.0 * std::cos(std::numbers::pi * (k + 1) / (h + 1)) - 2.0;
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) a[static_cast<size_t>(v) * w + u] /= (lx[u] + ly[v]);
    dst2(a, w, h, backend);
    const double scale = 1.0 / (4.0 * (w + 1) * (h + 1));
    for (size_t i = 0; i < a.size(); ++i) out.values()[i] = a[i] * scale;
    return out;
}

Map solve_field(const Map& field, DstBackend backend) { return solve_fast(divergence(field), backend); }

Map solve_masked(const Map& field, const Mask& mask) {
    check_field(field);
    if (mask.width() != field.width() || mask.height() != field.height())
        fail(ErrorCode::InvalidArgument, "mask and field sizes differ");
    if (count(mask) == 0) fail(ErrorCode::InvalidArgument, "solve_masked needs a nonempty mask");
    Grid<int> labels;
    int n = label_components(mask, labels);
    std::vector<Rect> boxes(n + 1, Rect{0, 0, 0, 0});
    for (int v = 0; v < mask.height(); ++v)
        for (int u = 0; u < mask.width(); ++u) {
            int l = labels(u, v);
            if (!l) continue;
            boxes[l] = boxes[l].empty() ? Rect{u, v, 1, 1} : boxes[l].unite({u, v, 1, 1});
        }
    Map out(field.width(), field.height());
    for (int l = 1; l <= n; ++l) {
        Rect box = boxes[l].pad(2).intersect(field.bounds());
        Map sub(box.w, box.h, 2);
        for (int v = 0; v < box.h; ++v)
            for (int u = 0; u < box.w; ++u)
                if (labels(box.x + u, box.y + v) == l) {
                    sub(u, v, 0) = field(box.x + u, box.y + v, 0);
                    sub(u, v, 1) = field(box.x + u, box.y + v, 1);
                }
        Map h = solve_field(sub);
        for (int v = 0; v < box.h; ++v)
            for (int u = 0; u < box.w; ++u)
                if (labels(box.x + u, box.y + v) == l) out(box.x + u, box.y + v) = h(u, v);
    }
    return out;
}

RunInfo occlusion_runs(const Mask& occ, int u, int v) {
    RunInfo r;
    if (!occ(u, v)) return r;
    for (int x = u - 1; x >= 0; --x)
        if (!occ(x, v)) {
            r.left = x;
            break;
        }
    for (int x = u + 1; x < occ.width(); ++x)
        if (!occ(x, v)) {
            r.right = x;
            break;
        }
    for (int y = v - 1; y >= 0; --y)
        if (!occ(u, y)) {
            r.up = y;
            break;
        }
    for (int y = v + 1; y < occ.height(); ++y)
        if (!occ(u, y)) {
            r.down = y;
            break;
        }
    return r;
}

InpaintResult inpaint_occluded(const Map& field, const Mask& occlusion, int max_band) {
    if (occlusion.width() != field.width() || occlusion.height() != field.height())
        fail(ErrorCode::InvalidArgument, "occlusion mask and field sizes differ");
    InpaintResult res;
    res.field = field;
    res.flagged = Mask(field.width(), field.height());
    const int C = field.channels();
    for (int v = 0; v < field.height(); ++v)
        for (int u = 0; u < field.width(); ++u) {
            if (!occlusion(u, v)) continue;
            RunInfo r = occlusion_runs(occlusion, u, v);
            // Run length counts occluded pixels between the bracketing valid pixels;
            // an open end makes the run unusable.
            auto run_len = [&](int a, int b, int size) {
                if (a < 0 || b < 0) return size + 1;
                return b - a - 1;
            };
            int lh = run_len(r.left, r.right, field.width());
            int lv = run_len(r.up, r.down, field.height());
            bool horiz = lh <= lv;
            int len = horiz ? lh : lv;
            if (len > max_band || len > (horiz ? field.width() : field.height())) {
                for (int c = 0; c < C; ++c) res.field(u, v, c) = 0.0;
                res.flagged(u, v) = 1;
                ++res.flagged_count;
                continue;
            }
            for (int c = 0; c < C; ++c) {
                double a, b, t;
                if (horiz) {
                    a = field(r.left, v, c);
                    b = field(r.right, v, c);
                    t = static_cast<double>(u - r.left) / (r.right - r.left);
                } else {
                    a = field(u, r.up, c);
                    b = field(u, r.down, c);
                    t = static_cast<double>(v - r.up) / (r.down - r.up);
                }
                res.field(u, v, c) = a + t * (b - a);
            }
        }
    return res;
}

}  // namespace t360::poisson
