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

#include "t360/simd.hpp"

#include <cmath>

namespace t360::simd::generic {

namespace {

void gemm_bias(const double* a, const double* b, const double* bias, double* c, size_t m,
               size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (size_t j = 0; j < n; ++j) ci[j] = bias ? bias[j] : 0.0;
        for (size_t p = 0; p < k; ++p) {
            double s = a[i * k + p];
            const double* bp = b + p * n;
            for (size_t j = 0; j < n; ++j) ci[j] = ci[j] + s * bp[j];
        }
    }
}

void gemm_at_b_acc(const double* a, const double* d, double* g, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* di = d + i * n;
        for (size_t p = 0; p < k; ++p) {
            double s = a[i * k + p];
            double* gp = g + p * n;
            for (size_t j = 0; j < n; ++j) gp[j] = gp[j] + s * di[j];
        }
    }
}

double dot4(const double* x, const double* y, size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        s0 = s0 + x[j] * y[j];
        s1 = s1 + x[j + 1] * y[j + 1];
        s2 = s2 + x[j + 2] * y[j + 2];
        s3 = s3 + x[j + 3] * y[j + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; j < n; ++j) s = s + x[j] * y[j];
    return s;
}

void gemm_a_bt(const double* d, const double* b, double* o, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i)
        for (size_t p = 0; p < k; ++p) o[i * k + p] = dot4(d + i * n, b + p * n, n);
}

void column_sum_acc(const double* d, double* out, size_t m, size_t n) {
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) out[j] = out[j] + d[i * n + j];
}

void tanh_backward(double* d, const double* h, size_t n) {
    for (size_t i = 0; i < n; ++i) d[i] = d[i] * (1.0 - h[i] * h[i]);
}

void adam_step(double* p, const double* g, double* m, double* v, size_t n, double lr,
               double beta1, double beta2, double eps, double bc1, double bc2) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        double mh = m[i] / bc1;
        double vh = v[i] / bc2;
        p[i] = p[i] - lr * mh / (std::sqrt(vh) + eps);
    }
}

void laplacian5(const double* h, double* out, size_t w, size_t hgt) {
    for (size_t v = 0; v < hgt; ++v) {
        for (size_t u = 0; u < w; ++u) {
            size_t i = v * w + u;
            double left = u > 0 ? h[i - 1] : 0.0;
            double right = u + 1 < w ? h[i + 1] : 0.0;
            double up = v > 0 ? h[i - w] : 0.0;
            double down = v + 1 < hgt ? h[i + w] : 0.0;
            out[i] = ((left + right) + (up + down)) - 4.0 * h[i];
        }
    }
}

void divergence(const double* gx, const double* gy, double* out, size_t w, size_t hgt) {
    for (size_t v = 0; v < hgt; ++v) {
        for (size_t u = 0; u < w; ++u) {
            size_t i = v * w + u;
            double dx, dy;
            if (w == 1) dx = 0.0;
            else if (u == 0) dx = gx[i + 1] - gx[i];
            else if (u + 1 == w) dx = gx[i] - gx[i - 1];
            else dx = 0.5 * (gx[i + 1] - gx[i - 1]);
            if (hgt == 1) dy = 0.0;
            else if (v == 0) dy = gy[i + w] - gy[i];
            else if (v + 1 == hgt) dy = gy[i] - gy[i - w];
            else dy = 0.5 * (gy[i + w] - gy[i - w]);
            out[i] = dx + dy;
        }
    }
}

}  // namespace

const KernelTable table = {
    gemm_bias, gemm_at_b_acc, gemm_a_bt, column_sum_acc,
    tanh_backward, adam_step, laplacian5, divergence,
};

}  // namespace t360::simd::generic
