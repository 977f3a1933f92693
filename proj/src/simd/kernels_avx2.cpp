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

// AVX2 variants. Compiled with -mavx2 only (no -mfma): every multiply and add
// is rounded separately, exactly like the generic kernels.

#include "t360/simd.hpp"

#include <immintrin.h>

#include <cmath>

namespace t360::simd::avx2 {

namespace {

void gemm_bias(const double* a, const double* b, const double* bias, double* c, size_t m,
               size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256d acc = bias ? _mm256_loadu_pd(bias + j) : _mm256_setzero_pd();
            for (size_t p = 0; p < k; ++p) {
                __m256d s = _mm256_set1_pd(a[i * k + p]);
                acc = _mm256_add_pd(acc, _mm256_mul_pd(s, _mm256_loadu_pd(b + p * n + j)));
            }
            _mm256_storeu_pd(ci + j, acc);
        }
        for (; j < n; ++j) {
            double acc = bias ? bias[j] : 0.0;
            for (size_t p = 0; p < k; ++p) acc = acc + a[i * k + p] * b[p * n + j];
            ci[j] = acc;
        }
    }
}

void gemm_at_b_acc(const double* a, const double* d, double* g, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* di = d + i * n;
        for (size_t p = 0; p < k; ++p) {
            double sv = a[i * k + p];
            __m256d s = _mm256_set1_pd(sv);
            double* gp = g + p * n;
            size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d prod = _mm256_mul_pd(s, _mm256_loadu_pd(di + j));
                _mm256_storeu_pd(gp + j, _mm256_add_pd(_mm256_loadu_pd(gp + j), prod));
            }
            for (; j < n; ++j) gp[j] = gp[j] + sv * di[j];
        }
    }
}

double dot4(const double* x, const double* y, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t j = 0;
    for (; j + 4 <= n; j += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; j < n; ++j) s = s + x[j] * y[j];
    return s;
}

void gemm_a_bt(const double* d, const double* b, double* o, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i)
        for (size_t p = 0; p < k; ++p) o[i * k + p] = dot4(d + i * n, b + p * n, n);
}

void column_sum_acc(const double* d, double* out, size_t m, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* di = d + i * n;
        size_t j = 0;
        for (; j + 4 <= n; j += 4)
            _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_loadu_pd(di + j)));
        for (; j < n; ++j) out[j] = out[j] + di[j];
    }
}

void tanh_backward(double* d, const double* h, size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d hv = _mm256_loadu_pd(h + i);
        __m256d f = _mm256_sub_pd(one, _mm256_mul_pd(hv, hv));
        _mm256_storeu_pd(d + i, _mm256_mul_pd(_mm256_loadu_pd(d + i), f));
    }
    for (; i < n; ++i) d[i] = d[i] * (1.0 - h[i] * h[i]);
}

void adam_step(double* p, const double* g, double* m, double* v, size_t n, double lr,
               double beta1, double beta2, double eps, double bc1, double bc2) {
    const __m256d b1 = _mm256_set1_pd(beta1), b1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d b2 = _mm256_set1_pd(beta2), b2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
    const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(b1c, gv));
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(b2c, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        __m256d mh = _mm256_div_pd(mv, vbc1);
        __m256d vh = _mm256_div_pd(vv, vbc2);
        __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mh), _mm256_add_pd(_mm256_sqrt_pd(vh), veps));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        double mh = m[i] / bc1;
        double vh = v[i] / bc2;
        p[i] = p[i] - lr * mh / (std::sqrt(vh) + eps);
    }
}

inline double lap_at(const double* h, size_t w, size_t hgt, size_t u, size_t v) {
    size_t i = v * w + u;
    double left = u > 0 ? h[i - 1] : 0.0;
    double right = u + 1 < w ? h[i + 1] : 0.0;
    double up = v > 0 ? h[i - w] : 0.0;
    double down = v + 1 < hgt ? h[i + w] : 0.0;
    return ((left + right) + (up + down)) - 4.0 * h[i];
}

void laplacian5(const double* h, double* out, size_t w, size_t hgt) {
    const __m256d four = _mm256_set1_pd(4.0);
    const __m256d zero = _mm256_setzero_pd();
    for (size_t v = 0; v < hgt; ++v) {
        const double* row = h + v * w;
        size_t u = 0;
        if (w > 0) {
            out[v * w] = lap_at(h, w, hgt, 0, v);
            u = 1;
        }
        for (; u + 4 < w; u += 4) {
            __m256d left = _mm256_loadu_pd(row + u - 1);
            __m256d right = _mm256_loadu_pd(row + u + 1);
            __m256d up = v > 0 ? _mm256_loadu_pd(row + u - w) : zero;
            __m256d down = v + 1 < hgt ? _mm256_loadu_pd(row + u + w) : zero;
            __m256d c = _mm256_loadu_pd(row + u);
            __m256d s = _mm256_add_pd(_mm256_add_pd(left, right), _mm256_add_pd(up, down));
            _mm256_storeu_pd(out + v * w + u, _mm256_sub_pd(s, _mm256_mul_pd(four, c)));
        }
        for (; u < w; ++u) out[v * w + u] = lap_at(h, w, hgt, u, v);
    }
}

inline double div_at(const double* gx, const double* gy, size_t w, size_t hgt, size_t u, size_t v) {
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
    return dx + dy;
}

void divergence(const double* gx, const double* gy, double* out, size_t w, size_t hgt) {
    const __m256d half = _mm256_set1_pd(0.5);
    for (size_t v = 0; v < hgt; ++v) {
        bool interior_row = hgt > 2 && v > 0 && v + 1 < hgt;
        size_t u = 0;
        if (w > 0) {
            out[v * w] = div_at(gx, gy, w, hgt, 0, v);
            u = 1;
        }
        if (interior_row) {
            for (; u + 4 < w; u += 4) {
                size_t i = v * w + u;
                __m256d dx = _mm256_mul_pd(half, _mm256_sub_pd(_mm256_loadu_pd(gx + i + 1),
                                                               _mm256_loadu_pd(gx + i - 1)));
                __m256d dy = _mm256_mul_pd(half, _mm256_sub_pd(_mm256_loadu_pd(gy + i + w),
                                                               _mm256_loadu_pd(gy + i - w)));
                _mm256_storeu_pd(out + i, _mm256_add_pd(dx, dy));
            }
        }
        for (; u < w; ++u) out[v * w + u] = div_at(gx, gy, w, hgt, u, v);
    }
}

const KernelTable kTable = {
    gemm_bias, gemm_at_b_acc, gemm_a_bt, column_sum_acc,
    tanh_backward, adam_step, laplacian5, divergence,
};

}  // namespace

const KernelTable* table() { return &kTable; }

}  // namespace t360::simd::avx2
