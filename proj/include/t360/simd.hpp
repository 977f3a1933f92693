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

// Data-parallel double-precision kernels behind the MLP and the Poisson
// stencils. Every kernel has a scalar reference in `generic` and optional
// vector variants; all variants produce bitwise-identical results, so the
// level chosen at runtime never changes a trained model or a height map.
//
// Reductions (dot products) accumulate in four interleaved partial sums
// combined as (s0 + s1) + (s2 + s3), then the tail in order. The scalar
// reference follows the same association so the AVX2 lanes match it exactly.

#pragma once

#include <cstddef>
#include <string>

namespace t360::simd {

enum class Level { Generic, Avx2 };

/// C[m x n] = A[m x k] * B[k x n] + bias[n] (row-major, bias may be null).
using GemmBiasFn = void (*)(const double* a, const double* b, const double* bias, double* c,
                            size_t m, size_t k, size_t n);
/// G[k x n] += A[m x k]^T * D[m x n].
using GemmAtBAccFn = void (*)(const double* a, const double* d, double* g, size_t m, size_t k,
                              size_t n);
/// O[m x k] = D[m x n] * B[k x n]^T.
using GemmABtFn = void (*)(const double* d, const double* b, double* o, size_t m, size_t k,
                           size_t n);
/// out[n] += sum over rows of D[m x n].
using ColumnSumAccFn = void (*)(const double* d, double* out, size_t m, size_t n);
/// d[i] *= 1 - h[i]^2 (tanh derivative expressed through the activation).
using TanhBackwardFn = void (*)(double* d, const double* h, size_t n);
/// Bias-corrected Adam step on n parameters.
using AdamStepFn = void (*)(double* p, const double* g, double* m, double* v, size_t n,
                            double lr, double beta1, double beta2, double eps, double bc1,
                            double bc2);
/// 5-point Laplacian of h (W x H) with zero outside the grid.
using Laplacian5Fn = void (*)(const double* h, double* out, size_t w, size_t hgt);
/// Central-difference divergence of (gx, gy), one-sided on the grid edges.
using DivergenceFn = void (*)(const double* gx, const double* gy, double* out, size_t w,
                              size_t hgt);

struct KernelTable {
    GemmBiasFn gemm_bias;
    GemmAtBAccFn gemm_at_b_acc;
    GemmABtFn gemm_a_bt;
    ColumnSumAccFn column_sum_acc;
    TanhBackwardFn tanh_backward;
    AdamStepFn adam_step;
    Laplacian5Fn laplacian5;
    DivergenceFn divergence;
};

namespace generic {
extern const KernelTable table;
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
/// Null entries when the library was built without the AVX2 translation unit.
const KernelTable* table();
}
#endif

/// Best level the running CPU supports (ignores overrides).
Level detect_level();
/// Active level: detect_level() unless overridden by set_level() or the
/// T360_SIMD environment variable ("generic" / "avx2").
Level active_level();
/// Forces a level; throws if the CPU or the build cannot provide it.
void set_level(Level level);
bool level_available(Level level);
std::string level_name(Level level);

/// Kernel table for the active level.
const KernelTable& kernels();
const KernelTable& kernels(Level level);

}  // namespace t360::simd
