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

// Gradient integration. Heights live on every pixel of a W x H grid with an
// implicit ring of zeros just outside it (Dirichlet), and the 5-point
// Laplacian is diagonalized by the type-I discrete sine transform.

#pragma once

#include "t360/common.hpp"

namespace t360::poisson {

enum class DstBackend { Fftw, Direct };

/// Central-difference divergence of a 2-channel field (one-sided on the grid
/// edges).
Map divergence(const Map& field);

/// 5-point Laplacian with zeros outside the grid.
Map laplacian(const Map& h);

/// Solves laplacian(h) = b.
Map solve_fast(const Map& b, DstBackend backend = DstBackend::Fftw);
/// Integrates a 2-channel gradient field over its whole grid.
Map solve_field(const Map& field, DstBackend backend = DstBackend::Fftw);

/// Type-I DST of each row (in place, unnormalized: y_k = 2 sum x_j sin(pi (j+1)(k+1)/(n+1))).
void dst1_rows(Map& m, DstBackend backend);

/// Per 8-connected component of `mask`: zero the gradients outside the
/// component, integrate over its bounding box padded by 2 px (clipped to the
/// grid) and keep the heights on the component.
Map solve_masked(const Map& field, const Mask& mask);

struct InpaintResult {
    Map field;
    Mask flagged;     // occluded pixels left at zero because no short run bridges them
    int flagged_count = 0;
};

/// Fills occluded pixels by linear interpolation along the shorter of the
/// horizontal and vertical occluded runs through them. Runs longer than
/// `max_band` px, or open on both ends, are flagged and zero-filled.
InpaintResult inpaint_occluded(const Map& field, const Mask& occlusion, int max_band = 15);

/// Lengths of the horizontal and vertical occluded runs through each pixel
/// (0 for non-occluded pixels); helper shared with ROI extraction.
struct RunInfo {
    int left = -1, right = -1;  // nearest non-occluded columns (-1: none)
    int up = -1, down = -1;     // nearest non-occluded rows (-1: none)
};
RunInfo occlusion_runs(const Mask& occlusion, int u, int v);

}  // namespace t360::poisson
