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

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace t360 {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ErrorCode {
    InvalidArgument,
    OutOfRange,
    Degenerate,
    NoConvergence,
    NonFinite,
    Io,
    Parse,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

/// Pixel rectangle [x, x + w) x [y, y + h).
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool empty() const { return w <= 0 || h <= 0; }
    bool contains(int u, int v) const { return u >= x && u < x + w && v >= y && v < y + h; }
    int area() const { return empty() ? 0 : w * h; }
    Rect intersect(const Rect& o) const;
    Rect unite(const Rect& o) const;
    Rect pad(int n) const { return {x - n, y - n, w + 2 * n, h + 2 * n}; }
    bool operator==(const Rect&) const = default;
};

/// Dense row-major W x H x C array.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, int channels = 1, T fill = T{})
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<size_t>(width) * height * channels, fill) {
        if (width < 0 || height < 0 || channels <= 0)
            fail(ErrorCode::InvalidArgument, "grid dimensions must be non-negative");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    Rect bounds() const { return {0, 0, width_, height_}; }
    bool same_shape(const Grid& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }

    T& operator()(int u, int v, int c = 0) { return data_[index(u, v, c)]; }
    const T& operator()(int u, int v, int c = 0) const { return data_[index(u, v, c)]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    /// Copy of the sub-rectangle r (must lie inside the grid).
    Grid crop(const Rect& r) const {
        Grid out(r.w, r.h, channels_);
        for (int v = 0; v < r.h; ++v)
            for (int u = 0; u < r.w; ++u)
                for (int c = 0; c < channels_; ++c) out(u, v, c) = (*this)(r.x + u, r.y + v, c);
        return out;
    }

    /// Writes `src` into this grid with its top-left corner at (x, y).
    void paste(const Grid& src, int x, int y) {
        for (int v = 0; v < src.height(); ++v)
            for (int u = 0; u < src.width(); ++u)
                for (int c = 0; c < channels_; ++c) (*this)(x + u, y + v, c) = src(u, v, c);
    }

    bool operator==(const Grid&) const = default;

private:
    size_t index(int u, int v, int c) const {
        return (static_cast<size_t>(v) * width_ + u) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

using Image = Grid<float>;     // intensities, channel order R, G, B
using Map = Grid<double>;      // scalar or vector fields in physical units
using Mask = Grid<uint8_t>;    // 0 / 1

int count(const Mask& m);
Mask mask_and(const Mask& a, const Mask& b);
Mask mask_andnot(const Mask& a, const Mask& b);
Mask mask_or(const Mask& a, const Mask& b);
Mask dilate(const Mask& m, int iterations = 1);
Mask erode(const Mask& m, int iterations = 1);
Rect bounding_box(const Mask& m);
double iou(const Mask& a, const Mask& b);

/// 8-connected component labels (0 = background, components numbered from 1
/// in raster order of their first pixel). Returns the number of components.
int label_components(const Mask& m, Grid<int>& labels);

/// Seeded generator whose stream does not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed);
    uint64_t next_u64();
    double uniform();                        // [0, 1)
    double uniform(double lo, double hi);    // [lo, hi)
    double normal();                         // N(0, 1)
    size_t index(size_t n);                  // [0, n)

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// 64-bit FNV-1a, used for provenance hashes in manifests.
uint64_t fnv1a(const std::string& bytes, uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(uint64_t v);

}  // namespace t360
