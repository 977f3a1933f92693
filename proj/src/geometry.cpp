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

#include "t360/geometry.hpp"

#include "t360/io.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace t360 {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kMeridianSamples = 4096;
}  // namespace

std::string to_string(ProfileKind kind) {
    switch (kind) {
    case ProfileKind::CylinderHemisphere: return "cylinder_hemisphere";
    case ProfileKind::Cone: return "cone";
    case ProfileKind::Spline: return "spline";
    }
    return "?";
}

ProfileKind profile_kind_from_string(const std::string& s) {
    if (s == "cylinder_hemisphere") return ProfileKind::CylinderHemisphere;
    if (s == "cone") return ProfileKind::Cone;
    if (s == "spline") return ProfileKind::Spline;
    fail(ErrorCode::Parse, "unknown geometry kind '" + s + "'");
}

SensorGeometry SensorGeometry::make(const GeometryParams& params) {
    SensorGeometry g;
    g.params_ = params;
    if (params.gel_thickness <= 0.0) fail(ErrorCode::InvalidArgument, "gel_thickness must be positive");
    if (params.angular_resolution < 3 || params.axial_resolution < 2)
        fail(ErrorCode::InvalidArgument, "mesh resolution too small");

    switch (params.kind) {
    case ProfileKind::CylinderHemisphere:
        if (params.radius <= 0.0 || params.cylinder_height <= 0.0)
            fail(ErrorCode::InvalidArgument, "cylinder_hemisphere needs positive radius and cylinder_height");
        g.height_ = params.cylinder_height + params.radius;
        g.max_radius_ = params.radius;
        break;
    case ProfileKind::Cone:
        if (params.radius <= 0.0 || params.height <= 0.0)
            fail(ErrorCode::InvalidArgument, "cone needs positive radius and height");
        g.height_ = params.height;
        g.max_radius_ = params.radius;
        break;
    case ProfileKind::Spline: {
        const auto& cp = params.control_points;
        if (cp.size() < 2) fail(ErrorCode::InvalidArgument, "spline needs at least two control points");
        if (cp.front().x() != 0.0) fail(ErrorCode::InvalidArgument, "spline must start at z = 0");
        for (size_t i = 0; i < cp.size(); ++i) {
            if (i > 0 && !(cp[i].x() > cp[i - 1].x()))
                fail(ErrorCode::InvalidArgument, "spline control points must have strictly increasing z");
            bool tip = i + 1 == cp.size();
            if (!tip && !(cp[i].y() > 0.0))
                fail(ErrorCode::InvalidArgument, "spline radius must be positive below the tip");
        }
        if (cp.back().y() != 0.0)
            fail(ErrorCode::InvalidArgument, "spline profile must close at the tip (r = 0 at the last point)");
        const size_t n = cp.size();
        g.knots_z_.resize(n);
        g.knots_r_.resize(n);
        g.knots_m_.assign(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            g.knots_z_[i] = cp[i].x();
            g.knots_r_[i] = cp[i].y();
        }
        // Fritsch-Carlson monotone cubic slopes with the shape-preserving
        // three-point end condition.
        std::vector<double> h(n - 1), d(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) {
            h[i] = g.knots_z_[i + 1] - g.knots_z_[i];
            d[i] = (g.knots_r_[i + 1] - g.knots_r_[i]) / h[i];
        }
        if (n == 2) {
            g.knots_m_[0] = g.knots_m_[1] = d[0];
        } else {
            for (size_t i = 1; i + 1 < n; ++i) {
                if (d[i - 1] * d[i] <= 0.0) {
                    g.knots_m_[i] = 0.0;
                } else {
                    double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
                    g.knots_m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            auto edge = [](double h0, double h1, double d0, double d1) {
                double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
                if (std::signbit(m) != std::signbit(d0) || m == 0.0) return 0.0;
                if (std::signbit(d0) != std::signbit(d1) && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
                return m;
            };
            g.knots_m_[0] = edge(h[0], h[1], d[0], d[1]);
            g.knots_m_[n - 1] = edge(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
        g.height_ = g.knots_z_.back();
        break;
    }
    }

    // Meridian polyline, denser toward the tip where closed profiles turn.
    g.meridian_.resize(kMeridianSamples + 1);
    double s = 0.0, area = 0.0;
    for (int i = 0; i <= kMeridianSamples; ++i) {
        double t = static_cast<double>(i) / kMeridianSamples;
        double z = i == kMeridianSamples ? g.height_ : g.height_ * (1.0 - (1.0 - t) * (1.0 - t));
        double r = g.radius_at(z);
        if (i > 0) {
            const auto& prev = g.meridian_[i - 1];
            double ds = std::hypot(z - prev.z, r - prev.r);
            s += ds;
            area += kPi * (r + prev.r) * ds;
        }
        g.meridian_[i] = {z, r, s, area};
        g.max_radius_ = std::max(g.max_radius_, r);
    }
    return g;
}

double SensorGeometry::eval_spline(double z) const {
    const size_t n = knots_z_.size();
    size_t k = std::upper_bound(knots_z_.begin(), knots_z_.end(), z) - knots_z_.begin();
    k = std::clamp<size_t>(k, 1, n - 1) - 1;
    double h = knots_z_[k + 1] - knots_z_[k];
    double t = (z - knots_z_[k]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * knots_r_[k] + h10 * h * knots_m_[k] + h01 * knots_r_[k + 1] + h11 * h * knots_m_[k + 1];
}

double SensorGeometry::radius_at(double z) const {
    if (!(z >= 0.0 && z <= height_)) fail(ErrorCode::OutOfRange, "z outside [0, H]");
    switch (params_.kind) {
    case ProfileKind::CylinderHemisphere: {
        double R = params_.radius, hc = params_.cylinder_height;
        if (z <= hc) return R;
        double dz = z - hc;
        return std::sqrt(std::max(0.0, R * R - dz * dz));
    }
    case ProfileKind::Cone:
        return params_.radius * (1.0 - z / height_);
    case ProfileKind::Spline:
        return std::max(0.0, eval_spline(z));
    }
    return 0.0;
}

double SensorGeometry::radius_or_zero(double z) const {
    if (!(z >= 0.0 && z <= height_)) return 0.0;
    return radius_at(z);
}

Vec2 SensorGeometry::meridian_normal(double z) const {
    if (!(z >= 0.0 && z <= height_)) fail(ErrorCode::OutOfRange, "z outside [0, H]");
    if (z == height_ && closed_tip_) return {0.0, 1.0};
    switch (params_.kind) {
    case ProfileKind::CylinderHemisphere: {
        double hc = params_.cylinder_height;
        if (z <= hc) return {1.0, 0.0};
        return Vec2(radius_at(z), z - hc) / params_.radius;
    }
    case ProfileKind::Cone:
        return Vec2(height_, params_.radius).normalized();
    case ProfileKind::Spline: {
        const size_t n = knots_z_.size();
        size_t k = std::upper_bound(knots_z_.begin(), knots_z_.end(), z) - knots_z_.begin();
        k = std::clamp<size_t>(k, 1, n - 1) - 1;
        double h = knots_z_[k + 1] - knots_z_[k];
        double t = (z - knots_z_[k]) / h;
        double t2 = t * t;
        double dr = (6 * t2 - 6 * t) / h * knots_r_[k] + (3 * t2 - 4 * t + 1) * knots_m_[k] +
                    (-6 * t2 + 6 * t) / h * knots_r_[k + 1] + (3 * t2 - 2 * t) * knots_m_[k + 1];
        return Vec2(1.0, -dr).normalized();
    }
    }
    return {1.0, 0.0};
}

SurfacePoint SensorGeometry::surface_point(double z, double phi) const {
    double r = radius_at(z);
    Vec2 mn = meridian_normal(z);
    SurfacePoint p;
    p.z = z;
    p.phi = phi;
    double c = std::cos(phi), s = std::sin(phi);
    p.position = Vec3(r * c, r * s, z);
    p.normal = Vec3(mn.x() * c, mn.x() * s, mn.y()).normalized();
    return p;
}

bool SensorGeometry::contains(const Vec3& p) const {
    if (!(p.z() >= 0.0 && p.z() <= height_)) return false;
    return std::hypot(p.x(), p.y()) < radius_at(p.z());
}

double SensorGeometry::distance_to_surface(const Vec3& p) const {
    double rho = std::hypot(p.x(), p.y());
    Vec2 q(rho, p.z());
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < meridian_.size(); ++i) {
        Vec2 a(meridian_[i - 1].r, meridian_[i - 1].z), b(meridian_[i].r, meridian_[i].z);
        Vec2 ab = b - a;
        double len2 = ab.squaredNorm();
        double t = len2 > 0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (a + t * ab - q).norm());
    }
    return best;
}

namespace {

template <typename Key>
double interp_table(const std::vector<SensorGeometry::MeridianSample>& m, double key, Key key_of,
                    double SensorGeometry::MeridianSample::*field) {
    auto it = std::lower_bound(m.begin(), m.end(), key,
                               [&](const SensorGeometry::MeridianSample& a, double k) { return key_of(a) < k; });
    if (it == m.begin()) return m.front().*field;
    if (it == m.end()) return m.back().*field;
    const auto& b = *it;
    const auto& a = *(it - 1);
    double ka = key_of(a), kb = key_of(b);
    double t = kb > ka ? (key - ka) / (kb - ka) : 0.0;
    return a.*field + t * (b.*field - a.*field);
}

auto by_z = [](const SensorGeometry::MeridianSample& a) { return a.z; };
auto by_s = [](const SensorGeometry::MeridianSample& a) { return a.s; };
auto by_area = [](const SensorGeometry::MeridianSample& a) { return a.area; };

}  // namespace

double SensorGeometry::area(double z_min) const {
    double below = interp_table(meridian_, z_min, by_z, &MeridianSample::area);
    return meridian_.back().area - below;
}

double SensorGeometry::arc_length_at(double z) const {
    return interp_table(meridian_, z, by_z, &MeridianSample::s);
}

TriangleMesh SensorGeometry::mesh() const {
    TriangleMesh m;
    const int na = params_.angular_resolution;
    const int nz = params_.axial_resolution;
    // Rings at z_j for j < nz use the same tip-dense spacing as the meridian.
    for (int j = 0; j < nz; ++j) {
        double t = static_cast<double>(j) / nz;
        double z = height_ * (1.0 - (1.0 - t) * (1.0 - t));
        double r = radius_at(z);
        for (int i = 0; i < na; ++i) {
            double phi = 2.0 * kPi * i / na;
            m.vertices.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
        }
    }
    int apex = static_cast<int>(m.vertices.size());
    m.vertices.emplace_back(0.0, 0.0, height_);
    for (int j = 0; j + 1 < nz; ++j) {
        for (int i = 0; i < na; ++i) {
            int a = j * na + i, b = j * na + (i + 1) % na;
            int c = (j + 1) * na + i, d = (j + 1) * na + (i + 1) % na;
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    }
    for (int i = 0; i < na; ++i) {
        int a = (nz - 1) * na + i, b = (nz - 1) * na + (i + 1) % na;
        m.faces.push_back({a, b, apex});
    }
    return m;
}

void SensorGeometry::write_obj(std::ostream& os) const {
    TriangleMesh m = mesh();
    os << "# revolved sensor skin, units mm\n";
    for (const auto& v : m.vertices) os << "v " << io::num(v.x()) << " " << io::num(v.y()) << " " << io::num(v.z()) << "\n";
    for (const auto& f : m.faces) os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

std::string SensorGeometry::canonical() const {
    std::ostringstream ss;
    ss << to_string(params_.kind) << ";R=" << io::num(params_.radius) << ";Hc=" << io::num(params_.cylinder_height)
       << ";H=" << io::num(height_) << ";gel=" << io::num(params_.gel_thickness) << ";cp=";
    for (const auto& c : params_.control_points) ss << io::num(c.x()) << "," << io::num(c.y()) << ";";
    return ss.str();
}

std::vector<SurfacePoint> sample_surface(const SensorGeometry& geom, int n, uint64_t seed, double base_margin) {
    if (n < 1) fail(ErrorCode::InvalidArgument, "sample_surface needs N >= 1");
    if (base_margin < 0.0 || base_margin >= geom.height()) fail(ErrorCode::InvalidArgument, "base margin outside the profile");
    const auto& mer = geom.meridian();
    const double s0 = geom.arc_length_at(base_margin);
    const double s_end = mer.back().s;
    const double length = s_end - s0;
    const double a0 = interp_table(mer, s0, by_s, &SensorGeometry::MeridianSample::area);
    const double total_area = mer.back().area - a0;
    const double cell = std::sqrt(total_area / n);
    const int rows = std::clamp(static_cast<int>(std::floor(length / cell)), 1, n);

    // Row areas and largest-remainder allocation of the N points.
    std::vector<double> row_lo(rows), row_area(rows);
    for (int i = 0; i < rows; ++i) {
        double sa = s0 + length * i / rows, sb = s0 + length * (i + 1) / rows;
        double aa = interp_table(mer, sa, by_s, &SensorGeometry::MeridianSample::area);
        double ab = i + 1 == rows ? mer.back().area : interp_table(mer, sb, by_s, &SensorGeometry::MeridianSample::area);
        row_lo[i] = aa;
        row_area[i] = ab - aa;
    }
    std::vector<int> counts(rows);
    std::vector<std::pair<double, int>> remainders(rows);
    int assigned = 0;
    for (int i = 0; i < rows; ++i) {
        double exact = n * row_area[i] / total_area;
        counts[i] = static_cast<int>(std::floor(exact));
        assigned += counts[i];
        remainders[i] = {exact - counts[i], i};
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (int k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % rows].second];

    Rng rng(seed);
    std::vector<SurfacePoint> out;
    out.reserve(n);
    constexpr double kGolden = 0.6180339887498949;
    for (int i = 0; i < rows; ++i) {
        const int c = counts[i];
        if (c == 0) continue;
        const double width = 2.0 * kPi / c;
        const double offset = std::fmod(i * kGolden, 1.0) * width;
        for (int j = 0; j < c; ++j) {
            double fu = 0.25 + 0.5 * rng.uniform();
            double fa = 0.25 + 0.5 * rng.uniform();
            double phi = std::fmod(offset + (j + fu) * width, 2.0 * kPi);
            double target_area = row_lo[i] + fa * row_area[i];
            double z = interp_table(mer, target_area, by_area, &SensorGeometry::MeridianSample::z);
            z = std::clamp(z, base_margin, geom.height());
            out.push_back(geom.surface_point(z, phi));
        }
    }
    return out;
}

void write_probe_plan_csv(std::ostream& os, const std::vector<SurfacePoint>& plan) {
    os << "index,x_mm,y_mm,z_mm,nx,ny,nz\n";
    for (size_t i = 0; i < plan.size(); ++i) {
        const auto& p = plan[i];
        os << i << "," << io::num(p.position.x()) << "," << io::num(p.position.y()) << "," << io::num(p.position.z())
           << "," << io::num(p.normal.x()) << "," << io::num(p.normal.y()) << "," << io::num(p.normal.z()) << "\n";
    }
}

Indentation::Indentation(const SensorGeometry& geom, const ProbeBall& ball) : ball_(ball) {
    if (!(ball.radius > 0.0)) fail(ErrorCode::InvalidArgument, "ball radius must be positive");
    if (geom.contains(ball.center) && geom.distance_to_surface(ball.center) >= ball.radius)
        fail(ErrorCode::InvalidArgument, "ball lies fully inside the sensor body (no free surface cap)");
}

bool Indentation::in_contact(const SurfacePoint& p) const {
    return (p.position - ball_.center).squaredNorm() < ball_.radius * ball_.radius;
}

double Indentation::displacement(const SurfacePoint& p) const {
    Vec3 w = p.position - ball_.center;
    double w2 = w.squaredNorm(), r2 = ball_.radius * ball_.radius;
    if (w2 >= r2) return 0.0;
    // Far root of |w - s n|^2 = R^2 along the inward direction -n.
    double b = -w.dot(p.normal);
    return -b + std::sqrt(b * b - w2 + r2);
}

Vec3 Indentation::deformed(const SurfacePoint& p) const { return p.position - displacement(p) * p.normal; }

Indentation indent(const SensorGeometry& geom, const ProbeBall& ball) { return Indentation(geom, ball); }

ProbeBall press_ball(const SurfacePoint& p, double depth, double radius) {
    return {p.position + (radius - depth) * p.normal, radius};
}

}  // namespace t360
