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

// Revolved sensor skins. World frame: origin at the base center, z up, mm.
// A skin is described by its meridian profile r(z), z in [0, H].

#pragma once

#include "t360/common.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace t360 {

enum class ProfileKind { CylinderHemisphere, Cone, Spline };

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& s);

struct GeometryParams {
    ProfileKind kind = ProfileKind::CylinderHemisphere;
    double radius = 10.0;           // cylinder radius, cone base radius
    double cylinder_height = 15.0;  // cylinder_hemisphere only
    double height = 25.0;           // cone only; derived for the other kinds
    std::vector<Vec2> control_points;  // spline only: (z, r) pairs
    double gel_thickness = 1.75;
    int angular_resolution = 128;
    int axial_resolution = 96;
};

struct SurfacePoint {
    Vec3 position;
    Vec3 normal;  // outward, unit
    double z = 0.0;
    double phi = 0.0;
};

struct ProbeBall {
    Vec3 center = Vec3::Zero();
    double radius = 2.0;
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
};

/// Immutable revolved surface. Cheap to copy.
class SensorGeometry {
public:
    static SensorGeometry make(const GeometryParams& params);

    const GeometryParams& params() const { return params_; }
    ProfileKind kind() const { return params_.kind; }
    double height() const { return height_; }
    double gel_thickness() const { return params_.gel_thickness; }
    bool closed_tip() const { return closed_tip_; }
    double max_radius() const { return max_radius_; }

    /// r(z); zero above the tip. Throws outside [0, H].
    double radius_at(double z) const;
    /// Same as radius_at but returns 0 outside [0, H] instead of throwing.
    double radius_or_zero(double z) const;
    /// Unit outward normal of the meridian curve as (n_rho, n_z).
    Vec2 meridian_normal(double z) const;

    SurfacePoint surface_point(double z, double phi) const;

    /// Inside the solid of revolution (0 <= z <= H, rho < r(z)).
    bool contains(const Vec3& p) const;
    /// Unsigned distance to the skin (meridian polyline approximation).
    double distance_to_surface(const Vec3& p) const;
    /// Surface area above `z_min` (full revolution).
    double area(double z_min = 0.0) const;
    /// Meridian arc length from z = 0 to z.
    double arc_length_at(double z) const;

    TriangleMesh mesh() const;
    void write_obj(std::ostream& os) const;

    /// Stable textual description used for provenance hashes.
    std::string canonical() const;

    /// Dense meridian polyline (z ascending), shared by area and distance queries.
    struct MeridianSample {
        double z, r, s, area;  // s: arc length from base, area: cumulative from base
    };
    const std::vector<MeridianSample>& meridian() const { return meridian_; }

private:
    SensorGeometry() = default;
    double eval_spline(double z) const;

    GeometryParams params_;
    double height_ = 0.0;
    bool closed_tip_ = true;
    double max_radius_ = 0.0;
    std::vector<double> knots_z_, knots_r_, knots_m_;  // monotone cubic Hermite data
    std::vector<MeridianSample> meridian_;
};

/// Surface points stratified by area above a base margin. Rows follow equal
/// meridian arc length, cells within a row split the azimuth, and jitter is
/// confined to the middle half of every cell. Deterministic for a seed.
std::vector<SurfacePoint> sample_surface(const SensorGeometry& geom, int n, uint64_t seed,
                                         double base_margin = 2.0);

void write_probe_plan_csv(std::ostream& os, const std::vector<SurfacePoint>& plan);

/// Rigid-ball penetration of the skin. Surface points inside the open ball are
/// pushed along their inward normal onto the far side of the ball.
class Indentation {
public:
    Indentation(const SensorGeometry& geom, const ProbeBall& ball);

    const ProbeBall& ball() const { return ball_; }
    bool in_contact(const SurfacePoint& p) const;
    /// Displacement along -normal, zero outside the ball.
    double displacement(const SurfacePoint& p) const;
    Vec3 deformed(const SurfacePoint& p) const;

private:
    ProbeBall ball_;
};

Indentation indent(const SensorGeometry& geom, const ProbeBall& ball);

/// Ball that presses `depth` mm into the skin along the inward normal at `p`
/// (its deepest point is p - depth * n).
ProbeBall press_ball(const SurfacePoint& p, double depth, double radius);

}  // namespace t360
