#pragma once

#include <cmath>
#include <optional>

namespace shelfscan {

/// Membership tolerance for intersection tests, in meters.
inline constexpr double kGeometryEpsilon = 1e-9;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) noexcept { return {s * v.x, s * v.y}; }
    friend constexpr Vec2 operator*(Vec2 v, double s) noexcept { return {s * v.x, s * v.y}; }
    friend constexpr Vec2 operator/(Vec2 v, double s) noexcept { return {v.x / s, v.y / s}; }
    friend constexpr bool operator==(Vec2, Vec2) noexcept = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }
inline Vec2 unit_from_angle(double theta) noexcept { return {std::cos(theta), std::sin(theta)}; }

/// Rotates `v` counterclockwise by `angle` radians.
inline Vec2 rotate(Vec2 v, double angle) noexcept {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta) noexcept;

struct Segment2D {
    Vec2 a;
    Vec2 b;

    double length() const noexcept { return norm(b - a); }
    friend constexpr bool operator==(const Segment2D&, const Segment2D&) noexcept = default;
};

/// Casts the half-line `origin + lambda * direction` (lambda > 0) against
/// `segment` and returns the smallest positive lambda at which it touches the
/// segment, endpoints included. A hit at lambda <= kGeometryEpsilon does not
/// count, so a ray starting on the segment never reports it. For a collinear
/// segment the nearest point of the overlap is returned when it lies strictly
/// ahead of the origin; a collinear segment containing the origin reports no hit.
///
/// `direction` is renormalized before use.
std::optional<double> ray_segment_intersection(Vec2 origin, Vec2 direction, const Segment2D& segment) noexcept;

} // namespace shelfscan
