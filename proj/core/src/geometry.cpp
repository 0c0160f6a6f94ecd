#include "shelfscan/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace shelfscan {

double wrap_angle(double theta) noexcept {
    constexpr double pi = std::numbers::pi;
    if (theta > -pi && theta <= pi) {
        return theta;
    }
    double wrapped = std::remainder(theta, 2.0 * pi);
    if (wrapped <= -pi) {
        wrapped += 2.0 * pi;
    }
    return wrapped;
}

std::optional<double> ray_segment_intersection(Vec2 origin, Vec2 direction, const Segment2D& segment) noexcept {
    const double dir_len = norm(direction);
    if (!(dir_len > 0.0)) {
        return std::nullopt;
    }
    const Vec2 d = direction / dir_len;
    const Vec2 edge = segment.b - segment.a;
    const double edge_len = norm(edge);
    const Vec2 to_a = segment.a - origin;
    const double denom = cross(d, edge);

    // |denom| = edge_len * sin(angle between ray and segment).
    if (std::abs(denom) > kGeometryEpsilon * std::max(edge_len, 1.0) * 1e-3) {
        const double lambda = cross(to_a, edge) / denom;
        const double mu = cross(to_a, d) / denom;
        const double mu_tol = edge_len > 0.0 ? kGeometryEpsilon / edge_len : 0.0;
        if (mu < -mu_tol || mu > 1.0 + mu_tol) {
            return std::nullopt;
        }
        if (lambda <= kGeometryEpsilon) {
            return std::nullopt;
        }
        return lambda;
    }

    // Parallel. Only a collinear segment can be hit.
    if (std::abs(cross(d, to_a)) > kGeometryEpsilon) {
        return std::nullopt;
    }
    const double ta = dot(to_a, d);
    const double tb = dot(segment.b - origin, d);
    const double near = std::min(ta, tb);
    if (near <= kGeometryEpsilon) {
        return std::nullopt;
    }
    return near;
}

} // namespace shelfscan
