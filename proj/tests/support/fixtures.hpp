#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "shelfscan/kinematics.hpp"
#include "shelfscan/store_layout.hpp"

namespace shelfscan::testing {

inline constexpr double kFacingDown = -std::numbers::pi / 2.0;

// Shelf 1 with face (0,0)-(2,0) facing +y.
inline StoreLayout one_shelf_layout(std::string store_id = "s") {
    StoreLayout layout;
    layout.store_id = std::move(store_id);
    layout.shelves.push_back({1, {{0.0, 0.0}, {2.0, 0.0}}, {0.0, 1.0}});
    validate_layout(layout);
    return layout;
}

// Shelves 1 and 2 facing +y, side by side along the x axis.
inline StoreLayout two_shelf_layout() {
    StoreLayout layout;
    layout.store_id = "s";
    layout.shelves.push_back({1, {{0.0, 0.0}, {2.0, 0.0}}, {0.0, 1.0}});
    layout.shelves.push_back({2, {{3.0, 0.0}, {5.0, 0.0}}, {0.0, 1.0}});
    validate_layout(layout);
    return layout;
}

inline Trajectory make_trajectory(const std::vector<Vec2>& points, const std::vector<double>& thetas,
                                  std::string id = "t1", std::string store_id = "s") {
    Trajectory t;
    t.trajectory_id = id;
    t.source_id = id;
    t.store_id = std::move(store_id);
    for (std::size_t k = 0; k < points.size(); ++k) {
        t.samples.push_back({static_cast<double>(k) / 10.0, points[k], thetas[k]});
    }
    return t;
}

inline Trajectory standing(Vec2 p, double theta, std::size_t n, std::string id = "t1", std::string store_id = "s") {
    return make_trajectory(std::vector<Vec2>(n, p), std::vector<double>(n, theta), std::move(id), std::move(store_id));
}

inline Trajectory walking(Vec2 start, Vec2 velocity, double theta, std::size_t n, std::string id = "t1") {
    std::vector<Vec2> points;
    for (std::size_t k = 0; k < n; ++k) {
        points.push_back(start + (static_cast<double>(k) / 10.0) * velocity);
    }
    return make_trajectory(points, std::vector<double>(n, theta), std::move(id));
}

} // namespace shelfscan::testing
