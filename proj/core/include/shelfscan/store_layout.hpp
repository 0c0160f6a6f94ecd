#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shelfscan/geometry.hpp"

namespace shelfscan {

/// Interactive shelf face. Ids run 1..n_s.
struct Shelf {
    int id = 0;
    Segment2D face;
    Vec2 normal;
};

/// Vision-blocking segment that is not an interactive face (shelf backs,
/// walls, pillars). Ids run n_s+1..n_s+n_o.
struct Obstacle {
    int id = 0;
    Segment2D segment;
};

/// Entrance/exit area. Metadata only; detection never reads it.
struct Portal {
    std::string id;
    Segment2D segment;
    bool entrance = true;
    bool exit = true;
};

struct StoreLayout {
    std::string store_id;
    std::vector<Shelf> shelves;
    std::vector<Obstacle> obstacles;
    std::vector<Portal> portals;
    std::optional<double> area_m2;

    int shelf_count() const noexcept { return static_cast<int>(shelves.size()); }
};

/// One entry of the combined shelf+obstacle segment list.
struct IndexedSegment {
    int index = 0;
    Segment2D segment;
    bool is_shelf_face = false;

    friend bool operator==(const IndexedSegment&, const IndexedSegment&) = default;
};

/// Checks every layout invariant and renormalizes shelf normals that are
/// within 1e-6 of unit length. Throws Error(Validation) naming the offending
/// element otherwise.
void validate_layout(StoreLayout& layout);

/// Shelves first (indices 1..n_s), then obstacles (n_s+1..).
std::vector<IndexedSegment> all_segments(const StoreLayout& layout);

StoreLayout parse_layout(std::string_view json_text);
StoreLayout load_layout(const std::filesystem::path& path);
std::string format_layout(const StoreLayout& layout);
void save_layout(const StoreLayout& layout, const std::filesystem::path& path);

} // namespace shelfscan
