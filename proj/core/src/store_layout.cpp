#include "shelfscan/store_layout.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json_util.hpp"

namespace shelfscan {

namespace {

using detail::json;

constexpr double kMinSegmentLength = 1e-9;
constexpr double kNormalLengthTolerance = 1e-6;
constexpr double kPerpendicularTolerance = 1e-6;

void check_segment(const Segment2D& s, const std::string& what) {
    if (!std::isfinite(s.a.x) || !std::isfinite(s.a.y) || !std::isfinite(s.b.x) || !std::isfinite(s.b.y)) {
        throw Error(ErrorKind::Validation, "non-finite coordinate", what);
    }
    if (s.length() <= kMinSegmentLength) {
        throw Error(ErrorKind::Validation, "degenerate segment", what);
    }
}

} // namespace

void validate_layout(StoreLayout& layout) {
    if (layout.shelves.empty()) {
        throw Error(ErrorKind::Validation, "layout has no shelves", layout.store_id);
    }
    const int n_s = layout.shelf_count();
    std::vector<bool> seen(static_cast<std::size_t>(n_s) + 1, false);
    for (Shelf& shelf : layout.shelves) {
        const std::string what = "shelf " + std::to_string(shelf.id);
        if (shelf.id < 1 || shelf.id > n_s) {
            throw Error(ErrorKind::Validation, "shelf ids must be exactly 1..n_s", what);
        }
        if (seen[static_cast<std::size_t>(shelf.id)]) {
            throw Error(ErrorKind::Validation, "duplicate shelf id", what);
        }
        seen[static_cast<std::size_t>(shelf.id)] = true;
        check_segment(shelf.face, what);

        const double len = norm(shelf.normal);
        if (!std::isfinite(len) || std::abs(len - 1.0) > kNormalLengthTolerance) {
            throw Error(ErrorKind::Validation, "normal is not unit length", what);
        }
        shelf.normal = shelf.normal / len;
        const Vec2 edge = shelf.face.b - shelf.face.a;
        // Angle between normal and face direction must be 90 degrees.
        const double angle_off = std::asin(std::min(1.0, std::abs(dot(shelf.normal, edge)) / norm(edge)));
        if (angle_off > kPerpendicularTolerance) {
            throw Error(ErrorKind::Validation, "normal not perpendicular to face", what);
        }
    }
    // Shelves are indexed by position, so keep them sorted by id.
    std::sort(layout.shelves.begin(), layout.shelves.end(),
              [](const Shelf& l, const Shelf& r) { return l.id < r.id; });

    std::set<int> obstacle_ids;
    for (const Obstacle& obstacle : layout.obstacles) {
        const std::string what = "obstacle " + std::to_string(obstacle.id);
        if (obstacle.id <= n_s) {
            throw Error(ErrorKind::Validation, "obstacle ids must follow shelf ids", what);
        }
        if (!obstacle_ids.insert(obstacle.id).second) {
            throw Error(ErrorKind::Validation, "duplicate obstacle id", what);
        }
        check_segment(obstacle.segment, what);
    }
    if (!obstacle_ids.empty() &&
        (*obstacle_ids.begin() != n_s + 1 || *obstacle_ids.rbegin() != n_s + static_cast<int>(obstacle_ids.size()))) {
        throw Error(ErrorKind::Validation, "obstacle ids must be exactly n_s+1..n_s+n_o", "obstacles");
    }
    std::sort(layout.obstacles.begin(), layout.obstacles.end(),
              [](const Obstacle& l, const Obstacle& r) { return l.id < r.id; });

    std::set<std::string> portal_ids;
    for (const Portal& portal : layout.portals) {
        const std::string what = "portal " + portal.id;
        if (!portal_ids.insert(portal.id).second) {
            throw Error(ErrorKind::Validation, "duplicate portal id", what);
        }
        if (!portal.entrance && !portal.exit) {
            throw Error(ErrorKind::Validation, "portal must be an entrance, an exit, or both", what);
        }
        check_segment(portal.segment, what);
    }
    if (layout.area_m2 && !(*layout.area_m2 > 0.0)) {
        throw Error(ErrorKind::Validation, "area must be positive", "area_m2");
    }
}

std::vector<IndexedSegment> all_segments(const StoreLayout& layout) {
    std::vector<IndexedSegment> out;
    out.reserve(layout.shelves.size() + layout.obstacles.size());
    for (const Shelf& shelf : layout.shelves) {
        out.push_back({shelf.id, shelf.face, true});
    }
    for (const Obstacle& obstacle : layout.obstacles) {
        out.push_back({obstacle.id, obstacle.segment, false});
    }
    return out;
}

StoreLayout parse_layout(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("layout is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorKind::Parse, "layout must be a JSON object");
    }

    StoreLayout layout;
    layout.store_id = detail::required<std::string>(doc, "store_id");
    if (doc.contains("area_m2") && !doc["area_m2"].is_null()) {
        layout.area_m2 = detail::required<double>(doc, "area_m2");
    }
    for (const json& s : detail::required<json>(doc, "shelves")) {
        Shelf shelf;
        shelf.id = detail::required<int>(s, "id");
        shelf.face = detail::segment_from_json(detail::required<json>(s, "face"));
        shelf.normal = detail::point_from_json(detail::required<json>(s, "normal"));
        layout.shelves.push_back(shelf);
    }
    if (doc.contains("obstacles")) {
        for (const json& o : doc["obstacles"]) {
            Obstacle obstacle;
            obstacle.id = detail::required<int>(o, "id");
            obstacle.segment = detail::segment_from_json(detail::required<json>(o, "segment"));
            layout.obstacles.push_back(obstacle);
        }
    }
    if (doc.contains("portals")) {
        for (const json& p : doc["portals"]) {
            Portal portal;
            portal.id = detail::id_string(detail::required<json>(p, "id"));
            portal.segment = detail::segment_from_json(detail::required<json>(p, "segment"));
            portal.entrance = p.value("entrance", true);
            portal.exit = p.value("exit", true);
            layout.portals.push_back(portal);
        }
    }
    validate_layout(layout);
    return layout;
}

StoreLayout load_layout(const std::filesystem::path& path) {
    return parse_layout(detail::read_text_file(path));
}

std::string format_layout(const StoreLayout& layout) {
    json doc;
    doc["store_id"] = layout.store_id;
    doc["area_m2"] = layout.area_m2 ? json(*layout.area_m2) : json(nullptr);
    doc["shelves"] = json::array();
    for (const Shelf& s : layout.shelves) {
        doc["shelves"].push_back(
            {{"id", s.id}, {"face", detail::segment_to_json(s.face)}, {"normal", detail::point_to_json(s.normal)}});
    }
    doc["obstacles"] = json::array();
    for (const Obstacle& o : layout.obstacles) {
        doc["obstacles"].push_back({{"id", o.id}, {"segment", detail::segment_to_json(o.segment)}});
    }
    doc["portals"] = json::array();
    for (const Portal& p : layout.portals) {
        doc["portals"].push_back({{"id", p.id},
                                  {"segment", detail::segment_to_json(p.segment)},
                                  {"entrance", p.entrance},
                                  {"exit", p.exit}});
    }
    return doc.dump(2) + "\n";
}

void save_layout(const StoreLayout& layout, const std::filesystem::path& path) {
    detail::write_text_file(path, format_layout(layout));
}

} // namespace shelfscan
