#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "shelfscan/error.hpp"
#include "shelfscan/geometry.hpp"

namespace shelfscan::detail {

using json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open file for reading", path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open file for writing", path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorKind::Io, "write failed", path.string());
    }
}

inline Vec2 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(ErrorKind::Parse, "expected [x, y] number pair, got " + j.dump());
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json point_to_json(Vec2 p) { return json::array({p.x, p.y}); }

inline Segment2D segment_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw Error(ErrorKind::Parse, "expected [[x, y], [x, y]] segment, got " + j.dump());
    }
    return {point_from_json(j[0]), point_from_json(j[1])};
}

inline json segment_to_json(const Segment2D& s) { return json::array({point_to_json(s.a), point_to_json(s.b)}); }

template <typename T>
T required(const json& object, const char* key) {
    if (!object.is_object() || !object.contains(key)) {
        throw Error(ErrorKind::Parse, std::string("missing key '") + key + "'");
    }
    try {
        return object.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("bad value for '") + key + "': " + e.what());
    }
}

inline std::string id_string(const json& value) {
    if (value.is_string()) {
        return value.get<std::string>();
    }
    if (value.is_number_integer()) {
        return std::to_string(value.get<long long>());
    }
    throw Error(ErrorKind::Parse, "expected string or integer id, got " + value.dump());
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace shelfscan::detail
