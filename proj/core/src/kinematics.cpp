#include "shelfscan/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json_util.hpp"
#include "shelfscan/error.hpp"

namespace shelfscan {

namespace {

using detail::json;

void check_window(int window) {
    if (window < 1 || window % 2 == 0) {
        throw Error(ErrorKind::InvalidWindow, "window must be a positive odd sample count, got " + std::to_string(window));
    }
}

} // namespace

void validate_trajectory(const Trajectory& trajectory) {
    const std::string& id = trajectory.trajectory_id;
    if (trajectory.samples.size() < 3) {
        throw Error(ErrorKind::TooShort, "trajectory needs at least 3 samples", id);
    }
    for (std::size_t k = 0; k < trajectory.samples.size(); ++k) {
        const RawSample& s = trajectory.samples[k];
        if (!std::isfinite(s.t) || !std::isfinite(s.position.x) || !std::isfinite(s.position.y) ||
            !std::isfinite(s.theta)) {
            throw Error(ErrorKind::Validation, "non-finite value at sample " + std::to_string(k), id);
        }
        if (!(s.theta > -std::numbers::pi && s.theta <= std::numbers::pi)) {
            throw Error(ErrorKind::Validation, "theta outside (-pi, pi] at sample " + std::to_string(k), id);
        }
        if (k > 0) {
            const double step = s.t - trajectory.samples[k - 1].t;
            if (std::abs(step - kSampleInterval) > kTimestampTolerance) {
                throw Error(ErrorKind::Validation, "timestamp step " + std::to_string(step) + " at sample " +
                                                       std::to_string(k) + " is not the sampling interval",
                            id);
            }
        }
    }
}

std::vector<Trajectory> split_on_gaps(Trajectory record) {
    if (record.source_id.empty()) {
        record.source_id = record.trajectory_id;
    }
    std::vector<std::vector<RawSample>> pieces(1);
    for (std::size_t k = 0; k < record.samples.size(); ++k) {
        if (k > 0) {
            const double step = record.samples[k].t - record.samples[k - 1].t;
            if (step > kGapFactor * kSampleInterval) {
                pieces.emplace_back();
            } else if (std::abs(step - kSampleInterval) > kTimestampTolerance) {
                throw Error(ErrorKind::Validation,
                            "irregular timestamp step " + std::to_string(step) + " at sample " + std::to_string(k),
                            record.trajectory_id);
            }
        }
        pieces.back().push_back(record.samples[k]);
    }

    std::vector<Trajectory> out;
    if (pieces.size() == 1) {
        if (pieces.front().size() >= 3) {
            validate_trajectory(record);
            out.push_back(std::move(record));
        }
        return out;
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (pieces[i].size() < 3) {
            continue;
        }
        Trajectory piece;
        piece.trajectory_id = record.trajectory_id + "/" + std::to_string(i);
        piece.store_id = record.store_id;
        piece.source_id = record.source_id;
        piece.samples = std::move(pieces[i]);
        validate_trajectory(piece);
        out.push_back(std::move(piece));
    }
    return out;
}

std::vector<Vec2> low_pass_positions(std::span<const Vec2> positions, int window) {
    check_window(window);
    const auto n = static_cast<std::ptrdiff_t>(positions.size());
    const std::ptrdiff_t half = window / 2;
    std::vector<Vec2> out(positions.size());
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - half);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, k + half);
        Vec2 sum;
        for (std::ptrdiff_t i = lo; i <= hi; ++i) {
            sum = sum + positions[static_cast<std::size_t>(i)];
        }
        out[static_cast<std::size_t>(k)] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::vector<Vec2> low_pass_positions(const Trajectory& trajectory, int window) {
    std::vector<Vec2> raw;
    raw.reserve(trajectory.samples.size());
    for (const RawSample& s : trajectory.samples) {
        raw.push_back(s.position);
    }
    return low_pass_positions(raw, window);
}

KinematicTrack build_track(const Trajectory& trajectory, int window) {
    check_window(window);
    validate_trajectory(trajectory);

    KinematicTrack track;
    track.trajectory_id = trajectory.trajectory_id;
    track.store_id = trajectory.store_id;
    track.positions = low_pass_positions(trajectory, window);

    const std::size_t n = trajectory.samples.size();
    track.times.reserve(n);
    track.headings.reserve(n);
    for (const RawSample& s : trajectory.samples) {
        track.times.push_back(s.t);
        track.headings.push_back(unit_from_angle(s.theta));
    }

    const std::vector<Vec2>& x = track.positions;
    track.speeds.resize(n);
    track.speeds[0] = norm((x[1] - x[0]) / kSampleInterval);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        track.speeds[k] = norm((x[k + 1] - x[k - 1]) / (2.0 * kSampleInterval));
    }
    track.speeds[n - 1] = norm((x[n - 1] - x[n - 2]) / kSampleInterval);
    return track;
}

Trajectory parse_trajectory_record(std::string_view line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("trajectory record is not valid JSON: ") + e.what());
    }
    Trajectory trajectory;
    trajectory.trajectory_id = detail::id_string(detail::required<json>(doc, "trajectory_id"));
    trajectory.store_id = detail::id_string(detail::required<json>(doc, "store_id"));
    trajectory.source_id = trajectory.trajectory_id;
    const json& samples = detail::required<json>(doc, "samples");
    if (!samples.is_array()) {
        throw Error(ErrorKind::Parse, "samples must be an array", trajectory.trajectory_id);
    }
    trajectory.samples.reserve(samples.size());
    for (const json& s : samples) {
        if (!s.is_array() || s.size() != 4) {
            throw Error(ErrorKind::Parse, "sample must be [t, x, y, theta]", trajectory.trajectory_id);
        }
        for (const json& v : s) {
            if (!v.is_number()) {
                throw Error(ErrorKind::Parse, "sample values must be numbers", trajectory.trajectory_id);
            }
        }
        trajectory.samples.push_back(
            {s[0].get<double>(), {s[1].get<double>(), s[2].get<double>()}, wrap_angle(s[3].get<double>())});
    }
    return trajectory;
}

std::string format_trajectory_record(const Trajectory& trajectory) {
    json samples = json::array();
    for (const RawSample& s : trajectory.samples) {
        samples.push_back(json::array({s.t, s.position.x, s.position.y, s.theta}));
    }
    json doc;
    doc["trajectory_id"] = trajectory.trajectory_id;
    doc["store_id"] = trajectory.store_id;
    doc["samples"] = std::move(samples);
    return doc.dump();
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open file for reading", path.string());
    }
    std::vector<Trajectory> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        Trajectory record;
        try {
            record = parse_trajectory_record(line);
        } catch (const Error& e) {
            throw Error(e.kind(), e.what(), path.string() + ":" + std::to_string(line_no));
        }
        for (Trajectory& piece : split_on_gaps(std::move(record))) {
            out.push_back(std::move(piece));
        }
    }
    return out;
}

void save_trajectories(std::span<const Trajectory> trajectories, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open file for writing", path.string());
    }
    for (const Trajectory& t : trajectories) {
        out << format_trajectory_record(t) << '\n';
    }
}

} // namespace shelfscan
