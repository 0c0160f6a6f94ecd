#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shelfscan/geometry.hpp"

namespace shelfscan {

/// Tracker sampling interval (10 Hz).
inline constexpr double kSampleInterval = 0.1;
/// Allowed deviation of a timestamp step from kSampleInterval.
inline constexpr double kTimestampTolerance = 1e-6;
/// A step longer than this many intervals is a dropout and splits the record.
inline constexpr double kGapFactor = 1.5;
/// Default moving-average window, in samples (0.5 s).
inline constexpr int kDefaultFilterWindow = 5;

struct RawSample {
    double t = 0.0;
    Vec2 position;
    double theta = 0.0;  // body orientation, radians in (-pi, pi]
};

struct Trajectory {
    std::string trajectory_id;
    std::string store_id;
    std::vector<RawSample> samples;
    // Id of the tracker record this piece came from. Equals trajectory_id
    // unless the record was split at a dropout.
    std::string source_id;

    std::size_t size() const noexcept { return samples.size(); }
};

/// Per-sample kinematic state derived from a Trajectory. All vectors have the
/// trajectory's sample count.
struct KinematicTrack {
    std::string trajectory_id;
    std::string store_id;
    std::vector<double> times;
    std::vector<Vec2> positions;  // low-pass filtered
    std::vector<Vec2> headings;   // unit normals from theta
    std::vector<double> speeds;   // m/s, >= 0

    std::size_t size() const noexcept { return times.size(); }
};

/// Throws TooShort (< 3 samples) or Validation (bad spacing, angle range,
/// non-finite values).
void validate_trajectory(const Trajectory& trajectory);

/// Splits a tracker record at dropouts longer than kGapFactor intervals.
/// Pieces shorter than 3 samples are discarded. When a split happens the
/// pieces are named "<id>/0", "<id>/1", ... and keep `source_id` = <id>.
std::vector<Trajectory> split_on_gaps(Trajectory record);

/// Centered moving average over `window` samples. Near the ends the window is
/// clipped to the samples that exist. Throws InvalidWindow for even or
/// non-positive windows.
std::vector<Vec2> low_pass_positions(std::span<const Vec2> positions, int window);
std::vector<Vec2> low_pass_positions(const Trajectory& trajectory, int window);

KinematicTrack build_track(const Trajectory& trajectory, int window = kDefaultFilterWindow);

/// One JSONL record: {trajectory_id, store_id, samples: [[t, x, y, theta], ...]}.
/// Angles are wrapped into (-pi, pi]; the record is not split.
Trajectory parse_trajectory_record(std::string_view line);
std::string format_trajectory_record(const Trajectory& trajectory);

/// Reads a JSONL file, splitting each record at dropouts.
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path);
void save_trajectories(std::span<const Trajectory> trajectories, const std::filesystem::path& path);

} // namespace shelfscan
