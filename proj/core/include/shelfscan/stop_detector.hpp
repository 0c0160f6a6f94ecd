#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shelfscan/geometry.hpp"
#include "shelfscan/kinematics.hpp"
#include "shelfscan/store_layout.hpp"

namespace shelfscan {

/// Detector thresholds: minimum browsing time, maximum distance to the shelf
/// face and maximum browsing speed.
struct StopParams {
    double t_b = 2.0;      // s
    double delta_b = 1.2;  // m
    double v_b = 0.55;     // m/s

    friend bool operator==(const StopParams&, const StopParams&) = default;
};

/// Throws InvalidArgument unless all three thresholds are positive and finite.
void validate_params(const StopParams& params);

/// Slack applied when comparing a run duration against t_b.
inline constexpr double kDurationTolerance = 1e-9;

/// True iff a run of `sample_count` consecutive samples spans at least t_b.
inline bool run_long_enough(std::size_t sample_count, double t_b) noexcept {
    return sample_count > 0 &&
           static_cast<double>(sample_count - 1) * kSampleInterval >= t_b - kDurationTolerance;
}

/// Result of casting the heading ray at one sample.
struct GazeSample {
    std::optional<int> shelf;  // candidate shelf id
    double lambda = 0.0;       // distance to the candidate, meaningful iff shelf

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

/// Dense Boolean matrix indexed by (shelf id 1..n_s, sample index k).
class ShelfTimeMatrix {
public:
    ShelfTimeMatrix() = default;
    ShelfTimeMatrix(int shelf_count, std::size_t sample_count);

    int shelf_count() const noexcept { return shelf_count_; }
    std::size_t sample_count() const noexcept { return sample_count_; }

    bool at(int shelf, std::size_t k) const;
    void set(int shelf, std::size_t k, bool value = true);

    /// Contiguous row for one shelf.
    std::span<const std::uint8_t> row(int shelf) const;
    std::span<std::uint8_t> row(int shelf);

    std::size_t count_ones() const noexcept;

    friend bool operator==(const ShelfTimeMatrix&, const ShelfTimeMatrix&) = default;

private:
    std::size_t offset(int shelf, std::size_t k) const;

    int shelf_count_ = 0;
    std::size_t sample_count_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct StopMatrix {
    std::string trajectory_id;
    ShelfTimeMatrix marks;

    friend bool operator==(const StopMatrix&, const StopMatrix&) = default;
};

struct StopEvent {
    std::string trajectory_id;
    int shelf_id = 0;
    double t_s = 0.0;
    double t_f = 0.0;
    double duration = 0.0;
    double min_lambda = 0.0;
    double mean_speed = 0.0;
    std::size_t first_sample = 0;
    std::size_t last_sample = 0;
};

/// Maximal run of consecutive samples satisfying all conditions on one shelf,
/// inclusive sample bounds.
struct StopRun {
    int shelf = 0;
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t length() const noexcept { return last - first + 1; }
    friend bool operator==(const StopRun&, const StopRun&) = default;
};

/// Precomputed segment table for repeated ray casts against one layout.
class GazeCaster {
public:
    explicit GazeCaster(const StoreLayout& layout);

    GazeSample cast(Vec2 origin, Vec2 heading) const noexcept;
    int shelf_count() const noexcept { return shelf_count_; }

private:
    std::vector<IndexedSegment> segments_;
    int shelf_count_ = 0;
};

/// Nearest segment hit by the heading half-line; a candidate only when that
/// segment is an interactive face. Ties keep the lower segment index.
GazeSample candidate_shelf(Vec2 origin, Vec2 heading, const StoreLayout& layout);

/// Per-sample gaze of a track. Independent of StopParams, so it can be cached
/// across calibration grid points.
std::vector<GazeSample> compute_gaze(const KinematicTrack& track, const GazeCaster& caster);
std::vector<GazeSample> compute_gaze(const KinematicTrack& track, const StoreLayout& layout);

/// Run extraction over cached gaze and speed streams.
std::vector<StopRun> find_stop_runs(std::span<const GazeSample> gaze, std::span<const double> speeds,
                                    const StopParams& params);

struct StopDetection {
    std::vector<StopEvent> events;
    StopMatrix matrix;
};

/// Throws FrameMismatch when the track and layout belong to different stores.
StopDetection detect_stops(const KinematicTrack& track, const StoreLayout& layout, const StopParams& params);
StopDetection detect_stops(const KinematicTrack& track, const GazeCaster& caster, const std::string& store_id,
                           const StopParams& params);

/// Events and matrix from runs already found on `track`.
StopDetection materialize_stops(const KinematicTrack& track, std::span<const GazeSample> gaze,
                                std::span<const StopRun> runs, int shelf_count);

/// One JSONL record {trajectory_id, shelf_id, t_s, t_f, duration, min_lambda, mean_speed}.
std::string format_stop_event(const StopEvent& event);
StopEvent parse_stop_event(std::string_view line);

inline constexpr const char* kStopMatrixCsvHeader = "trajectory_id,shelf_id,k,t,S";

/// Long-form CSV rows (no header). Only S = 1 entries are written unless
/// `dense` is set.
void write_stop_matrix_csv(std::ostream& out, const StopMatrix& matrix, std::span<const double> times,
                           bool dense = false);

} // namespace shelfscan
