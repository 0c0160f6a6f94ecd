#include "shelfscan/stop_detector.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json_util.hpp"
#include "shelfscan/error.hpp"

namespace shelfscan {

namespace {

using detail::json;

using detail::format_double;

} // namespace

void validate_params(const StopParams& params) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(params.t_b) || !positive(params.delta_b) || !positive(params.v_b)) {
        throw Error(ErrorKind::InvalidArgument, "t_b, delta_b and v_b must be positive and finite");
    }
}

ShelfTimeMatrix::ShelfTimeMatrix(int shelf_count, std::size_t sample_count)
    : shelf_count_(shelf_count),
      sample_count_(sample_count),
      bits_(static_cast<std::size_t>(std::max(shelf_count, 0)) * sample_count, 0) {
    if (shelf_count < 0) {
        throw Error(ErrorKind::InvalidArgument, "negative shelf count");
    }
}

std::size_t ShelfTimeMatrix::offset(int shelf, std::size_t k) const {
    if (shelf < 1 || shelf > shelf_count_) {
        throw Error(ErrorKind::ShelfOutOfRange, "shelf id outside 1..n_s", std::to_string(shelf));
    }
    if (k >= sample_count_) {
        throw Error(ErrorKind::InvalidArgument, "sample index out of range", std::to_string(k));
    }
    return static_cast<std::size_t>(shelf - 1) * sample_count_ + k;
}

bool ShelfTimeMatrix::at(int shelf, std::size_t k) const { return bits_[offset(shelf, k)] != 0; }

void ShelfTimeMatrix::set(int shelf, std::size_t k, bool value) { bits_[offset(shelf, k)] = value ? 1 : 0; }

std::span<const std::uint8_t> ShelfTimeMatrix::row(int shelf) const {
    if (shelf < 1 || shelf > shelf_count_) {
        throw Error(ErrorKind::ShelfOutOfRange, "shelf id outside 1..n_s", std::to_string(shelf));
    }
    return {bits_.data() + static_cast<std::size_t>(shelf - 1) * sample_count_, sample_count_};
}

std::span<std::uint8_t> ShelfTimeMatrix::row(int shelf) {
    if (shelf < 1 || shelf > shelf_count_) {
        throw Error(ErrorKind::ShelfOutOfRange, "shelf id outside 1..n_s", std::to_string(shelf));
    }
    return {bits_.data() + static_cast<std::size_t>(shelf - 1) * sample_count_, sample_count_};
}

std::size_t ShelfTimeMatrix::count_ones() const noexcept {
    std::size_t n = 0;
    for (std::uint8_t b : bits_) {
        n += b;
    }
    return n;
}

GazeCaster::GazeCaster(const StoreLayout& layout)
    : segments_(all_segments(layout)), shelf_count_(layout.shelf_count()) {}

GazeSample GazeCaster::cast(Vec2 origin, Vec2 heading) const noexcept {
    const IndexedSegment* best = nullptr;
    double best_lambda = 0.0;
    for (const IndexedSegment& s : segments_) {
        const std::optional<double> lambda = ray_segment_intersection(origin, heading, s.segment);
        if (lambda && (best == nullptr || *lambda < best_lambda)) {
            best = &s;
            best_lambda = *lambda;
        }
    }
    if (best == nullptr || !best->is_shelf_face) {
        return {};
    }
    return {best->index, best_lambda};
}

GazeSample candidate_shelf(Vec2 origin, Vec2 heading, const StoreLayout& layout) {
    return GazeCaster(layout).cast(origin, heading);
}

std::vector<GazeSample> compute_gaze(const KinematicTrack& track, const GazeCaster& caster) {
    std::vector<GazeSample> gaze(track.size());
    for (std::size_t k = 0; k < track.size(); ++k) {
        gaze[k] = caster.cast(track.positions[k], track.headings[k]);
    }
    return gaze;
}

std::vector<GazeSample> compute_gaze(const KinematicTrack& track, const StoreLayout& layout) {
    return compute_gaze(track, GazeCaster(layout));
}

std::vector<StopRun> find_stop_runs(std::span<const GazeSample> gaze, std::span<const double> speeds,
                                    const StopParams& params) {
    if (gaze.size() != speeds.size()) {
        throw Error(ErrorKind::LengthMismatch, "gaze and speed streams differ in length");
    }
    std::vector<StopRun> runs;
    std::size_t k = 0;
    const std::size_t n = gaze.size();
    auto satisfied = [&](std::size_t i) {
        return gaze[i].shelf && gaze[i].lambda <= params.delta_b && speeds[i] <= params.v_b;
    };
    while (k < n) {
        if (!satisfied(k)) {
            ++k;
            continue;
        }
        const int shelf = *gaze[k].shelf;
        std::size_t end = k;
        while (end + 1 < n && satisfied(end + 1) && *gaze[end + 1].shelf == shelf) {
            ++end;
        }
        if (run_long_enough(end - k + 1, params.t_b)) {
            runs.push_back({shelf, k, end});
        }
        k = end + 1;
    }
    return runs;
}

StopDetection materialize_stops(const KinematicTrack& track, std::span<const GazeSample> gaze,
                                std::span<const StopRun> runs, int shelf_count) {
    StopDetection out;
    out.matrix.trajectory_id = track.trajectory_id;
    out.matrix.marks = ShelfTimeMatrix(shelf_count, track.size());
    out.events.reserve(runs.size());
    for (const StopRun& run : runs) {
        StopEvent event;
        event.trajectory_id = track.trajectory_id;
        event.shelf_id = run.shelf;
        event.first_sample = run.first;
        event.last_sample = run.last;
        event.t_s = track.times[run.first];
        event.t_f = track.times[run.last];
        event.duration = event.t_f - event.t_s;
        event.min_lambda = gaze[run.first].lambda;
        double speed_sum = 0.0;
        std::span<std::uint8_t> row = out.matrix.marks.row(run.shelf);
        for (std::size_t k = run.first; k <= run.last; ++k) {
            event.min_lambda = std::min(event.min_lambda, gaze[k].lambda);
            speed_sum += track.speeds[k];
            row[k] = 1;
        }
        event.mean_speed = speed_sum / static_cast<double>(run.length());
        out.events.push_back(std::move(event));
    }
    return out;
}

StopDetection detect_stops(const KinematicTrack& track, const GazeCaster& caster, const std::string& store_id,
                           const StopParams& params) {
    validate_params(params);
    if (track.store_id != store_id) {
        throw Error(ErrorKind::FrameMismatch,
                    "track store '" + track.store_id + "' does not match layout store '" + store_id + "'",
                    track.trajectory_id);
    }
    const std::vector<GazeSample> gaze = compute_gaze(track, caster);
    const std::vector<StopRun> runs = find_stop_runs(gaze, track.speeds, params);
    return materialize_stops(track, gaze, runs, caster.shelf_count());
}

StopDetection detect_stops(const KinematicTrack& track, const StoreLayout& layout, const StopParams& params) {
    return detect_stops(track, GazeCaster(layout), layout.store_id, params);
}

std::string format_stop_event(const StopEvent& event) {
    json doc;
    doc["trajectory_id"] = event.trajectory_id;
    doc["shelf_id"] = event.shelf_id;
    doc["t_s"] = event.t_s;
    doc["t_f"] = event.t_f;
    doc["duration"] = event.duration;
    doc["min_lambda"] = event.min_lambda;
    doc["mean_speed"] = event.mean_speed;
    return doc.dump();
}

StopEvent parse_stop_event(std::string_view line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("stop event is not valid JSON: ") + e.what());
    }
    StopEvent event;
    event.trajectory_id = detail::id_string(detail::required<json>(doc, "trajectory_id"));
    event.shelf_id = detail::required<int>(doc, "shelf_id");
    event.t_s = detail::required<double>(doc, "t_s");
    event.t_f = detail::required<double>(doc, "t_f");
    event.duration = doc.value("duration", event.t_f - event.t_s);
    event.min_lambda = doc.value("min_lambda", 0.0);
    event.mean_speed = doc.value("mean_speed", 0.0);
    return event;
}

void write_stop_matrix_csv(std::ostream& out, const StopMatrix& matrix, std::span<const double> times, bool dense) {
    const ShelfTimeMatrix& m = matrix.marks;
    if (times.size() != m.sample_count()) {
        throw Error(ErrorKind::AxisMismatch, "time axis does not match matrix", matrix.trajectory_id);
    }
    for (int shelf = 1; shelf <= m.shelf_count(); ++shelf) {
        const std::span<const std::uint8_t> row = m.row(shelf);
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (dense || row[k] != 0) {
                out << matrix.trajectory_id << ',' << shelf << ',' << k << ',' << format_double(times[k]) << ','
                    << static_cast<int>(row[k]) << '\n';
            }
        }
    }
}

} // namespace shelfscan
