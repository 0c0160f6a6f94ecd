#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shelfscan/kinematics.hpp"
#include "shelfscan/labeling.hpp"
#include "shelfscan/stop_detector.hpp"
#include "shelfscan/store_layout.hpp"

namespace shelfscan {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept {
        tp += other.tp;
        fp += other.fp;
        fn += other.fn;
        return *this;
    }
    friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) noexcept { return a += b; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ConfusionCounts counts;
};

/// Per-(shelf, sample) comparison of detector output against majority-vote
/// labels. Throws AxisMismatch when the two matrices do not share trajectory,
/// shelf set and sample axis.
ConfusionCounts confusion_counts(const StopMatrix& s, const VisitMatrix& v);
/// Sum over trajectories; the spans are paired by position.
ConfusionCounts confusion_counts(std::span<const StopMatrix> s, std::span<const VisitMatrix> v);

/// Zero denominators give zero: P = 0 when tp+fp = 0, R = 0 when tp+fn = 0,
/// F1 = 0 when P+R = 0.
MetricsReport precision_recall_f1(const ConfusionCounts& counts) noexcept;

/// Inclusive arithmetic range. Values are snapped to 1e-9 so that decimal
/// steps land on the intended decimals (0.5 + 15 * 0.1 == 2.0).
struct AxisRange {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

struct ParamGrid {
    AxisRange t_b{0.5, 4.0, 0.1};
    AxisRange delta_b{0.3, 3.0, 0.05};
    AxisRange v_b{0.1, 1.5, 0.01};

    /// Throws EmptyGrid (min > max) or InvalidArgument (step <= 0).
    void validate() const;
    std::size_t size() const;
};

/// Grid holding exactly one point.
ParamGrid single_point_grid(const StopParams& params);

struct LabeledTrack {
    KinematicTrack track;
    VisitMatrix visits;
};

/// Parameter-independent per-trajectory state: cached gaze and speeds plus the
/// label matrix.
struct PreparedTrack {
    std::string trajectory_id;
    std::vector<GazeSample> gaze;
    std::vector<double> speeds;
    ShelfTimeMatrix visits;
    std::uint64_t visit_count = 0;
};

struct PreparedDataset {
    std::string store_id;
    int shelf_count = 0;
    std::vector<PreparedTrack> tracks;

    std::size_t size() const noexcept { return tracks.size(); }
};

PreparedDataset prepare_dataset(std::span<const LabeledTrack> dataset, const StoreLayout& layout, int jobs = 1);

/// Counts for one parameter point over the tracks listed in `indices`.
ConfusionCounts score_params(const PreparedDataset& data, std::span<const std::size_t> indices,
                             const StopParams& params);
ConfusionCounts score_all(const PreparedDataset& data, const StopParams& params);

struct GridScore {
    StopParams params;
    ConfusionCounts counts;
    MetricsReport metrics;
};

struct CalibrationOptions {
    int jobs = 1;
    bool keep_table = false;
    /// 0 = exhaustive search. k > 0 = evaluate every k-th value per axis,
    /// then the full-resolution neighbourhood (+-k steps) of the coarse best.
    int refine_stride = 0;
};

struct CalibrationResult {
    StopParams best_params;
    double best_f1 = 0.0;
    MetricsReport best_metrics;
    std::size_t evaluated_points = 0;
    std::vector<GridScore> table;  // filled when keep_table
};

/// Maximizes pooled (micro-averaged) F1 over the grid. Ties go to the
/// lexicographically smallest (t_b, delta_b, v_b).
CalibrationResult calibrate(std::span<const LabeledTrack> dataset, const StoreLayout& layout, const ParamGrid& grid,
                            const CalibrationOptions& options = {});
CalibrationResult calibrate(const PreparedDataset& data, std::span<const std::size_t> indices, const ParamGrid& grid,
                            const CalibrationOptions& options = {});

enum class EvalProtocol { SameStore, CrossStore };

struct RepeatScore {
    std::size_t repeat = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    StopParams params;
    double train_f1 = 0.0;
    MetricsReport test;
};

struct EvalReport {
    EvalProtocol protocol = EvalProtocol::SameStore;
    double p = 0.0;
    std::size_t repeats = 0;
    std::uint64_t seed = 0;
    std::vector<RepeatScore> scores;
    double mean_f1 = 0.0;
    double std_error = 0.0;  // sample stddev / sqrt(repeats); 0 for one repeat
};

/// Number of trajectories drawn for calibration: ceil(p * n).
std::size_t train_size_for(double p, std::size_t n);

/// Seeded uniform subset of `take` indices out of [0, n), returned sorted.
std::vector<std::size_t> draw_subset(std::size_t n, std::size_t take, std::uint64_t& rng_state);

EvalReport same_store_eval(const PreparedDataset& data, const ParamGrid& grid, double p, std::size_t repeats,
                           std::uint64_t seed, const CalibrationOptions& options = {});

EvalReport cross_store_eval(const PreparedDataset& calib, const PreparedDataset& eval, const ParamGrid& grid,
                            double p, std::size_t repeats, std::uint64_t seed,
                            const CalibrationOptions& options = {});

std::string_view to_string(EvalProtocol protocol) noexcept;

} // namespace shelfscan
