#include "shelfscan/calibration.hpp"

#include <algorithm>
#include <iterator>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "shelfscan/error.hpp"
#include "shelfscan/parallel.hpp"

namespace shelfscan {

namespace {

constexpr double kGridSnap = 1e9;

double snap(double v) { return std::round(v * kGridSnap) / kGridSnap; }

void check_axes(const StopMatrix& s, const VisitMatrix& v) {
    if (s.trajectory_id != v.trajectory_id || s.marks.shelf_count() != v.visits.shelf_count() ||
        s.marks.sample_count() != v.visits.sample_count()) {
        throw Error(ErrorKind::AxisMismatch, "stop and visit matrices do not share axes",
                    s.trajectory_id + " vs " + v.trajectory_id);
    }
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform integer in [0, bound) by rejection.
std::uint64_t bounded(std::uint64_t& state, std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = 0;
    do {
        x = splitmix64(state);
    } while (x >= limit);
    return x % bound;
}

// Counts for every t_b value at one (delta_b, v_b) pair. A maximal run of m
// samples qualifies for a prefix of the ascending t_b list, so runs are
// bucketed by that prefix length and summed from the top.
std::vector<ConfusionCounts> evaluate_pair(const PreparedDataset& data, std::span<const std::size_t> indices,
                                           double delta_b, double v_b, std::span<const double> t_b_values) {
    const std::size_t nt = t_b_values.size();
    std::vector<std::uint64_t> marked_bucket(nt, 0);
    std::vector<std::uint64_t> tp_bucket(nt, 0);
    std::uint64_t visit_total = 0;

    for (std::size_t idx : indices) {
        const PreparedTrack& track = data.tracks[idx];
        visit_total += track.visit_count;
        const std::size_t n = track.gaze.size();
        auto satisfied = [&](std::size_t k) {
            return track.gaze[k].shelf && track.gaze[k].lambda <= delta_b && track.speeds[k] <= v_b;
        };
        std::size_t k = 0;
        while (k < n) {
            if (!satisfied(k)) {
                ++k;
                continue;
            }
            const int shelf = *track.gaze[k].shelf;
            std::size_t end = k;
            while (end + 1 < n && satisfied(end + 1) && *track.gaze[end + 1].shelf == shelf) {
                ++end;
            }
            const std::size_t length = end - k + 1;
            const auto qualifying = static_cast<std::size_t>(
                std::partition_point(t_b_values.begin(), t_b_values.end(),
                                     [length](double t_b) { return run_long_enough(length, t_b); }) -
                t_b_values.begin());
            if (qualifying > 0) {
                const std::span<const std::uint8_t> row = track.visits.row(shelf);
                std::uint64_t tp = 0;
                for (std::size_t i = k; i <= end; ++i) {
                    tp += row[i];
                }
                marked_bucket[qualifying - 1] += length;
                tp_bucket[qualifying - 1] += tp;
            }
            k = end + 1;
        }
    }

    std::vector<ConfusionCounts> out(nt);
    std::uint64_t marked = 0;
    std::uint64_t tp = 0;
    for (std::size_t i = nt; i-- > 0;) {
        marked += marked_bucket[i];
        tp += tp_bucket[i];
        out[i] = {tp, marked - tp, visit_total - tp};
    }
    return out;
}

using GridIndex = std::tuple<std::size_t, std::size_t, std::size_t>;  // (t_b, delta_b, v_b)

std::vector<std::size_t> strided(std::size_t n, std::size_t stride) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; i += stride) {
        out.push_back(i);
    }
    if (out.back() != n - 1) {
        out.push_back(n - 1);
    }
    return out;
}

std::vector<std::size_t> neighbourhood(std::size_t center, std::size_t radius, std::size_t n) {
    std::vector<std::size_t> out;
    const std::size_t lo = center >= radius ? center - radius : 0;
    const std::size_t hi = std::min(n - 1, center + radius);
    for (std::size_t i = lo; i <= hi; ++i) {
        out.push_back(i);
    }
    return out;
}

void evaluate_block(const PreparedDataset& data, std::span<const std::size_t> indices,
                    const std::vector<double>& tb, const std::vector<double>& db, const std::vector<double>& vb,
                    const std::vector<std::size_t>& ti, const std::vector<std::size_t>& di,
                    const std::vector<std::size_t>& vi, int jobs, std::map<GridIndex, ConfusionCounts>& scores) {
    std::vector<double> tb_subset;
    for (std::size_t i : ti) {
        tb_subset.push_back(tb[i]);
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t d : di) {
        for (std::size_t v : vi) {
            pairs.emplace_back(d, v);
        }
    }
    std::vector<std::vector<ConfusionCounts>> results(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t p) {
        results[p] = evaluate_pair(data, indices, db[pairs[p].first], vb[pairs[p].second], tb_subset);
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (std::size_t t = 0; t < ti.size(); ++t) {
            scores[{ti[t], pairs[p].first, pairs[p].second}] = results[p][t];
        }
    }
}

// Best entry under (max F1, then smallest index tuple). std::map iterates in
// ascending index order, so only a strictly larger F1 replaces the leader.
std::pair<GridIndex, MetricsReport> best_of(const std::map<GridIndex, ConfusionCounts>& scores) {
    auto it = scores.begin();
    GridIndex best_index = it->first;
    MetricsReport best = precision_recall_f1(it->second);
    for (++it; it != scores.end(); ++it) {
        const MetricsReport m = precision_recall_f1(it->second);
        if (m.f1 > best.f1) {
            best = m;
            best_index = it->first;
        }
    }
    return {best_index, best};
}

double mean_of(std::span<const RepeatScore> scores) {
    double sum = 0.0;
    for (const RepeatScore& s : scores) {
        sum += s.test.f1;
    }
    return sum / static_cast<double>(scores.size());
}

void summarize(EvalReport& report) {
    const std::size_t r = report.scores.size();
    report.mean_f1 = mean_of(report.scores);
    if (r < 2) {
        report.std_error = 0.0;
        return;
    }
    double ss = 0.0;
    for (const RepeatScore& s : report.scores) {
        ss += (s.test.f1 - report.mean_f1) * (s.test.f1 - report.mean_f1);
    }
    const double sample_sd = std::sqrt(ss / static_cast<double>(r - 1));
    report.std_error = sample_sd / std::sqrt(static_cast<double>(r));
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> out(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}

} // namespace

ConfusionCounts confusion_counts(const StopMatrix& s, const VisitMatrix& v) {
    check_axes(s, v);
    ConfusionCounts c;
    for (int shelf = 1; shelf <= s.marks.shelf_count(); ++shelf) {
        const std::span<const std::uint8_t> srow = s.marks.row(shelf);
        const std::span<const std::uint8_t> vrow = v.visits.row(shelf);
        for (std::size_t k = 0; k < srow.size(); ++k) {
            const bool sk = srow[k] != 0;
            const bool vk = vrow[k] != 0;
            c.tp += (sk && vk) ? 1 : 0;
            c.fp += (sk && !vk) ? 1 : 0;
            c.fn += (!sk && vk) ? 1 : 0;
        }
    }
    return c;
}

ConfusionCounts confusion_counts(std::span<const StopMatrix> s, std::span<const VisitMatrix> v) {
    if (s.size() != v.size()) {
        throw Error(ErrorKind::AxisMismatch, "different number of stop and visit matrices");
    }
    ConfusionCounts total;
    for (std::size_t i = 0; i < s.size(); ++i) {
        total += confusion_counts(s[i], v[i]);
    }
    return total;
}

MetricsReport precision_recall_f1(const ConfusionCounts& counts) noexcept {
    MetricsReport m;
    m.counts = counts;
    const double tp = static_cast<double>(counts.tp);
    if (counts.tp + counts.fp > 0) {
        m.precision = tp / static_cast<double>(counts.tp + counts.fp);
    }
    if (counts.tp + counts.fn > 0) {
        m.recall = tp / static_cast<double>(counts.tp + counts.fn);
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    return m;
}

std::vector<double> AxisRange::values() const {
    std::vector<double> out;
    if (!(step > 0.0) || min > max) {
        return out;
    }
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(snap(min + static_cast<double>(i) * step));
    }
    return out;
}

void ParamGrid::validate() const {
    for (const AxisRange* axis : {&t_b, &delta_b, &v_b}) {
        if (!std::isfinite(axis->min) || !std::isfinite(axis->max) || !std::isfinite(axis->step)) {
            throw Error(ErrorKind::InvalidArgument, "grid bounds must be finite");
        }
        if (!(axis->step > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
        }
        if (axis->min > axis->max) {
            throw Error(ErrorKind::EmptyGrid, "grid axis has min > max");
        }
        if (!(axis->min > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "grid values must be positive");
        }
    }
}

std::size_t ParamGrid::size() const { return t_b.values().size() * delta_b.values().size() * v_b.values().size(); }

ParamGrid single_point_grid(const StopParams& params) {
    return {{params.t_b, params.t_b, 1.0}, {params.delta_b, params.delta_b, 1.0}, {params.v_b, params.v_b, 1.0}};
}

PreparedDataset prepare_dataset(std::span<const LabeledTrack> dataset, const StoreLayout& layout, int jobs) {
    PreparedDataset out;
    out.store_id = layout.store_id;
    out.shelf_count = layout.shelf_count();
    out.tracks.resize(dataset.size());
    const GazeCaster caster(layout);
    for (const LabeledTrack& item : dataset) {
        if (item.track.store_id != layout.store_id) {
            throw Error(ErrorKind::FrameMismatch, "track store does not match layout", item.track.trajectory_id);
        }
        if (item.visits.visits.shelf_count() != layout.shelf_count() ||
            item.visits.visits.sample_count() != item.track.size() ||
            item.visits.trajectory_id != item.track.trajectory_id) {
            throw Error(ErrorKind::AxisMismatch, "visit matrix does not match track", item.track.trajectory_id);
        }
    }
    parallel_for(dataset.size(), jobs, [&](std::size_t i) {
        const LabeledTrack& item = dataset[i];
        PreparedTrack& t = out.tracks[i];
        t.trajectory_id = item.track.trajectory_id;
        t.gaze = compute_gaze(item.track, caster);
        t.speeds = item.track.speeds;
        t.visits = item.visits.visits;
        t.visit_count = t.visits.count_ones();
    });
    return out;
}

ConfusionCounts score_params(const PreparedDataset& data, std::span<const std::size_t> indices,
                             const StopParams& params) {
    validate_params(params);
    ConfusionCounts total;
    for (std::size_t idx : indices) {
        const PreparedTrack& track = data.tracks.at(idx);
        const std::vector<StopRun> runs = find_stop_runs(track.gaze, track.speeds, params);
        std::uint64_t marked = 0;
        std::uint64_t tp = 0;
        for (const StopRun& run : runs) {
            const std::span<const std::uint8_t> row = track.visits.row(run.shelf);
            for (std::size_t k = run.first; k <= run.last; ++k) {
                tp += row[k];
            }
            marked += run.length();
        }
        total += ConfusionCounts{tp, marked - tp, track.visit_count - tp};
    }
    return total;
}

ConfusionCounts score_all(const PreparedDataset& data, const StopParams& params) {
    const std::vector<std::size_t> all = iota_indices(data.size());
    return score_params(data, all, params);
}

CalibrationResult calibrate(const PreparedDataset& data, std::span<const std::size_t> indices, const ParamGrid& grid,
                            const CalibrationOptions& options) {
    if (indices.empty()) {
        throw Error(ErrorKind::EmptyDataset, "calibration needs at least one trajectory");
    }
    grid.validate();
    const std::vector<double> tb = grid.t_b.values();
    const std::vector<double> db = grid.delta_b.values();
    const std::vector<double> vb = grid.v_b.values();
    if (tb.empty() || db.empty() || vb.empty()) {
        throw Error(ErrorKind::EmptyGrid, "grid has no points");
    }

    std::map<GridIndex, ConfusionCounts> scores;
    if (options.refine_stride <= 1) {
        evaluate_block(data, indices, tb, db, vb, iota_indices(tb.size()), iota_indices(db.size()),
                       iota_indices(vb.size()), options.jobs, scores);
    } else {
        const auto stride = static_cast<std::size_t>(options.refine_stride);
        evaluate_block(data, indices, tb, db, vb, strided(tb.size(), stride), strided(db.size(), stride),
                       strided(vb.size(), stride), options.jobs, scores);
        const auto [ct, cd, cv] = best_of(scores).first;
        evaluate_block(data, indices, tb, db, vb, neighbourhood(ct, stride, tb.size()),
                       neighbourhood(cd, stride, db.size()), neighbourhood(cv, stride, vb.size()), options.jobs,
                       scores);
    }

    const auto [index, metrics] = best_of(scores);
    CalibrationResult result;
    result.best_params = {tb[std::get<0>(index)], db[std::get<1>(index)], vb[std::get<2>(index)]};
    result.best_f1 = metrics.f1;
    result.best_metrics = metrics;
    result.evaluated_points = scores.size();
    if (options.keep_table) {
        result.table.reserve(scores.size());
        for (const auto& [i, counts] : scores) {
            result.table.push_back(
                {{tb[std::get<0>(i)], db[std::get<1>(i)], vb[std::get<2>(i)]}, counts, precision_recall_f1(counts)});
        }
    }
    return result;
}

CalibrationResult calibrate(std::span<const LabeledTrack> dataset, const StoreLayout& layout, const ParamGrid& grid,
                            const CalibrationOptions& options) {
    if (dataset.empty()) {
        throw Error(ErrorKind::EmptyDataset, "calibration needs at least one trajectory");
    }
    const PreparedDataset data = prepare_dataset(dataset, layout, options.jobs);
    const std::vector<std::size_t> all = iota_indices(data.size());
    return calibrate(data, all, grid, options);
}

std::size_t train_size_for(double p, std::size_t n) {
    // The slack keeps p * n from rounding up past an exact integer.
    return static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
}

std::vector<std::size_t> draw_subset(std::size_t n, std::size_t take, std::uint64_t& rng_state) {
    std::vector<std::size_t> order = iota_indices(n);
    take = std::min(take, n);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng_state, n - i));
        std::swap(order[i], order[j]);
    }
    order.resize(take);
    std::sort(order.begin(), order.end());
    return order;
}

EvalReport same_store_eval(const PreparedDataset& data, const ParamGrid& grid, double p, std::size_t repeats,
                           std::uint64_t seed, const CalibrationOptions& options) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorKind::FractionOutOfRange, "same-store fraction must lie in (0, 1)");
    }
    if (repeats < 1) {
        throw Error(ErrorKind::InvalidArgument, "repeats must be >= 1");
    }
    const std::size_t n = data.size();
    const std::size_t train = train_size_for(p, n);
    if (train == 0 || train >= n) {
        throw Error(ErrorKind::DegenerateSplit, "split of " + std::to_string(n) + " trajectories at p = " +
                                                    std::to_string(p) + " leaves one side empty");
    }

    EvalReport report;
    report.protocol = EvalProtocol::SameStore;
    report.p = p;
    report.repeats = repeats;
    report.seed = seed;
    std::uint64_t state = seed;
    const std::vector<std::size_t> all = iota_indices(n);
    for (std::size_t r = 0; r < repeats; ++r) {
        const std::vector<std::size_t> train_idx = draw_subset(n, train, state);
        std::vector<std::size_t> test_idx;
        test_idx.reserve(n - train);
        std::set_difference(all.begin(), all.end(), train_idx.begin(), train_idx.end(),
                            std::back_inserter(test_idx));
        CalibrationOptions calib_options = options;
        calib_options.keep_table = false;
        const CalibrationResult calib = calibrate(data, train_idx, grid, calib_options);
        RepeatScore score;
        score.repeat = r;
        score.train_size = train_idx.size();
        score.test_size = test_idx.size();
        score.params = calib.best_params;
        score.train_f1 = calib.best_f1;
        score.test = precision_recall_f1(score_params(data, test_idx, calib.best_params));
        report.scores.push_back(score);
    }
    summarize(report);
    return report;
}

EvalReport cross_store_eval(const PreparedDataset& calib, const PreparedDataset& eval, const ParamGrid& grid,
                            double p, std::size_t repeats, std::uint64_t seed, const CalibrationOptions& options) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw Error(ErrorKind::FractionOutOfRange, "cross-store fraction must lie in (0, 1]");
    }
    if (repeats < 1) {
        throw Error(ErrorKind::InvalidArgument, "repeats must be >= 1");
    }
    const std::size_t train = train_size_for(p, calib.size());
    if (train == 0 || eval.size() == 0) {
        throw Error(ErrorKind::DegenerateSplit, "cross-store evaluation needs non-empty calibration and eval sets");
    }

    EvalReport report;
    report.protocol = EvalProtocol::CrossStore;
    report.p = p;
    report.repeats = repeats;
    report.seed = seed;
    std::uint64_t state = seed;
    const std::vector<std::size_t> eval_idx = iota_indices(eval.size());
    for (std::size_t r = 0; r < repeats; ++r) {
        const std::vector<std::size_t> train_idx = draw_subset(calib.size(), train, state);
        CalibrationOptions calib_options = options;
        calib_options.keep_table = false;
        const CalibrationResult result = calibrate(calib, train_idx, grid, calib_options);
        RepeatScore score;
        score.repeat = r;
        score.train_size = train_idx.size();
        score.test_size = eval.size();
        score.params = result.best_params;
        score.train_f1 = result.best_f1;
        score.test = precision_recall_f1(score_params(eval, eval_idx, result.best_params));
        report.scores.push_back(score);
    }
    summarize(report);
    return report;
}

std::string_view to_string(EvalProtocol protocol) noexcept {
    return protocol == EvalProtocol::SameStore ? "same-store" : "cross-store";
}

} // namespace shelfscan
