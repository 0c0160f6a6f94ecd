#include "shelfscan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "json_util.hpp"
#include "shelfscan/error.hpp"

#include "shelfscan/parallel.hpp"
#include "shelfscan/synth.hpp"

namespace shelfscan {

namespace {

// Same arithmetic shape as the detector so results agree to the last bit.
std::vector<Vec2> smooth(const Trajectory& trajectory, int window) {
    const std::size_t n = trajectory.samples.size();
    const std::size_t half = static_cast<std::size_t>(window / 2);
    std::vector<Vec2> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = k >= half ? k - half : 0;
        const std::size_t hi = std::min(n - 1, k + half);
        Vec2 sum;
        for (std::size_t i = lo; i <= hi; ++i) {
            sum = sum + trajectory.samples[i].position;
        }
        out[k] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

double speed_at(const std::vector<Vec2>& x, std::size_t k) {
    const std::size_t n = x.size();
    if (k == 0) {
        return norm((x[1] - x[0]) / kSampleInterval);
    }
    if (k == n - 1) {
        return norm((x[n - 1] - x[n - 2]) / kSampleInterval);
    }
    return norm((x[k + 1] - x[k - 1]) / (2.0 * kSampleInterval));
}

struct Gaze {
    int shelf = 0;  // 0: no candidate
    double lambda = 0.0;
};

Gaze nearest(const StoreLayout& layout, Vec2 origin, Vec2 heading) {
    Gaze g;
    bool any = false;
    double best = 0.0;
    for (const Shelf& s : layout.shelves) {
        const auto hit = ray_segment_intersection(origin, heading, s.face);
        if (hit && (!any || *hit < best)) {
            any = true;
            best = *hit;
            g = {s.id, *hit};
        }
    }
    for (const Obstacle& o : layout.obstacles) {
        const auto hit = ray_segment_intersection(origin, heading, o.segment);
        if (hit && (!any || *hit < best)) {
            any = true;
            best = *hit;
            g = {0, *hit};
        }
    }
    return g;
}

} // namespace

StopMatrix brute_force_stops(const KinematicTrack& track, const StoreLayout& layout, const StopParams& params) {
    if (track.store_id != layout.store_id) {
        throw Error(ErrorKind::FrameMismatch, "track and layout belong to different stores", track.trajectory_id);
    }
    const std::size_t n = track.size();
    std::vector<Gaze> gaze(n);
    for (std::size_t k = 0; k < n; ++k) {
        gaze[k] = nearest(layout, track.positions[k], track.headings[k]);
    }
    auto ok = [&](int shelf, std::size_t k) {
        return gaze[k].shelf == shelf && gaze[k].lambda <= params.delta_b && track.speeds[k] <= params.v_b;
    };

    StopMatrix m{track.trajectory_id, ShelfTimeMatrix(layout.shelf_count(), n)};
    for (std::size_t ks = 0; ks < n; ++ks) {
        for (int j = 1; j <= layout.shelf_count(); ++j) {
            if (!ok(j, ks)) {
                continue;
            }
            std::size_t kf = ks;
            while (kf + 1 < n && ok(j, kf + 1)) {
                ++kf;
            }
            if (static_cast<double>(kf - ks) * kSampleInterval >= params.t_b - 1e-9) {
                for (std::size_t k = ks; k <= kf; ++k) {
                    m.marks.set(j, k);
                }
            }
        }
    }
    return m;
}

StopMatrix brute_force_stops(const Trajectory& trajectory, const StoreLayout& layout, const StopParams& params,
                             int window) {
    validate_trajectory(trajectory);
    if (window < 1 || window % 2 == 0) {
        throw Error(ErrorKind::InvalidWindow, "filter window must be odd and positive", std::to_string(window));
    }
    KinematicTrack track;
    track.trajectory_id = trajectory.trajectory_id;
    track.store_id = trajectory.store_id;
    track.positions = smooth(trajectory, window);
    const std::size_t n = trajectory.samples.size();
    for (std::size_t k = 0; k < n; ++k) {
        track.times.push_back(trajectory.samples[k].t);
        track.headings.push_back(unit_from_angle(trajectory.samples[k].theta));
        track.speeds.push_back(speed_at(track.positions, k));
    }
    return brute_force_stops(track, layout, params);
}

std::uint64_t oracle_case_seed(std::uint64_t seed, std::size_t index) noexcept {
    std::uint64_t z = seed * 0x100000001B3ULL + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

OracleReport oracle_check(std::uint64_t seed, std::size_t scenarios, int jobs) {
    struct Outcome {
        std::size_t samples = 0;
        std::size_t marked = 0;
        std::optional<OracleMismatch> mismatch;
    };
    std::vector<Outcome> outcomes(scenarios);
    parallel_for(scenarios, jobs > 0 ? jobs : default_jobs(), [&](std::size_t i) {
        const std::uint64_t case_seed = oracle_case_seed(seed, i);
        const OracleCase c = random_oracle_case(case_seed);
        const SynthOutput synth = generate(c.spec);
        const Trajectory& trajectory = synth.trajectories.front();
        const KinematicTrack track = build_track(trajectory, c.window);
        const StopMatrix fast = detect_stops(track, synth.layout, c.params).matrix;
        const StopMatrix slow = brute_force_stops(trajectory, synth.layout, c.params, c.window);

        Outcome& out = outcomes[i];
        out.samples = trajectory.samples.size();
        out.marked = slow.marks.count_ones();
        if (fast == slow) {
            return;
        }
        for (int j = 1; j <= synth.layout.shelf_count() && !out.mismatch; ++j) {
            for (std::size_t k = 0; k < out.samples; ++k) {
                const bool a = fast.marks.at(j, k);
                const bool b = slow.marks.at(j, k);
                if (a != b) {
                    out.mismatch = OracleMismatch{case_seed, trajectory.trajectory_id, j,       k,
                                                  a,         b,                        c.params, c.window,
                                                  out.samples};
                    break;
                }
            }
        }
        if (!out.mismatch) {
            // Same bits but different shape or id.
            out.mismatch = OracleMismatch{case_seed, trajectory.trajectory_id, 0, 0, false, false, c.params, c.window,
                                          out.samples};
        }
    });

    OracleReport report;
    report.seed = seed;
    report.scenarios = scenarios;
    for (const Outcome& o : outcomes) {
        report.total_samples += o.samples;
        report.marked_cells += o.marked;
        if (o.mismatch) {
            ++report.mismatched_scenarios;
            if (!report.first_counterexample) {
                report.first_counterexample = o.mismatch;
            }
        }
    }
    return report;
}

std::string format_oracle_report(const OracleReport& report) {
    detail::json doc;
    doc["seed"] = report.seed;
    doc["scenarios"] = report.scenarios;
    doc["mismatched_scenarios"] = report.mismatched_scenarios;
    doc["total_samples"] = report.total_samples;
    doc["marked_cells"] = report.marked_cells;
    doc["passed"] = report.passed();
    if (report.first_counterexample) {
        const OracleMismatch& m = *report.first_counterexample;
        doc["first_counterexample"] = {{"case_seed", m.case_seed},
                                       {"trajectory_id", m.trajectory_id},
                                       {"shelf_id", m.shelf_id},
                                       {"sample", m.sample},
                                       {"detector", m.detector},
                                       {"oracle", m.oracle},
                                       {"t_b", m.params.t_b},
                                       {"delta_b", m.params.delta_b},
                                       {"v_b", m.params.v_b},
                                       {"window", m.window},
                                       {"samples", m.samples}};
    } else {
        doc["first_counterexample"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

} // namespace shelfscan
