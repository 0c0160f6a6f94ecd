#include "shelfscan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "json_util.hpp"
#include "shelfscan/error.hpp"

namespace shelfscan {

namespace {

using detail::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(std::mt19937_64& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

double facing_angle(const Shelf& shelf) { return std::atan2(-shelf.normal.y, -shelf.normal.x); }

struct Leg {
    double t0 = 0.0;
    double t1 = 0.0;
    Vec2 p0;
    Vec2 p1;
    double heading = 0.0;
};

void check_template(const LayoutTemplate& t) {
    if (t.shelf_count < 1 || t.shelves_per_row < 1 || !(t.shelf_length > 0.0) || !(t.shelf_depth > 0.0) ||
        !(t.aisle_width > 0.0) || !(t.margin > 0.0) || t.pillars < 0) {
        throw Error(ErrorKind::InfeasibleScript, "layout template has non-positive dimensions");
    }
}

const Shelf& shelf_by_id(const StoreLayout& layout, int id) {
    if (id < 1 || id > layout.shelf_count()) {
        throw Error(ErrorKind::InfeasibleScript, "script faces an unknown shelf", std::to_string(id));
    }
    return layout.shelves[static_cast<std::size_t>(id - 1)];
}

} // namespace

StoreLayout make_layout(const LayoutTemplate& tmpl, std::uint64_t seed) {
    check_template(tmpl);
    const int rows = (tmpl.shelf_count + tmpl.shelves_per_row - 1) / tmpl.shelves_per_row;
    const double pitch = tmpl.shelf_depth + tmpl.aisle_width;
    const double width = 2.0 * tmpl.margin + tmpl.shelves_per_row * tmpl.shelf_length;
    const double height = 2.0 * tmpl.margin + rows * pitch;

    StoreLayout layout;
    layout.store_id = tmpl.store_id;
    layout.area_m2 = width * height;

    std::vector<Segment2D> blockers;
    for (int i = 0; i < tmpl.shelf_count; ++i) {
        const int r = i / tmpl.shelves_per_row;
        const int c = i % tmpl.shelves_per_row;
        const double y_back = tmpl.margin + r * pitch;
        const double y_face = y_back + tmpl.shelf_depth;
        const double x0 = tmpl.margin + c * tmpl.shelf_length;
        const double x1 = x0 + tmpl.shelf_length;
        layout.shelves.push_back({i + 1, {{x0, y_face}, {x1, y_face}}, {0.0, 1.0}});
        blockers.push_back({{x0, y_back}, {x1, y_back}});
    }
    for (int r = 0; r < rows; ++r) {
        const double y_back = tmpl.margin + r * pitch;
        const double y_face = y_back + tmpl.shelf_depth;
        const int in_row = std::min(tmpl.shelves_per_row, tmpl.shelf_count - r * tmpl.shelves_per_row);
        const double x_left = tmpl.margin;
        const double x_right = tmpl.margin + in_row * tmpl.shelf_length;
        blockers.push_back({{x_left, y_back}, {x_left, y_face}});
        blockers.push_back({{x_right, y_back}, {x_right, y_face}});
    }
    blockers.push_back({{0.0, 0.0}, {width, 0.0}});
    blockers.push_back({{width, 0.0}, {width, height}});
    blockers.push_back({{width, height}, {0.0, height}});
    blockers.push_back({{0.0, height}, {0.0, 0.0}});

    std::mt19937_64 rng(mix_seed(seed, 0xA15EULL));
    for (int p = 0; p < tmpl.pillars; ++p) {
        const int r = uniform_int(rng, 0, rows - 1);
        const double y_face = tmpl.margin + r * pitch + tmpl.shelf_depth;
        const double cx = uniform(rng, tmpl.margin + 0.3, width - tmpl.margin - 0.3);
        const double cy = uniform(rng, y_face + 0.2 * tmpl.aisle_width, y_face + 0.8 * tmpl.aisle_width);
        const double angle = uniform(rng, 0.0, std::numbers::pi);
        const Vec2 half = 0.15 * unit_from_angle(angle);
        blockers.push_back({Vec2{cx, cy} - half, Vec2{cx, cy} + half});
    }

    int next_id = tmpl.shelf_count + 1;
    for (const Segment2D& s : blockers) {
        layout.obstacles.push_back({next_id++, s});
    }

    const double door = std::min(1.0, tmpl.margin * 0.8);
    layout.portals.push_back({"entrance", {{0.1, 0.0}, {0.1 + door, 0.0}}, true, true});
    layout.portals.push_back({"exit", {{width - 0.1 - door, 0.0}, {width - 0.1, 0.0}}, true, true});
    validate_layout(layout);
    return layout;
}

bool Bounds::contains(Vec2 p, double slack) const noexcept {
    return p.x >= lo.x - slack && p.x <= hi.x + slack && p.y >= lo.y - slack && p.y <= hi.y + slack;
}

Bounds layout_bounds(const StoreLayout& layout) {
    Bounds b{{INFINITY, INFINITY}, {-INFINITY, -INFINITY}};
    auto grow = [&b](const Segment2D& s) {
        for (Vec2 p : {s.a, s.b}) {
            b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
            b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
        }
    };
    for (const Shelf& s : layout.shelves) {
        grow(s.face);
    }
    for (const Obstacle& o : layout.obstacles) {
        grow(o.segment);
    }
    for (const Portal& p : layout.portals) {
        grow(p.segment);
    }
    return b;
}

Vec2 browse_point(const Shelf& shelf, double distance, double along) {
    return shelf.face.a + along * (shelf.face.b - shelf.face.a) + distance * shelf.normal;
}

SynthOutput generate(const ScenarioSpec& spec) {
    if (!(spec.walking_speed > 0.0) || !std::isfinite(spec.walking_speed)) {
        throw Error(ErrorKind::InfeasibleScript, "walking speed must be positive");
    }
    if (!(spec.position_noise >= 0.0) || !(spec.heading_noise >= 0.0)) {
        throw Error(ErrorKind::InfeasibleScript, "noise levels must be non-negative");
    }

    SynthOutput out;
    out.layout = make_layout(spec.layout, spec.seed);
    const Bounds bounds = layout_bounds(out.layout);

    for (std::size_t i = 0; i < spec.shoppers.size(); ++i) {
        const ShopperScript& script = spec.shoppers[i];
        const std::string id = script.trajectory_id.empty() ? "s" + std::to_string(i) : script.trajectory_id;
        if (!bounds.contains(script.start)) {
            throw Error(ErrorKind::InfeasibleScript, "start point outside the store", id);
        }

        std::vector<Leg> legs;
        std::vector<Episode> episodes;
        auto add_episode = [&](int shelf, double t0, double t1) {
            if (!episodes.empty() && episodes.back().shelf_id == shelf && std::abs(episodes.back().t_end - t0) < 1e-12) {
                episodes.back().t_end = t1;
            } else {
                episodes.push_back({id, shelf, t0, t1});
            }
        };

        double t = 0.0;
        Vec2 pos = script.start;
        double heading = 0.0;
        if (!script.waypoints.empty()) {
            const Vec2 d = script.waypoints.front().target - pos;
            if (norm(d) > 0.0) {
                heading = std::atan2(d.y, d.x);
            }
        }
        for (std::size_t w = 0; w < script.waypoints.size(); ++w) {
            const Waypoint& wp = script.waypoints[w];
            const std::string where = id + " waypoint " + std::to_string(w);
            if (!bounds.contains(wp.target)) {
                throw Error(ErrorKind::InfeasibleScript, "waypoint outside the store", where);
            }
            if (!(wp.dwell >= 0.0) || !std::isfinite(wp.dwell)) {
                throw Error(ErrorKind::InfeasibleScript, "dwell must be non-negative", where);
            }
            if (wp.speed && (!(*wp.speed > 0.0) || !std::isfinite(*wp.speed))) {
                throw Error(ErrorKind::InfeasibleScript, "leg speed must be positive", where);
            }
            const Shelf* facing = wp.facing_shelf ? &shelf_by_id(out.layout, *wp.facing_shelf) : nullptr;

            const Vec2 delta = wp.target - pos;
            const double dist = norm(delta);
            if (dist > 0.0) {
                const double duration = dist / wp.speed.value_or(spec.walking_speed);
                if (wp.face_on_approach && facing != nullptr) {
                    heading = facing_angle(*facing);
                    add_episode(facing->id, t, t + duration);
                } else {
                    heading = std::atan2(delta.y, delta.x);
                }
                legs.push_back({t, t + duration, pos, wp.target, heading});
                t += duration;
                pos = wp.target;
            }
            if (wp.dwell > 0.0) {
                if (facing != nullptr) {
                    heading = facing_angle(*facing);
                    add_episode(facing->id, t, t + wp.dwell);
                }
                legs.push_back({t, t + wp.dwell, pos, pos, heading});
                t += wp.dwell;
            }
        }

        std::size_t count = static_cast<std::size_t>(std::floor(t / kSampleInterval + 1e-9)) + 1;
        if (script.max_samples) {
            count = std::min(count, *script.max_samples);
        }
        if (count < 3) {
            throw Error(ErrorKind::InfeasibleScript, "script yields fewer than 3 samples", id);
        }

        std::mt19937_64 rng(mix_seed(spec.seed, i));
        std::normal_distribution<double> pos_noise(0.0, spec.position_noise > 0.0 ? spec.position_noise : 1.0);
        std::normal_distribution<double> head_noise(0.0, spec.heading_noise > 0.0 ? spec.heading_noise : 1.0);

        Trajectory trajectory;
        trajectory.trajectory_id = id;
        trajectory.source_id = id;
        trajectory.store_id = out.layout.store_id;
        trajectory.samples.reserve(count);
        std::size_t leg = 0;
        for (std::size_t k = 0; k < count; ++k) {
            const double tk = static_cast<double>(k) / 10.0;
            Vec2 p = script.start;
            double h = heading;
            if (!legs.empty()) {
                while (leg + 1 < legs.size() && tk >= legs[leg].t1) {
                    ++leg;
                }
                const Leg& l = legs[leg];
                const double span = l.t1 - l.t0;
                const double f = span > 0.0 ? std::clamp((tk - l.t0) / span, 0.0, 1.0) : 1.0;
                p = l.p0 + f * (l.p1 - l.p0);
                h = l.heading;
            }
            if (spec.position_noise > 0.0) {
                p = p + Vec2{pos_noise(rng), pos_noise(rng)};
            }
            if (spec.heading_noise > 0.0) {
                h += head_noise(rng);
            }
            trajectory.samples.push_back({tk, p, wrap_angle(h)});
        }

        const double t_last = trajectory.samples.back().t;
        for (Episode& e : episodes) {
            e.t_end = std::min(e.t_end, t_last + kSampleInterval);
            if (e.t_start < e.t_end && e.t_start <= t_last) {
                out.truth.episodes.push_back(e);
            }
        }
        out.trajectories.push_back(std::move(trajectory));
    }
    return out;
}

ScriptBuilder::ScriptBuilder(const StoreLayout& layout, const LayoutTemplate& tmpl, std::string trajectory_id,
                             Vec2 start)
    : layout_(&layout), corridor_x_(tmpl.corridor_x()), current_(start) {
    script_.trajectory_id = std::move(trajectory_id);
    script_.start = start;
}

ScriptBuilder& ScriptBuilder::walk_to(Vec2 target, std::optional<double> speed) {
    auto push = [&](Vec2 p) {
        if (norm(p - current_) > 0.0) {
            script_.waypoints.push_back({p, 0.0, std::nullopt, speed, false});
            current_ = p;
        }
    };
    if (std::abs(current_.y - target.y) > 1e-9) {
        push({corridor_x_, current_.y});
        push({corridor_x_, target.y});
    }
    push(target);
    return *this;
}

ScriptBuilder& ScriptBuilder::dwell_at_shelf(int shelf_id, double distance, double along, double seconds,
                                             std::optional<double> speed) {
    const Vec2 p = browse_point(shelf_by_id(*layout_, shelf_id), distance, along);
    walk_to(p, speed);
    script_.waypoints.push_back({p, seconds, shelf_id, speed, false});
    return *this;
}

ScriptBuilder& ScriptBuilder::drift_along_shelf(int shelf_id, double distance, double from, double to,
                                                double speed) {
    const Shelf& shelf = shelf_by_id(*layout_, shelf_id);
    walk_to(browse_point(shelf, distance, from));
    const Vec2 end = browse_point(shelf, distance, to);
    script_.waypoints.push_back({end, 0.0, shelf_id, speed, true});
    current_ = end;
    return *this;
}

ScriptBuilder& ScriptBuilder::pause(double seconds) {
    script_.waypoints.push_back({current_, seconds, std::nullopt, std::nullopt, false});
    return *this;
}

ShopperScript ScriptBuilder::build() const { return script_; }

OracleCase random_oracle_case(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0x0AC1EULL));
    OracleCase c;
    ScenarioSpec& spec = c.spec;
    spec.seed = seed;
    spec.layout.store_id = "oracle";
    spec.layout.shelf_count = uniform_int(rng, 1, 50);
    spec.layout.shelves_per_row = uniform_int(rng, 1, 8);
    spec.layout.shelf_length = uniform(rng, 0.8, 3.0);
    spec.layout.aisle_width = uniform(rng, 1.2, 3.0);
    spec.layout.pillars = uniform_int(rng, 0, 6);
    constexpr double kPositionNoise[] = {0.0, 0.01, 0.05, 0.15};
    constexpr double kHeadingNoise[] = {0.0, 0.02, 0.1, 0.5};
    spec.position_noise = kPositionNoise[uniform_int(rng, 0, 3)];
    spec.heading_noise = kHeadingNoise[uniform_int(rng, 0, 3)];
    spec.walking_speed = uniform(rng, 0.3, 1.5);

    const std::size_t length = chance(rng, 0.1) ? static_cast<std::size_t>(uniform_int(rng, 3, 30))
                                                 : static_cast<std::size_t>(uniform_int(rng, 3, 2000));
    constexpr int kWindows[] = {1, 3, 5, 7, 9};
    c.window = kWindows[uniform_int(rng, 0, 4)];
    c.params = {uniform(rng, 0.1, 4.0), uniform(rng, 0.2, 3.0), uniform(rng, 0.05, 1.5)};

    const StoreLayout layout = make_layout(spec.layout, spec.seed);
    const Bounds b = layout_bounds(layout);
    auto clamp_inside = [&](Vec2 p) {
        return Vec2{std::clamp(p.x, b.lo.x + 0.05, b.hi.x - 0.05), std::clamp(p.y, b.lo.y + 0.05, b.hi.y - 0.05)};
    };
    auto random_point = [&] { return Vec2{uniform(rng, b.lo.x + 0.1, b.hi.x - 0.1), uniform(rng, b.lo.y + 0.1, b.hi.y - 0.1)}; };

    ShopperScript script;
    script.trajectory_id = "oracle-" + std::to_string(seed);
    script.start = random_point();
    script.max_samples = length;
    double duration = 0.0;
    Vec2 pos = script.start;
    const double needed = static_cast<double>(length) * kSampleInterval + 1.0;
    while (duration < needed) {
        Waypoint wp;
        if (chance(rng, 0.6)) {
            const int shelf = uniform_int(rng, 1, spec.layout.shelf_count);
            const Shelf& s = layout.shelves[static_cast<std::size_t>(shelf - 1)];
            wp.target = clamp_inside(browse_point(s, uniform(rng, 0.1, 2.5), uniform(rng, -0.1, 1.1)));
            wp.dwell = uniform(rng, 0.0, 6.0);
            if (chance(rng, 0.8)) {
                wp.facing_shelf = shelf;
            }
            wp.face_on_approach = chance(rng, 0.15);
            if (chance(rng, 0.3)) {
                wp.speed = uniform(rng, 0.05, 1.0);
            }
        } else {
            wp.target = random_point();
            wp.dwell = uniform(rng, 0.0, 2.0);
        }
        duration += norm(wp.target - pos) / wp.speed.value_or(spec.walking_speed) + wp.dwell;
        pos = wp.target;
        script.waypoints.push_back(wp);
    }
    spec.shoppers.push_back(std::move(script));
    return c;
}

ScenarioSpec random_shopping_scenario(int shoppers, int shelf_count, std::uint64_t seed, double position_noise,
                                      double heading_noise, std::size_t max_samples) {
    ScenarioSpec spec;
    spec.seed = seed;
    spec.layout.shelf_count = shelf_count;
    spec.layout.shelves_per_row = std::min(shelf_count, 5);
    spec.position_noise = position_noise;
    spec.heading_noise = heading_noise;
    const StoreLayout layout = make_layout(spec.layout, seed);
    const Bounds b = layout_bounds(layout);
    const Vec2 entrance{spec.layout.corridor_x(), 0.5};
    const Vec2 exit{b.hi.x - spec.layout.corridor_x(), 0.5};

    std::mt19937_64 rng(mix_seed(seed, 0x5407ULL));
    for (int i = 0; i < shoppers; ++i) {
        ScriptBuilder builder(layout, spec.layout, "trip-" + std::to_string(i), entrance);
        const int visits = uniform_int(rng, 1, 6);
        for (int v = 0; v < visits; ++v) {
            const int shelf = uniform_int(rng, 1, shelf_count);
            if (chance(rng, 0.15)) {
                const double from = uniform(rng, 0.05, 0.4);
                builder.drift_along_shelf(shelf, uniform(rng, 0.4, 1.2), from, from + uniform(rng, 0.2, 0.5),
                                          uniform(rng, 0.2, 0.6));
            } else {
                builder.dwell_at_shelf(shelf, uniform(rng, 0.4, 1.6), uniform(rng, 0.1, 0.9), uniform(rng, 0.5, 8.0));
            }
        }
        builder.walk_to(exit);
        ShopperScript script = builder.build();
        if (max_samples > 0) {
            // Idle at the exit long enough, then cut to the exact length.
            script.waypoints.push_back({exit, static_cast<double>(max_samples) * kSampleInterval, std::nullopt,
                                        std::nullopt, false});
            script.max_samples = max_samples;
        }
        spec.shoppers.push_back(std::move(script));
    }
    return spec;
}

ScenarioSpec calibration_scenario(int shoppers, std::uint64_t seed) {
    ScenarioSpec spec;
    spec.seed = seed;
    spec.layout.store_id = "calibration";
    spec.layout.shelf_count = 10;
    spec.layout.shelves_per_row = 5;
    spec.layout.shelf_length = 3.0;
    spec.layout.aisle_width = 2.0;
    // Slow walking keeps filtered speeds during arrivals below every v_b of interest.
    spec.walking_speed = 0.3;
    const StoreLayout layout = make_layout(spec.layout, seed);
    const Vec2 door{spec.layout.corridor_x(), 0.5};

    enum class Visit { Core, LongEnough, TooShort, NearEdge, TooFar, SlowDrift, FastDrift };
    std::mt19937_64 rng(mix_seed(seed, 0xCA1BULL));
    for (int i = 0; i < shoppers; ++i) {
        std::vector<Visit> visits{Visit::Core,   Visit::LongEnough, Visit::TooShort, Visit::NearEdge,
                                  Visit::TooFar, Visit::SlowDrift,  Visit::FastDrift};
        if (chance(rng, 0.5)) {
            visits.push_back(Visit::Core);
        }
        std::shuffle(visits.begin(), visits.end(), rng);

        ScriptBuilder builder(layout, spec.layout, "calib-" + std::to_string(i), door);
        for (Visit v : visits) {
            const int shelf = uniform_int(rng, 1, spec.layout.shelf_count);
            const double along = uniform(rng, 0.2, 0.8);
            switch (v) {
            case Visit::Core:
                builder.dwell_at_shelf(shelf, uniform(rng, 0.5, 0.95), along, uniform(rng, 3.0, 5.0));
                break;
            case Visit::LongEnough:  // run of 2.2-2.3 s
                builder.dwell_at_shelf(shelf, uniform(rng, 0.5, 0.95), along, 2.35);
                break;
            case Visit::TooShort:  // run of 1.7-1.8 s
                builder.dwell_at_shelf(shelf, uniform(rng, 0.5, 0.95), along, 1.85);
                break;
            case Visit::NearEdge:
                builder.dwell_at_shelf(shelf, 1.1, along, 3.0);
                break;
            case Visit::TooFar:
                builder.dwell_at_shelf(shelf, 1.3, along, 3.0);
                break;
            case Visit::SlowDrift:
                builder.drift_along_shelf(shelf, 0.8, 0.1, 0.1 + 1.5 / spec.layout.shelf_length, 0.5);
                break;
            case Visit::FastDrift:
                builder.drift_along_shelf(shelf, 0.8, 0.1, 0.1 + 1.8 / spec.layout.shelf_length, 0.6);
                break;
            }
        }
        builder.walk_to(door);
        spec.shoppers.push_back(builder.build());
    }
    return spec;
}

std::vector<ReviewerLabel> planted_labels(std::span<const Trajectory> trajectories, const StoreLayout& layout,
                                          const StopParams& params, int window, const ReviewerManifest& manifest) {
    const GazeCaster caster(layout);
    std::vector<ReviewerLabel> labels;
    for (const Trajectory& t : trajectories) {
        const KinematicTrack track = build_track(t, window);
        const StopDetection detection = detect_stops(track, caster, layout.store_id, params);
        for (const StopEvent& e : detection.events) {
            for (const std::string& reviewer : manifest.roster) {
                labels.push_back({reviewer, t.trajectory_id, e.shelf_id, e.t_s, e.t_f + 0.5 * kSampleInterval});
            }
        }
    }
    return labels;
}

std::vector<ReviewerLabel> reviewer_labels_from_truth(const GroundTruth& truth, const ReviewerManifest& manifest,
                                                      double boundary_jitter, double miss_probability,
                                                      std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0x1ABE1ULL));
    std::normal_distribution<double> jitter(0.0, boundary_jitter > 0.0 ? boundary_jitter : 1.0);
    std::vector<ReviewerLabel> labels;
    for (const Episode& e : truth.episodes) {
        for (const std::string& reviewer : manifest.roster) {
            if (chance(rng, miss_probability)) {
                continue;
            }
            double t0 = e.t_start;
            double t1 = e.t_end;
            if (boundary_jitter > 0.0) {
                t0 += jitter(rng);
                t1 += jitter(rng);
            }
            if (t0 < t1) {
                labels.push_back({reviewer, e.trajectory_id, e.shelf_id, t0, t1});
            }
        }
    }
    return labels;
}

ReviewerManifest default_manifest(int n_l) {
    ReviewerManifest m;
    m.n_l = n_l;
    for (int i = 1; i <= n_l; ++i) {
        m.roster.push_back("r" + std::to_string(i));
    }
    return m;
}

ScenarioSpec parse_scenario(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("scenario is not valid JSON: ") + e.what());
    }
    ScenarioSpec spec;
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.walking_speed = doc.value("walking_speed", spec.walking_speed);
    spec.position_noise = doc.value("position_noise", 0.0);
    spec.heading_noise = doc.value("heading_noise", 0.0);
    if (doc.contains("layout")) {
        const json& l = doc["layout"];
        LayoutTemplate& t = spec.layout;
        t.store_id = l.value("store_id", t.store_id);
        t.shelf_count = l.value("shelf_count", t.shelf_count);
        t.shelves_per_row = l.value("shelves_per_row", t.shelves_per_row);
        t.shelf_length = l.value("shelf_length", t.shelf_length);
        t.shelf_depth = l.value("shelf_depth", t.shelf_depth);
        t.aisle_width = l.value("aisle_width", t.aisle_width);
        t.margin = l.value("margin", t.margin);
        t.pillars = l.value("pillars", t.pillars);
    }
    for (const json& s : detail::required<json>(doc, "shoppers")) {
        ShopperScript script;
        script.trajectory_id = s.contains("trajectory_id") ? detail::id_string(s["trajectory_id"]) : "";
        script.start = detail::point_from_json(detail::required<json>(s, "start"));
        if (s.contains("max_samples")) {
            script.max_samples = s["max_samples"].get<std::size_t>();
        }
        for (const json& w : detail::required<json>(s, "waypoints")) {
            Waypoint wp;
            wp.target = detail::point_from_json(detail::required<json>(w, "target"));
            wp.dwell = w.value("dwell", 0.0);
            if (w.contains("facing_shelf") && !w["facing_shelf"].is_null()) {
                wp.facing_shelf = w["facing_shelf"].get<int>();
            }
            if (w.contains("speed") && !w["speed"].is_null()) {
                wp.speed = w["speed"].get<double>();
            }
            wp.face_on_approach = w.value("face_on_approach", false);
            script.waypoints.push_back(wp);
        }
        spec.shoppers.push_back(std::move(script));
    }
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) { return parse_scenario(detail::read_text_file(path)); }

std::string format_scenario(const ScenarioSpec& spec) {
    json doc;
    doc["seed"] = spec.seed;
    doc["walking_speed"] = spec.walking_speed;
    doc["position_noise"] = spec.position_noise;
    doc["heading_noise"] = spec.heading_noise;
    const LayoutTemplate& t = spec.layout;
    doc["layout"] = {{"store_id", t.store_id},         {"shelf_count", t.shelf_count},
                     {"shelves_per_row", t.shelves_per_row}, {"shelf_length", t.shelf_length},
                     {"shelf_depth", t.shelf_depth},   {"aisle_width", t.aisle_width},
                     {"margin", t.margin},             {"pillars", t.pillars}};
    doc["shoppers"] = json::array();
    for (const ShopperScript& s : spec.shoppers) {
        json script;
        script["trajectory_id"] = s.trajectory_id;
        script["start"] = detail::point_to_json(s.start);
        if (s.max_samples) {
            script["max_samples"] = *s.max_samples;
        }
        script["waypoints"] = json::array();
        for (const Waypoint& w : s.waypoints) {
            json wp;
            wp["target"] = detail::point_to_json(w.target);
            wp["dwell"] = w.dwell;
            wp["facing_shelf"] = w.facing_shelf ? json(*w.facing_shelf) : json(nullptr);
            wp["speed"] = w.speed ? json(*w.speed) : json(nullptr);
            wp["face_on_approach"] = w.face_on_approach;
            script["waypoints"].push_back(std::move(wp));
        }
        doc["shoppers"].push_back(std::move(script));
    }
    return doc.dump(2) + "\n";
}

std::string format_episode(const Episode& episode) {
    json doc;
    doc["trajectory_id"] = episode.trajectory_id;
    doc["shelf_id"] = episode.shelf_id;
    doc["t_start"] = episode.t_start;
    doc["t_end"] = episode.t_end;
    return doc.dump();
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    std::string text;
    for (const Episode& e : truth.episodes) {
        text += format_episode(e);
        text += '\n';
    }
    detail::write_text_file(path, text);
}

} // namespace shelfscan
