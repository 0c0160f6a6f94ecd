#include <random>

#include <gtest/gtest.h>

#include "shelfscan/error.hpp"
#include "shelfscan/stop_detector.hpp"
#include "shelfscan/synth.hpp"

namespace shelfscan {
namespace {

const StopParams kParams{2.0, 1.2, 0.55};

std::vector<StopEvent> detect_all(const SynthOutput& out, const StopParams& params = kParams) {
    std::vector<StopEvent> events;
    for (const Trajectory& t : out.trajectories) {
        const auto d = detect_stops(build_track(t), out.layout, params);
        events.insert(events.end(), d.events.begin(), d.events.end());
    }
    return events;
}

ScenarioSpec single_dwell(double seconds, double distance = 1.0) {
    ScenarioSpec spec;
    spec.seed = 1;
    const StoreLayout layout = make_layout(spec.layout, spec.seed);
    ScriptBuilder b(layout, spec.layout, "dweller", {spec.layout.corridor_x(), 0.5});
    b.dwell_at_shelf(1, distance, 0.5, seconds);
    b.walk_to({spec.layout.corridor_x(), 0.5});
    spec.shoppers.push_back(b.build());
    return spec;
}

TEST(Synth, ThreeSecondDwellIsOneStop) {
    const SynthOutput out = generate(single_dwell(3.0));
    const auto events = detect_all(out);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].shelf_id, 1);
    ASSERT_EQ(out.truth.episodes.size(), 1u);
    EXPECT_EQ(out.truth.episodes[0].shelf_id, 1);
    EXPECT_NEAR(out.truth.episodes[0].t_end - out.truth.episodes[0].t_start, 3.0, 1e-9);
}

TEST(Synth, OneSecondDwellIsNoStop) { EXPECT_TRUE(detect_all(generate(single_dwell(1.0))).empty()); }

TEST(Synth, SameSeedSameTrajectories) {
    const ScenarioSpec spec = random_shopping_scenario(5, 12, 77, 0.05, 0.1);
    const SynthOutput a = generate(spec);
    const SynthOutput b = generate(spec);
    ASSERT_EQ(a.trajectories.size(), b.trajectories.size());
    for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
        EXPECT_EQ(format_trajectory_record(a.trajectories[i]), format_trajectory_record(b.trajectories[i]));
    }
    EXPECT_EQ(format_layout(a.layout), format_layout(b.layout));
}

TEST(Synth, DifferentSeedsDiffer) {
    const SynthOutput a = generate(random_shopping_scenario(3, 12, 1));
    const SynthOutput b = generate(random_shopping_scenario(3, 12, 2));
    EXPECT_NE(format_trajectory_record(a.trajectories[0]), format_trajectory_record(b.trajectories[0]));
}

TEST(Synth, SamplesAtTenHertz) {
    const SynthOutput out = generate(random_shopping_scenario(2, 6, 3));
    for (const Trajectory& t : out.trajectories) {
        EXPECT_NO_THROW(validate_trajectory(t));
        EXPECT_EQ(t.samples.front().t, 0.0);
    }
}

TEST(Synth, ExactLengthWhenRequested) {
    const SynthOutput out = generate(random_shopping_scenario(4, 50, 3, 0.02, 0.05, 600));
    for (const Trajectory& t : out.trajectories) {
        EXPECT_EQ(t.samples.size(), 600u);
    }
    EXPECT_EQ(out.layout.shelf_count(), 50);
}

TEST(Synth, EpisodesDoNotOverlap) {
    const SynthOutput out = generate(random_shopping_scenario(20, 10, 4));
    for (std::size_t i = 1; i < out.truth.episodes.size(); ++i) {
        const Episode& a = out.truth.episodes[i - 1];
        const Episode& b = out.truth.episodes[i];
        EXPECT_LT(a.t_start, a.t_end);
        if (a.trajectory_id == b.trajectory_id) {
            EXPECT_LE(a.t_end, b.t_start + 1e-12);
        }
    }
}

TEST(Synth, InfeasibleScripts) {
    auto kind = [](const ScenarioSpec& spec) {
        try {
            generate(spec);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    ScenarioSpec outside = single_dwell(3.0);
    outside.shoppers[0].waypoints.push_back({{-50.0, 0.0}, 0.0, std::nullopt, std::nullopt, false});
    EXPECT_EQ(kind(outside), ErrorKind::InfeasibleScript);

    ScenarioSpec negative = single_dwell(3.0);
    negative.shoppers[0].waypoints[0].dwell = -1.0;
    EXPECT_EQ(kind(negative), ErrorKind::InfeasibleScript);

    ScenarioSpec slow = single_dwell(3.0);
    slow.shoppers[0].waypoints[0].speed = 0.0;
    EXPECT_EQ(kind(slow), ErrorKind::InfeasibleScript);

    ScenarioSpec unknown = single_dwell(3.0);
    unknown.shoppers[0].waypoints[0].facing_shelf = 99;
    EXPECT_EQ(kind(unknown), ErrorKind::InfeasibleScript);

    ScenarioSpec brief = single_dwell(3.0);
    brief.shoppers[0].max_samples = 2;
    EXPECT_EQ(kind(brief), ErrorKind::InfeasibleScript);
}

// Walking no faster than v_b keeps every sample slow, so only duration and distance decide.
TEST(Synth, DwellMarginsDecideDetection) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        ScenarioSpec spec;
        spec.seed = static_cast<std::uint64_t>(trial);
        spec.walking_speed = 0.5;
        const StoreLayout layout = make_layout(spec.layout, spec.seed);
        ScriptBuilder b(layout, spec.layout, "m" + std::to_string(trial), {spec.layout.corridor_x(), 0.5});
        std::vector<bool> expect_stop;
        for (int v = 0; v < 6; ++v) {
            const int shelf = 1 + v % spec.layout.shelf_count;
            const bool longer = u(rng) < 0.5;
            const double seconds = longer ? 2.2 + 3.0 * u(rng) : 0.3 + 1.5 * u(rng);
            b.dwell_at_shelf(shelf, 0.3 + 0.85 * u(rng), 0.2 + 0.6 * u(rng), seconds);
            expect_stop.push_back(longer);
        }
        b.walk_to({spec.layout.corridor_x(), 0.5});
        spec.shoppers.push_back(b.build());
        const SynthOutput out = generate(spec);
        const auto events = detect_all(out);
        std::size_t expected = 0;
        for (bool s : expect_stop) {
            expected += s ? 1 : 0;
        }
        EXPECT_EQ(events.size(), expected) << trial;
        for (const StopEvent& e : events) {
            bool matched = false;
            for (const Episode& ep : out.truth.episodes) {
                matched = matched || (ep.shelf_id == e.shelf_id && e.t_s >= ep.t_start - 1e-9 && e.t_f <= ep.t_end);
            }
            EXPECT_TRUE(matched);
        }
    }
}

TEST(Synth, CalibrationScenarioIsNoiseFree) {
    const ScenarioSpec spec = calibration_scenario(3, 1);
    EXPECT_EQ(spec.position_noise, 0.0);
    EXPECT_EQ(spec.heading_noise, 0.0);
    const SynthOutput out = generate(spec);
    EXPECT_FALSE(detect_all(out).empty());
}

TEST(Synth, PlantedLabelsCoverDetectedStops) {
    const SynthOutput out = generate(calibration_scenario(2, 9));
    const auto labels = planted_labels(out.trajectories, out.layout, kParams, 5, default_manifest(4));
    EXPECT_EQ(labels.size(), 4 * detect_all(out).size());
}

TEST(Synth, ScenarioJsonRoundTrip) {
    const ScenarioSpec spec = random_shopping_scenario(3, 7, 5, 0.01, 0.02, 300);
    const ScenarioSpec back = parse_scenario(format_scenario(spec));
    EXPECT_EQ(format_scenario(back), format_scenario(spec));
    const SynthOutput a = generate(spec);
    const SynthOutput b = generate(back);
    EXPECT_EQ(format_trajectory_record(a.trajectories[2]), format_trajectory_record(b.trajectories[2]));
}

TEST(Synth, LayoutIsValidForManyTemplates) {
    for (int n = 1; n <= 50; n += 7) {
        LayoutTemplate t;
        t.shelf_count = n;
        t.shelves_per_row = 1 + n % 6;
        t.pillars = n % 4;
        StoreLayout layout = make_layout(t, static_cast<std::uint64_t>(n));
        EXPECT_NO_THROW(validate_layout(layout));
        EXPECT_EQ(layout.shelf_count(), n);
        EXPECT_EQ(layout.portals.size(), 2u);
    }
}

} // namespace
} // namespace shelfscan
