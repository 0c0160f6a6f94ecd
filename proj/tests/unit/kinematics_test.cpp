#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "shelfscan/error.hpp"
#include "shelfscan/kinematics.hpp"

namespace shelfscan {
namespace {

using testing::make_trajectory;

ErrorKind error_kind(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::InvalidArgument;
}

std::vector<Vec2> xs(std::initializer_list<double> values) {
    std::vector<Vec2> out;
    for (double v : values) {
        out.push_back({v, 0.0});
    }
    return out;
}

TEST(LowPass, ConstantStaysConstant) {
    const std::vector<Vec2> in(10, Vec2{1.0, 1.0});
    for (Vec2 p : low_pass_positions(in, 5)) {
        EXPECT_DOUBLE_EQ(p.x, 1.0);
        EXPECT_DOUBLE_EQ(p.y, 1.0);
    }
}

TEST(LowPass, WindowOneIsIdentity) {
    const std::vector<Vec2> in{{0.3, -1.0}, {2.0, 5.5}, {-7.25, 0.1}};
    EXPECT_EQ(low_pass_positions(in, 1), in);
}

TEST(LowPass, TruncatedWindowAtEnds) {
    const auto out = low_pass_positions(xs({0, 1, 2, 3, 4}), 3);
    const std::vector<double> expected{0.5, 1.0, 2.0, 3.0, 3.5};
    ASSERT_EQ(out.size(), expected.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        EXPECT_DOUBLE_EQ(out[k].x, expected[k]) << k;
    }
}

TEST(LowPass, MatchesDirectWindowedMean) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d(0.0, 3.0);
    std::vector<Vec2> in(40);
    for (Vec2& p : in) {
        p = {d(rng), d(rng)};
    }
    for (int w : {1, 3, 5, 7, 41, 99}) {
        const auto out = low_pass_positions(in, w);
        for (std::size_t k = 0; k < in.size(); ++k) {
            double sx = 0.0;
            int count = 0;
            for (std::size_t i = 0; i < in.size(); ++i) {
                const auto dist = static_cast<long>(i) - static_cast<long>(k);
                if (std::abs(dist) <= w / 2) {
                    sx += in[i].x;
                    ++count;
                }
            }
            EXPECT_NEAR(out[k].x, sx / count, 1e-12);
        }
    }
}

TEST(LowPass, RejectsEvenOrNonPositiveWindow) {
    const auto in = xs({0, 1, 2});
    EXPECT_EQ(error_kind([&] { low_pass_positions(in, 4); }), ErrorKind::InvalidWindow);
    EXPECT_EQ(error_kind([&] { low_pass_positions(in, 0); }), ErrorKind::InvalidWindow);
    EXPECT_EQ(error_kind([&] { low_pass_positions(in, -3); }), ErrorKind::InvalidWindow);
}

TEST(Track, StationaryShopperHasZeroSpeed) {
    const KinematicTrack track = build_track(testing::standing({3, 4}, 1.0, 12));
    for (double v : track.speeds) {
        EXPECT_DOUBLE_EQ(v, 0.0);
    }
}

TEST(Track, CentralDifference) {
    const Trajectory t = make_trajectory({{0, 0}, {0.1, 0}, {0.2, 0}}, {0, 0, 0});
    const KinematicTrack track = build_track(t, 1);
    EXPECT_NEAR(track.speeds[1], 1.0, 1e-12);
}

TEST(Track, UniformMotionWindowOne) {
    const KinematicTrack track = build_track(testing::walking({0, 0}, {0.5, 0}, 0.0, 30), 1);
    for (double v : track.speeds) {
        EXPECT_NEAR(v, 0.5, 1e-12);
    }
}

TEST(Track, LinearMotionAnyDirectionWindowOne) {
    const Vec2 velocity{0.3, -0.4};
    const KinematicTrack track = build_track(testing::walking({1, 2}, velocity, 0.0, 20), 1);
    for (std::size_t k = 1; k + 1 < track.size(); ++k) {
        EXPECT_NEAR(track.speeds[k], 0.5, 1e-12);
    }
}

TEST(Track, HeadingIsUnitVectorOfTheta) {
    const KinematicTrack track = build_track(testing::standing({0, 0}, std::numbers::pi / 2, 5));
    EXPECT_NEAR(track.headings[2].x, 0.0, 1e-12);
    EXPECT_NEAR(track.headings[2].y, 1.0, 1e-12);
}

TEST(Track, HeadingIsNotFiltered) {
    Trajectory t = testing::standing({0, 0}, 0.0, 7);
    t.samples[3].theta = 2.0;
    const KinematicTrack track = build_track(t, 5);
    EXPECT_NEAR(track.headings[3].x, std::cos(2.0), 1e-15);
    EXPECT_NEAR(track.headings[2].x, 1.0, 1e-15);
}

Trajectory random_walk(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 0.1);
    std::vector<Vec2> pts{{0, 0}};
    std::vector<double> th{0.0};
    for (std::size_t k = 1; k < n; ++k) {
        pts.push_back(pts.back() + Vec2{d(rng), d(rng)});
        th.push_back(0.0);
    }
    return make_trajectory(pts, th);
}

TEST(Track, TranslationShiftsPositionsOnly) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Trajectory t = random_walk(seed, 50);
        Trajectory moved = t;
        const Vec2 shift{12.5, -3.25};
        for (RawSample& s : moved.samples) {
            s.position = s.position + shift;
        }
        const KinematicTrack a = build_track(t, 5);
        const KinematicTrack b = build_track(moved, 5);
        for (std::size_t k = 0; k < a.size(); ++k) {
            EXPECT_NEAR(b.positions[k].x, a.positions[k].x + shift.x, 1e-9);
            EXPECT_NEAR(b.positions[k].y, a.positions[k].y + shift.y, 1e-9);
            EXPECT_NEAR(b.speeds[k], a.speeds[k], 1e-9);
        }
    }
}

TEST(Track, SpeedsInvariantUnderRotation) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Trajectory t = random_walk(seed, 50);
        Trajectory turned = t;
        for (RawSample& s : turned.samples) {
            s.position = rotate(s.position, 0.7 + static_cast<double>(seed));
        }
        const KinematicTrack a = build_track(t, 3);
        const KinematicTrack b = build_track(turned, 3);
        for (std::size_t k = 0; k < a.size(); ++k) {
            EXPECT_NEAR(b.speeds[k], a.speeds[k], 1e-9);
        }
    }
}

TEST(Track, EndpointsUseOneSidedDifferences) {
    const Trajectory t = make_trajectory({{0, 0}, {0.1, 0}, {0.3, 0}, {0.6, 0}}, {0, 0, 0, 0});
    const KinematicTrack track = build_track(t, 1);
    EXPECT_NEAR(track.speeds.front(), 1.0, 1e-12);
    EXPECT_NEAR(track.speeds.back(), 3.0, 1e-12);
    EXPECT_EQ(track.speeds.size(), 4u);
}

TEST(Validation, TooShort) {
    EXPECT_EQ(error_kind([] { build_track(testing::standing({0, 0}, 0, 2)); }), ErrorKind::TooShort);
}

TEST(Validation, IrregularSpacing) {
    Trajectory t = testing::standing({0, 0}, 0, 5);
    t.samples[2].t = 0.23;
    EXPECT_EQ(error_kind([&] { validate_trajectory(t); }), ErrorKind::Validation);
}

TEST(Validation, ThetaOutOfRange) {
    Trajectory t = testing::standing({0, 0}, 0, 5);
    t.samples[1].theta = 4.0;
    EXPECT_EQ(error_kind([&] { validate_trajectory(t); }), ErrorKind::Validation);
}

TEST(Validation, NonFinitePosition) {
    Trajectory t = testing::standing({0, 0}, 0, 5);
    t.samples[1].position.x = std::nan("");
    EXPECT_EQ(error_kind([&] { validate_trajectory(t); }), ErrorKind::Validation);
}

Trajectory with_times(const std::vector<double>& times) {
    Trajectory t;
    t.trajectory_id = "r";
    t.source_id = "r";
    t.store_id = "s";
    for (double time : times) {
        t.samples.push_back({time, {time, 0.0}, 0.0});
    }
    return t;
}

TEST(Gaps, SplitAtDropout) {
    const auto pieces = split_on_gaps(with_times({0.0, 0.1, 0.2, 0.3, 1.0, 1.1, 1.2}));
    ASSERT_EQ(pieces.size(), 2u);
    EXPECT_EQ(pieces[0].samples.size(), 4u);
    EXPECT_EQ(pieces[1].samples.size(), 3u);
    EXPECT_EQ(pieces[0].trajectory_id, "r/0");
    EXPECT_EQ(pieces[1].trajectory_id, "r/1");
    EXPECT_EQ(pieces[1].source_id, "r");
}

TEST(Gaps, ShortPiecesDropped) {
    const auto pieces = split_on_gaps(with_times({0.0, 0.1, 0.5, 0.6, 0.7}));
    ASSERT_EQ(pieces.size(), 1u);
    EXPECT_EQ(pieces[0].samples.size(), 3u);
}

TEST(Gaps, NoGapKeepsIdentifier) {
    const auto pieces = split_on_gaps(with_times({0.0, 0.1, 0.2}));
    ASSERT_EQ(pieces.size(), 1u);
    EXPECT_EQ(pieces[0].trajectory_id, "r");
}

TEST(Gaps, IrregularStepIsAnError) {
    EXPECT_EQ(error_kind([] { split_on_gaps(with_times({0.0, 0.1, 0.14, 0.24})); }), ErrorKind::Validation);
}

TEST(Records, RoundTrip) {
    const Trajectory t = make_trajectory({{0.5, 1.0 / 3.0}, {0.6, 0.4}, {0.7, 0.5}}, {0.1, -2.0, 3.0}, "abc", "s9");
    const Trajectory back = parse_trajectory_record(format_trajectory_record(t));
    EXPECT_EQ(back.trajectory_id, "abc");
    EXPECT_EQ(back.store_id, "s9");
    ASSERT_EQ(back.samples.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(back.samples[k].position, t.samples[k].position);
        EXPECT_DOUBLE_EQ(back.samples[k].theta, t.samples[k].theta);
        EXPECT_DOUBLE_EQ(back.samples[k].t, t.samples[k].t);
    }
}

TEST(Records, ParseReferenceLayout) {
    const Trajectory t =
        parse_trajectory_record(R"({"trajectory_id":7,"store_id":"s1","samples":[[0,1,2,0.5],[0.1,1,2,0.5],[0.2,1,2,0.5]]})");
    EXPECT_EQ(t.trajectory_id, "7");
    EXPECT_EQ(t.samples.size(), 3u);
    EXPECT_EQ(t.samples[1].position, (Vec2{1, 2}));
}

TEST(Records, MalformedRecord) {
    EXPECT_EQ(error_kind([] { parse_trajectory_record("not json"); }), ErrorKind::Parse);
    EXPECT_EQ(error_kind([] { parse_trajectory_record(R"({"trajectory_id":"a","store_id":"s","samples":[[0,1]]})"); }),
              ErrorKind::Parse);
}

TEST(Records, FileLoadSplitsGaps) {
    const auto path = std::filesystem::temp_directory_path() / "shelfscan_traj_gap.jsonl";
    std::vector<Trajectory> in{with_times({0.0, 0.1, 0.2, 0.9, 1.0, 1.1}), testing::standing({1, 1}, 0, 4, "b")};
    save_trajectories(in, path);
    const auto loaded = load_trajectories(path);
    std::filesystem::remove(path);
    ASSERT_EQ(loaded.size(), 3u);
    EXPECT_EQ(loaded[0].trajectory_id, "r/0");
    EXPECT_EQ(loaded[1].trajectory_id, "r/1");
    EXPECT_EQ(loaded[2].trajectory_id, "b");
}

} // namespace
} // namespace shelfscan
