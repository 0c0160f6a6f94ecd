#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "datasets.hpp"
#include "fixtures.hpp"
#include "shelfscan/calibration.hpp"
#include "shelfscan/error.hpp"

namespace shelfscan {
namespace {

using testing::kPlanted;

VisitMatrix visits_from(const StopMatrix& m) { return {m.trajectory_id, 1, m.marks}; }

StopMatrix row_matrix(const std::vector<int>& bits) {
    StopMatrix m{"t", ShelfTimeMatrix(1, bits.size())};
    for (std::size_t k = 0; k < bits.size(); ++k) {
        m.marks.set(1, k, bits[k] != 0);
    }
    return m;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

TEST(Confusion, PerfectAgreement) {
    const StopMatrix s = row_matrix({1, 1, 0, 1});
    EXPECT_EQ(confusion_counts(s, visits_from(s)), (ConfusionCounts{3, 0, 0}));
}

TEST(Confusion, NothingDetected) {
    EXPECT_EQ(confusion_counts(row_matrix({0, 0, 0}), visits_from(row_matrix({1, 0, 1}))), (ConfusionCounts{0, 0, 2}));
}

TEST(Confusion, MixedCounts) {
    EXPECT_EQ(confusion_counts(row_matrix({1, 1, 0, 0}), visits_from(row_matrix({1, 0, 1, 0}))),
              (ConfusionCounts{1, 1, 1}));
}

TEST(Confusion, AxisMismatch) {
    try {
        confusion_counts(row_matrix({1, 1}), visits_from(row_matrix({1, 1, 0})));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AxisMismatch);
    }
}

TEST(Confusion, AdditiveOverTrajectories) {
    std::mt19937_64 rng(2);
    std::vector<StopMatrix> s;
    std::vector<VisitMatrix> v;
    ConfusionCounts sum;
    for (int i = 0; i < 20; ++i) {
        std::vector<int> a(15);
        std::vector<int> b(15);
        for (int k = 0; k < 15; ++k) {
            a[k] = static_cast<int>(rng() % 2);
            b[k] = static_cast<int>(rng() % 2);
        }
        s.push_back(row_matrix(a));
        v.push_back(visits_from(row_matrix(b)));
        sum += confusion_counts(s.back(), v.back());
    }
    EXPECT_EQ(confusion_counts(s, v), sum);
}

TEST(Metrics, Examples) {
    const MetricsReport a = precision_recall_f1({2, 1, 1});
    EXPECT_DOUBLE_EQ(a.precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(a.recall, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(a.f1, 2.0 / 3.0);
    const MetricsReport b = precision_recall_f1({5, 0, 0});
    EXPECT_EQ(b.precision, 1.0);
    EXPECT_EQ(b.recall, 1.0);
    EXPECT_EQ(b.f1, 1.0);
    const MetricsReport c = precision_recall_f1({0, 3, 2});
    EXPECT_EQ(c.precision, 0.0);
    EXPECT_EQ(c.recall, 0.0);
    EXPECT_EQ(c.f1, 0.0);
    const MetricsReport d = precision_recall_f1({0, 0, 0});
    EXPECT_EQ(d.f1, 0.0);
}

TEST(Metrics, HarmonicMeanIdentity) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 2000; ++i) {
        const ConfusionCounts c{rng() % 50, rng() % 50, rng() % 50};
        const MetricsReport m = precision_recall_f1(c);
        if (m.precision + m.recall > 0) {
            EXPECT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-12);
        }
        EXPECT_LE(m.f1, 2 * std::min(m.precision, m.recall) + 1e-12);
    }
}

TEST(Grid, DecimalStepsLandExactly) {
    const auto t = AxisRange{0.5, 4.0, 0.1}.values();
    ASSERT_EQ(t.size(), 36u);
    EXPECT_EQ(t[15], 2.0);
    EXPECT_EQ(t.back(), 4.0);
    const auto d = AxisRange{0.3, 3.0, 0.05}.values();
    EXPECT_EQ(d.size(), 55u);
    EXPECT_EQ(d[18], 1.2);
    const auto v = AxisRange{0.1, 1.5, 0.01}.values();
    EXPECT_EQ(v.size(), 141u);
    EXPECT_EQ(v[45], 0.55);
    EXPECT_EQ(ParamGrid{}.size(), 36u * 55u * 141u);
}

TEST(Grid, Validation) {
    ParamGrid g;
    g.t_b = {3.0, 1.0, 0.1};
    try {
        g.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyGrid);
    }
    g.t_b = {1.0, 3.0, 0.0};
    EXPECT_THROW(g.validate(), Error);
}

class PlantedData : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        data_ = new testing::Dataset(testing::planted_dataset(20, 5));
        prepared_ = new PreparedDataset(prepare_dataset(data_->labeled, data_->layout, 2));
    }
    static void TearDownTestSuite() {
        delete prepared_;
        delete data_;
    }
    static testing::Dataset* data_;
    static PreparedDataset* prepared_;
};
testing::Dataset* PlantedData::data_ = nullptr;
PreparedDataset* PlantedData::prepared_ = nullptr;

TEST_F(PlantedData, RecoversPlantedPoint) {
    const CalibrationResult r = calibrate(data_->labeled, data_->layout, testing::planted_grid(), {2, false, 0});
    EXPECT_EQ(r.best_f1, 1.0);
    EXPECT_EQ(r.best_params, kPlanted);
    EXPECT_EQ(r.evaluated_points, 125u);
}

TEST_F(PlantedData, PlantedPointIsUniqueMaximizer) {
    const CalibrationResult r = calibrate(*prepared_, all_indices(prepared_->size()), testing::planted_grid(), {1, true, 0});
    int perfect = 0;
    for (const GridScore& s : r.table) {
        if (s.metrics.f1 == 1.0) {
            ++perfect;
            EXPECT_EQ(s.params, kPlanted);
        }
    }
    EXPECT_EQ(perfect, 1);
}

TEST_F(PlantedData, TableMatchesDirectScoring) {
    const auto idx = all_indices(prepared_->size());
    const CalibrationResult r = calibrate(*prepared_, idx, testing::planted_grid(), {3, true, 0});
    ASSERT_EQ(r.table.size(), 125u);
    for (const GridScore& s : r.table) {
        EXPECT_EQ(s.counts, score_params(*prepared_, idx, s.params));
    }
}

TEST_F(PlantedData, SinglePointGridReturnsThatPoint) {
    const StopParams odd{3.3, 0.4, 1.4};
    const CalibrationResult r = calibrate(*prepared_, all_indices(prepared_->size()), single_point_grid(odd));
    EXPECT_EQ(r.best_params, odd);
    EXPECT_EQ(r.evaluated_points, 1u);
}

TEST_F(PlantedData, JobCountDoesNotChangeResult) {
    const auto idx = all_indices(prepared_->size());
    const CalibrationResult a = calibrate(*prepared_, idx, testing::planted_grid(), {1, true, 0});
    const CalibrationResult b = calibrate(*prepared_, idx, testing::planted_grid(), {7, true, 0});
    EXPECT_EQ(a.best_params, b.best_params);
    ASSERT_EQ(a.table.size(), b.table.size());
    for (std::size_t i = 0; i < a.table.size(); ++i) {
        EXPECT_EQ(a.table[i].counts, b.table[i].counts);
    }
}

TEST_F(PlantedData, RefinementFindsPlantedPoint) {
    ParamGrid fine;
    fine.t_b = {1.0, 3.0, 0.1};
    fine.delta_b = {0.8, 1.6, 0.05};
    fine.v_b = {0.35, 0.75, 0.01};
    const CalibrationResult r = calibrate(*prepared_, all_indices(prepared_->size()), fine, {2, false, 4});
    EXPECT_EQ(r.best_f1, 1.0);
    EXPECT_LT(r.evaluated_points, fine.size());
}

TEST_F(PlantedData, SameStoreEvalIsPerfectAndDeterministic) {
    const EvalReport a = same_store_eval(*prepared_, testing::planted_grid(), 0.3, 5, 99, {2, false, 0});
    const EvalReport b = same_store_eval(*prepared_, testing::planted_grid(), 0.3, 5, 99, {1, false, 0});
    ASSERT_EQ(a.scores.size(), 5u);
    EXPECT_EQ(a.mean_f1, 1.0);
    EXPECT_EQ(a.std_error, 0.0);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(a.scores[i].train_size, 6u);
        EXPECT_EQ(a.scores[i].test_size, 14u);
        EXPECT_EQ(a.scores[i].params, b.scores[i].params);
        EXPECT_EQ(a.scores[i].test.counts, b.scores[i].test.counts);
    }
}

TEST_F(PlantedData, CrossStoreOnItselfIsPerfect) {
    const EvalReport r = cross_store_eval(*prepared_, *prepared_, testing::planted_grid(), 1.0, 3, 1);
    EXPECT_EQ(r.mean_f1, 1.0);
    for (const RepeatScore& s : r.scores) {
        EXPECT_EQ(s.train_size, prepared_->size());
        EXPECT_EQ(s.test_size, prepared_->size());
    }
}

TEST_F(PlantedData, EvalArgumentErrors) {
    auto kind = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    const ParamGrid g = single_point_grid(kPlanted);
    EXPECT_EQ(kind([&] { same_store_eval(*prepared_, g, 0.0, 1, 0); }), ErrorKind::FractionOutOfRange);
    EXPECT_EQ(kind([&] { same_store_eval(*prepared_, g, 1.0, 1, 0); }), ErrorKind::FractionOutOfRange);
    EXPECT_EQ(kind([&] { cross_store_eval(*prepared_, *prepared_, g, 1.5, 1, 0); }), ErrorKind::FractionOutOfRange);
    PreparedDataset two = *prepared_;
    two.tracks.resize(1);
    EXPECT_EQ(kind([&] { same_store_eval(two, g, 0.5, 1, 0); }), ErrorKind::DegenerateSplit);
    PreparedDataset none = *prepared_;
    none.tracks.clear();
    EXPECT_EQ(kind([&] { calibrate(none, {}, g); }), ErrorKind::EmptyDataset);
}

TEST(Calibration, BestBeatsEveryGridPointOnNoisyData) {
    const testing::Dataset d = testing::noisy_dataset(30, 8, 21);
    const PreparedDataset prepared = prepare_dataset(d.labeled, d.layout, 2);
    ParamGrid g;
    g.t_b = {0.5, 3.5, 0.5};
    g.delta_b = {0.4, 2.0, 0.4};
    g.v_b = {0.2, 1.0, 0.2};
    const auto idx = all_indices(prepared.size());
    const CalibrationResult r = calibrate(prepared, idx, g, {2, true, 0});
    for (const GridScore& s : r.table) {
        const double f1 = precision_recall_f1(score_params(prepared, idx, s.params)).f1;
        EXPECT_LE(f1, r.best_f1);
        if (f1 == r.best_f1) {
            EXPECT_FALSE(std::tie(s.params.t_b, s.params.delta_b, s.params.v_b) <
                         std::tie(r.best_params.t_b, r.best_params.delta_b, r.best_params.v_b));
        }
    }
    EXPECT_GT(r.best_f1, 0.0);
    EXPECT_LT(r.best_f1, 1.0);
}

TEST(Calibration, StoreMismatch) {
    testing::Dataset d = testing::planted_dataset(2, 1);
    d.layout.store_id = "elsewhere";
    try {
        prepare_dataset(d.labeled, d.layout);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::FrameMismatch);
    }
}

TEST(Evaluation, TrainSize) {
    EXPECT_EQ(train_size_for(0.1, 100), 10u);
    EXPECT_EQ(train_size_for(0.3, 10), 3u);
    EXPECT_EQ(train_size_for(0.25, 10), 3u);
    EXPECT_EQ(train_size_for(1.0, 7), 7u);
}

TEST(Evaluation, SubsetsAreSortedUniqueAndSeeded) {
    std::uint64_t s1 = 42;
    std::uint64_t s2 = 42;
    for (int i = 0; i < 50; ++i) {
        const auto a = draw_subset(30, 11, s1);
        const auto b = draw_subset(30, 11, s2);
        EXPECT_EQ(a, b);
        ASSERT_EQ(a.size(), 11u);
        EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
        EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 11u);
        EXPECT_LT(a.back(), 30u);
    }
}

TEST(Evaluation, StandardErrorFromRepeats) {
    const testing::Dataset d = testing::noisy_dataset(20, 6, 8);
    const PreparedDataset prepared = prepare_dataset(d.labeled, d.layout);
    ParamGrid g;
    g.t_b = {1.0, 2.0, 1.0};
    g.delta_b = {0.8, 1.6, 0.8};
    g.v_b = {0.3, 0.6, 0.3};
    const EvalReport r = same_store_eval(prepared, g, 0.5, 6, 3);
    double mean = 0.0;
    for (const RepeatScore& s : r.scores) {
        mean += s.test.f1;
    }
    mean /= 6.0;
    double ss = 0.0;
    for (const RepeatScore& s : r.scores) {
        ss += (s.test.f1 - mean) * (s.test.f1 - mean);
    }
    EXPECT_NEAR(r.mean_f1, mean, 1e-12);
    EXPECT_NEAR(r.std_error, std::sqrt(ss / 5.0) / std::sqrt(6.0), 1e-12);
    EXPECT_EQ(same_store_eval(prepared, g, 0.5, 1, 3).std_error, 0.0);
}

} // namespace
} // namespace shelfscan
