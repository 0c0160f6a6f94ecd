#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "shelfscan/analytics.hpp"
#include "shelfscan/error.hpp"

namespace shelfscan {
namespace {

StopEvent stop_on(int shelf) {
    StopEvent e;
    e.trajectory_id = "t";
    e.shelf_id = shelf;
    return e;
}

VisitVector vec(std::string id, std::vector<std::uint8_t> bits) { return {std::move(id), std::move(bits)}; }

TEST(VisitVectors, TwoShelves) {
    const std::vector<StopEvent> events{stop_on(1), stop_on(5)};
    const VisitVector v = visit_vector("t", events, 19);
    ASSERT_EQ(v.bits.size(), 19u);
    EXPECT_EQ(v.visited_count(), 2);
    EXPECT_EQ(v.bits[0], 1);
    EXPECT_EQ(v.bits[4], 1);
}

TEST(VisitVectors, NoStops) {
    const VisitVector v = visit_vector("t", {}, 4);
    EXPECT_EQ(v.visited_count(), 0);
    EXPECT_EQ(v.bits.size(), 4u);
}

TEST(VisitVectors, RepeatedStopsBinarize) {
    const std::vector<StopEvent> events{stop_on(7), stop_on(7), stop_on(7)};
    const VisitVector v = visit_vector("t", events, 10);
    EXPECT_EQ(v.visited_count(), 1);
    EXPECT_EQ(v.bits[6], 1);
}

TEST(VisitVectors, ShelfOutOfRange) {
    const std::vector<StopEvent> events{stop_on(11)};
    try {
        visit_vector("t", events, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShelfOutOfRange);
    }
}

TEST(ShelfStats, Arithmetic) {
    const std::vector<VisitVector> v{vec("a", {1, 0}), vec("b", {1, 1})};
    const ShelfStats s = shelf_stats(v);
    EXPECT_DOUBLE_EQ(s.per_shelf[0], 1.0);
    EXPECT_DOUBLE_EQ(s.per_shelf[1], 0.5);
    EXPECT_DOUBLE_EQ(s.overall_visits_per_trip, 1.5);
}

TEST(ShelfStats, Errors) {
    EXPECT_THROW(shelf_stats({}), Error);
    const std::vector<VisitVector> v{vec("a", {1, 0}), vec("b", {1, 1, 0})};
    try {
        shelf_stats(v);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
    }
}

std::vector<VisitVector> random_vectors(std::mt19937_64& rng, std::size_t count, std::size_t shelves) {
    std::vector<VisitVector> out;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::uint8_t> bits(shelves);
        for (auto& b : bits) {
            b = static_cast<std::uint8_t>(rng() % 3 == 0);
        }
        out.push_back(vec("t" + std::to_string(i), bits));
    }
    return out;
}

TEST(ShelfStats, OverallIsSumOfPerShelf) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto v = random_vectors(rng, 1 + rng() % 200, 1 + rng() % 40);
        const ShelfStats s = shelf_stats(v);
        double sum = 0.0;
        for (double x : s.per_shelf) {
            sum += x;
        }
        EXPECT_NEAR(s.overall_visits_per_trip, sum, 1e-12);
    }
}

TEST(ShelfStats, OrderDoesNotMatter) {
    std::mt19937_64 rng(9);
    auto v = random_vectors(rng, 77, 12);
    const ShelfStats a = shelf_stats(v);
    std::shuffle(v.begin(), v.end(), rng);
    const ShelfStats b = shelf_stats(v);
    EXPECT_EQ(a.per_shelf, b.per_shelf);
    EXPECT_EQ(a.overall_visits_per_trip, b.overall_visits_per_trip);
}

TEST(Conversion, HalfOfVisitsConvert) {
    const std::vector<VisitVector> v{vec("a", {1, 0}), vec("b", {1, 0})};
    const std::vector<PurchaseRecord> p{{"a", 1, 1}};
    const ConversionVector c = conversion_rates(shelf_stats(v), p);
    ASSERT_TRUE(c.shelves[0].rate);
    EXPECT_DOUBLE_EQ(*c.shelves[0].rate, 0.5);
    EXPECT_DOUBLE_EQ(c.shelves[0].purchase_average, 0.5);
    EXPECT_FALSE(c.shelves[1].rate);
}

TEST(Conversion, UnvisitedShelfIsUndefinedEvenWithPurchases) {
    const std::vector<VisitVector> v{vec("a", {1, 0})};
    const std::vector<PurchaseRecord> p{{"a", 2, 3}};
    const ConversionVector c = conversion_rates(shelf_stats(v), p);
    EXPECT_FALSE(c.shelves[1].rate);
    EXPECT_DOUBLE_EQ(c.shelves[1].purchase_average, 3.0);
    std::ostringstream csv;
    write_conversion_csv(csv, c);
    EXPECT_NE(csv.str().find("2,0,3,undefined"), std::string::npos) << csv.str();
}

TEST(Conversion, RatesMayExceedOneHundredPercent) {
    const std::vector<VisitVector> v{vec("a", {1}), vec("b", {0})};
    const std::vector<PurchaseRecord> p{{"a", 1, 2}, {"b", 1, 4}};
    const ConversionVector c = conversion_rates(shelf_stats(v), p);
    EXPECT_DOUBLE_EQ(*c.shelves[0].rate, 6.0);
}

TEST(Conversion, IncidenceMode) {
    const std::vector<VisitVector> v{vec("a", {1}), vec("b", {1})};
    const std::vector<PurchaseRecord> p{{"a", 1, 5}, {"a", 1, 2}};
    const ConversionVector c = conversion_rates(shelf_stats(v), p, PurchaseMode::Incidence);
    EXPECT_DOUBLE_EQ(*c.shelves[0].rate, 0.5);
    EXPECT_DOUBLE_EQ(*conversion_rates(shelf_stats(v), p).shelves[0].rate, 3.5);
}

TEST(Conversion, DuplicatingPopulationKeepsRates) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        auto v = random_vectors(rng, 30, 6);
        std::vector<PurchaseRecord> p;
        for (const VisitVector& x : v) {
            p.push_back({x.trajectory_id, static_cast<int>(1 + rng() % 6), rng() % 4});
        }
        const ConversionVector a = conversion_rates(shelf_stats(v), p);
        const std::size_t n = v.size();
        const std::size_t np = p.size();
        for (std::size_t i = 0; i < n; ++i) {
            v.push_back(vec(v[i].trajectory_id + "'", v[i].bits));
        }
        for (std::size_t i = 0; i < np; ++i) {
            p.push_back({p[i].trajectory_id + "'", p[i].shelf_id, p[i].quantity});
        }
        const ConversionVector b = conversion_rates(shelf_stats(v), p);
        for (std::size_t j = 0; j < a.shelves.size(); ++j) {
            ASSERT_EQ(a.shelves[j].rate.has_value(), b.shelves[j].rate.has_value());
            if (a.shelves[j].rate) {
                EXPECT_NEAR(*a.shelves[j].rate, *b.shelves[j].rate, 1e-12);
            }
        }
    }
}

TEST(Conversion, Errors) {
    const std::vector<VisitVector> v{vec("a", {1, 0})};
    auto kind = [&](std::vector<PurchaseRecord> p) {
        try {
            conversion_rates(shelf_stats(v), p);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    EXPECT_EQ(kind({{"zz", 1, 1}}), ErrorKind::InconsistentPopulation);
    EXPECT_EQ(kind({{"a", 3, 1}}), ErrorKind::UnknownShelf);
}

TEST(Purchases, ParseCsv) {
    const auto p = parse_purchases_csv("trajectory_id,shelf_id,quantity\na,1,2\nb,3,0\n");
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].trajectory_id, "a");
    EXPECT_EQ(p[1].shelf_id, 3);
    EXPECT_EQ(p[0].quantity, 2u);
    EXPECT_THROW(parse_purchases_csv("id,shelf,qty\na,1,2\n"), Error);
    EXPECT_THROW(parse_purchases_csv("trajectory_id,shelf_id,quantity\na,1,-2\n"), Error);
}

TEST(Output, ShelfStatsCsv) {
    const std::vector<VisitVector> v{vec("a", {1, 0}), vec("b", {1, 1})};
    std::ostringstream csv;
    write_shelf_stats_csv(csv, shelf_stats(v));
    EXPECT_EQ(csv.str(), "shelf_id,avg_visits_per_trip\n1,1\n2,0.5\n");
}

} // namespace
} // namespace shelfscan
