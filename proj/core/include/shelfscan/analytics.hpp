#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shelfscan/stop_detector.hpp"

namespace shelfscan {

/// Per-trajectory binary vector: bit j-1 is set iff shelf j got >= 1 stop.
struct VisitVector {
    std::string trajectory_id;
    std::vector<std::uint8_t> bits;

    int visited_count() const noexcept;
};

struct ShelfStats {
    std::vector<std::string> trajectory_ids;
    std::vector<double> per_shelf;      // average visits per trip, index j-1
    double overall_visits_per_trip = 0.0;

    std::size_t trajectory_count() const noexcept { return trajectory_ids.size(); }
};

struct PurchaseRecord {
    std::string trajectory_id;
    int shelf_id = 0;
    std::uint64_t quantity = 0;
};

enum class PurchaseMode {
    Quantity,   // average of summed quantities per trip
    Incidence,  // fraction of trips with any purchase from the shelf
};

struct ShelfConversion {
    int shelf_id = 0;
    double visit_average = 0.0;
    double purchase_average = 0.0;
    std::optional<double> rate;  // purchases / visits; empty when visit_average == 0
};

struct ConversionVector {
    std::vector<ShelfConversion> shelves;
};

/// Throws ShelfOutOfRange for events outside 1..n_s.
VisitVector visit_vector(std::string trajectory_id, std::span<const StopEvent> events, int shelf_count);

/// Throws EmptyInput or LengthMismatch.
ShelfStats shelf_stats(std::span<const VisitVector> vectors);

/// Throws InconsistentPopulation for purchases of trajectories outside the
/// stats population and UnknownShelf for shelf ids outside 1..n_s.
ConversionVector conversion_rates(const ShelfStats& stats, std::span<const PurchaseRecord> purchases,
                                  PurchaseMode mode = PurchaseMode::Quantity);

/// CSV with header trajectory_id,shelf_id,quantity.
std::vector<PurchaseRecord> parse_purchases_csv(std::string_view text);
std::vector<PurchaseRecord> load_purchases(const std::filesystem::path& path);

void write_shelf_stats_csv(std::ostream& out, const ShelfStats& stats);
void write_conversion_csv(std::ostream& out, const ConversionVector& conversion);

} // namespace shelfscan
