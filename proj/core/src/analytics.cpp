#include "shelfscan/analytics.hpp"

#include <charconv>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json_util.hpp"
#include "shelfscan/error.hpp"

namespace shelfscan {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\"");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\"");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) {
            return fields;
        }
        start = comma + 1;
    }
}

template <typename T>
T parse_number(const std::string& field, std::size_t line_no) {
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorKind::Parse, "bad number '" + field + "'", "line " + std::to_string(line_no));
    }
    return value;
}

using detail::format_double;

} // namespace

int VisitVector::visited_count() const noexcept {
    int n = 0;
    for (std::uint8_t b : bits) {
        n += b;
    }
    return n;
}

VisitVector visit_vector(std::string trajectory_id, std::span<const StopEvent> events, int shelf_count) {
    VisitVector out{std::move(trajectory_id), std::vector<std::uint8_t>(static_cast<std::size_t>(shelf_count), 0)};
    for (const StopEvent& e : events) {
        if (e.shelf_id < 1 || e.shelf_id > shelf_count) {
            throw Error(ErrorKind::ShelfOutOfRange, "stop on a shelf outside 1..n_s", std::to_string(e.shelf_id));
        }
        out.bits[static_cast<std::size_t>(e.shelf_id - 1)] = 1;
    }
    return out;
}

ShelfStats shelf_stats(std::span<const VisitVector> vectors) {
    if (vectors.empty()) {
        throw Error(ErrorKind::EmptyInput, "no visit vectors");
    }
    const std::size_t n_s = vectors.front().bits.size();
    std::vector<std::uint64_t> per_shelf_counts(n_s, 0);
    std::uint64_t total_visits = 0;
    ShelfStats stats;
    stats.trajectory_ids.reserve(vectors.size());
    for (const VisitVector& v : vectors) {
        if (v.bits.size() != n_s) {
            throw Error(ErrorKind::LengthMismatch, "visit vectors differ in length", v.trajectory_id);
        }
        for (std::size_t j = 0; j < n_s; ++j) {
            per_shelf_counts[j] += v.bits[j];
            total_visits += v.bits[j];
        }
        stats.trajectory_ids.push_back(v.trajectory_id);
    }
    // Integer totals keep the statistics independent of trajectory order.
    const auto n = static_cast<double>(vectors.size());
    stats.per_shelf.resize(n_s);
    for (std::size_t j = 0; j < n_s; ++j) {
        stats.per_shelf[j] = static_cast<double>(per_shelf_counts[j]) / n;
    }
    stats.overall_visits_per_trip = static_cast<double>(total_visits) / n;
    return stats;
}

ConversionVector conversion_rates(const ShelfStats& stats, std::span<const PurchaseRecord> purchases,
                                  PurchaseMode mode) {
    if (stats.trajectory_count() == 0) {
        throw Error(ErrorKind::EmptyInput, "stats cover no trajectories");
    }
    const int n_s = static_cast<int>(stats.per_shelf.size());
    const std::unordered_set<std::string> population(stats.trajectory_ids.begin(), stats.trajectory_ids.end());

    std::vector<std::uint64_t> quantity(static_cast<std::size_t>(n_s), 0);
    std::vector<std::unordered_set<std::string>> buyers(static_cast<std::size_t>(n_s));
    for (const PurchaseRecord& p : purchases) {
        if (!population.contains(p.trajectory_id)) {
            throw Error(ErrorKind::InconsistentPopulation, "purchase for a trajectory outside the visit population",
                        p.trajectory_id);
        }
        if (p.shelf_id < 1 || p.shelf_id > n_s) {
            throw Error(ErrorKind::UnknownShelf, "purchase on a shelf outside 1..n_s", std::to_string(p.shelf_id));
        }
        const auto j = static_cast<std::size_t>(p.shelf_id - 1);
        quantity[j] += p.quantity;
        if (p.quantity > 0) {
            buyers[j].insert(p.trajectory_id);
        }
    }

    const auto n = static_cast<double>(stats.trajectory_count());
    ConversionVector out;
    out.shelves.reserve(static_cast<std::size_t>(n_s));
    for (int shelf = 1; shelf <= n_s; ++shelf) {
        const auto j = static_cast<std::size_t>(shelf - 1);
        ShelfConversion c;
        c.shelf_id = shelf;
        c.visit_average = stats.per_shelf[j];
        const double purchased =
            mode == PurchaseMode::Quantity ? static_cast<double>(quantity[j]) : static_cast<double>(buyers[j].size());
        c.purchase_average = purchased / n;
        if (c.visit_average > 0.0) {
            c.rate = c.purchase_average / c.visit_average;
        }
        out.shelves.push_back(c);
    }
    return out;
}

std::vector<PurchaseRecord> parse_purchases_csv(std::string_view text) {
    std::vector<PurchaseRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() != 3 || fields[0] != "trajectory_id" || fields[1] != "shelf_id" ||
                fields[2] != "quantity") {
                throw Error(ErrorKind::Parse, "purchases header must be trajectory_id,shelf_id,quantity");
            }
            continue;
        }
        if (fields.size() != 3) {
            throw Error(ErrorKind::Parse, "expected 3 fields", "line " + std::to_string(line_no));
        }
        out.push_back({fields[0], parse_number<int>(fields[1], line_no), parse_number<std::uint64_t>(fields[2], line_no)});
    }
    if (!header_seen) {
        throw Error(ErrorKind::Parse, "purchases file is empty");
    }
    return out;
}

std::vector<PurchaseRecord> load_purchases(const std::filesystem::path& path) {
    return parse_purchases_csv(detail::read_text_file(path));
}

void write_shelf_stats_csv(std::ostream& out, const ShelfStats& stats) {
    out << "shelf_id,avg_visits_per_trip\n";
    for (std::size_t j = 0; j < stats.per_shelf.size(); ++j) {
        out << j + 1 << ',' << format_double(stats.per_shelf[j]) << '\n';
    }
}

void write_conversion_csv(std::ostream& out, const ConversionVector& conversion) {
    out << "shelf_id,avg_visits_per_trip,avg_purchases_per_trip,conversion_pct\n";
    for (const ShelfConversion& c : conversion.shelves) {
        out << c.shelf_id << ',' << format_double(c.visit_average) << ',' << format_double(c.purchase_average) << ','
            << (c.rate ? format_double(100.0 * *c.rate) : std::string("undefined")) << '\n';
    }
}

} // namespace shelfscan
