#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shelfscan/kinematics.hpp"
#include "shelfscan/labeling.hpp"
#include "shelfscan/stop_detector.hpp"
#include "shelfscan/store_layout.hpp"

namespace shelfscan {

/// Rows of single-faced shelves. Row r has its faces on the line
/// y = margin + r * (depth + aisle) + depth with normals (0, 1); the aisle
/// lies above each row. Back faces, row end caps and the store walls become
/// obstacles. A free corridor of width `margin` surrounds the shelving.
struct LayoutTemplate {
    std::string store_id = "synthetic";
    int shelf_count = 10;
    int shelves_per_row = 5;
    double shelf_length = 2.0;
    double shelf_depth = 0.5;
    double aisle_width = 2.0;
    double margin = 2.0;
    int pillars = 0;  // short random obstacles placed in the aisles

    double corridor_x() const noexcept { return margin / 2.0; }
};

StoreLayout make_layout(const LayoutTemplate& tmpl, std::uint64_t seed);

/// Axis-aligned bounding box of every segment in the layout.
struct Bounds {
    Vec2 lo;
    Vec2 hi;
    bool contains(Vec2 p, double slack = 1e-9) const noexcept;
};
Bounds layout_bounds(const StoreLayout& layout);

/// Point `distance` meters in front of a shelf face, `along` in [0, 1] from a to b.
Vec2 browse_point(const Shelf& shelf, double distance, double along = 0.5);

struct Waypoint {
    Vec2 target;
    double dwell = 0.0;                // seconds spent at target
    std::optional<int> facing_shelf;   // heading during the dwell; free heading when empty
    std::optional<double> speed;       // leg speed override, m/s
    bool face_on_approach = false;     // face `facing_shelf` while walking this leg
};

struct ShopperScript {
    std::string trajectory_id;
    Vec2 start;
    std::vector<Waypoint> waypoints;
    std::optional<std::size_t> max_samples;  // truncate after this many samples
};

struct ScenarioSpec {
    LayoutTemplate layout;
    std::vector<ShopperScript> shoppers;
    double walking_speed = 1.0;    // m/s
    double position_noise = 0.0;   // std, m
    double heading_noise = 0.0;    // std, rad
    std::uint64_t seed = 0;
};

struct Episode {
    std::string trajectory_id;
    int shelf_id = 0;
    double t_start = 0.0;
    double t_end = 0.0;
};

/// Browsing episodes as scripted, sorted by trajectory and time.
struct GroundTruth {
    std::vector<Episode> episodes;
};

struct SynthOutput {
    StoreLayout layout;
    std::vector<Trajectory> trajectories;
    GroundTruth truth;
};

/// Deterministic in `spec.seed`. Throws InfeasibleScript for waypoints
/// outside the store, negative dwells, non-positive speeds, unknown facing
/// shelves or scripts shorter than 3 samples.
SynthOutput generate(const ScenarioSpec& spec);

/// Appends waypoints that route through the left corridor whenever the
/// target lies in a different aisle, so walking legs never face a shelf.
class ScriptBuilder {
public:
    ScriptBuilder(const StoreLayout& layout, const LayoutTemplate& tmpl, std::string trajectory_id, Vec2 start);

    ScriptBuilder& walk_to(Vec2 target, std::optional<double> speed = std::nullopt);
    ScriptBuilder& dwell_at_shelf(int shelf_id, double distance, double along, double seconds,
                                  std::optional<double> speed = std::nullopt);
    /// Walks along the face of `shelf_id` from `from` to `to` (fractions of
    /// the face) at `speed`, facing the shelf throughout.
    ScriptBuilder& drift_along_shelf(int shelf_id, double distance, double from, double to, double speed);
    ScriptBuilder& pause(double seconds);

    Vec2 position() const noexcept { return current_; }
    ShopperScript build() const;

private:
    const StoreLayout* layout_;
    double corridor_x_;
    ShopperScript script_;
    Vec2 current_;
};

/// Randomized single-shopper case for detector-vs-oracle checks.
struct OracleCase {
    ScenarioSpec spec;
    StopParams params;
    int window = kDefaultFilterWindow;
};
OracleCase random_oracle_case(std::uint64_t seed);

/// Shoppers visiting random shelves with routed walks; used for analytics,
/// CLI demos and throughput runs.
ScenarioSpec random_shopping_scenario(int shoppers, int shelf_count, std::uint64_t seed,
                                      double position_noise = 0.02, double heading_noise = 0.05,
                                      std::size_t max_samples = 0);

/// Noise-free shoppers whose visits straddle the thresholds (2.0 s, 1.2 m,
/// 0.55 m/s) on every axis, so a single trajectory already separates those
/// thresholds from their neighbours at 0.5 s / 0.2 m / 0.1 m/s spacing.
ScenarioSpec calibration_scenario(int shoppers, std::uint64_t seed);

/// Labels in which all `manifest.n_l` reviewers mark exactly the detector's
/// stops, so the majority vote reproduces the stop matrix.
std::vector<ReviewerLabel> planted_labels(std::span<const Trajectory> trajectories, const StoreLayout& layout,
                                          const StopParams& params, int window, const ReviewerManifest& manifest);

/// Noisy reviewers derived from scripted episodes: each reviewer jitters the
/// boundaries (std `boundary_jitter` s) and skips an episode with
/// probability `miss_probability`.
std::vector<ReviewerLabel> reviewer_labels_from_truth(const GroundTruth& truth, const ReviewerManifest& manifest,
                                                      double boundary_jitter, double miss_probability,
                                                      std::uint64_t seed);

ReviewerManifest default_manifest(int n_l);

ScenarioSpec parse_scenario(std::string_view json_text);
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string format_scenario(const ScenarioSpec& spec);

std::string format_episode(const Episode& episode);
void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);

} // namespace shelfscan
