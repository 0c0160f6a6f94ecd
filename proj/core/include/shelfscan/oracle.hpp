#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "shelfscan/kinematics.hpp"
#include "shelfscan/stop_detector.hpp"
#include "shelfscan/store_layout.hpp"

namespace shelfscan {

/// Reference stop matrix: S(j, k) = 1 iff some window [ks, kf] containing k
/// spans at least t_b and every sample in it faces shelf j within delta_b at
/// speed at most v_b. Enumerates every start sample; quadratic in length.
/// Gaze is recomputed by a linear scan over shelves, then obstacles.
StopMatrix brute_force_stops(const KinematicTrack& track, const StoreLayout& layout, const StopParams& params);

/// Also recomputes filtering and speeds from the raw samples.
StopMatrix brute_force_stops(const Trajectory& trajectory, const StoreLayout& layout, const StopParams& params,
                             int window = kDefaultFilterWindow);

struct OracleMismatch {
    std::uint64_t case_seed = 0;
    std::string trajectory_id;
    int shelf_id = 0;
    std::size_t sample = 0;
    bool detector = false;
    bool oracle = false;
    StopParams params;
    int window = 0;
    std::size_t samples = 0;
};

struct OracleReport {
    std::uint64_t seed = 0;
    std::size_t scenarios = 0;
    std::size_t mismatched_scenarios = 0;
    std::size_t total_samples = 0;
    std::size_t marked_cells = 0;
    std::optional<OracleMismatch> first_counterexample;  // lowest scenario index

    bool passed() const noexcept { return mismatched_scenarios == 0; }
};

/// Seed of the i-th scenario of a check run.
std::uint64_t oracle_case_seed(std::uint64_t seed, std::size_t index) noexcept;

/// Compares detect_stops with brute_force_stops on random synthetic cases.
/// `jobs` <= 0 uses default_jobs().
OracleReport oracle_check(std::uint64_t seed, std::size_t scenarios, int jobs = 0);

std::string format_oracle_report(const OracleReport& report);

} // namespace shelfscan
