#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shelfscan/kinematics.hpp"
#include "shelfscan/stop_detector.hpp"
#include "shelfscan/store_layout.hpp"

namespace shelfscan {

/// One reviewer's browsing interval, half-open [t_start, t_end).
struct ReviewerLabel {
    std::string reviewer_id;
    std::string trajectory_id;
    int shelf_id = 0;
    double t_start = 0.0;
    double t_end = 0.0;
};

/// Reviewer panel. `roster` may be empty, in which case only the panel size
/// is enforced.
struct ReviewerManifest {
    int n_l = 0;
    std::vector<std::string> roster;
};

struct VisitMatrix {
    std::string trajectory_id;
    int n_l = 0;
    ShelfTimeMatrix visits;
};

/// Strict-majority vote per (shelf, sample): V = 1 iff more than n_l / 2
/// distinct reviewers cover the sample. Labels must all belong to
/// `trajectory` (matched on trajectory_id or source_id).
VisitMatrix majority_vote(std::span<const ReviewerLabel> labels, const Trajectory& trajectory,
                          const StoreLayout& layout, int n_l);
VisitMatrix majority_vote(std::span<const ReviewerLabel> labels, const Trajectory& trajectory,
                          const StoreLayout& layout, const ReviewerManifest& manifest);

/// Buckets labels by the trajectory they belong to (index into
/// `trajectories`). A label whose trajectory_id names a split record goes to
/// every piece of that record. Throws UnknownTrajectory for labels that match
/// nothing.
std::vector<std::vector<ReviewerLabel>> group_labels(std::span<const ReviewerLabel> labels,
                                                     std::span<const Trajectory> trajectories);

ReviewerLabel parse_label(std::string_view line);
std::string format_label(const ReviewerLabel& label);
std::vector<ReviewerLabel> load_labels(const std::filesystem::path& path);
void save_labels(std::span<const ReviewerLabel> labels, const std::filesystem::path& path);

/// Sidecar manifest {"n_l": 4, "reviewers": ["r1", ...]}.
ReviewerManifest parse_manifest(std::string_view json_text);
ReviewerManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const ReviewerManifest& manifest);

} // namespace shelfscan
