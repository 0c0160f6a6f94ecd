#include "shelfscan/labeling.hpp"

#include <fstream>
#include <set>
#include <unordered_map>

#include "json_util.hpp"
#include "shelfscan/error.hpp"

namespace shelfscan {

namespace {

using detail::json;

bool label_belongs_to(const ReviewerLabel& label, const Trajectory& trajectory) {
    return label.trajectory_id == trajectory.trajectory_id || label.trajectory_id == trajectory.source_id;
}

} // namespace

VisitMatrix majority_vote(std::span<const ReviewerLabel> labels, const Trajectory& trajectory,
                          const StoreLayout& layout, int n_l) {
    if (n_l < 1) {
        throw Error(ErrorKind::InvalidArgument, "reviewer count n_l must be >= 1");
    }
    const int n_s = layout.shelf_count();
    const std::size_t n = trajectory.samples.size();

    std::set<std::string> reviewers;
    for (const ReviewerLabel& label : labels) {
        if (!label_belongs_to(label, trajectory)) {
            throw Error(ErrorKind::UnknownTrajectory, "label does not belong to trajectory " + trajectory.trajectory_id,
                        label.trajectory_id);
        }
        if (label.shelf_id < 1 || label.shelf_id > n_s) {
            throw Error(ErrorKind::UnknownShelf, "label references a shelf outside 1..n_s",
                        std::to_string(label.shelf_id));
        }
        reviewers.insert(label.reviewer_id);
    }
    if (static_cast<int>(reviewers.size()) > n_l) {
        throw Error(ErrorKind::ReviewerCountMismatch,
                    std::to_string(reviewers.size()) + " distinct reviewers exceed n_l = " + std::to_string(n_l),
                    trajectory.trajectory_id);
    }

    // Per (reviewer, shelf) coverage mask, so overlapping intervals of one
    // reviewer count once.
    std::unordered_map<std::string, int> reviewer_slot;
    for (const std::string& r : reviewers) {
        reviewer_slot.emplace(r, static_cast<int>(reviewer_slot.size()));
    }
    std::vector<ShelfTimeMatrix> coverage(reviewers.size(), ShelfTimeMatrix(n_s, n));
    for (const ReviewerLabel& label : labels) {
        std::span<std::uint8_t> row = coverage[static_cast<std::size_t>(reviewer_slot.at(label.reviewer_id))].row(
            label.shelf_id);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = trajectory.samples[k].t;
            if (label.t_start <= t && t < label.t_end) {
                row[k] = 1;
            }
        }
    }

    VisitMatrix out{trajectory.trajectory_id, n_l, ShelfTimeMatrix(n_s, n)};
    for (int shelf = 1; shelf <= n_s; ++shelf) {
        std::span<std::uint8_t> dst = out.visits.row(shelf);
        for (std::size_t k = 0; k < n; ++k) {
            int votes = 0;
            for (const ShelfTimeMatrix& c : coverage) {
                votes += c.row(shelf)[k];
            }
            // Strict majority: 2 * votes > n_l avoids fractional n_l / 2.
            dst[k] = 2 * votes > n_l ? 1 : 0;
        }
    }
    return out;
}

VisitMatrix majority_vote(std::span<const ReviewerLabel> labels, const Trajectory& trajectory,
                          const StoreLayout& layout, const ReviewerManifest& manifest) {
    if (!manifest.roster.empty()) {
        if (static_cast<int>(manifest.roster.size()) != manifest.n_l) {
            throw Error(ErrorKind::ReviewerCountMismatch, "roster size differs from n_l");
        }
        const std::set<std::string> roster(manifest.roster.begin(), manifest.roster.end());
        for (const ReviewerLabel& label : labels) {
            if (!roster.contains(label.reviewer_id)) {
                throw Error(ErrorKind::ReviewerCountMismatch, "reviewer not in roster", label.reviewer_id);
            }
        }
    }
    return majority_vote(labels, trajectory, layout, manifest.n_l);
}

std::vector<std::vector<ReviewerLabel>> group_labels(std::span<const ReviewerLabel> labels,
                                                     std::span<const Trajectory> trajectories) {
    std::unordered_map<std::string, std::vector<std::size_t>> by_id;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        by_id[trajectories[i].trajectory_id].push_back(i);
        if (trajectories[i].source_id != trajectories[i].trajectory_id && !trajectories[i].source_id.empty()) {
            by_id[trajectories[i].source_id].push_back(i);
        }
    }
    std::vector<std::vector<ReviewerLabel>> out(trajectories.size());
    for (const ReviewerLabel& label : labels) {
        const auto it = by_id.find(label.trajectory_id);
        if (it == by_id.end()) {
            throw Error(ErrorKind::UnknownTrajectory, "label references an unknown trajectory", label.trajectory_id);
        }
        for (std::size_t i : it->second) {
            out[i].push_back(label);
        }
    }
    return out;
}

ReviewerLabel parse_label(std::string_view line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("label is not valid JSON: ") + e.what());
    }
    ReviewerLabel label;
    label.reviewer_id = detail::id_string(detail::required<json>(doc, "reviewer_id"));
    label.trajectory_id = detail::id_string(detail::required<json>(doc, "trajectory_id"));
    label.shelf_id = detail::required<int>(doc, "shelf_id");
    label.t_start = detail::required<double>(doc, "t_start");
    label.t_end = detail::required<double>(doc, "t_end");
    if (!(label.t_start < label.t_end)) {
        throw Error(ErrorKind::Validation, "label needs t_start < t_end", label.trajectory_id);
    }
    return label;
}

std::string format_label(const ReviewerLabel& label) {
    json doc;
    doc["reviewer_id"] = label.reviewer_id;
    doc["trajectory_id"] = label.trajectory_id;
    doc["shelf_id"] = label.shelf_id;
    doc["t_start"] = label.t_start;
    doc["t_end"] = label.t_end;
    return doc.dump();
}

std::vector<ReviewerLabel> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open file for reading", path.string());
    }
    std::vector<ReviewerLabel> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(parse_label(line));
        } catch (const Error& e) {
            throw Error(e.kind(), e.what(), path.string() + ":" + std::to_string(line_no));
        }
    }
    return out;
}

void save_labels(std::span<const ReviewerLabel> labels, const std::filesystem::path& path) {
    std::string text;
    for (const ReviewerLabel& label : labels) {
        text += format_label(label);
        text += '\n';
    }
    detail::write_text_file(path, text);
}

ReviewerManifest parse_manifest(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("manifest is not valid JSON: ") + e.what());
    }
    ReviewerManifest manifest;
    manifest.n_l = detail::required<int>(doc, "n_l");
    if (manifest.n_l < 1) {
        throw Error(ErrorKind::Validation, "n_l must be >= 1");
    }
    if (doc.contains("reviewers")) {
        for (const json& r : doc["reviewers"]) {
            manifest.roster.push_back(detail::id_string(r));
        }
        if (static_cast<int>(manifest.roster.size()) != manifest.n_l) {
            throw Error(ErrorKind::ReviewerCountMismatch, "roster size differs from n_l");
        }
    }
    return manifest;
}

ReviewerManifest load_manifest(const std::filesystem::path& path) {
    return parse_manifest(detail::read_text_file(path));
}

std::string format_manifest(const ReviewerManifest& manifest) {
    json doc;
    doc["n_l"] = manifest.n_l;
    doc["reviewers"] = manifest.roster;
    return doc.dump(2) + "\n";
}

} // namespace shelfscan
