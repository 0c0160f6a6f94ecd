#include "shelfscan_tools/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shelfscan/analytics.hpp"
#include "shelfscan/calibration.hpp"
#include "shelfscan/error.hpp"
#include "shelfscan/kinematics.hpp"
#include "shelfscan/labeling.hpp"
#include "shelfscan/oracle.hpp"
#include "shelfscan/parallel.hpp"
#include "shelfscan/stop_detector.hpp"
#include "shelfscan/store_layout.hpp"
#include "shelfscan/synth.hpp"

namespace shelfscan::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

// Every flag is optional at parse time; values resolve as flag > config file > default.
struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::optional<int> window;

    std::optional<std::string> layout, trajectories, labels, manifest;
    std::optional<std::string> layout_a, trajectories_a, labels_a, manifest_a;
    std::optional<std::string> layout_b, trajectories_b, labels_b, manifest_b;
    std::optional<int> n_l;

    std::optional<double> t_b, delta_b, v_b;
    std::optional<double> t_b_min, t_b_max, t_b_step;
    std::optional<double> delta_b_min, delta_b_max, delta_b_step;
    std::optional<double> v_b_min, v_b_max, v_b_step;
    std::optional<int> refine_stride;
    std::optional<bool> grid_csv;
    std::optional<bool> dense_matrix;

    std::optional<std::string> p;
    std::optional<std::size_t> repeats;
    std::optional<std::uint64_t> seed;

    std::optional<std::string> purchases, purchase_mode;

    std::optional<std::string> kind, scenario, label_mode;
    std::optional<int> shoppers, shelves;
    std::optional<std::size_t> samples;
    std::optional<double> position_noise, heading_noise, jitter, miss;

    std::optional<std::size_t> scenarios;
};

template <typename T>
void add(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
    app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

void add_flag(CLI::App* app, const std::string& name, std::optional<bool>& target, const std::string& help) {
    app->add_flag_function(name, [&target](std::int64_t count) { target = count > 0; }, help);
}

// Resolves values and records them for the report.
class Resolver {
public:
    Resolver(const Flags& flags, std::string command) : flags_(flags) { resolved_["command"] = std::move(command); }

    void load_config(const std::optional<std::string>& path) {
        if (!path) {
            return;
        }
        if (!fs::is_regular_file(*path)) {
            throw UsageError("config file not found: " + *path);
        }
        std::ifstream in(*path);
        try {
            file_ = json::parse(in);
        } catch (const json::parse_error& e) {
            throw UsageError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!file_.is_object()) {
            throw UsageError("config file must hold a JSON object");
        }
    }

    template <typename T>
    std::optional<T> find(const std::optional<T>& flag, const std::string& key) {
        std::optional<T> value = flag;
        if (!value && file_.contains(key)) {
            try {
                value = file_[key].get<T>();
            } catch (const json::exception&) {
                throw UsageError("config key '" + key + "' has the wrong type");
            }
        }
        if (value) {
            resolved_["config"][key] = *value;
        }
        return value;
    }

    template <typename T>
    T get(const std::optional<T>& flag, const std::string& key, T fallback) {
        std::optional<T> value = find(flag, key);
        if (!value) {
            value = fallback;
            resolved_["config"][key] = fallback;
        }
        return *value;
    }

    template <typename T>
    T require(const std::optional<T>& flag, const std::string& key) {
        std::optional<T> value = find(flag, key);
        if (!value) {
            throw UsageError("missing required option --" + dashed(key));
        }
        return *value;
    }

    fs::path input_file(const std::optional<std::string>& flag, const std::string& key) {
        const fs::path path = require(flag, key);
        if (!fs::is_regular_file(path)) {
            throw UsageError("--" + dashed(key) + ": file not found: " + path.string());
        }
        return path;
    }

    std::optional<fs::path> optional_input_file(const std::optional<std::string>& flag, const std::string& key) {
        const std::optional<std::string> path = find(flag, key);
        if (!path) {
            return std::nullopt;
        }
        if (!fs::is_regular_file(*path)) {
            throw UsageError("--" + dashed(key) + ": file not found: " + *path);
        }
        return fs::path(*path);
    }

    fs::path output_dir() {
        const fs::path dir = require(flags_.out, "out");
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir)) {
            throw UsageError("--out: cannot create directory " + dir.string());
        }
        return dir;
    }

    // Worker count affects speed only, so it is kept out of the report.
    int jobs() const {
        std::optional<int> j = flags_.jobs;
        if (!j && file_.contains("jobs") && file_["jobs"].is_number_integer()) {
            j = file_["jobs"].get<int>();
        }
        if (j && *j < 1) {
            throw UsageError("--jobs must be at least 1");
        }
        return j ? *j : default_jobs();
    }

    // Accepts "0.1,0.5" on the command line or a number / array / string in the config file.
    std::vector<double> fractions(const std::optional<std::string>& flag, const std::string& key,
                                  const std::string& fallback) {
        std::string text;
        if (flag) {
            text = *flag;
        } else if (file_.contains(key)) {
            const json& v = file_[key];
            if (v.is_number()) {
                text = num(v.get<double>());
            } else if (v.is_array()) {
                for (const json& e : v) {
                    if (!e.is_number()) {
                        throw UsageError("config key '" + key + "' must hold numbers");
                    }
                    text += (text.empty() ? "" : ",") + num(e.get<double>());
                }
            } else if (v.is_string()) {
                text = v.get<std::string>();
            } else {
                throw UsageError("config key '" + key + "' has the wrong type");
            }
        } else {
            text = fallback;
        }
        std::vector<double> values;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto first = item.find_first_not_of(' ');
            const auto last = item.find_last_not_of(' ');
            if (first == std::string::npos) {
                throw UsageError("--" + dashed(key) + ": empty entry in list");
            }
            item = item.substr(first, last - first + 1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc{} || ptr != item.data() + item.size()) {
                throw UsageError("--" + dashed(key) + ": not a number: " + item);
            }
            values.push_back(v);
        }
        if (values.empty()) {
            throw UsageError("--" + dashed(key) + ": empty list");
        }
        json list = json::array();
        for (double v : values) {
            list.push_back(v);
        }
        resolved_["config"][key] = list;
        return values;
    }

    const json& resolved() const noexcept { return resolved_; }

    static std::string dashed(std::string key) {
        std::replace(key.begin(), key.end(), '_', '-');
        return key;
    }

private:
    const Flags& flags_;
    json file_ = json::object();
    json resolved_ = json::object();
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open for writing", path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorKind::Io, "write failed", path.string());
    }
}

StopParams resolve_params(Resolver& r, const Flags& f) {
    StopParams p;
    p.t_b = r.get(f.t_b, "t_b", p.t_b);
    p.delta_b = r.get(f.delta_b, "delta_b", p.delta_b);
    p.v_b = r.get(f.v_b, "v_b", p.v_b);
    validate_params(p);
    return p;
}

ParamGrid resolve_grid(Resolver& r, const Flags& f) {
    ParamGrid g;
    g.t_b = {r.get(f.t_b_min, "t_b_min", g.t_b.min), r.get(f.t_b_max, "t_b_max", g.t_b.max),
             r.get(f.t_b_step, "t_b_step", g.t_b.step)};
    g.delta_b = {r.get(f.delta_b_min, "delta_b_min", g.delta_b.min), r.get(f.delta_b_max, "delta_b_max", g.delta_b.max),
                 r.get(f.delta_b_step, "delta_b_step", g.delta_b.step)};
    g.v_b = {r.get(f.v_b_min, "v_b_min", g.v_b.min), r.get(f.v_b_max, "v_b_max", g.v_b.max),
             r.get(f.v_b_step, "v_b_step", g.v_b.step)};
    g.validate();
    return g;
}

CalibrationOptions resolve_calibration_options(Resolver& r, const Flags& f) {
    CalibrationOptions o;
    o.jobs = r.jobs();
    o.refine_stride = r.get(f.refine_stride, "refine_stride", 0);
    if (o.refine_stride < 0) {
        throw UsageError("--refine-stride must be non-negative");
    }
    return o;
}

json params_json(const StopParams& p) { return {{"t_b", p.t_b}, {"delta_b", p.delta_b}, {"v_b", p.v_b}}; }

json metrics_json(const MetricsReport& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
            {"tp", m.counts.tp},        {"fp", m.counts.fp},  {"fn", m.counts.fn}};
}

struct Store {
    StoreLayout layout;
    std::vector<Trajectory> trajectories;
};

Store load_store(const fs::path& layout_path, const fs::path& trajectories_path) {
    Store s;
    s.layout = load_layout(layout_path);
    s.trajectories = load_trajectories(trajectories_path);
    return s;
}

std::vector<KinematicTrack> build_tracks(const std::vector<Trajectory>& trajectories, int window, int jobs) {
    std::vector<KinematicTrack> tracks(trajectories.size());
    parallel_for(trajectories.size(), jobs, [&](std::size_t i) { tracks[i] = build_track(trajectories[i], window); });
    return tracks;
}

std::vector<StopDetection> detect_all(const std::vector<KinematicTrack>& tracks, const StoreLayout& layout,
                                      const StopParams& params, int jobs) {
    const GazeCaster caster(layout);
    std::vector<StopDetection> out(tracks.size());
    parallel_for(tracks.size(), jobs,
                 [&](std::size_t i) { out[i] = detect_stops(tracks[i], caster, layout.store_id, params); });
    return out;
}

struct LabelSource {
    std::optional<std::string> layout, trajectories, labels, manifest;
    std::string suffix;  // "" or "_a" / "_b"
};

PreparedDataset load_labeled(Resolver& r, const LabelSource& src, const std::optional<int>& n_l_flag, int window,
                             int jobs) {
    const fs::path layout_path = r.input_file(src.layout, "layout" + src.suffix);
    const fs::path traj_path = r.input_file(src.trajectories, "trajectories" + src.suffix);
    const fs::path labels_path = r.input_file(src.labels, "labels" + src.suffix);
    const std::optional<fs::path> manifest_path = r.optional_input_file(src.manifest, "manifest" + src.suffix);

    ReviewerManifest manifest;
    if (manifest_path) {
        manifest = load_manifest(*manifest_path);
    } else {
        const std::optional<int> n_l = r.find(n_l_flag, "n_l");
        if (!n_l) {
            throw UsageError("either --manifest" + Resolver::dashed(src.suffix) + " or --n-l is required");
        }
        if (*n_l < 1) {
            throw UsageError("--n-l must be at least 1");
        }
        manifest.n_l = *n_l;
    }

    Store store = load_store(layout_path, traj_path);
    const std::vector<ReviewerLabel> labels = load_labels(labels_path);
    const std::vector<std::vector<ReviewerLabel>> grouped = group_labels(labels, store.trajectories);
    const std::vector<KinematicTrack> tracks = build_tracks(store.trajectories, window, jobs);

    std::vector<LabeledTrack> dataset(store.trajectories.size());
    parallel_for(store.trajectories.size(), jobs, [&](std::size_t i) {
        dataset[i] = {tracks[i], majority_vote(grouped[i], store.trajectories[i], store.layout, manifest)};
    });
    return prepare_dataset(dataset, store.layout, jobs);
}

int window_of(Resolver& r, const Flags& f) {
    const int w = r.get(f.window, "window", kDefaultFilterWindow);
    if (w < 1 || w % 2 == 0) {
        throw Error(ErrorKind::InvalidWindow, "filter window must be odd and positive", std::to_string(w));
    }
    return w;
}

// ---- commands ----

int cmd_detect(const Flags& f, std::ostream& out) {
    Resolver r(f, "detect");
    r.load_config(f.config);
    const fs::path layout_path = r.input_file(f.layout, "layout");
    const fs::path traj_path = r.input_file(f.trajectories, "trajectories");
    const fs::path dir = r.output_dir();
    const StopParams params = resolve_params(r, f);
    const int window = window_of(r, f);
    const bool dense = r.get(f.dense_matrix, "dense_matrix", false);
    const int jobs = r.jobs();

    const Store store = load_store(layout_path, traj_path);
    const std::vector<KinematicTrack> tracks = build_tracks(store.trajectories, window, jobs);
    const std::vector<StopDetection> detections = detect_all(tracks, store.layout, params, jobs);

    std::string events;
    std::ostringstream matrix;
    matrix << kStopMatrixCsvHeader << '\n';
    std::size_t event_count = 0;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        for (const StopEvent& e : detections[i].events) {
            events += format_stop_event(e);
            events += '\n';
            ++event_count;
        }
        write_stop_matrix_csv(matrix, detections[i].matrix, tracks[i].times, dense);
    }
    write_file(dir / "stops.jsonl", events);
    write_file(dir / "stop_matrix.csv", matrix.str());

    json summary = r.resolved();
    summary["trajectories"] = tracks.size();
    summary["stop_events"] = event_count;
    write_file(dir / "detect.json", summary.dump(2) + "\n");
    out << "detected " << event_count << " stops in " << tracks.size() << " trajectories\n";
    return kExitOk;
}

json calibration_json(const CalibrationResult& result) {
    return {{"best_params", params_json(result.best_params)},
            {"best_f1", result.best_f1},
            {"best_metrics", metrics_json(result.best_metrics)},
            {"evaluated_points", result.evaluated_points}};
}

int cmd_calibrate(const Flags& f, std::ostream& out) {
    Resolver r(f, "calibrate");
    r.load_config(f.config);
    const int window = window_of(r, f);
    const ParamGrid grid = resolve_grid(r, f);
    CalibrationOptions options = resolve_calibration_options(r, f);
    options.keep_table = r.get(f.grid_csv, "grid_csv", false);
    const PreparedDataset data =
        load_labeled(r, {f.layout, f.trajectories, f.labels, f.manifest, ""}, f.n_l, window, options.jobs);
    const fs::path dir = r.output_dir();

    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    const CalibrationResult result = calibrate(data, all, grid, options);

    json report = r.resolved();
    report["trajectories"] = data.size();
    report["result"] = calibration_json(result);
    write_file(dir / "calibration.json", report.dump(2) + "\n");

    if (options.keep_table) {
        std::ostringstream csv;
        csv << "t_b,delta_b,v_b,tp,fp,fn,precision,recall,f1\n";
        for (const GridScore& s : result.table) {
            csv << num(s.params.t_b) << ',' << num(s.params.delta_b) << ',' << num(s.params.v_b) << ','
                << s.counts.tp << ',' << s.counts.fp << ',' << s.counts.fn << ',' << num(s.metrics.precision) << ','
                << num(s.metrics.recall) << ',' << num(s.metrics.f1) << '\n';
        }
        write_file(dir / "grid_scores.csv", csv.str());
    }
    out << "best F1 " << num(result.best_f1) << " at t_b=" << num(result.best_params.t_b)
        << " delta_b=" << num(result.best_params.delta_b) << " v_b=" << num(result.best_params.v_b) << '\n';
    return kExitOk;
}

void write_eval_outputs(const fs::path& dir, json report, const std::vector<EvalReport>& reports) {
    std::ostringstream repeats;
    repeats << "protocol,p,repeat,train_size,test_size,t_b,delta_b,v_b,train_f1,precision,recall,f1\n";
    std::ostringstream summary;
    summary << "protocol,p,repeats,mean_f1,std_error\n";
    report["reports"] = json::array();
    for (const EvalReport& e : reports) {
        json entry = {{"protocol", std::string(to_string(e.protocol))},
                      {"p", e.p},
                      {"repeats", e.repeats},
                      {"seed", e.seed},
                      {"mean_f1", e.mean_f1},
                      {"std_error", e.std_error},
                      {"scores", json::array()}};
        for (const RepeatScore& s : e.scores) {
            entry["scores"].push_back({{"repeat", s.repeat},
                                       {"train_size", s.train_size},
                                       {"test_size", s.test_size},
                                       {"params", params_json(s.params)},
                                       {"train_f1", s.train_f1},
                                       {"test", metrics_json(s.test)}});
            repeats << to_string(e.protocol) << ',' << num(e.p) << ',' << s.repeat << ',' << s.train_size << ','
                    << s.test_size << ',' << num(s.params.t_b) << ',' << num(s.params.delta_b) << ','
                    << num(s.params.v_b) << ',' << num(s.train_f1) << ',' << num(s.test.precision) << ','
                    << num(s.test.recall) << ',' << num(s.test.f1) << '\n';
        }
        summary << to_string(e.protocol) << ',' << num(e.p) << ',' << e.repeats << ',' << num(e.mean_f1) << ','
                << num(e.std_error) << '\n';
        report["reports"].push_back(std::move(entry));
    }
    write_file(dir / "eval.json", report.dump(2) + "\n");
    write_file(dir / "eval_repeats.csv", repeats.str());
    write_file(dir / "eval_summary.csv", summary.str());
}

void print_eval(std::ostream& out, const std::vector<EvalReport>& reports) {
    for (const EvalReport& e : reports) {
        out << to_string(e.protocol) << " p=" << num(e.p) << " mean F1 " << num(e.mean_f1) << " SE "
            << num(e.std_error) << '\n';
    }
}

int cmd_eval_same(const Flags& f, std::ostream& out) {
    Resolver r(f, "eval-same");
    r.load_config(f.config);
    const int window = window_of(r, f);
    const ParamGrid grid = resolve_grid(r, f);
    const CalibrationOptions options = resolve_calibration_options(r, f);
    const std::vector<double> ps = r.fractions(f.p, "p", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9");
    const std::size_t repeats = r.get(f.repeats, "repeats", std::size_t{10});
    const std::uint64_t seed = r.get(f.seed, "seed", std::uint64_t{0});
    const PreparedDataset data =
        load_labeled(r, {f.layout, f.trajectories, f.labels, f.manifest, ""}, f.n_l, window, options.jobs);
    const fs::path dir = r.output_dir();

    std::vector<EvalReport> reports;
    for (double p : ps) {
        reports.push_back(same_store_eval(data, grid, p, repeats, seed, options));
    }
    json report = r.resolved();
    report["trajectories"] = data.size();
    write_eval_outputs(dir, std::move(report), reports);
    print_eval(out, reports);
    return kExitOk;
}

int cmd_eval_cross(const Flags& f, std::ostream& out) {
    Resolver r(f, "eval-cross");
    r.load_config(f.config);
    const int window = window_of(r, f);
    const ParamGrid grid = resolve_grid(r, f);
    const CalibrationOptions options = resolve_calibration_options(r, f);
    const std::vector<double> ps = r.fractions(f.p, "p", "1.0");
    const std::size_t repeats = r.get(f.repeats, "repeats", std::size_t{10});
    const std::uint64_t seed = r.get(f.seed, "seed", std::uint64_t{0});
    const PreparedDataset a =
        load_labeled(r, {f.layout_a, f.trajectories_a, f.labels_a, f.manifest_a, "_a"}, f.n_l, window, options.jobs);
    const PreparedDataset b =
        load_labeled(r, {f.layout_b, f.trajectories_b, f.labels_b, f.manifest_b, "_b"}, f.n_l, window, options.jobs);
    const fs::path dir = r.output_dir();

    std::vector<EvalReport> reports;
    for (double p : ps) {
        reports.push_back(cross_store_eval(a, b, grid, p, repeats, seed, options));
    }
    json report = r.resolved();
    report["trajectories_a"] = a.size();
    report["trajectories_b"] = b.size();
    write_eval_outputs(dir, std::move(report), reports);
    print_eval(out, reports);
    return kExitOk;
}

int cmd_analyze(const Flags& f, std::ostream& out) {
    Resolver r(f, "analyze");
    r.load_config(f.config);
    const fs::path layout_path = r.input_file(f.layout, "layout");
    const fs::path traj_path = r.input_file(f.trajectories, "trajectories");
    const std::optional<fs::path> purchases_path = r.optional_input_file(f.purchases, "purchases");
    const std::string mode_name = r.get(f.purchase_mode, "purchase_mode", std::string("quantity"));
    if (mode_name != "quantity" && mode_name != "incidence") {
        throw UsageError("--purchase-mode must be 'quantity' or 'incidence'");
    }
    const PurchaseMode mode = mode_name == "quantity" ? PurchaseMode::Quantity : PurchaseMode::Incidence;
    const fs::path dir = r.output_dir();
    const StopParams params = resolve_params(r, f);
    const int window = window_of(r, f);
    const int jobs = r.jobs();

    const Store store = load_store(layout_path, traj_path);
    const std::vector<KinematicTrack> tracks = build_tracks(store.trajectories, window, jobs);
    const std::vector<StopDetection> detections = detect_all(tracks, store.layout, params, jobs);
    std::vector<VisitVector> vectors;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        vectors.push_back(visit_vector(tracks[i].trajectory_id, detections[i].events, store.layout.shelf_count()));
    }
    const ShelfStats stats = shelf_stats(vectors);

    std::ostringstream stats_csv;
    write_shelf_stats_csv(stats_csv, stats);
    write_file(dir / "shelf_stats.csv", stats_csv.str());

    json report = r.resolved();
    report["trajectories"] = stats.trajectory_count();
    report["overall_visits_per_trip"] = stats.overall_visits_per_trip;
    report["per_shelf_visits_per_trip"] = stats.per_shelf;
    if (purchases_path) {
        const std::vector<PurchaseRecord> purchases = load_purchases(*purchases_path);
        const ConversionVector conversion = conversion_rates(stats, purchases, mode);
        std::ostringstream conv_csv;
        write_conversion_csv(conv_csv, conversion);
        write_file(dir / "conversion.csv", conv_csv.str());
        json rates = json::array();
        for (const ShelfConversion& c : conversion.shelves) {
            rates.push_back({{"shelf_id", c.shelf_id},
                             {"avg_visits_per_trip", c.visit_average},
                             {"avg_purchases_per_trip", c.purchase_average},
                             {"conversion_pct", c.rate ? json(100.0 * *c.rate) : json("undefined")}});
        }
        report["conversion"] = std::move(rates);
    }
    write_file(dir / "analytics.json", report.dump(2) + "\n");
    out << "average visits per trip " << num(stats.overall_visits_per_trip) << " over " << stats.trajectory_count()
        << " trajectories\n";
    return kExitOk;
}

int cmd_synth(const Flags& f, std::ostream& out) {
    Resolver r(f, "synth");
    r.load_config(f.config);
    const std::string kind = r.get(f.kind, "kind", std::string("random"));
    const std::uint64_t seed = r.get(f.seed, "seed", std::uint64_t{0});
    ScenarioSpec spec;
    if (kind == "scenario") {
        spec = load_scenario(r.input_file(f.scenario, "scenario"));
        if (f.seed) {
            spec.seed = seed;
        }
    } else if (kind == "random") {
        const int shoppers = r.get(f.shoppers, "shoppers", 100);
        const int shelves = r.get(f.shelves, "shelves", 10);
        if (shoppers < 1 || shelves < 1) {
            throw UsageError("--shoppers and --shelves must be positive");
        }
        spec = random_shopping_scenario(shoppers, shelves, seed, r.get(f.position_noise, "position_noise", 0.02),
                                        r.get(f.heading_noise, "heading_noise", 0.05),
                                        r.get(f.samples, "samples", std::size_t{0}));
    } else if (kind == "calibration") {
        const int shoppers = r.get(f.shoppers, "shoppers", 100);
        if (shoppers < 1) {
            throw UsageError("--shoppers must be positive");
        }
        spec = calibration_scenario(shoppers, seed);
    } else {
        throw UsageError("--kind must be 'random', 'calibration' or 'scenario'");
    }
    const std::string label_mode = r.get(f.label_mode, "label_mode", std::string("none"));
    if (label_mode != "none" && label_mode != "planted" && label_mode != "truth") {
        throw UsageError("--label-mode must be 'none', 'planted' or 'truth'");
    }
    const fs::path dir = r.output_dir();

    const SynthOutput synth = generate(spec);
    save_layout(synth.layout, dir / "layout.json");
    save_trajectories(synth.trajectories, dir / "trajectories.jsonl");
    save_ground_truth(synth.truth, dir / "ground_truth.jsonl");
    write_file(dir / "scenario.json", format_scenario(spec));

    if (label_mode != "none") {
        const int n_l = r.get(f.n_l, "n_l", 3);
        if (n_l < 1) {
            throw UsageError("--n-l must be at least 1");
        }
        const ReviewerManifest manifest = default_manifest(n_l);
        std::vector<ReviewerLabel> labels;
        if (label_mode == "planted") {
            const StopParams params = resolve_params(r, f);
            labels = planted_labels(synth.trajectories, synth.layout, params, window_of(r, f), manifest);
        } else {
            labels = reviewer_labels_from_truth(synth.truth, manifest, r.get(f.jitter, "jitter", 0.2),
                                                r.get(f.miss, "miss", 0.1), seed);
        }
        save_labels(labels, dir / "labels.jsonl");
        write_file(dir / "manifest.json", format_manifest(manifest));
    }
    write_file(dir / "synth.json", r.resolved().dump(2) + "\n");
    out << "generated " << synth.trajectories.size() << " trajectories, " << synth.truth.episodes.size()
        << " scripted episodes\n";
    return kExitOk;
}

int cmd_oracle_check(const Flags& f, std::ostream& out) {
    Resolver r(f, "oracle-check");
    r.load_config(f.config);
    const std::uint64_t seed = r.get(f.seed, "seed", std::uint64_t{0});
    const std::size_t scenarios = r.get(f.scenarios, "scenarios", std::size_t{1000});
    const int jobs = r.jobs();
    const std::optional<std::string> dir_flag = r.find(f.out, "out");

    const OracleReport report = oracle_check(seed, scenarios, jobs);
    const std::string text = format_oracle_report(report);
    if (dir_flag) {
        write_file(r.output_dir() / "oracle_check.json", text);
    }
    out << text;
    return report.passed() ? kExitOk : kExitDataError;
}

void add_common(CLI::App* app, Flags& f, bool needs_out = true) {
    add(app, "--config", f.config, "JSON file whose keys mirror the flags (t_b, delta_b, ...); flags win");
    add(app, "--out", f.out, needs_out ? "Output directory" : "Optional output directory");
    add(app, "--jobs", f.jobs, "Worker threads (default: SHELFSCAN_JOBS or all cores)");
}

void add_window(CLI::App* app, Flags& f) { add(app, "--window", f.window, "Odd low-pass window length (default 5)"); }

void add_params(CLI::App* app, Flags& f) {
    add(app, "--t-b", f.t_b, "Minimum browsing time, s (default 2.0)");
    add(app, "--delta-b", f.delta_b, "Maximum distance to the shelf face, m (default 1.2)");
    add(app, "--v-b", f.v_b, "Maximum browsing speed, m/s (default 0.55)");
}

void add_grid(CLI::App* app, Flags& f) {
    add(app, "--t-b-min", f.t_b_min, "Grid: t_b minimum");
    add(app, "--t-b-max", f.t_b_max, "Grid: t_b maximum");
    add(app, "--t-b-step", f.t_b_step, "Grid: t_b step");
    add(app, "--delta-b-min", f.delta_b_min, "Grid: delta_b minimum");
    add(app, "--delta-b-max", f.delta_b_max, "Grid: delta_b maximum");
    add(app, "--delta-b-step", f.delta_b_step, "Grid: delta_b step");
    add(app, "--v-b-min", f.v_b_min, "Grid: v_b minimum");
    add(app, "--v-b-max", f.v_b_max, "Grid: v_b maximum");
    add(app, "--v-b-step", f.v_b_step, "Grid: v_b step");
    add(app, "--refine-stride", f.refine_stride, "Coarse-to-fine search stride (0 = exhaustive)");
}

void add_labeled(CLI::App* app, Flags& f) {
    add(app, "--layout", f.layout, "Store layout JSON");
    add(app, "--trajectories", f.trajectories, "Trajectories JSONL");
    add(app, "--labels", f.labels, "Reviewer labels JSONL");
    add(app, "--manifest", f.manifest, "Reviewer manifest JSON");
    add(app, "--n-l", f.n_l, "Number of reviewers when no manifest is given");
}

void write_error(std::ostream& err, const std::string& kind, const std::string& message, const std::string& element,
                 int code) {
    json record = {{"error", kind}, {"message", message}, {"exit_code", code}};
    if (!element.empty()) {
        record["element"] = element;
    }
    err << record.dump() << '\n';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Flags f;
    CLI::App app{"Shelf-visit detection from shopper trajectories", "shelfscan"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "shelfscan 0.1.0");

    CLI::App* detect = app.add_subcommand("detect", "Detect stops; writes stops.jsonl and stop_matrix.csv");
    add_common(detect, f);
    add(detect, "--layout", f.layout, "Store layout JSON");
    add(detect, "--trajectories", f.trajectories, "Trajectories JSONL");
    add_params(detect, f);
    add_window(detect, f);
    add_flag(detect, "--dense-matrix", f.dense_matrix, "Write every (shelf, sample) row, not only S = 1");

    CLI::App* calib = app.add_subcommand("calibrate", "Grid-search thresholds; writes calibration.json");
    add_common(calib, f);
    add_labeled(calib, f);
    add_grid(calib, f);
    add_window(calib, f);
    add_flag(calib, "--grid-csv", f.grid_csv, "Also write grid_scores.csv with every grid point");

    CLI::App* same = app.add_subcommand("eval-same", "Same-store hold-out evaluation over a p sweep");
    add_common(same, f);
    add_labeled(same, f);
    add_grid(same, f);
    add_window(same, f);
    add(same, "--p", f.p, "Comma-separated calibration fractions (default 0.1,...,0.9)");
    add(same, "--repeats", f.repeats, "Random calibration sets per p (default 10)");
    add(same, "--seed", f.seed, "Seed for subset draws (default 0)");

    CLI::App* cross = app.add_subcommand("eval-cross", "Calibrate on store A, evaluate on store B");
    add_common(cross, f);
    add(cross, "--layout-a", f.layout_a, "Store A layout");
    add(cross, "--trajectories-a", f.trajectories_a, "Store A trajectories");
    add(cross, "--labels-a", f.labels_a, "Store A labels");
    add(cross, "--manifest-a", f.manifest_a, "Store A reviewer manifest");
    add(cross, "--layout-b", f.layout_b, "Store B layout");
    add(cross, "--trajectories-b", f.trajectories_b, "Store B trajectories");
    add(cross, "--labels-b", f.labels_b, "Store B labels");
    add(cross, "--manifest-b", f.manifest_b, "Store B reviewer manifest");
    add(cross, "--n-l", f.n_l, "Number of reviewers when a manifest is missing");
    add_grid(cross, f);
    add_window(cross, f);
    add(cross, "--p", f.p, "Comma-separated fractions of store A used (default 1.0)");
    add(cross, "--repeats", f.repeats, "Random calibration sets per p (default 10)");
    add(cross, "--seed", f.seed, "Seed for subset draws (default 0)");

    CLI::App* analyze = app.add_subcommand("analyze", "Visit statistics and conversion rates");
    add_common(analyze, f);
    add(analyze, "--layout", f.layout, "Store layout JSON");
    add(analyze, "--trajectories", f.trajectories, "Trajectories JSONL");
    add(analyze, "--purchases", f.purchases, "Purchases CSV (trajectory_id,shelf_id,quantity)");
    add(analyze, "--purchase-mode", f.purchase_mode, "quantity (default) or incidence");
    add_params(analyze, f);
    add_window(analyze, f);

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic store, trajectories and labels");
    add_common(synth, f);
    add(synth, "--kind", f.kind, "random (default), calibration or scenario");
    add(synth, "--scenario", f.scenario, "Scenario JSON (with --kind scenario)");
    add(synth, "--shoppers", f.shoppers, "Number of shoppers (default 100)");
    add(synth, "--shelves", f.shelves, "Number of shelves for --kind random (default 10)");
    add(synth, "--samples", f.samples, "Exact trajectory length for --kind random (0 = natural)");
    add(synth, "--seed", f.seed, "Generator seed (default 0)");
    add(synth, "--position-noise", f.position_noise, "Position jitter std, m (default 0.02)");
    add(synth, "--heading-noise", f.heading_noise, "Heading jitter std, rad (default 0.05)");
    add(synth, "--label-mode", f.label_mode, "none (default), planted or truth");
    add(synth, "--n-l", f.n_l, "Reviewers for generated labels (default 3)");
    add(synth, "--jitter", f.jitter, "Boundary jitter std for truth labels, s (default 0.2)");
    add(synth, "--miss", f.miss, "Per-reviewer miss probability for truth labels (default 0.1)");
    add_params(synth, f);
    add_window(synth, f);

    CLI::App* oracle = app.add_subcommand("oracle-check", "Compare the detector with the brute-force oracle");
    add_common(oracle, f, false);
    add(oracle, "--seed", f.seed, "Seed (default 0)");
    add(oracle, "--scenarios", f.scenarios, "Random scenarios (default 1000)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << "shelfscan 0.1.0\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        write_error(err, "UsageError", e.what(), "", kExitUsage);
        return kExitUsage;
    }

    try {
        if (detect->parsed()) {
            return cmd_detect(f, out);
        }
        if (calib->parsed()) {
            return cmd_calibrate(f, out);
        }
        if (same->parsed()) {
            return cmd_eval_same(f, out);
        }
        if (cross->parsed()) {
            return cmd_eval_cross(f, out);
        }
        if (analyze->parsed()) {
            return cmd_analyze(f, out);
        }
        if (synth->parsed()) {
            return cmd_synth(f, out);
        }
        if (oracle->parsed()) {
            return cmd_oracle_check(f, out);
        }
    } catch (const UsageError& e) {
        write_error(err, "UsageError", e.what(), "", kExitUsage);
        return kExitUsage;
    } catch (const Error& e) {
        write_error(err, std::string(to_string(e.kind())), e.what(), e.element(), kExitDataError);
        return kExitDataError;
    } catch (const std::exception& e) {
        write_error(err, "InternalError", e.what(), "", kExitDataError);
        return kExitDataError;
    }
    return kExitUsage;
}

} // namespace shelfscan::cli
