#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "soundmap/analysis.hpp"
#include "soundmap/corpus.hpp"
#include "soundmap/csv.hpp"
#include "soundmap/gonio.hpp"
#include "soundmap/mfcc.hpp"
#include "soundmap/report.hpp"
#include "soundmap/som.hpp"
#include "soundmap/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace soundmap;

namespace {

// exit codes: 0 success, 1 usage, 2 data, 3 internal
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw std::runtime_error("short write to " + path.string());
    }
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct FeatureRow {
    SongRecord record;
    std::vector<double> values;
};

struct FeatureTable {
    std::vector<FeatureRow> rows;
    std::optional<som::FeatureKind> kind; // from the metadata sidecar, if present
};

fs::path sidecar_path(const fs::path& csv_path) {
    return fs::path(csv_path.string() + ".meta.json");
}

FeatureTable load_feature_table(const fs::path& path) {
    FeatureTable table;
    std::istringstream in(read_text_file(path));
    std::string line;
    int line_no = 0;
    bool header = true;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto fields = csv::split_line(line);
        if (header) {
            if (fields.size() < 6 || fields[0] != "id") {
                throw std::runtime_error(path.string() + ": not a feature CSV");
            }
            dim = fields.size() - 5;
            header = false;
            continue;
        }
        if (fields.size() != dim + 5) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": wrong field count");
        }
        FeatureRow row;
        row.record.id = fields[0];
        row.record.performer = fields[1];
        row.record.producer = fields[2];
        row.record.role = role_from_string(fields[3]);
        row.record.group = fields[4];
        row.values.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const std::string& cell = fields[5 + i];
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size()) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": bad number '" + cell + "'");
            }
            row.values.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    const fs::path meta = sidecar_path(path);
    if (fs::exists(meta)) {
        const json j = json::parse(read_text_file(meta));
        if (j.contains("feature")) {
            table.kind = som::feature_kind_from_string(j.at("feature").get<std::string>());
        }
    }
    return table;
}

struct BmuRow {
    std::string id;
    som::CellCoord cell;
};

std::vector<BmuRow> load_bmu_table(const fs::path& path) {
    std::vector<BmuRow> rows;
    std::istringstream in(read_text_file(path));
    std::string line;
    bool header = true;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto fields = csv::split_line(line);
        if (header) {
            if (fields.size() != 3 || fields[0] != "id") {
                throw std::runtime_error(path.string() + ": not a BMU CSV");
            }
            header = false;
            continue;
        }
        if (fields.size() != 3) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected id,row,col");
        }
        try {
            rows.push_back({fields[0], {std::stoi(fields[1]), std::stoi(fields[2])}});
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": bad cell coordinates");
        }
    }
    return rows;
}

std::string format_bmu_table(const std::vector<BmuRow>& rows) {
    std::ostringstream out;
    out << "id,row,col\n";
    for (const auto& row : rows) {
        out << csv::escape_field(row.id) << "," << row.cell.row << "," << row.cell.col << "\n";
    }
    return out.str();
}

void parse_grid(const std::string& text, int& rows, int& cols) {
    const std::size_t x = text.find('x');
    if (x == std::string::npos) {
        throw UsageError("--grid expects RxC, e.g. 24x16");
    }
    try {
        rows = std::stoi(text.substr(0, x));
        cols = std::stoi(text.substr(x + 1));
    } catch (const std::exception&) {
        throw UsageError("--grid expects RxC, e.g. 24x16");
    }
    if (rows < 2 || cols < 2) {
        throw UsageError("--grid needs at least 2x2");
    }
}

json decision_metadata(som::FeatureKind kind) {
    json d;
    d["segment"] = {{"seconds", 46.0},
                    {"placement", "middle"},
                    {"short_input", "analyzed whole, truncated flag set"}};
    d["wav_scaling"] = "integer / 2^(bits-1); float clamped to [-1,1]";
    d["accepted_sample_rates_hz"] = {22050, 96000};
    if (kind == som::FeatureKind::Gonio) {
        json bands = json::array();
        for (const auto& band : gonio::kDefaultBands) {
            bands.push_back({band.low, band.high});
        }
        d["bands_hz"] = bands;
        d["filter"] = {{"type", "butterworth band-pass"},
                       {"order", 5},
                       {"discretization", "bilinear with edge prewarping"},
                       {"phase", "causal single pass"}};
        d["box_grid"] = {{"cells", gonio::kGrid},
                         {"span", "[-sqrt2, sqrt2]^2 in rotated mid/side coordinates"},
                         {"cell_edges", "half-open, final row/column closed"},
                         {"out_of_span", "clamped to boundary cells"}};
        d["correlation"] = {{"window", "full segment"},
                            {"silence", 1.0},
                            {"one_constant_channel", 0.0}};
    } else {
        d["downmix"] = "(L+R)/2";
        d["spectrum"] = {{"frame", 2048}, {"hop", 1024}, {"window", "hann (periodic)"},
                         {"bins", 1024}, {"uses", "magnitude, not power"}};
        d["mel"] = {{"n_filters", 40},
                    {"range_hz", "0 to sample_rate/2"},
                    {"normalization", "triangles peak at 1"}};
        d["log_floor"] = 1e-10;
        d["log_base"] = "e";
        d["coefficients"] = {{"count", 6}, {"offset", 0}};
        d["aggregation"] = "mean over frames";
    }
    return d;
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

struct ExtractOptions {
    fs::path manifest;
    som::FeatureKind kind = som::FeatureKind::Gonio;
    fs::path out;
    bool skip_bad = false;
};

int run_extract(const ExtractOptions& opt) {
    const auto records = load_manifest(opt.manifest);

    // Songs are independent; extract in parallel but keep every output in
    // manifest order so reruns stay byte-identical.
    struct SongResult {
        std::vector<double> values;
        std::string error;
        bool truncated = false;
    };
    std::vector<SongResult> results(records.size());
    std::mutex bank_mutex;
    std::map<long, mfcc::MelFilterbank> banks; // keyed by rounded sample rate
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < records.size();) {
            SongResult& out = results[i];
            try {
                const auto signal = decode_wav(records[i].path);
                const auto segment = extract_middle_segment(signal);
                out.truncated = segment.truncated;
                if (opt.kind == som::FeatureKind::Gonio) {
                    const auto v = gonio::gonio_feature(segment).as_vector();
                    out.values.assign(v.begin(), v.end());
                } else {
                    const long rate = std::lround(segment.sample_rate);
                    const mfcc::MelFilterbank* bank = nullptr;
                    {
                        std::lock_guard<std::mutex> lock(bank_mutex);
                        auto it = banks.find(rate);
                        if (it == banks.end()) {
                            it = banks.emplace(rate, mfcc::build_filterbank(40, segment.sample_rate))
                                     .first;
                        }
                        bank = &it->second;
                    }
                    out.values = mfcc::mfcc_feature(segment, *bank).c;
                }
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), records.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t + 1 < n_threads; ++t) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& thread : threads) {
        thread.join();
    }

    std::vector<std::pair<SongRecord, std::vector<double>>> rows;
    std::vector<std::string> truncated_ids;
    std::vector<std::string> skipped;
    std::vector<std::string> errors;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!results[i].error.empty()) {
            errors.push_back(records[i].id + ": " + results[i].error);
            if (opt.skip_bad) {
                skipped.push_back(records[i].id);
            }
            continue;
        }
        if (results[i].truncated) {
            truncated_ids.push_back(records[i].id);
            std::fprintf(stderr, "warning: %s is shorter than 46 s; analyzing whole song\n",
                         records[i].id.c_str());
        }
        rows.emplace_back(records[i], std::move(results[i].values));
    }

    if (!errors.empty() && !opt.skip_bad) {
        for (const auto& err : errors) {
            std::fprintf(stderr, "error: %s\n", err.c_str());
        }
        throw std::runtime_error("feature extraction failed for " + std::to_string(errors.size()) +
                                 " of " + std::to_string(records.size()) + " songs");
    }

    write_text_file(opt.out, report::export_features(rows));

    json meta;
    meta["feature"] = som::to_string(opt.kind);
    meta["manifest"] = opt.manifest.string();
    meta["song_count"] = rows.size();
    meta["truncated_ids"] = truncated_ids;
    meta["skipped_ids"] = skipped;
    meta["decisions"] = decision_metadata(opt.kind);
    write_text_file(sidecar_path(opt.out), meta.dump(2) + "\n");

    std::printf("extracted %zu %s features -> %s\n", rows.size(),
                som::to_string(opt.kind).c_str(), opt.out.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
    fs::path features;
    fs::path out;
    std::optional<som::FeatureKind> kind;
    som::SomConfig config;
};

int run_train(const TrainOptions& opt) {
    const auto table = load_feature_table(opt.features);
    som::FeatureKind kind;
    if (opt.kind) {
        kind = *opt.kind;
    } else if (table.kind) {
        kind = *table.kind;
    } else {
        throw UsageError("feature kind unknown: pass --feature or keep the .meta.json sidecar");
    }

    std::vector<std::vector<double>> training;
    for (const auto& row : table.rows) {
        if (row.record.role == SongRole::ProducerTrain) {
            training.push_back(row.values);
        }
    }
    if (training.empty()) {
        throw std::runtime_error("no rows with role producer-train in " + opt.features.string());
    }

    const auto model = som::train_som(training, opt.config, kind);
    if (opt.out.has_parent_path()) {
        fs::create_directories(opt.out.parent_path());
    }
    som::save_model(opt.out, model);
    std::printf("trained %dx%d %s SOM on %zu songs, quantization error %.4f -> %s\n",
                model.config.rows, model.config.cols, som::to_string(kind).c_str(),
                training.size(), som::quantization_error(model, training),
                opt.out.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// project
// ---------------------------------------------------------------------------

struct ProjectOptions {
    fs::path model;
    fs::path features;
    fs::path out;
    bool include_training = false;
};

int run_project(const ProjectOptions& opt) {
    const auto model = som::load_model(opt.model);
    const auto table = load_feature_table(opt.features);
    if (table.kind && *table.kind != model.kind) {
        throw std::runtime_error("feature kind mismatch: model is " + som::to_string(model.kind) +
                                 ", features are " + som::to_string(*table.kind));
    }
    std::vector<BmuRow> bmus;
    for (const auto& row : table.rows) {
        if (!opt.include_training && row.record.role == SongRole::ProducerTrain) {
            continue;
        }
        bmus.push_back({row.record.id, som::best_matching_unit(model, row.values)});
    }
    write_text_file(opt.out, format_bmu_table(bmus));
    std::printf("projected %zu songs -> %s\n", bmus.size(), opt.out.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOptions {
    fs::path bmus;
    fs::path features;
    fs::path regions;
    std::optional<fs::path> model;
    std::optional<std::string> grid;
    fs::path out; ///< base path; writes <out>.json and <out>.txt
};

void check_regions_in_bounds(std::span<const analysis::Region> regions, int rows, int cols) {
    for (const auto& region : regions) {
        for (const auto& vertex : region.polygon) {
            if (vertex[0] < 0.0 || vertex[0] > cols || vertex[1] < 0.0 || vertex[1] > rows) {
                throw std::runtime_error("region '" + region.name +
                                         "' has a vertex outside the grid bounds");
            }
        }
    }
}

int run_stats(const StatsOptions& opt) {
    int rows = 0, cols = 0;
    if (opt.model) {
        const auto model = som::load_model(*opt.model);
        rows = model.config.rows;
        cols = model.config.cols;
    } else if (opt.grid) {
        parse_grid(*opt.grid, rows, cols);
    } else {
        throw UsageError("stats needs --model or --grid to know the map size");
    }

    const auto table = load_feature_table(opt.features);
    std::map<std::string, const SongRecord*> by_id;
    for (const auto& row : table.rows) {
        by_id[row.record.id] = &row.record;
    }
    std::vector<std::pair<SongRecord, som::CellCoord>> projected;
    for (const auto& bmu : load_bmu_table(opt.bmus)) {
        const auto it = by_id.find(bmu.id);
        if (it == by_id.end()) {
            throw std::runtime_error("BMU id '" + bmu.id + "' not present in " +
                                     opt.features.string());
        }
        projected.emplace_back(*it->second, bmu.cell);
    }

    const auto regions = analysis::load_regions(opt.regions);
    if (regions.empty()) {
        throw std::runtime_error("no regions in " + opt.regions.string());
    }
    check_regions_in_bounds(regions, rows, cols);

    const auto stats = report::build_stats_report(projected, regions, rows, cols);
    write_text_file(fs::path(opt.out.string() + ".json"), report::stats_report_json(stats));
    write_text_file(fs::path(opt.out.string() + ".txt"), report::stats_report_text(stats));
    std::printf("wrote %s.json and %s.txt (%zu rows)\n", opt.out.string().c_str(),
                opt.out.string().c_str(), stats.entries.size());
    return 0;
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

struct RenderOptions {
    fs::path model;
    fs::path bmus;
    fs::path features;
    std::optional<fs::path> regions;
    fs::path out;
};

int run_render(const RenderOptions& opt) {
    const auto model = som::load_model(opt.model);
    const auto table = load_feature_table(opt.features);
    std::map<std::string, const SongRecord*> by_id;
    for (const auto& row : table.rows) {
        by_id[row.record.id] = &row.record;
    }

    report::MapScene scene;
    scene.rows = model.config.rows;
    scene.cols = model.config.cols;
    scene.background = som::u_matrix(model);

    std::vector<std::string> groups;
    for (const auto& bmu : load_bmu_table(opt.bmus)) {
        const auto it = by_id.find(bmu.id);
        if (it == by_id.end()) {
            throw std::runtime_error("BMU id '" + bmu.id + "' not present in " +
                                     opt.features.string());
        }
        scene.dots.push_back({bmu.cell, it->second->group, bmu.id});
        groups.push_back(it->second->group);
    }
    if (opt.regions) {
        auto regions = analysis::load_regions(*opt.regions);
        check_regions_in_bounds(regions, scene.rows, scene.cols);
        for (auto& region : regions) {
            groups.push_back(region.group);
        }
        scene.overlays = std::move(regions);
    }
    scene.legend = report::default_legend(groups);

    write_text_file(opt.out, report::render_map_svg(scene));
    std::printf("rendered %zu dots, %zu regions -> %s\n", scene.dots.size(),
                scene.overlays.size(), opt.out.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct PipelineOptions {
    fs::path manifest;
    fs::path out_dir;
    std::optional<fs::path> regions;
    som::SomConfig config;
    bool skip_bad = false;
};

int run_pipeline(const PipelineOptions& opt) {
    for (const som::FeatureKind kind : {som::FeatureKind::Gonio, som::FeatureKind::Mfcc}) {
        const fs::path dir = opt.out_dir / som::to_string(kind);
        fs::create_directories(dir);

        ExtractOptions extract;
        extract.manifest = opt.manifest;
        extract.kind = kind;
        extract.out = dir / "features.csv";
        extract.skip_bad = opt.skip_bad;
        run_extract(extract);

        TrainOptions train;
        train.features = extract.out;
        train.out = dir / "model.json";
        train.kind = kind;
        train.config = opt.config;
        run_train(train);

        ProjectOptions project;
        project.model = train.out;
        project.features = extract.out;
        project.out = dir / "bmus.csv";
        run_project(project);

        fs::path regions_path;
        if (opt.regions) {
            regions_path = *opt.regions;
        } else {
            // Regions from the training songs' BMUs, one per group.
            const auto model = som::load_model(train.out);
            const auto table = load_feature_table(extract.out);
            std::map<std::string, std::vector<som::CellCoord>> train_bmus;
            for (const auto& row : table.rows) {
                if (row.record.role == SongRole::ProducerTrain) {
                    train_bmus[row.record.group].push_back(
                        som::best_matching_unit(model, row.values));
                }
            }
            std::vector<analysis::Region> regions;
            for (const auto& [group, cells] : train_bmus) {
                regions.push_back(analysis::auto_region(group + "-region", group, cells,
                                                        model.config.rows, model.config.cols));
            }
            regions_path = dir / "regions.txt";
            write_text_file(regions_path,
                            "# auto-generated: dilated convex hulls of each group's training"
                            " BMUs, not hand-drawn\n" +
                                analysis::format_regions(regions));
        }

        StatsOptions stats;
        stats.bmus = project.out;
        stats.features = extract.out;
        stats.regions = regions_path;
        stats.model = train.out;
        stats.out = dir / "stats";
        run_stats(stats);

        RenderOptions render;
        render.model = train.out;
        render.bmus = project.out;
        render.features = extract.out;
        render.regions = regions_path;
        render.out = dir / "map.svg";
        run_render(render);
    }
    std::printf("pipeline complete -> %s\n", opt.out_dir.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOptions {
    fs::path out_dir;
    synth::SynthConfig config;
};

int run_synth(const SynthOptions& opt) {
    const auto records = synth::generate_corpus(opt.out_dir, opt.config);
    std::printf("synthesized %zu songs -> %s\n", records.size(),
                (opt.out_dir / "manifest.csv").string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"goniometer/MFCC sound-profile maps: feature extraction, SOM training,\n"
                 "region statistics and SVG rendering"};
    app.require_subcommand(1);

    std::function<int()> action;

    std::string feature_name = "gonio";
    const std::map<std::string, som::FeatureKind> kind_map{
        {"gonio", som::FeatureKind::Gonio}, {"mfcc", som::FeatureKind::Mfcc}};

    // extract
    auto extract_opt = std::make_shared<ExtractOptions>();
    auto* extract_cmd = app.add_subcommand("extract", "extract features from a corpus manifest");
    extract_cmd->add_option("--manifest", extract_opt->manifest, "corpus manifest CSV")
        ->required()
        ->check(CLI::ExistingFile);
    extract_cmd
        ->add_option("--feature", feature_name, "feature kind")
        ->check(CLI::IsMember({"gonio", "mfcc"}));
    extract_cmd->add_option("--out", extract_opt->out, "output feature CSV path")->required();
    extract_cmd->add_flag("--skip-bad", extract_opt->skip_bad,
                          "skip undecodable songs instead of failing the run");
    extract_cmd->callback([&, extract_opt] {
        extract_opt->kind = kind_map.at(feature_name);
        action = [extract_opt] { return run_extract(*extract_opt); };
    });

    // train
    auto train_opt = std::make_shared<TrainOptions>();
    std::string train_grid;
    auto* train_cmd = app.add_subcommand("train", "train a SOM on producer-train rows");
    train_cmd->add_option("--features", train_opt->features, "feature CSV from extract")
        ->required()
        ->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train_opt->out, "output model JSON path")->required();
    auto* train_feature =
        train_cmd->add_option("--feature", feature_name, "feature kind (default: CSV sidecar)")
            ->check(CLI::IsMember({"gonio", "mfcc"}));
    train_cmd->add_option("--grid", train_grid, "map size RxC (default 24x16)");
    train_cmd->add_option("--epochs", train_opt->config.epochs, "training epochs");
    train_cmd->add_option("--seed", train_opt->config.seed, "RNG seed");
    train_cmd->callback([&, train_opt] {
        if (*train_feature) {
            train_opt->kind = kind_map.at(feature_name);
        }
        if (!train_grid.empty()) {
            parse_grid(train_grid, train_opt->config.rows, train_opt->config.cols);
        }
        action = [train_opt] { return run_train(*train_opt); };
    });

    // project
    auto project_opt = std::make_shared<ProjectOptions>();
    auto* project_cmd = app.add_subcommand("project", "map songs to their best matching units");
    project_cmd->add_option("--model", project_opt->model, "model JSON")
        ->required()
        ->check(CLI::ExistingFile);
    project_cmd->add_option("--features", project_opt->features, "feature CSV")
        ->required()
        ->check(CLI::ExistingFile);
    project_cmd->add_option("--out", project_opt->out, "output BMU CSV path")->required();
    project_cmd->add_flag("--include-training", project_opt->include_training,
                          "also project producer-train rows");
    project_cmd->callback(
        [&, project_opt] { action = [project_opt] { return run_project(*project_opt); }; });

    // stats
    auto stats_opt = std::make_shared<StatsOptions>();
    std::string stats_grid;
    fs::path stats_model;
    auto* stats_cmd = app.add_subcommand("stats", "chi-squared region containment statistics");
    stats_cmd->add_option("--bmus", stats_opt->bmus, "BMU CSV from project")
        ->required()
        ->check(CLI::ExistingFile);
    stats_cmd->add_option("--features", stats_opt->features, "feature CSV (song metadata)")
        ->required()
        ->check(CLI::ExistingFile);
    stats_cmd->add_option("--regions", stats_opt->regions, "region config file")
        ->required()
        ->check(CLI::ExistingFile);
    auto* stats_model_opt =
        stats_cmd->add_option("--model", stats_model, "model JSON (for the grid size)")
            ->check(CLI::ExistingFile);
    stats_cmd->add_option("--grid", stats_grid, "map size RxC if no --model");
    stats_cmd->add_option("--out", stats_opt->out, "output base path (.json/.txt appended)")
        ->required();
    stats_cmd->callback([&, stats_opt, stats_model_opt] {
        if (*stats_model_opt) {
            stats_opt->model = stats_model;
        }
        if (!stats_grid.empty()) {
            stats_opt->grid = stats_grid;
        }
        action = [stats_opt] { return run_stats(*stats_opt); };
    });

    // render
    auto render_opt = std::make_shared<RenderOptions>();
    fs::path render_regions;
    auto* render_cmd = app.add_subcommand("render", "render the map as a standalone SVG");
    render_cmd->add_option("--model", render_opt->model, "model JSON")
        ->required()
        ->check(CLI::ExistingFile);
    render_cmd->add_option("--bmus", render_opt->bmus, "BMU CSV")
        ->required()
        ->check(CLI::ExistingFile);
    render_cmd->add_option("--features", render_opt->features, "feature CSV (song metadata)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* render_regions_opt =
        render_cmd->add_option("--regions", render_regions, "region config file")
            ->check(CLI::ExistingFile);
    render_cmd->add_option("--out", render_opt->out, "output SVG path")->required();
    render_cmd->callback([&, render_opt, render_regions_opt] {
        if (*render_regions_opt) {
            render_opt->regions = render_regions;
        }
        action = [render_opt] { return run_render(*render_opt); };
    });

    // pipeline
    auto pipeline_opt = std::make_shared<PipelineOptions>();
    std::string pipeline_grid;
    fs::path pipeline_regions;
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "extract, train, project, stats and render for both features");
    pipeline_cmd->add_option("--manifest", pipeline_opt->manifest, "corpus manifest CSV")
        ->required()
        ->check(CLI::ExistingFile);
    pipeline_cmd->add_option("--out", pipeline_opt->out_dir, "output directory")->required();
    auto* pipeline_regions_opt =
        pipeline_cmd
            ->add_option("--regions", pipeline_regions,
                         "region config applied to both maps (default: auto-generated)")
            ->check(CLI::ExistingFile);
    pipeline_cmd->add_option("--grid", pipeline_grid, "map size RxC (default 24x16)");
    pipeline_cmd->add_option("--epochs", pipeline_opt->config.epochs, "training epochs");
    pipeline_cmd->add_option("--seed", pipeline_opt->config.seed, "RNG seed");
    pipeline_cmd->add_flag("--skip-bad", pipeline_opt->skip_bad,
                           "skip undecodable songs instead of failing the run");
    pipeline_cmd->callback([&, pipeline_opt, pipeline_regions_opt] {
        if (*pipeline_regions_opt) {
            pipeline_opt->regions = pipeline_regions;
        }
        if (!pipeline_grid.empty()) {
            parse_grid(pipeline_grid, pipeline_opt->config.rows, pipeline_opt->config.cols);
        }
        action = [pipeline_opt] { return run_pipeline(*pipeline_opt); };
    });

    // synth
    auto synth_opt = std::make_shared<SynthOptions>();
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic WAV corpus + manifest");
    synth_cmd->add_option("--out", synth_opt->out_dir, "output directory")->required();
    synth_cmd->add_option("--train-per-producer", synth_opt->config.train_per_producer,
                          "training songs per virtual producer");
    synth_cmd->add_option("--holdout-per-producer", synth_opt->config.holdout_per_producer,
                          "held-out songs per virtual producer");
    synth_cmd->add_option("--duration", synth_opt->config.duration, "song length in seconds");
    synth_cmd->add_option("--rate", synth_opt->config.sample_rate, "sample rate in Hz");
    synth_cmd->add_option("--seed", synth_opt->config.seed, "RNG seed");
    synth_cmd->callback(
        [&, synth_opt] { action = [synth_opt] { return run_synth(*synth_opt); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return action ? action() : 1;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}
