// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
// argv[1] must be the path to the soundmap CLI binary (criterion 6).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../tests/oracles.hpp"
#include "soundmap/analysis.hpp"
#include "soundmap/corpus.hpp"
#include "soundmap/dsp.hpp"
#include "soundmap/gonio.hpp"
#include "soundmap/mfcc.hpp"
#include "soundmap/report.hpp"
#include "soundmap/rng.hpp"
#include "soundmap/som.hpp"
#include "soundmap/synth.hpp"

using namespace soundmap;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;
fs::path g_work;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            if (!detail.empty()) {
                detail += "; ";
            }
            detail += what;
        }
    }
};

std::vector<double> noise(std::size_t n, Rng& rng, double amplitude = 1.0) {
    std::vector<double> x(n);
    for (double& v : x) {
        v = amplitude * rng.uniform(-1.0, 1.0);
    }
    return x;
}

StereoSegment segment_of(std::vector<double> left, std::vector<double> right, double rate) {
    StereoSegment segment;
    segment.left = std::move(left);
    segment.right = std::move(right);
    segment.sample_rate = rate;
    return segment;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return "<missing:" + path.string() + ">";
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
    const std::string cmd =
        g_cli_path + " " + args + " >> " + (g_work / "cli.log").string() + " 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

// --- criterion 1: chi-squared regression against published statistics ------

bool criterion_chi2(Check& check) {
    const auto dre = analysis::chi2_gof(14, 15, 0.48);
    check.require(dre.statistic >= 11.9 && dre.statistic <= 12.8,
                  "chi2(14,15,0.48) = " + std::to_string(dre.statistic) + " not in [11.9,12.8]");
    const auto llcoolj = analysis::chi2_gof(9, 12, 0.30);
    check.require(llcoolj.statistic >= 11.1 && llcoolj.statistic <= 12.1,
                  "chi2(9,12,0.30) = " + std::to_string(llcoolj.statistic) + " not in [11.1,12.1]");
    const auto rr = analysis::chi2_gof(6, 11, 0.28);
    check.require(rr.statistic >= 3.6 && rr.statistic <= 4.1,
                  "chi2(6,11,0.28) = " + std::to_string(rr.statistic) + " not in [3.6,4.1]");
    const double sf = analysis::chi2_sf(5.0, 1);
    check.require(std::abs(sf - 0.0253) <= 0.0005,
                  "chi2_sf(5,1) = " + std::to_string(sf) + " not 0.0253 +/- 0.0005");
    return check.ok;
}

// --- criterion 2: goniometer sanity on 46 s / 44100 Hz signals -------------

bool criterion_gonio(Check& check) {
    const double rate = 44100.0;
    const std::size_t n = static_cast<std::size_t>(46 * rate);
    Rng rng(42);

    const auto mono = noise(n, rng, 0.9);
    const auto mono_feature = gonio::gonio_feature(segment_of(mono, mono, rate));
    for (const double corr : {mono_feature.corr_low, mono_feature.corr_mid, mono_feature.corr_high}) {
        check.require(std::abs(corr - 1.0) <= 1e-6, "mono correlation " + std::to_string(corr));
    }
    for (const int boxes : {mono_feature.boxes_low, mono_feature.boxes_mid, mono_feature.boxes_high}) {
        check.require(boxes <= 20, "mono box count " + std::to_string(boxes) + " > 20");
    }

    std::vector<double> flipped(mono.size());
    for (std::size_t i = 0; i < mono.size(); ++i) {
        flipped[i] = -mono[i];
    }
    const auto anti = gonio::gonio_feature(segment_of(mono, flipped, rate));
    for (const double corr : {anti.corr_low, anti.corr_mid, anti.corr_high}) {
        check.require(std::abs(corr + 1.0) <= 1e-6, "anti-phase correlation " + std::to_string(corr));
    }

    const auto silence =
        gonio::gonio_feature(segment_of(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), rate));
    check.require(silence.boxes_low == 1 && silence.boxes_mid == 1 && silence.boxes_high == 1 &&
                      silence.corr_low == 1.0 && silence.corr_mid == 1.0 && silence.corr_high == 1.0,
                  "silence feature is not (1,1,1,1,1,1)");

    const auto left = noise(n, rng);
    const auto right = noise(n, rng);
    const double corr = gonio::channel_correlation(left, right);
    check.require(std::abs(corr) < 0.01, "independent-noise correlation " + std::to_string(corr));
    // Band-passing shrinks the effective sample count to ~2*bandwidth*T, so
    // the per-band bound is 4/sqrt(2*B*T) rather than the broadband 0.01.
    const auto independent = gonio::gonio_feature(segment_of(left, right, rate));
    const double bands[3][2] = {{20, 150}, {150, 2000}, {2000, 10000}};
    const double corrs[3] = {independent.corr_low, independent.corr_mid, independent.corr_high};
    for (int b = 0; b < 3; ++b) {
        const double sigma = 1.0 / std::sqrt(2.0 * (bands[b][1] - bands[b][0]) * 46.0);
        check.require(std::abs(corrs[b]) < 4.0 * sigma,
                      "band " + std::to_string(b) + " correlation " + std::to_string(corrs[b]));
    }
    const int count = gonio::box_count(gonio::rotate_mid_side(left, right));
    const int expected = oracles::diamond_cell_count(20);
    check.require(std::abs(count - expected) <= 0.05 * expected,
                  "box count " + std::to_string(count) + " not within 5% of oracle " +
                      std::to_string(expected));
    return check.ok;
}

// --- criterion 3: band-pass design verification -----------------------------

bool criterion_filters(Check& check) {
    const double rate = 44100.0;
    for (const auto& band : gonio::kDefaultBands) {
        const auto spec = dsp::design_bandpass(band.low, band.high, rate, 5);
        auto level = [&](double f) { return 20.0 * std::log10(std::abs(dsp::filter_response(spec, f))); };
        const std::string tag =
            "band " + std::to_string(band.low) + "-" + std::to_string(band.high) + ": ";
        check.require(std::abs(level(band.low) - (-3.0103)) <= 0.1, tag + "low edge off");
        check.require(std::abs(level(band.high) - (-3.0103)) <= 0.1, tag + "high edge off");
        check.require(level(std::sqrt(band.low * band.high)) >= -0.5, tag + "center sag");
        check.require(level(band.low / 4.0) <= -60.0, tag + "low skirt shallow");
        if (band.high * 4.0 < rate / 2.0) {
            check.require(level(band.high * 4.0) <= -60.0, tag + "high skirt shallow");
        }
        for (const auto& section : spec.sections) {
            check.require(section.stable(), tag + "unstable section");
        }
    }
    return check.ok;
}

// --- criterion 4: MFCC oracle equivalence -----------------------------------

bool criterion_mfcc(Check& check) {
    const double rate = 44100.0;
    const auto bank = mfcc::build_filterbank(40, rate);
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const auto frame = noise(2048, rng, 0.8);
        const auto got = mfcc::mfcc_frames(frame, rate, bank);
        const auto expected = oracles::mfcc_frame_oracle(frame, rate, 40, 1e-10, 6);
        for (std::size_t k = 0; k < 6; ++k) {
            if (std::abs(got[0][k] - expected[k]) > 1e-6) {
                check.require(false, "frame " + std::to_string(trial) + " c" + std::to_string(k) +
                                         " differs by " +
                                         std::to_string(std::abs(got[0][k] - expected[k])));
            }
        }
    }
    const std::vector<double> zeros(4096, 0.0);
    const auto silent = mfcc::mfcc_frames(zeros, rate, bank);
    for (const auto& frame : silent) {
        for (std::size_t k = 1; k < 6; ++k) {
            check.require(std::abs(frame[k]) <= 1e-9,
                          "silence c" + std::to_string(k) + " = " + std::to_string(frame[k]));
        }
    }
    return check.ok;
}

// --- criterion 5: SOM properties ---------------------------------------------

bool criterion_som(Check& check) {
    // single-vector collapse
    {
        const std::vector<double> v{37.0, 120.0, 250.0, 0.9, 0.5, -0.2};
        som::SomConfig config;
        config.rows = 10;
        config.cols = 8;
        config.epochs = 60;
        const auto model =
            som::train_som(std::vector<std::vector<double>>(100, v), config, som::FeatureKind::Gonio);
        const auto z = model.standardizer.apply(v);
        double worst = 0.0;
        for (const auto& w : model.codebook) {
            for (std::size_t j = 0; j < w.size(); ++j) {
                worst = std::max(worst, std::abs(w[j] - z[j]));
            }
        }
        check.require(worst <= 1e-3, "collapse residual " + std::to_string(worst));
    }

    // seed determinism, bitwise on the serialized document
    Rng rng(42);
    std::vector<std::vector<double>> train_set;
    std::vector<std::vector<std::vector<double>>> clusters(3);
    std::vector<std::vector<std::vector<double>>> holdout(3);
    const std::vector<std::vector<double>> centers{
        {0, 0, 0, 0, 0, 0}, {10, 0, 0, 0, 0, 0}, {0, 10, 0, 0, 0, 0}}; // 10 sigma apart, sigma = 1
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
        for (int i = 0; i < 50; ++i) {
            std::vector<double> p(6);
            for (std::size_t j = 0; j < 6; ++j) {
                p[j] = centers[ci][j] + rng.normal();
            }
            clusters[ci].push_back(p);
            train_set.push_back(p);
        }
        for (int i = 0; i < 20; ++i) {
            std::vector<double> p(6);
            for (std::size_t j = 0; j < 6; ++j) {
                p[j] = centers[ci][j] + rng.normal();
            }
            holdout[ci].push_back(p);
        }
    }
    som::SomConfig config;
    config.rows = 16;
    config.cols = 12;
    config.epochs = 100;
    config.seed = 42;
    const auto model = som::train_som(train_set, config, som::FeatureKind::Gonio);
    const auto again = som::train_som(train_set, config, som::FeatureKind::Gonio);
    check.require(som::serialize_model(model) == som::serialize_model(again),
                  "same-seed models serialize differently");

    // disjoint BMU cell sets + hull regions catching 90% of held-out points
    std::vector<std::set<som::CellCoord>> bmu_sets(3);
    std::vector<std::vector<som::CellCoord>> bmu_lists(3);
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        for (const auto& p : clusters[ci]) {
            const auto cell = som::best_matching_unit(model, p);
            bmu_sets[ci].insert(cell);
            bmu_lists[ci].push_back(cell);
        }
    }
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
            std::vector<som::CellCoord> overlap;
            std::set_intersection(bmu_sets[i].begin(), bmu_sets[i].end(), bmu_sets[j].begin(),
                                  bmu_sets[j].end(), std::back_inserter(overlap));
            check.require(overlap.empty(), "clusters " + std::to_string(i) + "," +
                                               std::to_string(j) + " share " +
                                               std::to_string(overlap.size()) + " cells");
        }
    }
    for (std::size_t ci = 0; ci < 3; ++ci) {
        const auto region = analysis::auto_region("cluster", "c", bmu_lists[ci], config.rows,
                                                  config.cols);
        int inside = 0;
        for (const auto& p : holdout[ci]) {
            if (analysis::point_in_region(region, som::best_matching_unit(model, p))) {
                ++inside;
            }
        }
        check.require(inside >= 18, "cluster " + std::to_string(ci) + " holds " +
                                        std::to_string(inside) + "/20 held-out points");
    }

    // BMU equals an exhaustive scan on 1000 random queries
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> raw(6);
        for (double& v : raw) {
            v = rng.uniform(-5.0, 15.0);
        }
        const auto z = model.standardizer.apply(raw);
        som::CellCoord best{0, 0};
        double best_d = std::numeric_limits<double>::infinity();
        for (int r = 0; r < config.rows; ++r) {
            for (int c = 0; c < config.cols; ++c) {
                double d = 0.0;
                const auto& w = model.at(r, c);
                for (std::size_t j = 0; j < 6; ++j) {
                    d += (z[j] - w[j]) * (z[j] - w[j]);
                }
                if (d < best_d) {
                    best_d = d;
                    best = {r, c};
                }
            }
        }
        if (!(som::best_matching_unit(model, raw) == best)) {
            check.require(false, "BMU mismatch vs brute force at query " + std::to_string(trial));
            break;
        }
    }
    return check.ok;
}

// --- criterion 6: end-to-end pipeline on a synthetic corpus -----------------

bool criterion_pipeline(Check& check) {
    const fs::path corpus = g_work / "corpus";
    const fs::path out1 = g_work / "run1";
    const fs::path out2 = g_work / "run2";

    check.require(run_cli("synth --out " + corpus.string() +
                          " --train-per-producer 20 --holdout-per-producer 5 --seed 42") == 0,
                  "synth exited nonzero");
    check.require(run_cli("pipeline --manifest " + (corpus / "manifest.csv").string() + " --out " +
                          out1.string() + " --seed 42") == 0,
                  "pipeline exited nonzero");
    if (!check.ok) {
        return false;
    }

    for (const std::string kind : {"gonio", "mfcc"}) {
        const auto stats = nlohmann::json::parse(read_file(out1 / kind / "stats.json"));
        int significant = 0;
        int groups = 0;
        for (const auto& row : stats.at("rows")) {
            if (row.at("performer") == "(pooled)" &&
                row.at("song_group") == row.at("region_group")) {
                ++groups;
                if (row.at("p_value").get<double>() < 0.01) {
                    ++significant;
                }
            }
        }
        check.require(groups == 3, kind + ": expected 3 own-region rows, saw " +
                                       std::to_string(groups));
        check.require(significant >= 2, kind + ": only " + std::to_string(significant) +
                                            "/3 producers significant at p < 0.01");
    }

    check.require(run_cli("pipeline --manifest " + (corpus / "manifest.csv").string() + " --out " +
                          out2.string() + " --seed 42") == 0,
                  "pipeline rerun exited nonzero");
    for (const std::string kind : {"gonio", "mfcc"}) {
        for (const std::string name : {"features.csv", "features.csv.meta.json", "model.json",
                                       "bmus.csv", "regions.txt", "stats.json", "stats.txt",
                                       "map.svg"}) {
            if (read_file(out1 / kind / name) != read_file(out2 / kind / name)) {
                check.require(false, kind + "/" + name + " differs between reruns");
            }
        }
    }
    return check.ok;
}

// --- criterion 7: report determinism (golden files) -------------------------

bool criterion_report(Check& check) {
    report::MapScene scene;
    scene.rows = 6;
    scene.cols = 5;
    scene.background.assign(6, std::vector<double>(5, 0.0));
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 5; ++c) {
            scene.background[r][c] = static_cast<double>(r * 5 + c) / 29.0;
        }
    }
    scene.dots = {{{0, 0}, "alpha", "a01"},
                  {{2, 3}, "beta", "b07"},
                  {{2, 3}, "beta", "b08"},
                  {{5, 4}, "alpha", "a02"}};
    analysis::Region region;
    region.name = "alpha-region";
    region.group = "alpha";
    region.polygon = {{0.25, 0.25}, {3.5, 0.5}, {2.0, 4.75}};
    scene.overlays = {region};
    const std::vector<std::string> groups{"alpha", "beta"};
    scene.legend = report::default_legend(groups);

    const auto svg1 = report::render_map_svg(scene);
    const auto svg2 = report::render_map_svg(scene);
    check.require(svg1 == svg2, "two SVG renders differ");
    check.require(svg1 == read_file(fs::path(TEST_DATA_DIR) / "golden_map.svg"),
                  "SVG differs from the frozen golden file");

    SongRecord a{"a01", "audio/a01.wav", "MC One", "Prod X", SongRole::ProducerTrain, "alpha"};
    SongRecord b{"b07", "audio/b07.wav", "MC Two, Jr.", "Prod Y", SongRole::RapperCollab, "beta"};
    const std::vector<std::pair<SongRecord, std::vector<double>>> rows{
        {a, {37.0, 120.0, 251.0, 1.0 / 3.0, std::sqrt(2.0) - 1.0, -0.25}},
        {b, {4.0, 98.0, 307.0, 0.1 + 0.2, -1.0 / 7.0, 0.875}},
    };
    const auto csv1 = report::export_features(rows);
    const auto csv2 = report::export_features(rows);
    check.require(csv1 == csv2, "two CSV exports differ");
    check.require(csv1 == read_file(fs::path(TEST_DATA_DIR) / "golden_features.csv"),
                  "CSV differs from the frozen golden file");
    return check.ok;
}

struct Criterion {
    int number;
    std::string name;
    double budget_seconds;
    std::function<bool(Check&)> run;
};

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance_tests <path-to-soundmap-cli>\n");
        return 2;
    }
    g_cli_path = argv[1];
    g_work = fs::temp_directory_path() / "soundmap_acceptance";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    const std::vector<Criterion> criteria{
        {1, "chi-squared regression vs published statistics", 1.0, criterion_chi2},
        {2, "goniometer sanity suite (46 s at 44100 Hz)", 30.0, criterion_gonio},
        {3, "band-pass design verification", 1.0, criterion_filters},
        {4, "MFCC oracle equivalence", 30.0, criterion_mfcc},
        {5, "SOM training properties", 120.0, criterion_som},
        {6, "end-to-end pipeline on a synthetic corpus", 600.0, criterion_pipeline},
        {7, "report determinism (golden files)", 30.0, criterion_report},
    };

    bool all_ok = true;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Check check;
        bool ok = false;
        try {
            ok = criterion.run(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > criterion.budget_seconds) {
            ok = false;
            check.require(false, "runtime " + std::to_string(seconds) + " s exceeds " +
                                     std::to_string(criterion.budget_seconds) + " s budget");
        }
        std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL",
                    criterion.number, criterion.name.c_str(), seconds,
                    check.detail.empty() ? "" : " - ", check.detail.c_str());
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }

    if (all_ok) {
        fs::remove_all(g_work); // corpus + pipeline outputs are large
    } else {
        std::printf("work directory kept for inspection: %s\n", g_work.string().c_str());
    }
    return all_ok ? 0 : 1;
}
