#include "soundmap/som.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "soundmap/rng.hpp"

namespace soundmap::som {

namespace {

constexpr double kStdFloor = 1e-12;

void validate_features(const std::vector<std::vector<double>>& features) {
    if (features.empty()) {
        throw std::invalid_argument("empty feature list");
    }
    const std::size_t dim = features.front().size();
    if (dim == 0) {
        throw std::invalid_argument("zero-dimensional features");
    }
    for (const auto& f : features) {
        if (f.size() != dim) {
            throw std::invalid_argument("inconsistent feature dimensions");
        }
        for (double v : f) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("non-finite feature value");
            }
        }
    }
}

void validate_config(const SomConfig& config) {
    if (config.rows < 2 || config.cols < 2) {
        throw std::invalid_argument("SomConfig: rows and cols must be >= 2");
    }
    if (config.epochs < 1) {
        throw std::invalid_argument("SomConfig: epochs must be >= 1");
    }
    if (!(config.lr_start >= config.lr_end && config.lr_end > 0.0)) {
        throw std::invalid_argument("SomConfig: need lr_start >= lr_end > 0");
    }
    if (!(config.effective_sigma_start() >= config.sigma_end && config.sigma_end > 0.0)) {
        throw std::invalid_argument("SomConfig: need sigma_start >= sigma_end > 0");
    }
}

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

CellCoord scan_bmu(const SomModel& model, std::span<const double> z) {
    CellCoord best{0, 0};
    double best_d = std::numeric_limits<double>::infinity();
    for (int r = 0; r < model.config.rows; ++r) {
        for (int c = 0; c < model.config.cols; ++c) {
            const double d = sq_distance(model.at(r, c), z);
            if (d < best_d) { // strict: first (lowest row, col) wins ties
                best_d = d;
                best = {r, c};
            }
        }
    }
    return best;
}

SomModel make_initial(const std::vector<std::vector<double>>& standardized,
                      const SomConfig& config, FeatureKind kind, Standardizer standardizer,
                      Rng& rng) {
    const std::size_t dim = standardized.front().size();
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& z : standardized) {
        for (std::size_t j = 0; j < dim; ++j) {
            lo[j] = std::min(lo[j], z[j]);
            hi[j] = std::max(hi[j], z[j]);
        }
    }
    SomModel model;
    model.config = config;
    model.kind = kind;
    model.standardizer = std::move(standardizer);
    model.dim = dim;
    model.codebook.assign(static_cast<std::size_t>(config.rows) * config.cols,
                          std::vector<double>(dim, 0.0));
    for (auto& w : model.codebook) {
        for (std::size_t j = 0; j < dim; ++j) {
            w[j] = rng.uniform(lo[j], hi[j]);
        }
    }
    return model;
}

/// Canonically ordered standardized features, so the training result depends
/// only on the multiset of inputs.
std::vector<std::vector<double>> standardized_sorted(
    const std::vector<std::vector<double>>& features, const Standardizer& standardizer) {
    std::vector<std::vector<double>> z;
    z.reserve(features.size());
    for (const auto& f : features) {
        z.push_back(standardizer.apply(f));
    }
    std::sort(z.begin(), z.end());
    return z;
}

} // namespace

std::string to_string(FeatureKind kind) {
    return kind == FeatureKind::Gonio ? "gonio" : "mfcc";
}

FeatureKind feature_kind_from_string(const std::string& text) {
    if (text == "gonio") return FeatureKind::Gonio;
    if (text == "mfcc") return FeatureKind::Mfcc;
    throw std::runtime_error("unknown feature kind '" + text + "'");
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    if (x.size() != means.size()) {
        throw std::invalid_argument("Standardizer::apply: dimension mismatch");
    }
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        z[j] = (x[j] - means[j]) / stds[j];
    }
    return z;
}

std::vector<double> Standardizer::invert(std::span<const double> z) const {
    if (z.size() != means.size()) {
        throw std::invalid_argument("Standardizer::invert: dimension mismatch");
    }
    std::vector<double> x(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        x[j] = z[j] * stds[j] + means[j];
    }
    return x;
}

Standardizer fit_standardizer(const std::vector<std::vector<double>>& features) {
    validate_features(features);
    // Accumulate in canonical order so the scaling (and everything trained on
    // it) depends only on the multiset of features.
    std::vector<std::vector<double>> sorted = features;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t dim = sorted.front().size();
    const double n = static_cast<double>(sorted.size());
    Standardizer s;
    s.means.assign(dim, 0.0);
    s.stds.assign(dim, 0.0);
    for (const auto& f : sorted) {
        for (std::size_t j = 0; j < dim; ++j) {
            s.means[j] += f[j];
        }
    }
    for (double& m : s.means) {
        m /= n;
    }
    for (const auto& f : sorted) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = f[j] - s.means[j];
            s.stds[j] += d * d;
        }
    }
    for (double& v : s.stds) {
        v = std::sqrt(v / n);
        if (v <= kStdFloor) {
            v = 1.0; // constant dimension: map to ~0 instead of amplifying noise
        }
    }
    return s;
}

SomModel initial_model(const std::vector<std::vector<double>>& features, const SomConfig& config,
                       FeatureKind kind) {
    validate_features(features);
    validate_config(config);
    auto standardizer = fit_standardizer(features);
    auto z = standardized_sorted(features, standardizer);
    Rng rng(config.seed);
    return make_initial(z, config, kind, std::move(standardizer), rng);
}

SomModel train_som(const std::vector<std::vector<double>>& features, const SomConfig& config,
                   FeatureKind kind) {
    validate_features(features);
    validate_config(config);
    auto standardizer = fit_standardizer(features);
    auto samples = standardized_sorted(features, standardizer);
    Rng rng(config.seed);
    SomModel model = make_initial(samples, config, kind, std::move(standardizer), rng);

    const int rows = config.rows;
    const int cols = config.cols;
    const double sigma_start = config.effective_sigma_start();
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double t =
            config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 0.0;
        const double lr = config.lr_start + (config.lr_end - config.lr_start) * t;
        const double sigma = sigma_start + (config.sigma_end - sigma_start) * t;
        const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

        rng.shuffle(order);
        for (std::size_t idx : order) {
            const auto& x = samples[idx];
            const CellCoord bmu = scan_bmu(model, x);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    const double dr = r - bmu.row;
                    const double dc = c - bmu.col;
                    const double h = std::exp(-(dr * dr + dc * dc) * inv_two_sigma_sq);
                    const double step = lr * h;
                    auto& w = model.at(r, c);
                    for (std::size_t j = 0; j < model.dim; ++j) {
                        w[j] += step * (x[j] - w[j]);
                    }
                }
            }
        }
    }
    return model;
}

CellCoord best_matching_unit(const SomModel& model, std::span<const double> raw_feature) {
    for (double v : raw_feature) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("best_matching_unit: non-finite input");
        }
    }
    const auto z = model.standardizer.apply(raw_feature);
    return scan_bmu(model, z);
}

std::vector<std::vector<double>> u_matrix(const SomModel& model) {
    const int rows = model.config.rows;
    const int cols = model.config.cols;
    std::vector<std::vector<double>> u(rows, std::vector<double>(cols, 0.0));
    constexpr int dr[] = {-1, 1, 0, 0};
    constexpr int dc[] = {0, 0, -1, 1};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            int count = 0;
            for (int k = 0; k < 4; ++k) {
                const int nr = r + dr[k];
                const int nc = c + dc[k];
                if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) {
                    continue;
                }
                acc += std::sqrt(sq_distance(model.at(r, c), model.at(nr, nc)));
                ++count;
            }
            u[r][c] = acc / count;
        }
    }
    return u;
}

double quantization_error(const SomModel& model, const std::vector<std::vector<double>>& features) {
    validate_features(features);
    double acc = 0.0;
    for (const auto& f : features) {
        const auto z = model.standardizer.apply(f);
        const CellCoord bmu = scan_bmu(model, z);
        acc += std::sqrt(sq_distance(model.at(bmu.row, bmu.col), z));
    }
    return acc / static_cast<double>(features.size());
}

std::string serialize_model(const SomModel& model) {
    nlohmann::json j;
    j["format"] = "soundmap-som";
    j["version"] = 1;
    j["feature_kind"] = to_string(model.kind);
    j["config"] = {{"rows", model.config.rows},
                   {"cols", model.config.cols},
                   {"epochs", model.config.epochs},
                   {"lr_start", model.config.lr_start},
                   {"lr_end", model.config.lr_end},
                   {"sigma_start", model.config.sigma_start},
                   {"sigma_end", model.config.sigma_end},
                   {"seed", model.config.seed}};
    j["standardizer"] = {{"means", model.standardizer.means}, {"stds", model.standardizer.stds}};
    j["dim"] = model.dim;
    j["codebook"] = model.codebook;
    return j.dump(2) + "\n";
}

SomModel deserialize_model(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "soundmap-som") {
        throw std::runtime_error("not a soundmap SOM model document");
    }
    SomModel model;
    const auto& c = j.at("config");
    model.config.rows = c.at("rows").get<int>();
    model.config.cols = c.at("cols").get<int>();
    model.config.epochs = c.at("epochs").get<int>();
    model.config.lr_start = c.at("lr_start").get<double>();
    model.config.lr_end = c.at("lr_end").get<double>();
    model.config.sigma_start = c.at("sigma_start").get<double>();
    model.config.sigma_end = c.at("sigma_end").get<double>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.kind = feature_kind_from_string(j.at("feature_kind").get<std::string>());
    model.standardizer.means = j.at("standardizer").at("means").get<std::vector<double>>();
    model.standardizer.stds = j.at("standardizer").at("stds").get<std::vector<double>>();
    model.dim = j.at("dim").get<std::size_t>();
    model.codebook = j.at("codebook").get<std::vector<std::vector<double>>>();
    const std::size_t cells = static_cast<std::size_t>(model.config.rows) * model.config.cols;
    if (model.codebook.size() != cells) {
        throw std::runtime_error("model codebook size does not match grid");
    }
    for (const auto& w : model.codebook) {
        if (w.size() != model.dim) {
            throw std::runtime_error("model codebook vector dimension mismatch");
        }
    }
    if (model.standardizer.means.size() != model.dim ||
        model.standardizer.stds.size() != model.dim) {
        throw std::runtime_error("model standardizer dimension mismatch");
    }
    return model;
}

void save_model(const std::filesystem::path& path, const SomModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write model file " + path.string());
    }
    const std::string text = serialize_model(model);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

SomModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open model file " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(text);
}

} // namespace soundmap::som
