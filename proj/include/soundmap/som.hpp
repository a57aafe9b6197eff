#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace soundmap::som {

enum class FeatureKind { Gonio, Mfcc };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& text);

/// Per-dimension affine scaling to zero mean / unit std. Constant dimensions
/// keep a std of 1 so they map to (numerically) zero instead of blowing up.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> invert(std::span<const double> z) const;
};

/// Population mean/std per dimension. Throws on an empty feature list.
Standardizer fit_standardizer(const std::vector<std::vector<double>>& features);

struct SomConfig {
    int rows = 24;
    int cols = 16;
    int epochs = 200;
    double lr_start = 0.5;
    double lr_end = 0.01;
    double sigma_start = 0.0; ///< 0 means max(rows, cols) / 2
    double sigma_end = 1.0;
    std::uint64_t seed = 42;

    double effective_sigma_start() const {
        return sigma_start > 0.0 ? sigma_start : std::max(rows, cols) / 2.0;
    }
};

struct CellCoord {
    int row = 0;
    int col = 0;
    auto operator<=>(const CellCoord&) const = default;
};

/// Trained map: codebook in standardized feature space plus the scaling that
/// produced it, so new raw features can be projected later.
struct SomModel {
    SomConfig config;
    FeatureKind kind = FeatureKind::Gonio;
    Standardizer standardizer;
    std::size_t dim = 0;
    std::vector<std::vector<double>> codebook; ///< row-major, rows*cols entries

    const std::vector<double>& at(int row, int col) const {
        return codebook[static_cast<std::size_t>(row) * config.cols + col];
    }
    std::vector<double>& at(int row, int col) {
        return codebook[static_cast<std::size_t>(row) * config.cols + col];
    }
};

/// Model with the seeded pre-training codebook (uniform in the per-dimension
/// [min, max] of the standardized features). Training starts from this state.
SomModel initial_model(const std::vector<std::vector<double>>& features, const SomConfig& config,
                       FeatureKind kind);

/// Online Kohonen training. Per epoch the samples are visited in a seeded
/// shuffled order; every unit moves toward the sample weighted by a Gaussian
/// of its grid distance to the BMU. lr and sigma decay linearly per epoch.
/// The sample order is canonical (sorted), so the result depends only on the
/// multiset of features, the config, and the seed.
SomModel train_som(const std::vector<std::vector<double>>& features, const SomConfig& config,
                   FeatureKind kind);

/// Cell whose codebook vector is nearest (Euclidean) to the standardized
/// input; ties break to the smallest (row, col). Throws on non-finite input.
CellCoord best_matching_unit(const SomModel& model, std::span<const double> raw_feature);

/// Per cell: mean Euclidean distance to the existing 4-neighborhood vectors.
std::vector<std::vector<double>> u_matrix(const SomModel& model);

/// Mean distance of each standardized feature to its BMU codebook vector.
double quantization_error(const SomModel& model, const std::vector<std::vector<double>>& features);

/// Lossless JSON round-trip of config, seed, standardizer, codebook, kind.
std::string serialize_model(const SomModel& model);
SomModel deserialize_model(const std::string& text);
void save_model(const std::filesystem::path& path, const SomModel& model);
SomModel load_model(const std::filesystem::path& path);

} // namespace soundmap::som
