#pragma once

#include <array>
#include <span>
#include <vector>

#include "soundmap/corpus.hpp"

namespace soundmap::gonio {

/// Phase-scope grid resolution (20 x 20 boxes).
inline constexpr int kGrid = 20;

/// Band edges in Hz for the low / mid / high split.
struct BandEdges {
    double low = 0.0;
    double high = 0.0;
};

inline constexpr std::array<BandEdges, 3> kDefaultBands{{{20.0, 150.0}, {150.0, 2000.0}, {2000.0, 10000.0}}};

/// Per-band box-occupancy counts and channel correlations.
struct GonioFeature {
    int boxes_low = 0, boxes_mid = 0, boxes_high = 0;
    double corr_low = 0.0, corr_mid = 0.0, corr_high = 0.0;

    std::array<double, 6> as_vector() const {
        return {static_cast<double>(boxes_low), static_cast<double>(boxes_mid),
                static_cast<double>(boxes_high), corr_low, corr_mid, corr_high};
    }
};

/// Stereo samples rotated onto mid/side axes.
struct RotatedCloud {
    std::vector<double> m; ///< (L+R)/sqrt(2)
    std::vector<double> s; ///< (R-L)/sqrt(2); right-heavy signals have s > 0
};

RotatedCloud rotate_mid_side(std::span<const double> left, std::span<const double> right);
RotatedCloud rotate_mid_side(const StereoSegment& segment);

/// Number of occupied cells of a grid x grid tiling of [-sqrt2, sqrt2]^2 in
/// (m, s). Cells are half-open with the final row/column closed; points
/// outside the span are clamped to the boundary cells.
int box_count(const RotatedCloud& cloud, int grid = kGrid);

/// Pearson correlation between the channels. Degenerate conventions: both
/// channels constant -> 1.0 (mono-compatible, like a hardware meter on
/// silence), exactly one constant -> 0.0. Requires equal lengths >= 2.
double channel_correlation(std::span<const double> left, std::span<const double> right);

/// Band-pass each channel, then box-count and correlate per band. Result
/// order: [boxes_low, boxes_mid, boxes_high, corr_low, corr_mid, corr_high].
GonioFeature gonio_feature(const StereoSegment& segment,
                           std::span<const BandEdges> bands = kDefaultBands);

} // namespace soundmap::gonio
