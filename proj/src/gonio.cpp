#include "soundmap/gonio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "soundmap/dsp.hpp"

namespace soundmap::gonio {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

} // namespace

RotatedCloud rotate_mid_side(std::span<const double> left, std::span<const double> right) {
    if (left.size() != right.size()) {
        throw std::invalid_argument("rotate_mid_side: channel length mismatch");
    }
    RotatedCloud cloud;
    cloud.m.resize(left.size());
    cloud.s.resize(left.size());
    const double inv_sqrt2 = 1.0 / kSqrt2;
    for (std::size_t i = 0; i < left.size(); ++i) {
        cloud.m[i] = (left[i] + right[i]) * inv_sqrt2;
        cloud.s[i] = (right[i] - left[i]) * inv_sqrt2;
    }
    return cloud;
}

RotatedCloud rotate_mid_side(const StereoSegment& segment) {
    return rotate_mid_side(segment.left, segment.right);
}

int box_count(const RotatedCloud& cloud, int grid) {
    if (grid < 1) {
        throw std::invalid_argument("box_count: grid must be >= 1");
    }
    if (cloud.m.size() != cloud.s.size()) {
        throw std::invalid_argument("box_count: axis length mismatch");
    }
    // Cells tile [-sqrt2, sqrt2]^2; half-open edges except the final
    // row/column, and out-of-span points (filter overshoot) clamp to the
    // boundary cells.
    const double span = 2.0 * kSqrt2;
    auto cell_of = [&](double v) -> int {
        int idx = static_cast<int>(std::floor((v + kSqrt2) / span * grid));
        if (idx < 0) {
            return 0;
        }
        if (idx >= grid) {
            return grid - 1;
        }
        return idx;
    };
    std::vector<char> occupied(static_cast<std::size_t>(grid) * grid, 0);
    int count = 0;
    for (std::size_t i = 0; i < cloud.m.size(); ++i) {
        const std::size_t cell =
            static_cast<std::size_t>(cell_of(cloud.m[i])) * grid + cell_of(cloud.s[i]);
        if (!occupied[cell]) {
            occupied[cell] = 1;
            ++count;
        }
    }
    return count;
}

double channel_correlation(std::span<const double> left, std::span<const double> right) {
    if (left.size() != right.size()) {
        throw std::invalid_argument("channel_correlation: length mismatch");
    }
    if (left.size() < 2) {
        throw std::invalid_argument("channel_correlation: need at least 2 samples");
    }
    const std::size_t n = left.size();
    double mean_l = 0.0, mean_r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_l += left[i];
        mean_r += right[i];
    }
    mean_l /= static_cast<double>(n);
    mean_r /= static_cast<double>(n);
    double ss_l = 0.0, ss_r = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dl = left[i] - mean_l;
        const double dr = right[i] - mean_r;
        ss_l += dl * dl;
        ss_r += dr * dr;
        cross += dl * dr;
    }
    // Hardware correlation meters show silence as mono-compatible: both
    // channels constant -> 1.0; exactly one constant -> 0.0.
    if (ss_l == 0.0 && ss_r == 0.0) {
        return 1.0;
    }
    if (ss_l == 0.0 || ss_r == 0.0) {
        return 0.0;
    }
    return std::clamp(cross / std::sqrt(ss_l * ss_r), -1.0, 1.0);
}

GonioFeature gonio_feature(const StereoSegment& segment, std::span<const BandEdges> bands) {
    if (bands.size() != 3) {
        throw std::invalid_argument("gonio_feature: expected exactly 3 bands");
    }
    int boxes[3] = {0, 0, 0};
    double corrs[3] = {0.0, 0.0, 0.0};
    for (std::size_t b = 0; b < 3; ++b) {
        const auto spec = dsp::design_bandpass(bands[b].low, bands[b].high, segment.sample_rate);
        const auto left = dsp::apply_filter(spec, segment.left);
        const auto right = dsp::apply_filter(spec, segment.right);
        boxes[b] = box_count(rotate_mid_side(left, right));
        corrs[b] = channel_correlation(left, right);
    }
    GonioFeature feature;
    feature.boxes_low = boxes[0];
    feature.boxes_mid = boxes[1];
    feature.boxes_high = boxes[2];
    feature.corr_low = corrs[0];
    feature.corr_mid = corrs[1];
    feature.corr_high = corrs[2];
    return feature;
}

} // namespace soundmap::gonio
