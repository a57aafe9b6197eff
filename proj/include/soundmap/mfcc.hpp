#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "soundmap/corpus.hpp"

namespace soundmap::mfcc {

/// mel(f) = 2595 * log10(1 + f / 700)
double hz_to_mel(double f);
double mel_to_hz(double mel);

/// Triangular filters, peak-normalized to 1, centers equally spaced on the
/// mel scale, sampled at the DFT bin frequencies.
struct MelFilterbank {
    std::vector<std::vector<double>> weights; ///< n_filters x n_bins
    std::vector<double> centers;              ///< Hz
    double f_min = 0.0, f_max = 0.0;
    double sample_rate = 0.0;
    std::size_t n_bins = 0;

    std::size_t n_filters() const { return weights.size(); }
};

struct MfccConfig {
    int n_coeffs = 6;
    int coeff_offset = 0;      ///< 0 keeps c0; 1 drops it
    double log_floor = 1e-10;  ///< added to mel energies before the log
    std::size_t frame = 2048;
    std::size_t hop = 1024;
};

/// Filters span 0 Hz to sample_rate/2 over n_bins bins of a (2*n_bins)-point
/// DFT. Throws if any filter covers zero bins.
MelFilterbank build_filterbank(int n_filters, double sample_rate, std::size_t n_bins = 1024);

/// Per-song MFCC aggregate.
struct MfccFeature {
    std::vector<double> c; ///< n_coeffs values, mean over frames
    int n_frames = 0;
};

/// m[i] = (L[i] + R[i]) / 2
std::vector<double> downmix_mono(const StereoSegment& segment);

/// Per frame: magnitude spectrum -> filterbank -> log(e + floor) ->
/// orthonormal DCT-II -> coefficients [offset, offset + n_coeffs).
std::vector<std::vector<double>> mfcc_frames(std::span<const double> mono, double sample_rate,
                                             const MelFilterbank& bank,
                                             const MfccConfig& config = {});

/// Arithmetic mean of the per-frame coefficient vectors.
MfccFeature mfcc_feature(const StereoSegment& segment, const MelFilterbank& bank,
                         const MfccConfig& config = {});

} // namespace soundmap::mfcc
