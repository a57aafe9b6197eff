#include "soundmap/mfcc.hpp"

#include <cmath>
#include <stdexcept>

#include "soundmap/dsp.hpp"

namespace soundmap::mfcc {

double hz_to_mel(double f) {
    if (f < 0.0) {
        throw std::invalid_argument("hz_to_mel: negative frequency");
    }
    return 2595.0 * std::log10(1.0 + f / 700.0);
}

double mel_to_hz(double mel) {
    if (mel < 0.0) {
        throw std::invalid_argument("mel_to_hz: negative mel value");
    }
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank build_filterbank(int n_filters, double sample_rate, std::size_t n_bins) {
    if (n_filters < 2) {
        throw std::invalid_argument("build_filterbank: need at least 2 filters");
    }
    if (sample_rate <= 0.0 || n_bins == 0) {
        throw std::invalid_argument("build_filterbank: invalid sample rate or bin count");
    }
    const double f_max = sample_rate / 2.0;
    const double mel_max = hz_to_mel(f_max);
    // n_filters + 2 points equally spaced in mel: each filter's left edge,
    // peak and right edge are consecutive points.
    std::vector<double> edges(n_filters + 2);
    for (int i = 0; i < n_filters + 2; ++i) {
        edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / (n_filters + 1));
    }

    const double bin_width = sample_rate / static_cast<double>(2 * n_bins);
    MelFilterbank bank;
    bank.f_min = 0.0;
    bank.f_max = f_max;
    bank.sample_rate = sample_rate;
    bank.n_bins = n_bins;
    bank.weights.assign(n_filters, std::vector<double>(n_bins, 0.0));
    bank.centers.assign(edges.begin() + 1, edges.end() - 1);

    for (int j = 0; j < n_filters; ++j) {
        const double left = edges[j];
        const double center = edges[j + 1];
        const double right = edges[j + 2];
        bool covers_any = false;
        for (std::size_t i = 0; i < n_bins; ++i) {
            const double f = static_cast<double>(i) * bin_width;
            double w = 0.0;
            if (f >= left && f <= center) {
                w = (f - left) / (center - left);
            } else if (f > center && f <= right) {
                w = (right - f) / (right - center);
            }
            if (w > 0.0) {
                covers_any = true;
            }
            bank.weights[j][i] = w;
        }
        if (!covers_any) {
            throw std::invalid_argument(
                "build_filterbank: filter " + std::to_string(j) +
                " covers no bins; reduce n_filters or raise the bin resolution");
        }
    }
    return bank;
}

std::vector<double> downmix_mono(const StereoSegment& segment) {
    if (segment.left.size() != segment.right.size()) {
        throw std::invalid_argument("downmix_mono: channel length mismatch");
    }
    std::vector<double> mono(segment.left.size());
    for (std::size_t i = 0; i < mono.size(); ++i) {
        mono[i] = (segment.left[i] + segment.right[i]) / 2.0;
    }
    return mono;
}

std::vector<std::vector<double>> mfcc_frames(std::span<const double> mono, double sample_rate,
                                             const MelFilterbank& bank, const MfccConfig& config) {
    if (config.n_coeffs < 1 || config.coeff_offset < 0) {
        throw std::invalid_argument("mfcc_frames: invalid coefficient selection");
    }
    if (bank.n_bins * 2 != config.frame) {
        throw std::invalid_argument("mfcc_frames: filterbank resolution does not match frame length");
    }
    const std::size_t n_filters = bank.n_filters();
    const std::size_t want = static_cast<std::size_t>(config.coeff_offset + config.n_coeffs);
    if (want > n_filters) {
        throw std::invalid_argument("mfcc_frames: more coefficients requested than filters");
    }

    const auto spectra = dsp::frame_spectra(mono, sample_rate, config.frame, config.hop);
    std::vector<std::vector<double>> out;
    out.reserve(spectra.size());
    std::vector<double> mel_log(n_filters);
    for (const auto& frame : spectra) {
        for (std::size_t j = 0; j < n_filters; ++j) {
            double energy = 0.0;
            const auto& weights = bank.weights[j];
            for (std::size_t i = 0; i < bank.n_bins; ++i) {
                energy += weights[i] * frame.magnitudes[i];
            }
            mel_log[j] = std::log(energy + config.log_floor);
        }
        const auto coeffs = dsp::dct_ii(mel_log, want);
        out.emplace_back(coeffs.begin() + config.coeff_offset, coeffs.end());
    }
    return out;
}

MfccFeature mfcc_feature(const StereoSegment& segment, const MelFilterbank& bank,
                         const MfccConfig& config) {
    const auto mono = downmix_mono(segment);
    const auto frames = mfcc_frames(mono, segment.sample_rate, bank, config);
    MfccFeature feature;
    feature.n_frames = static_cast<int>(frames.size());
    feature.c.assign(static_cast<std::size_t>(config.n_coeffs), 0.0);
    for (const auto& frame : frames) {
        for (std::size_t k = 0; k < feature.c.size(); ++k) {
            feature.c[k] += frame[k];
        }
    }
    for (double& v : feature.c) {
        v /= static_cast<double>(frames.size());
    }
    return feature;
}

} // namespace soundmap::mfcc
