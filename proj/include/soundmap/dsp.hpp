#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace soundmap::dsp {

/// One second-order section, direct form II transposed.
/// y = b0*x + b1*x[-1] + b2*x[-2] - a1*y[-1] - a2*y[-2]
struct BiquadSection {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    bool stable() const { return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2; }
};

/// Digital Butterworth band-pass as a cascade of second-order sections.
struct BandPassSpec {
    double low_edge = 0.0;  ///< Hz, -3.01 dB point
    double high_edge = 0.0; ///< Hz, -3.01 dB point
    int order = 5;          ///< analog prototype order (sections.size() == order)
    double sample_rate = 0.0;
    std::vector<BiquadSection> sections;
};

/// Designs an order-n Butterworth band-pass via the bilinear transform with
/// frequency prewarping, so the magnitude at each edge is exactly -3.01 dB.
/// Requires 0 < low < high < sample_rate / 2.
BandPassSpec design_bandpass(double low, double high, double sample_rate, int order = 5);

/// Causal single-pass filtering from zero initial state. Output length equals
/// input length.
std::vector<double> apply_filter(const BandPassSpec& spec, std::span<const double> x);

/// Complex frequency response of the section cascade at `freq` Hz.
std::complex<double> filter_response(const BandPassSpec& spec, double freq);

/// Magnitudes of the first frame/2 DFT bins of one windowed frame.
struct SpectrumFrame {
    std::vector<double> magnitudes;
    int frame_index = 0;
    double bin_width = 0.0; ///< Hz per bin (sample_rate / frame)
};

/// In-place radix-2 FFT. Size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

std::vector<double> hann_window(std::size_t n);

/// Frame-wise magnitude spectra at offsets 0, hop, 2*hop, ...; the trailing
/// partial frame is dropped. `window` must match the frame length; an empty
/// window means Hann. Throws if the input is shorter than one frame.
std::vector<SpectrumFrame> frame_spectra(std::span<const double> x, double sample_rate,
                                         std::size_t frame = 2048, std::size_t hop = 1024,
                                         std::span<const double> window = {});

/// First n_out coefficients of the orthonormal DCT-II of v.
std::vector<double> dct_ii(std::span<const double> v, std::size_t n_out);

} // namespace soundmap::dsp
