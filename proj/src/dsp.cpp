#include "soundmap/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace soundmap::dsp {

namespace {

using cd = std::complex<double>;

/// Analog prototype poles with non-negative imaginary part; the conjugates
/// are implied. For odd orders the real pole at -1 comes last.
std::vector<cd> butterworth_prototype_upper(int order) {
    std::vector<cd> poles;
    for (int k = 0; k < order / 2; ++k) {
        double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    if (order % 2 == 1) {
        poles.emplace_back(-1.0, 0.0);
    }
    return poles;
}

} // namespace

BandPassSpec design_bandpass(double low, double high, double sample_rate, int order) {
    if (order < 1) {
        throw std::invalid_argument("design_bandpass: order must be >= 1");
    }
    if (!(0.0 < low && low < high)) {
        throw std::invalid_argument("design_bandpass: need 0 < low < high");
    }
    if (high >= sample_rate / 2.0) {
        throw std::invalid_argument("design_bandpass: high edge must be below Nyquist");
    }

    // Prewarped analog edge frequencies (rad/s) so the digital -3 dB points
    // land exactly on the requested edges.
    const double fs2 = 2.0 * sample_rate;
    const double w1 = fs2 * std::tan(std::numbers::pi * low / sample_rate);
    const double w2 = fs2 * std::tan(std::numbers::pi * high / sample_rate);
    const double w0_sq = w1 * w2;
    const double bw = w2 - w1;

    BandPassSpec spec;
    spec.low_edge = low;
    spec.high_edge = high;
    spec.order = order;
    spec.sample_rate = sample_rate;

    // Each low-pass prototype pole p maps to the roots of
    // s^2 - bw*p*s + w0^2 = 0. A complex p yields two poles whose conjugates
    // come from conj(p), giving two real-coefficient sections; the real pole
    // of odd orders yields one section on its own.
    auto add_section = [&](cd s1, cd s2) {
        const cd z1 = (fs2 + s1) / (fs2 - s1);
        const cd z2 = (fs2 + s2) / (fs2 - s2);
        // Analog section bw*s / ((s-s1)(s-s2)); the bilinear image has zeros
        // at z = +1 (from s = 0) and z = -1 (from the degree deficit), with
        // the gain scaled by bw * 2fs / ((2fs - s1)(2fs - s2)).
        const double gain = (bw * fs2 / ((fs2 - s1) * (fs2 - s2))).real();
        BiquadSection sec;
        sec.b0 = gain;
        sec.b1 = 0.0;
        sec.b2 = -gain;
        sec.a1 = -(z1 + z2).real();
        sec.a2 = (z1 * z2).real();
        spec.sections.push_back(sec);
    };

    for (const cd& p : butterworth_prototype_upper(order)) {
        const cd bp_half = bw * p / 2.0;
        const cd disc = std::sqrt(bp_half * bp_half - w0_sq);
        const cd s_a = bp_half + disc;
        const cd s_b = bp_half - disc;
        if (p.imag() > 0.0) {
            add_section(s_a, std::conj(s_a));
            add_section(s_b, std::conj(s_b));
        } else {
            // Real prototype pole: s_a and s_b are either conjugates or both
            // real, so together they form one real-coefficient section.
            add_section(s_a, s_b);
        }
    }

    for (const BiquadSection& sec : spec.sections) {
        if (!sec.stable()) {
            throw std::runtime_error("design_bandpass: produced an unstable section");
        }
    }
    return spec;
}

std::vector<double> apply_filter(const BandPassSpec& spec, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    for (const BiquadSection& sec : spec.sections) {
        double z1 = 0.0, z2 = 0.0;
        for (double& v : y) {
            const double in = v;
            const double out = sec.b0 * in + z1;
            z1 = sec.b1 * in - sec.a1 * out + z2;
            z2 = sec.b2 * in - sec.a2 * out;
            v = out;
        }
    }
    return y;
}

std::complex<double> filter_response(const BandPassSpec& spec, double freq) {
    const double omega = 2.0 * std::numbers::pi * freq / spec.sample_rate;
    const cd z1 = std::polar(1.0, -omega);
    const cd z2 = z1 * z1;
    cd h(1.0, 0.0);
    for (const BiquadSection& sec : spec.sections) {
        h *= (sec.b0 + sec.b1 * z1 + sec.b2 * z2) / (1.0 + sec.a1 * z1 + sec.a2 * z2);
    }
    return h;
}

void fft(std::vector<std::complex<double>>& data) {
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("fft: size must be a power of two");
    }
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(data[i], data[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const cd wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cd u = data[i + k];
                const cd v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(n)));
    }
    return w;
}

std::vector<SpectrumFrame> frame_spectra(std::span<const double> x, double sample_rate,
                                         std::size_t frame, std::size_t hop,
                                         std::span<const double> window) {
    if (frame == 0 || (frame & (frame - 1)) != 0) {
        throw std::invalid_argument("frame_spectra: frame length must be a power of two");
    }
    if (hop == 0) {
        throw std::invalid_argument("frame_spectra: hop must be positive");
    }
    if (x.size() < frame) {
        throw std::invalid_argument("frame_spectra: input shorter than one frame");
    }
    std::vector<double> default_window;
    if (window.empty()) {
        default_window = hann_window(frame);
        window = default_window;
    }
    if (window.size() != frame) {
        throw std::invalid_argument("frame_spectra: window length must match frame length");
    }

    const std::size_t n_frames = (x.size() - frame) / hop + 1;
    const double bin_width = sample_rate / static_cast<double>(frame);
    std::vector<SpectrumFrame> frames;
    frames.reserve(n_frames);
    std::vector<std::complex<double>> buf(frame);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::size_t offset = f * hop;
        for (std::size_t i = 0; i < frame; ++i) {
            buf[i] = {x[offset + i] * window[i], 0.0};
        }
        fft(buf);
        SpectrumFrame out;
        out.frame_index = static_cast<int>(f);
        out.bin_width = bin_width;
        out.magnitudes.resize(frame / 2);
        for (std::size_t i = 0; i < frame / 2; ++i) {
            out.magnitudes[i] = std::abs(buf[i]);
        }
        frames.push_back(std::move(out));
    }
    return frames;
}

std::vector<double> dct_ii(std::span<const double> v, std::size_t n_out) {
    const std::size_t n = v.size();
    if (n_out > n) {
        throw std::invalid_argument("dct_ii: n_out exceeds input length");
    }
    std::vector<double> out(n_out);
    const double norm0 = std::sqrt(1.0 / static_cast<double>(n));
    const double norm = std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t k = 0; k < n_out; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += v[i] * std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) *
                                   static_cast<double>(k) / (2.0 * static_cast<double>(n)));
        }
        out[k] = acc * (k == 0 ? norm0 : norm);
    }
    return out;
}

} // namespace soundmap::dsp
