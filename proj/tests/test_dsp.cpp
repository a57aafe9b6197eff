#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "soundmap/dsp.hpp"
#include "soundmap/rng.hpp"

using namespace soundmap;
using dsp::BandPassSpec;

namespace {

double db(double magnitude) { return 20.0 * std::log10(magnitude); }

double response_db(const BandPassSpec& spec, double freq) {
    return db(std::abs(dsp::filter_response(spec, freq)));
}

std::vector<double> sine(double freq, double rate, std::size_t n, double amplitude = 1.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
    }
    return x;
}

} // namespace

TEST_SUITE("dsp") {

TEST_CASE("design_bandpass: -3.01 dB at both prewarped edges") {
    const auto spec = dsp::design_bandpass(150, 2000, 44100, 5);
    CHECK(std::abs(response_db(spec, 150) - (-3.0103)) < 0.1);
    CHECK(std::abs(response_db(spec, 2000) - (-3.0103)) < 0.1);
}

TEST_CASE("design_bandpass: near-unity gain at the geometric center") {
    const auto spec = dsp::design_bandpass(150, 2000, 44100, 5);
    CHECK(response_db(spec, std::sqrt(150.0 * 2000.0)) >= -0.5);
}

TEST_CASE("design_bandpass: deep skirt two+ octaves below the low edge") {
    const auto spec = dsp::design_bandpass(150, 2000, 44100, 5);
    CHECK(response_db(spec, 20) <= -60.0);
}

TEST_CASE("design_bandpass: whole curve matches the analytic prototype response") {
    // Through the bilinear transform, |H(f)| must equal the analog Butterworth
    // band-pass magnitude 1/sqrt(1 + Omega^(2n)) evaluated at the prewarped
    // frequency, for every f. This pins the entire curve, not just the edges.
    for (const double rate : {22050.0, 48000.0, 96000.0}) {
        for (const auto& [low, high] :
             std::vector<std::pair<double, double>>{{20, 150}, {150, 2000}, {2000, 10000}}) {
            const int order = 5;
            const auto spec = dsp::design_bandpass(low, high, rate, order);
            const double w1 = 2.0 * rate * std::tan(std::numbers::pi * low / rate);
            const double w2 = 2.0 * rate * std::tan(std::numbers::pi * high / rate);
            const double w0_sq = w1 * w2;
            const double bw = w2 - w1;
            for (int i = 1; i < 60; ++i) {
                const double f = rate / 2.0 * i / 60.0;
                const double w = 2.0 * rate * std::tan(std::numbers::pi * f / rate);
                const double omega = (w * w - w0_sq) / (bw * w);
                const double expected = 1.0 / std::sqrt(1.0 + std::pow(omega, 2.0 * order));
                const double got = std::abs(dsp::filter_response(spec, f));
                CHECK(std::abs(got - expected) < 1e-9 * (1.0 + expected));
            }
        }
    }
}

TEST_CASE("design_bandpass: all sections stable across bands and rates") {
    for (const double rate : {22050.0, 44100.0, 48000.0, 96000.0}) {
        for (const auto& [low, high] :
             std::vector<std::pair<double, double>>{{20, 150}, {150, 2000}, {2000, 10000}}) {
            const auto spec = dsp::design_bandpass(low, high, rate, 5);
            CHECK(spec.sections.size() == 5);
            for (const auto& section : spec.sections) {
                CHECK(section.stable());
            }
        }
    }
}

TEST_CASE("design_bandpass: precondition violations") {
    CHECK_THROWS_AS(dsp::design_bandpass(2000, 150, 44100), std::invalid_argument);
    CHECK_THROWS_AS(dsp::design_bandpass(0, 150, 44100), std::invalid_argument);
    CHECK_THROWS_AS(dsp::design_bandpass(2000, 25000, 44100), std::invalid_argument);
}

TEST_CASE("apply_filter: zero in, zero out") {
    const auto spec = dsp::design_bandpass(150, 2000, 44100);
    const std::vector<double> zeros(1000, 0.0);
    for (const double v : dsp::apply_filter(spec, zeros)) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("apply_filter: homogeneity within 1e-12") {
    const auto spec = dsp::design_bandpass(150, 2000, 44100);
    Rng rng(11);
    std::vector<double> x(4000);
    for (double& v : x) {
        v = rng.uniform(-1.0, 1.0);
    }
    const double a = 3.7;
    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        ax[i] = a * x[i];
    }
    const auto y = dsp::apply_filter(spec, x);
    const auto ay = dsp::apply_filter(spec, ax);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(ay[i] - a * y[i]) < 1e-12);
    }
}

TEST_CASE("apply_filter: steady-state sine gain matches the designed response") {
    const double rate = 44100;
    const auto spec = dsp::design_bandpass(150, 2000, rate);
    for (const double freq : {547.7, 300.0, 1500.0}) {
        const auto x = sine(freq, rate, static_cast<std::size_t>(3 * rate));
        const auto y = dsp::apply_filter(spec, x);
        // Amplitude by quadrature demodulation after a 1 s transient.
        const std::size_t skip = static_cast<std::size_t>(rate);
        double re = 0.0, im = 0.0;
        const std::size_t n = y.size() - skip;
        for (std::size_t i = skip; i < y.size(); ++i) {
            const double phase = 2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate;
            re += y[i] * std::sin(phase);
            im += y[i] * std::cos(phase);
        }
        const double measured = 2.0 * std::hypot(re, im) / static_cast<double>(n);
        const double designed = std::abs(dsp::filter_response(spec, freq));
        CHECK(std::abs(db(measured) - db(designed)) < 0.1);
    }
}

TEST_CASE("apply_filter: time invariance under input shift") {
    const auto spec = dsp::design_bandpass(150, 2000, 44100);
    Rng rng(13);
    const std::size_t d = 137;
    std::vector<double> x(3000);
    for (double& v : x) {
        v = rng.uniform(-1.0, 1.0);
    }
    std::vector<double> shifted(x.size() + d, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        shifted[i + d] = x[i];
    }
    const auto y = dsp::apply_filter(spec, x);
    const auto ys = dsp::apply_filter(spec, shifted);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(ys[i + d] - y[i]) < 1e-12);
    }
}

TEST_CASE("frame_spectra: zero input gives zero frames, count follows the formula") {
    const std::vector<double> zeros(2048 + 3 * 1024 + 500, 0.0);
    const auto frames = dsp::frame_spectra(zeros, 44100);
    CHECK(frames.size() == (zeros.size() - 2048) / 1024 + 1);
    for (const auto& frame : frames) {
        CHECK(frame.magnitudes.size() == 1024);
        for (const double m : frame.magnitudes) {
            CHECK(m == 0.0);
        }
    }
    CHECK(std::abs(frames[0].bin_width - 44100.0 / 2048.0) < 1e-12);
}

TEST_CASE("frame_spectra: frame count property on random lengths") {
    Rng rng(29);
    const std::vector<std::size_t> hops{512, 1024, 2048};
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t len = 2048 + rng.index(20000);
        const std::size_t hop = hops[rng.index(hops.size())];
        const std::vector<double> x(len, 0.0);
        const auto frames = dsp::frame_spectra(x, 44100, 2048, hop);
        CHECK(frames.size() == (len - 2048) / hop + 1);
    }
}

TEST_CASE("frame_spectra: input shorter than one frame is rejected") {
    const std::vector<double> x(2047, 0.0);
    CHECK_THROWS_AS(dsp::frame_spectra(x, 44100), std::invalid_argument);
}

TEST_CASE("frame_spectra: exact-bin sine with rectangular window peaks at its bin") {
    const double rate = 44100;
    const std::vector<double> rect(2048, 1.0);
    for (const long k : {5L, 64L, 500L}) {
        const auto x = sine(static_cast<double>(k) * rate / 2048.0, rate, 2048);
        const auto frames = dsp::frame_spectra(x, rate, 2048, 1024, rect);
        REQUIRE(frames.size() == 1);
        const auto& mags = frames[0].magnitudes;
        const long argmax = std::max_element(mags.begin(), mags.end()) - mags.begin();
        CHECK(argmax == k);
    }
}

TEST_CASE("frame_spectra: magnitudes match the direct DFT oracle") {
    Rng rng(17);
    std::vector<double> x(2048);
    for (double& v : x) {
        v = rng.uniform(-1.0, 1.0);
    }
    const std::vector<double> rect(2048, 1.0);
    const auto frames = dsp::frame_spectra(x, 44100, 2048, 1024, rect);
    const auto expected = oracles::direct_dft_magnitudes(x);
    REQUIRE(frames.size() == 1);
    double max_mag = 0.0;
    for (const double m : expected) {
        max_mag = std::max(max_mag, m);
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(std::abs(frames[0].magnitudes[i] - expected[i]) < 1e-9 * max_mag);
    }
}

TEST_CASE("dct_ii: constant vector concentrates in coefficient 0") {
    const std::vector<double> v(32, 2.5);
    const auto c = dsp::dct_ii(v, 32);
    CHECK(std::abs(c[0] - 2.5 * std::sqrt(32.0)) < 1e-12);
    for (std::size_t k = 1; k < c.size(); ++k) {
        CHECK(std::abs(c[k]) < 1e-12);
    }
}

TEST_CASE("dct_ii: matches the double-sum oracle") {
    Rng rng(19);
    std::vector<double> v(40);
    for (double& x : v) {
        x = rng.uniform(-10.0, 10.0);
    }
    const auto got = dsp::dct_ii(v, 40);
    const auto expected = oracles::direct_dct_ii(v, 40);
    for (std::size_t k = 0; k < 40; ++k) {
        CHECK(std::abs(got[k] - expected[k]) < 1e-10);
    }
}

TEST_CASE("dct_ii: transform matrix is orthonormal") {
    const std::size_t n = 24;
    std::vector<std::vector<double>> columns(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> basis(n, 0.0);
        basis[i] = 1.0;
        columns[i] = dsp::dct_ii(basis, n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                dot += columns[i][k] * columns[j][k];
            }
            CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("dct_ii: inverse (transpose) round-trips random vectors") {
    const std::size_t n = 40;
    Rng rng(23);
    std::vector<double> v(n);
    for (double& x : v) {
        x = rng.uniform(-5.0, 5.0);
    }
    const auto c = dsp::dct_ii(v, n);
    std::vector<double> back(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> basis(n, 0.0);
        basis[i] = 1.0;
        const auto column = dsp::dct_ii(basis, n);
        for (std::size_t k = 0; k < n; ++k) {
            back[i] += column[k] * c[k];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(back[i] - v[i]) < 1e-9);
    }
}

TEST_CASE("dct_ii: n_out larger than the input is rejected") {
    const std::vector<double> v(8, 1.0);
    CHECK_THROWS_AS(dsp::dct_ii(v, 9), std::invalid_argument);
}

} // TEST_SUITE
