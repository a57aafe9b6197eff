// Independent reference implementations for the test suite. Everything here
// is written from the definitions (direct summation, enumeration, quadrature)
// and must stay decoupled from the library code paths it checks.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

inline constexpr double kPi = 3.14159265358979323846;

// --- spectra ----------------------------------------------------------------

/// O(N^2) DFT magnitudes of bins 0..N/2-1.
inline std::vector<double> direct_dft_magnitudes(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> mags(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double phase = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(i) /
                                 static_cast<double>(n);
            re += x[i] * std::cos(phase);
            im += x[i] * std::sin(phase);
        }
        mags[k] = std::hypot(re, im);
    }
    return mags;
}

/// Orthonormal DCT-II by the double-sum definition.
inline std::vector<double> direct_dct_ii(std::span<const double> v, std::size_t n_out) {
    const std::size_t n = v.size();
    std::vector<double> out(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += v[i] * std::cos(kPi / static_cast<double>(n) *
                                   (static_cast<double>(i) + 0.5) * static_cast<double>(k));
        }
        const double scale = k == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                                    : std::sqrt(2.0 / static_cast<double>(n));
        out[k] = scale * acc;
    }
    return out;
}

/// Straight-line MFCC of one frame: Hann window, direct DFT, explicit
/// triangle sums rebuilt from the mel formula, log floor, double-sum DCT.
inline std::vector<double> mfcc_frame_oracle(std::span<const double> frame, double sample_rate,
                                             int n_filters, double log_floor, int n_coeffs) {
    const std::size_t n = frame.size();
    std::vector<double> windowed(n);
    for (std::size_t i = 0; i < n; ++i) {
        windowed[i] = frame[i] * 0.5 *
                      (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    }
    const auto mags = direct_dft_magnitudes(windowed);

    auto mel_of = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto hz_of = [](double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); };
    const double mel_top = mel_of(sample_rate / 2.0);

    std::vector<double> log_energies(n_filters);
    for (int j = 0; j < n_filters; ++j) {
        const double left = hz_of(mel_top * j / (n_filters + 1));
        const double center = hz_of(mel_top * (j + 1) / (n_filters + 1));
        const double right = hz_of(mel_top * (j + 2) / (n_filters + 1));
        double energy = 0.0;
        for (std::size_t i = 0; i < mags.size(); ++i) {
            const double f = static_cast<double>(i) * sample_rate / static_cast<double>(n);
            const double up = (f - left) / (center - left);
            const double down = (right - f) / (right - center);
            const double w = std::max(0.0, std::min(up, down));
            energy += w * mags[i];
        }
        log_energies[j] = std::log(energy + log_floor);
    }
    return direct_dct_ii(log_energies, static_cast<std::size_t>(n_coeffs));
}

// --- geometry ---------------------------------------------------------------

/// Winding number point-in-polygon (nonzero rule); boundary not handled.
inline bool winding_number_inside(std::span<const std::array<double, 2>> poly, double x, double y) {
    int winding = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        const double cross = (b[0] - a[0]) * (y - a[1]) - (x - a[0]) * (b[1] - a[1]);
        if (a[1] <= y) {
            if (b[1] > y && cross > 0) {
                ++winding;
            }
        } else if (b[1] <= y && cross < 0) {
            --winding;
        }
    }
    return winding != 0;
}

/// Distance from a point to the polygon outline.
inline double distance_to_outline(std::span<const std::array<double, 2>> poly, double x, double y) {
    double best = 1e300;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        const double dx = b[0] - a[0], dy = b[1] - a[1];
        const double len_sq = dx * dx + dy * dy;
        double t = len_sq > 0 ? ((x - a[0]) * dx + (y - a[1]) * dy) / len_sq : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(x - (a[0] + t * dx), y - (a[1] + t * dy)));
    }
    return best;
}

/// Monte-Carlo estimate of the polygon's area fraction of the rows x cols map.
template <typename Uniform01>
double monte_carlo_area_fraction(std::span<const std::array<double, 2>> poly, int rows, int cols,
                                 std::size_t samples, Uniform01&& uniform) {
    std::size_t inside = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = uniform() * cols;
        const double y = uniform() * rows;
        if (winding_number_inside(poly, x, y)) {
            ++inside;
        }
    }
    return static_cast<double>(inside) / static_cast<double>(samples);
}

/// Number of grid cells of the [-sqrt2, sqrt2]^2 tiling whose interior
/// intersects the diamond |m| + |s| <= sqrt2 (the rotated [-1,1]^2 square).
inline int diamond_cell_count(int grid) {
    const double sqrt2 = std::sqrt(2.0);
    const double cell = 2.0 * sqrt2 / grid;
    int count = 0;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double m0 = -sqrt2 + i * cell, m1 = m0 + cell;
            const double s0 = -sqrt2 + j * cell, s1 = s0 + cell;
            // |m|+|s| is minimized at the cell point nearest the origin.
            const double mm = (m0 <= 0.0 && 0.0 <= m1) ? 0.0 : std::min(std::abs(m0), std::abs(m1));
            const double ss = (s0 <= 0.0 && 0.0 <= s1) ? 0.0 : std::min(std::abs(s0), std::abs(s1));
            if (mm + ss < sqrt2 - 1e-12) {
                ++count;
            }
        }
    }
    return count;
}

// --- statistics -------------------------------------------------------------

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

} // namespace detail

/// Upper-tail chi-squared probability by adaptive quadrature of the density.
inline double chi2_sf_quadrature(double x, int df) {
    if (x <= 0.0) {
        return 1.0;
    }
    const double a = df / 2.0;
    const std::function<double(double)> pdf = [a](double t) {
        return std::exp((a - 1.0) * std::log(t) - t / 2.0 - a * std::log(2.0) - std::lgamma(a));
    };
    const double upper = x + 320.0; // tail beyond is ~e^-160, negligible
    const double m = (x + upper) / 2.0;
    const double fa = pdf(x), fm = pdf(m), fb = pdf(upper);
    const double whole = detail::simpson(x, upper, fa, fm, fb);
    return detail::adaptive_simpson(pdf, x, upper, fa, fm, fb, whole, 1e-13, 60);
}

} // namespace oracles
