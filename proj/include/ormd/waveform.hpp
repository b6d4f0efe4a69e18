// Copyright 2026 The ORMD Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Waveform bases for smooth pulse shaping over normalized time x = t/T_p.
//
// Amplitude waveforms are odd-harmonic sine series, sum_k c_k sin((2k-1) pi x):
// they vanish at both pulse edges and are symmetric about x = 1/2. Detuning
// waveforms are a constant plus even cosine harmonics, d0 + sum_m d_m cos(2 m pi x).
// All stored values are frequency/2pi in MHz.
//
// The built-in u/v tables are low-pass projections of symmetrized Bernstein
// polynomials: row u_j keeps the first 3 sine harmonics of the odd extension
// of b_{j,10} + b_{10-j,10}, row v_j the first 4 harmonics of
// b_{j,12} + b_{12-j,12}, tabulated to four decimal places.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ormd/common.hpp"

namespace ormd {

/// Binomial coefficient as a double (exact for the small degrees used here).
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

/// Bernstein polynomial b_{nu,n}(x) = C(n,nu) x^nu (1-x)^(n-nu).
inline double bernstein(int nu, int n, double x) {
    if (n < 0 || nu < 0 || nu > n)
        throw ArgumentError("bernstein: index nu out of range [0, n]");
    if (!(x >= 0.0 && x <= 1.0))
        throw ArgumentError("bernstein: x outside [0, 1]");
    return binomial(n, nu) * std::pow(x, nu) * std::pow(1.0 - x, n - nu);
}

/// Odd-harmonic sine series: value(x) = sum_k coeffs[k-1] sin((2k-1) pi x).
struct SineSeries {
    std::vector<double> coeffs;

    double value(double x) const {
        double s = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            s += coeffs[k] * std::sin((2.0 * static_cast<double>(k) + 1.0) * kPi * x);
        return s;
    }
    std::size_t harmonics() const { return coeffs.size(); }
};

/// Constant plus even cosine harmonics: value(x) = constant + sum_m coeffs[m-1] cos(2 m pi x).
struct CosineSeries {
    double constant = 0.0;
    std::vector<double> coeffs;

    double value(double x) const {
        double s = constant;
        for (std::size_t m = 0; m < coeffs.size(); ++m)
            s += coeffs[m] * std::cos(2.0 * static_cast<double>(m + 1) * kPi * x);
        return s;
    }
};

inline SineSeries operator+(const SineSeries& a, const SineSeries& b) {
    SineSeries r;
    r.coeffs.resize(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) r.coeffs[i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) r.coeffs[i] += b.coeffs[i];
    return r;
}

inline SineSeries operator*(double s, const SineSeries& a) {
    SineSeries r = a;
    for (double& c : r.coeffs) c *= s;
    return r;
}

namespace detail {

/// 15-point Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton
/// iteration on the Legendre recurrence.
inline const std::array<std::pair<double, double>, 15>& gauss_legendre_15() {
    static const std::array<std::pair<double, double>, 15> table = [] {
        std::array<std::pair<double, double>, 15> t{};
        const int n = 15;
        for (int i = 0; i < n; ++i) {
            // Chebyshev-like initial guess for the i-th root.
            double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int j = 2; j <= n; ++j) {
                    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            t[static_cast<std::size_t>(i)] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
        }
        return t;
    }();
    return table;
}

inline double gl15(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (const auto& [node, weight] : gauss_legendre_15()) s += weight * f(mid + half * node);
    return s * half;
}

inline double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int depth) {
    const double whole = gl15(f, a, b);
    const double mid = 0.5 * (a + b);
    const double split = gl15(f, a, mid) + gl15(f, mid, b);
    if (std::abs(split - whole) <= abs_tol || depth >= 30) return split;
    return adaptive_gl(f, a, mid, 0.5 * abs_tol, depth + 1) +
           adaptive_gl(f, mid, b, 0.5 * abs_tol, depth + 1);
}

}  // namespace detail

/// Adaptive Gauss-Legendre quadrature of f over [a, b] to absolute tolerance.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-10) {
    return detail::adaptive_gl(f, a, b, abs_tol, 0);
}

/// Projects a function with p(0) = p(1) = 0 onto the first K odd sine
/// harmonics of its odd extension to [-1, 1]:
///   c_k = 2 * integral_0^1 p(x) sin((2k-1) pi x) dx.
/// Each coefficient is integrated to 1e-9 absolute error.
inline SineSeries project_to_sine_series(const std::function<double(double)>& p, int K) {
    if (K < 1) throw ArgumentError("project_to_sine_series: K must be >= 1");
    if (std::abs(p(0.0)) > 1e-12 || std::abs(p(1.0)) > 1e-12)
        throw ArgumentError("project_to_sine_series: p(0) and p(1) must vanish "
                            "for the odd extension to be continuous");
    SineSeries out;
    out.coeffs.reserve(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
        const double freq = (2.0 * k - 1.0) * kPi;
        out.coeffs.push_back(
            2.0 * integrate([&](double x) { return p(x) * std::sin(freq * x); }, 0.0, 1.0, 0.5e-9));
    }
    return out;
}

/// Zeroes every coefficient with harmonic index above the cutoff. Lengths are
/// preserved so that truncation stays a linear map on coefficient vectors.
inline SineSeries suppress_high_frequency(SineSeries s, int cutoff) {
    if (cutoff < 1) throw ArgumentError("suppress_high_frequency: cutoff must be >= 1");
    for (std::size_t k = static_cast<std::size_t>(cutoff); k < s.coeffs.size(); ++k)
        s.coeffs[k] = 0.0;
    return s;
}

inline CosineSeries suppress_high_frequency(CosineSeries s, int cutoff) {
    if (cutoff < 1) throw ArgumentError("suppress_high_frequency: cutoff must be >= 1");
    for (std::size_t m = static_cast<std::size_t>(cutoff); m < s.coeffs.size(); ++m)
        s.coeffs[m] = 0.0;
    return s;
}

/// A named table of sine-series basis rows.
struct AdjustedBasisTable {
    std::string name;
    std::vector<SineSeries> rows;

    std::size_t size() const { return rows.size(); }
    const SineSeries& row(std::size_t j) const {
        if (j < 1 || j > rows.size()) throw ArgumentError("basis table row index out of range");
        return rows[j - 1];
    }
};

/// The two built-in frequency-adjusted tables (four-decimal entries).
inline std::pair<AdjustedBasisTable, AdjustedBasisTable> builtin_tables() {
    static const AdjustedBasisTable u{
        "u",
        {
            SineSeries{{0.1710, 0.2316, 0.1158}},
            SineSeries{{0.2382, 0.1568, -0.0013}},
            SineSeries{{0.2887, 0.0220, -0.0408}},
            SineSeries{{0.3199, -0.0986, -0.0081}},
            SineSeries{{0.3305, -0.1463, 0.0173}},
        }};
    static const AdjustedBasisTable v{
        "v",
        {
            SineSeries{{0.1273, 0.2079, 0.1310, 0.0682}},
            SineSeries{{0.1806, 0.1793, 0.0282, -0.0085}},
            SineSeries{{0.2242, 0.0892, -0.0416, -0.0191}},
            SineSeries{{0.2566, -0.0210, -0.0386, -0.0025}},
            SineSeries{{0.2766, -0.1085, 0.0039, 0.0028}},
            SineSeries{{0.2833, -0.1416, 0.0272, 0.0009}},
        }};
    return {u, v};
}

/// Linear combination of table rows: sum_j coeffs[j] * row_{j+1}.
inline SineSeries combine(const AdjustedBasisTable& table, const std::vector<double>& coeffs) {
    if (coeffs.size() != table.rows.size())
        throw ArgumentError("combine: coefficient count does not match basis table '" +
                            table.name + "' (" + std::to_string(table.rows.size()) + " rows)");
    SineSeries out;
    for (std::size_t j = 0; j < coeffs.size(); ++j) out = out + coeffs[j] * table.rows[j];
    return out;
}

/// Grid used for non-negativity checks and penalty integrals. Band-limited
/// waveforms (<= 4 harmonics) cannot oscillate between adjacent samples.
inline constexpr int kAmplitudeGridPoints = 2001;

/// Amplitude (Omega/2pi, MHz) plus detuning (MHz) over normalized time.
struct WaveformSpec {
    SineSeries amplitude;
    CosineSeries detuning;

    double min_amplitude(int grid_points = kAmplitudeGridPoints) const {
        double m = amplitude.value(0.0);
        for (int i = 1; i < grid_points; ++i)
            m = std::min(m, amplitude.value(static_cast<double>(i) / (grid_points - 1)));
        return m;
    }

    double max_amplitude(int grid_points = kAmplitudeGridPoints) const {
        double m = amplitude.value(0.0);
        for (int i = 1; i < grid_points; ++i)
            m = std::max(m, amplitude.value(static_cast<double>(i) / (grid_points - 1)));
        return m;
    }

    /// True when amplitude stays non-negative (up to roundoff) on the grid.
    bool is_physical(int grid_points = kAmplitudeGridPoints) const {
        return min_amplitude(grid_points) >= -1e-9;
    }
};

struct WaveformSample {
    double omega_mhz;
    double detuning_mhz;
};

inline WaveformSample eval_waveform(const WaveformSpec& w, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("eval_waveform: x outside [0, 1]");
    return {w.amplitude.value(x), w.detuning.value(x)};
}

/// One row per basis function, columns are harmonic coefficients, 6 decimals.
inline void write_basis_table_csv(const AdjustedBasisTable& table, std::ostream& os) {
    std::size_t cols = 0;
    for (const auto& r : table.rows) cols = std::max(cols, r.coeffs.size());
    os << "basis";
    for (std::size_t k = 0; k < cols; ++k) os << ",sin_" << (2 * k + 1) << "pix";
    os << "\n";
    for (std::size_t j = 0; j < table.rows.size(); ++j) {
        os << table.name << (j + 1);
        for (std::size_t k = 0; k < cols; ++k) {
            double c = k < table.rows[j].coeffs.size() ? table.rows[j].coeffs[k] : 0.0;
            os << "," << format_fixed(c, 6);
        }
        os << "\n";
    }
}

}  // namespace ormd
