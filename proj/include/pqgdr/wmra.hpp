// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pqgdr/core.hpp"
#include "pqgdr/dmey.hpp"
#include "pqgdr/freqsync.hpp"

namespace pqgdr {

// ---------------------------------------------------------------------------
// Circular (periodised) Mallat filter bank
// ---------------------------------------------------------------------------
//
// The decimated transform treats every level as circular: analysis correlates
// the wrapped signal with the filters, synthesis scatter-adds the transposed
// stencils.  Because the filter pair satisfies the exact CQF orthogonality
// conditions, the wrapped basis stays orthonormal at every even length, so
//   * analysis/synthesis invert each other to machine precision, and
//   * per-band reconstructions are orthogonal projections, which makes
//     energy bookkeeping (Parseval) exact by construction.
// Frequency-synchronised windows hold an integer number of fundamental
// periods, so the circular wrap introduces no artificial discontinuity.

/// One analysis level: returns (approx, detail), each of length M/2.
inline std::pair<std::vector<double>, std::vector<double>>
wmra_analyze_level(const std::vector<double>& s) {
    const std::size_t m = s.size();
    if (m < 2 || m % 2 != 0) throw ShapeError("analysis level needs even length >= 2");
    const std::size_t half = m / 2;
    std::vector<double> a(half), d(half);
    const std::size_t bulk = (m > kDmeyTaps) ? (m - kDmeyTaps) / 2 + 1 : 0;
    for (std::size_t k = 0; k < bulk; ++k) {  // stencil fits without wrapping
        double sa = 0.0, sd = 0.0;
        const double* base = s.data() + 2 * k;
        for (std::size_t t = 0; t < kDmeyTaps; ++t) {
            sa += kDmeyLowpass[t] * base[t];
            sd += kDmeyHighpass[t] * base[t];
        }
        a[k] = sa;
        d[k] = sd;
    }
    for (std::size_t k = bulk; k < half; ++k) {
        double sa = 0.0, sd = 0.0;
        for (std::size_t t = 0; t < kDmeyTaps; ++t) {
            const double v = s[(2 * k + t) % m];
            sa += kDmeyLowpass[t] * v;
            sd += kDmeyHighpass[t] * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    return {std::move(a), std::move(d)};
}

/// One synthesis level (transpose of the analysis): approx and detail of
/// length H combine into a signal of length 2H.  Either input may be empty,
/// meaning "all zero" (used for per-band reconstruction).
inline std::vector<double> wmra_synthesize_level(const std::vector<double>& a,
                                                 const std::vector<double>& d) {
    const std::size_t half = a.empty() ? d.size() : a.size();
    if (half == 0) throw ShapeError("synthesis level needs coefficients");
    if (!a.empty() && !d.empty() && a.size() != d.size())
        throw ShapeError("approx/detail length mismatch in synthesis");
    const std::size_t m = 2 * half;
    std::vector<double> s(m, 0.0);
    if (!a.empty()) {
        for (std::size_t k = 0; k < half; ++k) {
            const double c = a[k];
            if (c == 0.0) continue;
            for (std::size_t t = 0; t < kDmeyTaps; ++t)
                s[(2 * k + t) % m] += kDmeyLowpass[t] * c;
        }
    }
    if (!d.empty()) {
        for (std::size_t k = 0; k < half; ++k) {
            const double c = d[k];
            if (c == 0.0) continue;
            for (std::size_t t = 0; t < kDmeyTaps; ++t)
                s[(2 * k + t) % m] += kDmeyHighpass[t] * c;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Multi-level transform
// ---------------------------------------------------------------------------

/// Decimated coefficients of a `levels`-deep transform.
struct WmraCoeffs {
    std::vector<double> approx;                 ///< deepest approximation
    std::vector<std::vector<double>> detail;    ///< detail[j-1] = level j
    std::size_t levels = 0;
};

/// Forward transform.  The input length must be divisible by 2^levels.
inline WmraCoeffs wmra_decompose(const std::vector<double>& x,
                                 std::size_t levels = kLevels) {
    if (levels == 0) throw ParameterError("decomposition depth must be >= 1");
    const std::size_t div = std::size_t{1} << levels;
    if (x.empty() || x.size() % div != 0)
        throw ShapeError("signal length " + std::to_string(x.size()) +
                         " not divisible by 2^" + std::to_string(levels));
    WmraCoeffs c;
    c.levels = levels;
    c.detail.resize(levels);
    std::vector<double> cur = x;
    for (std::size_t j = 1; j <= levels; ++j) {
        auto [a, d] = wmra_analyze_level(cur);
        c.detail[j - 1] = std::move(d);
        cur = std::move(a);
    }
    c.approx = std::move(cur);
    return c;
}

/// Robust noise scale estimated from the finest detail coefficients
/// (median absolute deviation / 0.6745).  The transform is orthonormal, so
/// white noise keeps the same per-coefficient sigma at every level and one
/// estimate serves all bands.  Events occupy a minority of d1 coefficients,
/// which the median ignores.
inline double wmra_noise_sigma(const WmraCoeffs& c) {
    if (c.detail.empty() || c.detail[0].empty())
        throw ShapeError("malformed coefficient set");
    std::vector<double> mag(c.detail[0].size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(c.detail[0][i]);
    const std::size_t mid = mag.size() / 2;
    std::nth_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(mid),
                     mag.end());
    return mag[mid] / 0.6745;
}

/// Default hard-threshold factor for wmra_denoise, in noise sigmas.
inline constexpr double kDenoiseFactor = 3.5;

/// Hard-threshold every detail coefficient at factor * estimated noise sigma,
/// in place; returns the threshold.  Nearly a no-op on noiseless inputs
/// (sigma collapses to the leakage floor) while zeroing ~99.95% of white
/// noise coefficients; disturbance coefficients sit far above the threshold
/// and keep their exact values.
inline double wmra_denoise(WmraCoeffs& c, double factor = kDenoiseFactor) {
    const double threshold = factor * wmra_noise_sigma(c);
    for (auto& level : c.detail)
        for (double& v : level)
            if (std::abs(v) <= threshold) v = 0.0;
    return threshold;
}

/// Exact inverse of wmra_decompose.
inline std::vector<double> wmra_reconstruct(const WmraCoeffs& c) {
    if (c.levels == 0 || c.detail.size() != c.levels)
        throw ShapeError("malformed coefficient set");
    std::vector<double> cur = c.approx;
    for (std::size_t j = c.levels; j >= 1; --j)
        cur = wmra_synthesize_level(cur, c.detail[j - 1]);
    return cur;
}

/// Reconstruct the full-length contribution of detail level `j` alone
/// (all other coefficient bands zeroed).
inline std::vector<double> wmra_detail_band(const WmraCoeffs& c, std::size_t j) {
    if (j < 1 || j > c.levels) throw ParameterError("detail level out of range");
    std::vector<double> cur = wmra_synthesize_level({}, c.detail[j - 1]);
    for (std::size_t l = j - 1; l >= 1; --l)
        cur = wmra_synthesize_level(cur, {});
    return cur;
}

/// Reconstruct the full-length contribution of the deepest approximation.
inline std::vector<double> wmra_approx_band(const WmraCoeffs& c) {
    std::vector<double> cur = wmra_synthesize_level(c.approx, {});
    for (std::size_t l = c.levels - 1; l >= 1; --l)
        cur = wmra_synthesize_level(cur, {});
    return cur;
}

// ---------------------------------------------------------------------------
// Multiresolution analysis of a synchronised window
// ---------------------------------------------------------------------------

/// Full-length band signals: x(n) = approx(n) + sum_j detail[j-1](n).
struct WmraDecomposition {
    std::vector<double> approx;               ///< a_J(n), deepest smooth band
    std::vector<std::vector<double>> detail;  ///< detail[j-1] = d_j(n)
    std::size_t levels = 0;
    double sample_rate = 0.0;
};

/// Expand a coefficient set into full-length band signals.
inline WmraDecomposition wmra_bands(const WmraCoeffs& c, double sample_rate) {
    WmraDecomposition m;
    m.levels = c.levels;
    m.sample_rate = sample_rate;
    m.detail.resize(c.levels);
    for (std::size_t j = 1; j <= c.levels; ++j) m.detail[j - 1] = wmra_detail_band(c, j);
    m.approx = wmra_approx_band(c);
    return m;
}

inline WmraDecomposition wmra_mra(const std::vector<double>& x, double sample_rate,
                                  std::size_t levels = kLevels) {
    return wmra_bands(wmra_decompose(x, levels), sample_rate);
}

inline WmraDecomposition wmra_mra(const SyncedWaveform& sw, std::size_t levels = kLevels) {
    return wmra_mra(sw.wave.samples, sw.wave.sample_rate, levels);
}

// ---------------------------------------------------------------------------
// Band bookkeeping
// ---------------------------------------------------------------------------

/// RMS of each band plus the aggregate level `total`,
/// total^2 = approx^2 + sum_j detail_j^2 (exact because the bands are
/// orthogonal projections of the window).
struct BandRms {
    double approx = 0.0;
    std::vector<double> detail;  ///< detail[j-1] = RMS of d_j
    double total = 0.0;
};

inline BandRms band_rms(const WmraDecomposition& m) {
    BandRms r;
    r.approx = rms(m.approx);
    r.detail.resize(m.levels);
    double p = r.approx * r.approx;
    for (std::size_t j = 0; j < m.levels; ++j) {
        r.detail[j] = rms(m.detail[j]);
        p += r.detail[j] * r.detail[j];
    }
    r.total = std::sqrt(p);
    return r;
}

/// Nominal frequency support of one band in Hz.
struct BandRange {
    std::string name;  ///< "d1".."d6" or "a6"
    double lo = 0.0;
    double hi = 0.0;
};

/// Dyadic band edges: detail j covers (fs/2^(j+1), fs/2^j], the deepest
/// approximation covers [0, fs/2^(J+1)].
inline std::vector<BandRange> band_map(double sample_rate, std::size_t levels = kLevels) {
    std::vector<BandRange> v;
    v.reserve(levels + 1);
    for (std::size_t j = 1; j <= levels; ++j) {
        const double hi = sample_rate / static_cast<double>(std::size_t{1} << j);
        v.push_back({"d" + std::to_string(j), hi / 2.0, hi});
    }
    v.push_back({"a" + std::to_string(levels), 0.0,
                 sample_rate / static_cast<double>(std::size_t{1} << (levels + 1))});
    return v;
}

}  // namespace pqgdr
