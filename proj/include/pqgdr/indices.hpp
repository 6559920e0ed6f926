// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pqgdr/core.hpp"
#include "pqgdr/freqsync.hpp"
#include "pqgdr/wmra.hpp"

namespace pqgdr {

// ---------------------------------------------------------------------------
// Instantaneous transient disturbance ratio ITD(n)
// ---------------------------------------------------------------------------

/// Sample-wise disturbance ratio and its building blocks.
struct ItdSeries {
    std::vector<double> itd;    ///< 100 * sqrt(sum_{j<=J} d_j^2(n)) / A_J, percent
    std::vector<double> sharp;  ///< same ratio over the four fastest bands only
    double a_j_rms = 0.0;       ///< A_J, RMS of the deepest approximation
    double mean_itd = 0.0;      ///< (1/N) sum_n itd(n)
};

/// ITD(n) normalises the instantaneous magnitude of everything outside the
/// fundamental band by the RMS of the fundamental band itself.  `sharp` keeps
/// only d1..d4 (above ~400 Hz at the synchronised rate), where step edges and
/// transients live; the slow detail bands smear events over tens of
/// milliseconds and are useless for locating them.
inline ItdSeries compute_itd(const WmraDecomposition& m) {
    const std::size_t n = m.approx.size();
    if (n == 0) throw ShapeError("empty decomposition");
    ItdSeries s;
    s.a_j_rms = rms(m.approx);
    if (s.a_j_rms <= 0.0)
        throw DataError("ITD undefined: fundamental band has zero energy");
    const std::size_t fast = std::min<std::size_t>(4, m.levels);
    s.itd.resize(n);
    s.sharp.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double full = 0.0, sh = 0.0;
        for (std::size_t j = 0; j < m.levels; ++j) {
            const double d = m.detail[j][i];
            full += d * d;
            if (j < fast) sh += d * d;
        }
        s.itd[i] = 100.0 * std::sqrt(full) / s.a_j_rms;
        s.sharp[i] = 100.0 * std::sqrt(sh) / s.a_j_rms;
        acc += s.itd[i];
    }
    s.mean_itd = acc / static_cast<double>(n);
    return s;
}

// ---------------------------------------------------------------------------
// Event window (t0, T0)
// ---------------------------------------------------------------------------

/// Detected disturbance interval.
struct EventWindow {
    double t0 = 0.0;        ///< onset, seconds from window start
    double duration = 0.0;  ///< T0, seconds
    bool stationary = false;  ///< no localised burst; activity is window-wide
};

namespace detail {

/// Linear-interpolation percentile (the common "linear" convention).
inline double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    return (k + 1 < v.size()) ? v[k] + frac * (v[k + 1] - v[k]) : v[k];
}

/// A contiguous run of sharp-band activity.  Indices are absolute sample
/// positions in the analysed window.
struct Burst {
    std::size_t first = 0;     ///< first sample at/above threshold
    std::size_t last = 0;      ///< last sample at/above threshold
    std::size_t half_rise = 0; ///< first sample >= half the burst maximum
    double centroid = 0.0;     ///< energy centroid of samples >= 0.3 * max
    double peak = 0.0;         ///< largest sample in the burst
    bool decay = false;        ///< front-loaded burst with a long tail
};

inline Burst make_burst(const std::vector<double>& inner, std::size_t i, std::size_t j,
                        std::size_t lo) {
    Burst b;
    b.first = i + lo;
    b.last = j + lo;
    double mx = inner[i];
    std::size_t pk = i;
    for (std::size_t k = i; k <= j; ++k)
        if (inner[k] > mx) { mx = inner[k]; pk = k; }
    b.peak = mx;
    // Shape classification: a damped oscillation peaks right at onset and
    // carries most of its energy after the peak; a sag/swell edge ring is
    // roughly symmetric around its centre.
    const double extent = static_cast<double>(std::max<std::size_t>(j - i, 1));
    const double r = static_cast<double>(pk - i) / extent;
    double lead = 0.0, tail = 0.0;
    for (std::size_t k = i; k <= pk; ++k) lead += inner[k] * inner[k];
    for (std::size_t k = pk; k <= j; ++k) tail += inner[k] * inner[k];
    b.decay = (r <= 0.25) && (tail >= 3.0 * lead);
    for (std::size_t k = i; k <= j; ++k)
        if (inner[k] >= 0.5 * mx) { b.half_rise = k + lo; break; }
    double wsum = 0.0, csum = 0.0;
    for (std::size_t k = i; k <= j; ++k) {
        if (inner[k] >= 0.3 * mx) {
            const double w = inner[k] * inner[k];
            wsum += w;
            csum += w * static_cast<double>(k + lo);
        }
    }
    b.centroid = csum / wsum;
    return b;
}

inline std::vector<Burst> find_bursts(const std::vector<double>& inner, double threshold,
                                      std::size_t lo, std::size_t merge_gap) {
    std::vector<Burst> out;
    std::size_t run_start = 0, run_end = 0;
    bool open = false;
    for (std::size_t k = 0; k < inner.size(); ++k) {
        if (inner[k] < threshold) continue;
        if (!open) {
            open = true;
            run_start = run_end = k;
        } else if (k - run_end > merge_gap) {
            out.push_back(make_burst(inner, run_start, run_end, lo));
            run_start = run_end = k;
        } else {
            run_end = k;
        }
    }
    if (open) out.push_back(make_burst(inner, run_start, run_end, lo));
    return out;
}

}  // namespace detail

/// Locate the disturbance interval from the ITD series.
///
/// The detector thresholds the fast-band ratio (`sharp`) at
/// max(4 x its lower quartile, 1.0 %), grouping samples into bursts merged
/// across gaps of up to 32 samples, inside a 128-sample guard band (the
/// circular transform wraps edge energy).  Each burst is typed as either a
/// decaying oscillation (onset = half-rise point, end = last active sample)
/// or an edge ring (located by its trimmed energy centroid).
///
/// Windows whose *median* full-band ITD exceeds the 1 % floor carry a
/// stationary (window-wide) disturbance such as harmonics.  On such a
/// background only bursts rising well above it — peak at least 3 x the
/// median — count as events (a transient riding on harmonics); anything
/// weaker is part of the background and the window is wholly disturbed,
/// T0 = T.  On a quiet background every burst counts: bursts bracket an
/// amplitude event (sag/swell) or trace out a lone transient, and a single
/// ring triggers a rescue pass at a lower floor to recover the faint second
/// edge of shallow events.  With no bursts and no stationary background the
/// window is quiet (T0 = 0).
inline EventWindow detect_event_window(const ItdSeries& s, double sample_rate,
                                       double window_duration) {
    using namespace detail;
    const std::size_t n = s.itd.size();
    // The circular transform wraps each event's analysis-atom sidelobes
    // around the window boundary; with 1602-sample atoms at the deepest fast
    // band they surface up to ~120 samples inside either edge, so the guard
    // must cover that (events are drawn no closer than 256 samples to the
    // window edges).
    constexpr std::size_t kGuard = 128;
    constexpr std::size_t kMergeGap = 32;
    // An isolated spike spanning fewer samples than a single analysis atom
    // (e.g. one noise coefficient surviving the denoiser) is not an event.
    constexpr std::size_t kMinBurst = 3;
    if (n < 4 * kGuard) throw ShapeError("window too short for event detection");

    const std::vector<double> inner(s.sharp.begin() + kGuard, s.sharp.end() - kGuard);
    const double q25 = percentile(inner, 0.25);
    const double threshold = std::max(4.0 * q25, 1.0);

    auto bursts = find_bursts(inner, threshold, kGuard, kMergeGap);
    std::erase_if(bursts, [](const Burst& b) { return b.last - b.first + 1 < kMinBurst; });

    EventWindow ev;

    const std::vector<double> full_inner(s.itd.begin() + kGuard, s.itd.end() - kGuard);
    const double median = percentile(full_inner, 0.5);
    if (median > 1.0) {
        const double gate = std::max(3.0 * median, 15.0);
        std::erase_if(bursts, [gate](const Burst& b) { return b.peak < gate; });
        if (bursts.empty()) {
            ev.t0 = 0.0;
            ev.duration = window_duration;
            ev.stationary = true;
            return ev;
        }
    } else if (bursts.empty()) {
        ev.t0 = 0.0;
        ev.duration = 0.0;
        return ev;
    }

    if (bursts.size() == 1) {
        if (median <= 1.0) {
            auto rescue = find_bursts(inner, std::max(4.0 * q25, 0.3), kGuard, kMergeGap);
            std::erase_if(rescue,
                          [](const Burst& b) { return b.last - b.first + 1 < kMinBurst; });
            if (rescue.size() >= 2) {
                bursts = std::move(rescue);
            }
        }
        if (bursts.size() == 1) {
            const Burst& b = bursts.front();
            ev.t0 = static_cast<double>(b.half_rise) / sample_rate;
            ev.duration = static_cast<double>(b.last - b.half_rise) / sample_rate;
            return ev;
        }
    }

    const Burst& b0 = bursts.front();
    const Burst& bn = bursts.back();
    const double p0 = b0.decay ? static_cast<double>(b0.half_rise) : b0.centroid;
    const double p1 = bn.decay ? static_cast<double>(bn.last) : bn.centroid;
    ev.t0 = p0 / sample_rate;
    ev.duration = std::max(p1 - p0, 0.0) / sample_rate;
    return ev;
}

// ---------------------------------------------------------------------------
// Global disturbance ratio (GDR) and the feature vector
// ---------------------------------------------------------------------------

/// GDR = (1 + T0/T) * <ITD>, percent: the window-average disturbance ratio,
/// boosted by how much of the window the disturbance occupies.
inline double gdr(const ItdSeries& s, const EventWindow& ev, double window_duration) {
    if (!(window_duration > 0.0)) throw ParameterError("window duration must be > 0");
    return (1.0 + ev.duration / window_duration) * s.mean_itd;
}

/// Same quantity evaluated directly from the band signals as one explicit
/// sum (no intermediate ITD series); used to cross-check the factored form.
inline double gdr_explicit(const WmraDecomposition& m, const EventWindow& ev,
                           double window_duration) {
    if (!(window_duration > 0.0)) throw ParameterError("window duration must be > 0");
    const double a_j = rms(m.approx);
    if (a_j <= 0.0) throw DataError("GDR undefined: fundamental band has zero energy");
    const std::size_t n = m.approx.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double p = 0.0;
        for (std::size_t j = 0; j < m.levels; ++j) p += m.detail[j][i] * m.detail[j][i];
        acc += std::sqrt(p);
    }
    const double mean_ratio = acc / (static_cast<double>(n) * a_j);
    return (1.0 + ev.duration / window_duration) * 100.0 * mean_ratio;
}

/// Everything the pipeline knows about one analysed window.
struct AnalysisReport {
    double k1 = 0.0;      ///< wavelet RMS S, volts — feature 1
    double k2 = 0.0;      ///< GDR, percent — feature 2
    double f_est = 0.0;   ///< estimated fundamental, Hz
    bool f_fallback = false;  ///< estimator failed; nominal frequency used
    double t0 = 0.0;      ///< detected event onset, seconds
    double duration = 0.0;  ///< detected T0, seconds
    double mean_itd = 0.0;  ///< <ITD>, percent
    BandRms bands;        ///< per-band RMS (a6, d1..d6) and S
    bool stationary = false;
};

/// Full analysis chain: frequency sync -> WMRA -> denoise -> ITD -> event
/// window -> GDR.  Detail coefficients are hard-thresholded at 3.5 sigma of
/// the MAD noise estimate before band expansion, so the indices measure the
/// disturbance rather than the wideband noise floor riding on it.
/// `itd_dump`, when non-null, receives the full ITD(n) series.
inline AnalysisReport analyze_window(const Waveform& w,
                                     std::vector<double>* itd_dump = nullptr) {
    w.validate();
    const auto [est, fellback] = estimate_or_nominal(w);
    const SyncedWaveform sw = resample_sync(w, est);
    WmraCoeffs coeffs = wmra_decompose(sw.wave.samples);
    wmra_denoise(coeffs);
    const WmraDecomposition m = wmra_bands(coeffs, sw.wave.sample_rate);
    const ItdSeries itd = compute_itd(m);
    const EventWindow ev = detect_event_window(itd, sw.wave.sample_rate, sw.wave.duration);

    AnalysisReport r;
    r.bands = band_rms(m);
    r.k1 = r.bands.total;
    r.k2 = gdr(itd, ev, sw.wave.duration);
    r.f_est = est.freq;
    r.f_fallback = fellback;
    r.t0 = ev.t0;
    r.duration = ev.duration;
    r.mean_itd = itd.mean_itd;
    r.stationary = ev.stationary;
    if (itd_dump) *itd_dump = itd.itd;
    return r;
}

/// The 2-dimensional classifier input (k1, k2).
inline std::array<double, 2> feature_vector(const Waveform& w) {
    const AnalysisReport r = analyze_window(w);
    return {r.k1, r.k2};
}

}  // namespace pqgdr
