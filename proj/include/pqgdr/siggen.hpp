// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pqgdr/core.hpp"
#include "pqgdr/freqsync.hpp"
#include "pqgdr/rng.hpp"

namespace pqgdr {

// ---------------------------------------------------------------------------
// Disturbance specification
// ---------------------------------------------------------------------------

/// One harmonic component, amplitude relative to the fundamental.
struct HarmonicSpec {
    int order = 0;           ///< 3, 5, 7, ...
    double amplitude = 0.0;  ///< per-unit of fundamental peak
};

/// Sentinel meaning "no noise" in noise_snr_db.
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Complete recipe for one synthetic window.  Fields not used by the class
/// stay at their inert defaults (empty harmonics, zero depths).
struct DisturbanceSpec {
    ClassLabel label = ClassLabel::C0_Harmonics;

    double fundamental_amplitude = 230.0 * 1.4142135623730951;  ///< volts peak
    double fundamental_freq = kNominalFreq;                     ///< Hz
    double phase = 0.0;                                         ///< radians

    double sample_rate = kDefaultSampleRate;  ///< Hz
    double duration = kWindowDuration;        ///< seconds

    // Amplitude envelope event (sag/swell); depth is the residual voltage in
    // per-unit (sag: < 1, swell: > 1).  Edges are instantaneous one-sample
    // steps; the envelope is active on t in [event_start, event_end).
    double depth = 1.0;        ///< pu residual during the event
    double event_start = 0.0;  ///< seconds
    double event_end = 0.0;    ///< seconds

    std::vector<HarmonicSpec> harmonics;

    // Damped oscillatory transient, additive on top of the (possibly
    // enveloped) carrier: a_tr * A * exp(-(t-t0)/tau) * sin(2 pi f_tr (t-t0)).
    double transient_freq = 0.0;       ///< Hz
    double transient_damping = 0.0;    ///< 1/s (= 1/tau)
    double transient_amplitude = 0.0;  ///< pu of fundamental peak
    double transient_start = 0.0;      ///< seconds

    // Flicker: sinusoidal amplitude modulation of the whole window.
    double flicker_mod_freq = 0.0;   ///< Hz
    double flicker_mod_depth = 0.0;  ///< pu

    double noise_snr_db = kNoNoise;  ///< target SNR; kNoNoise = clean
    std::uint64_t rng_seed = 0;      ///< noise seed (unused when clean)

    /// Ground-truth disturbance window in seconds (the T0 oracle), derived
    /// from the event fields when the spec is built.
    double truth_t0 = 0.0;
    double truth_duration = 0.0;
};

/// Effective end of a damped transient: the instant where the envelope of the
/// additive term decays to 1% of the fundamental peak, i.e.
/// tau * ln(100 * a_tr) after onset, measured on the peak-normalised term.
/// With a_tr in per-unit of the *peak*, crossing a 1% floor of the *RMS*-
/// referred deviation happens at tau * ln(100 * sqrt(2) * a_tr).
inline double transient_extent(double tau, double amplitude_pu) {
    const double arg = 100.0 * std::sqrt(2.0) * amplitude_pu;
    return (arg > 1.0) ? tau * std::log(arg) : 0.0;
}

inline bool has_envelope_event(ClassLabel c) {
    const int k = class_code(c);
    return k == 1 || k == 2 || k == 5 || k == 6 || k == 7 || k == 8;
}

inline bool has_transient(ClassLabel c) {
    const int k = class_code(c);
    return k == 3 || k == 7 || k == 8 || k == 9;
}

inline bool has_harmonics(ClassLabel c) {
    const int k = class_code(c);
    return k == 0 || k == 5 || k == 6 || k == 9;
}

inline bool has_flicker(ClassLabel c) { return class_code(c) == 4; }

/// Throws ParameterError naming the first offending field.
inline void validate_spec(const DisturbanceSpec& sp) {
    if (!(sp.fundamental_amplitude > 0.0))
        throw ParameterError("fundamental_amplitude must be > 0");
    if (!(sp.fundamental_freq > 0.0)) throw ParameterError("fundamental_freq must be > 0");
    if (!(sp.sample_rate > 0.0) || !(sp.duration > 0.0))
        throw ParameterError("sample_rate and duration must be > 0");
    if (has_envelope_event(sp.label)) {
        const bool sag = class_code(sp.label) == 1 || class_code(sp.label) == 5 ||
                         class_code(sp.label) == 7;
        if (sag && (sp.depth < 0.1 || sp.depth > 0.9))
            throw ParameterError("sag depth residual must lie in [0.1, 0.9] pu, got " +
                                 std::to_string(sp.depth));
        if (!sag && (sp.depth < 1.1 || sp.depth > 1.8))
            throw ParameterError("swell magnitude must lie in [1.1, 1.8] pu, got " +
                                 std::to_string(sp.depth));
        if (!(sp.event_start >= 0.0) || !(sp.event_start < sp.event_end) ||
            !(sp.event_end <= sp.duration))
            throw ParameterError("event window must satisfy 0 <= event_start < event_end <= duration");
    }
    if (has_transient(sp.label)) {
        if (!(sp.transient_freq > 0.0) || sp.transient_freq >= sp.sample_rate / 2.0)
            throw ParameterError("transient_freq must lie in (0, sample_rate/2)");
        if (!(sp.transient_damping > 0.0))
            throw ParameterError("transient_damping must be > 0");
        if (!(sp.transient_amplitude > 0.0))
            throw ParameterError("transient_amplitude must be > 0");
        if (sp.transient_start < 0.0 || sp.transient_start > sp.duration)
            throw ParameterError("transient_start outside window");
    }
    for (const auto& h : sp.harmonics) {
        if (h.order < 2) throw ParameterError("harmonic order must be >= 2");
        if (h.amplitude < 0.0) throw ParameterError("harmonic amplitude must be >= 0");
        if (h.order * sp.fundamental_freq >= sp.sample_rate / 2.0)
            throw ParameterError("harmonic order " + std::to_string(h.order) +
                                 " exceeds Nyquist");
    }
    if (has_flicker(sp.label)) {
        if (!(sp.flicker_mod_freq > 0.0)) throw ParameterError("flicker_mod_freq must be > 0");
        if (sp.flicker_mod_depth <= 0.0 || sp.flicker_mod_depth >= 1.0)
            throw ParameterError("flicker_mod_depth must lie in (0, 1)");
    }
    if (sp.noise_snr_db != kNoNoise && !std::isfinite(sp.noise_snr_db))
        throw ParameterError("noise_snr_db must be finite or the no-noise sentinel");
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

/// Add Gaussian white noise at an exact measured SNR: the realised noise
/// vector is rescaled so signal power / noise power equals the target
/// exactly, making the achieved SNR deterministic rather than statistical.
inline Waveform add_noise(const Waveform& w, double snr_db, std::uint64_t seed) {
    if (snr_db == kNoNoise) return w;
    if (!std::isfinite(snr_db)) throw ParameterError("snr_db must be finite");
    const double p_sig = power(w.samples);
    if (p_sig <= 0.0) throw DataError("add_noise: zero-power input, SNR undefined");

    Rng rng(seed);
    std::vector<double> noise(w.size());
    double p_noise = 0.0;
    for (auto& v : noise) {
        v = rng.gaussian();
        p_noise += v * v;
    }
    p_noise /= static_cast<double>(noise.size());
    if (p_noise <= 0.0) throw DataError("add_noise: degenerate noise draw");

    const double target = p_sig / std::pow(10.0, snr_db / 10.0);
    const double scale = std::sqrt(target / p_noise);
    Waveform out = w;
    for (std::size_t n = 0; n < out.size(); ++n) out.samples[n] += scale * noise[n];
    return out;
}

/// Render the waveform described by `sp`.  Deterministic; noise (if any) is
/// driven by sp.rng_seed.  Construction rules:
///  * the amplitude envelope (sag/swell, flicker) multiplies the fundamental
///    and all harmonics — combined classes superpose exactly;
///  * the transient is additive and not enveloped;
///  * envelope active on t in [event_start, event_end), one-sample edges;
///  * transient active on t in [t0, t0 + extent] with extent from
///    transient_extent(), which is the stored ground-truth duration.
inline Waveform synthesize(const DisturbanceSpec& sp) {
    validate_spec(sp);
    const auto n_total = static_cast<std::size_t>(std::llround(sp.sample_rate * sp.duration));
    if (n_total == 0) throw ParameterError("window holds no samples");

    Waveform w;
    w.sample_rate = sp.sample_rate;
    w.nominal_freq = kNominalFreq;
    w.duration = sp.duration;
    w.samples.resize(n_total);

    const double a = sp.fundamental_amplitude;
    const double w0 = 2.0 * kPi * sp.fundamental_freq;
    const bool env_on = has_envelope_event(sp.label);
    const bool fl_on = has_flicker(sp.label);
    const bool tr_on = has_transient(sp.label);
    const double tau = tr_on ? 1.0 / sp.transient_damping : 0.0;
    const double tr_end = tr_on ? sp.transient_start + transient_extent(tau, sp.transient_amplitude)
                                : 0.0;
    const double wtr = 2.0 * kPi * sp.transient_freq;

    for (std::size_t n = 0; n < n_total; ++n) {
        const double t = static_cast<double>(n) / sp.sample_rate;
        double carrier = std::sin(w0 * t + sp.phase);
        for (const auto& h : sp.harmonics)
            carrier += h.amplitude * std::sin(static_cast<double>(h.order) * (w0 * t + sp.phase));
        double env = 1.0;
        if (env_on && t >= sp.event_start && t < sp.event_end) env = sp.depth;
        if (fl_on) env *= 1.0 + sp.flicker_mod_depth * std::sin(2.0 * kPi * sp.flicker_mod_freq * t);
        double v = a * env * carrier;
        if (tr_on && t >= sp.transient_start && t <= tr_end) {
            const double dt = t - sp.transient_start;
            v += a * sp.transient_amplitude * std::exp(-dt / tau) * std::sin(wtr * dt);
        }
        w.samples[n] = v;
    }
    if (sp.noise_snr_db != kNoNoise) w = add_noise(w, sp.noise_snr_db, sp.rng_seed);
    return w;
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

inline double draw(Rng& rng, const Range& r, const char* field) {
    if (!(r.lo <= r.hi)) throw ParameterError(std::string("empty range for ") + field);
    return (r.lo == r.hi) ? r.lo : rng.uniform(r.lo, r.hi);
}

/// How make_dataset assigns noise.
struct NoisePolicy {
    enum class Kind { None, Fixed, Mixed } kind = Kind::None;
    double fixed_snr_db = 40.0;  ///< Kind::Fixed
    Range mixed_snr_db{34.0, 50.0};  ///< Kind::Mixed noisy half
    double mixed_noisy_fraction = 0.5;

    static NoisePolicy none() { return {}; }
    static NoisePolicy fixed(double snr) { return {Kind::Fixed, snr, {}, 0.0}; }
    static NoisePolicy mixed(Range snr = {34.0, 50.0}, double frac = 0.5) {
        NoisePolicy p;
        p.kind = Kind::Mixed;
        p.mixed_snr_db = snr;
        p.mixed_noisy_fraction = frac;
        return p;
    }
};

/// Parameter ranges for the uniform per-class draws.
struct DatasetConfig {
    std::size_t per_class_count = 100;
    std::uint64_t master_seed = 0;

    Range amplitude_pu{1.0, 1.0};          ///< scales 230 V RMS nominal
    Range fundamental_freq{49.8, 50.2};    ///< Hz
    Range sag_residual{0.4, 0.9};          ///< pu
    Range swell_magnitude{1.1, 1.5};       ///< pu
    Range event_cycles{1.0, 6.0};          ///< duration of sag/swell
    // Harmonic amplitudes follow the usual decaying odd-order pattern
    // (3rd > 5th > 7th), every order inside the 2-12 % class envelope.  The
    // per-order windows pin the total harmonic distortion to a narrow band:
    // the stationary classes C0/C5/C6 then occupy a compact GDR zone that a
    // localised transient (whose event factor stays near 1) cannot reach,
    // which is what keeps C9 distinguishable from C0 in the 2-D feature
    // plane.
    Range harmonic_amp_3{0.095, 0.115};    ///< pu, 3rd order
    Range harmonic_amp_5{0.050, 0.065};    ///< pu, 5th order
    Range harmonic_amp_7{0.028, 0.040};    ///< pu, 7th order
    Range transient_freq{500.0, 5000.0};   ///< Hz
    // Transient floors are set so that every drawn transient carries enough
    // ring-down energy to register against the 34 dB noise band: below
    // ~0.5 pu / 5 ms the burst's mean-ITD contribution sinks into the same
    // range as sag/swell edge splash and the noise floor, and the transient
    // composites become unlearnable from (k1, k2).
    Range transient_tau{0.006, 0.010};     ///< seconds
    Range transient_amplitude{0.6, 1.0};   ///< pu
    Range flicker_freq{8.0, 10.0};         ///< Hz
    Range flicker_depth{0.02, 0.10};       ///< pu
    NoisePolicy noise;

    double sample_rate = kDefaultSampleRate;
    double duration = kWindowDuration;
};

struct LabeledEntry {
    Waveform wave;
    ClassLabel label = ClassLabel::C0_Harmonics;
    DisturbanceSpec spec;
};

struct LabeledDataset {
    std::vector<LabeledEntry> entries;
    DatasetConfig config;
};

/// Draw the spec for item `index` of class `label` — everything except the
/// waveform rendering.  Per-item determinism: the stream is seeded with
/// derive_seed(master, class_code, index), so items are independent of
/// generation order and safe to render in parallel.
inline DisturbanceSpec draw_spec(const DatasetConfig& cfg, ClassLabel label,
                                 std::size_t index) {
    Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(class_code(label)),
                        static_cast<std::uint64_t>(index)));
    DisturbanceSpec sp;
    sp.label = label;
    sp.sample_rate = cfg.sample_rate;
    sp.duration = cfg.duration;
    sp.fundamental_amplitude =
        230.0 * std::sqrt(2.0) * draw(rng, cfg.amplitude_pu, "amplitude_pu");
    sp.fundamental_freq = draw(rng, cfg.fundamental_freq, "fundamental_freq");
    sp.phase = rng.uniform(0.0, 2.0 * kPi);

    const double cycle = 1.0 / kNominalFreq;
    const double margin = 0.02;  // keep events clear of the window edges

    if (has_harmonics(label)) {
        sp.harmonics.push_back({3, draw(rng, cfg.harmonic_amp_3, "harmonic_amp_3")});
        sp.harmonics.push_back({5, draw(rng, cfg.harmonic_amp_5, "harmonic_amp_5")});
        sp.harmonics.push_back({7, draw(rng, cfg.harmonic_amp_7, "harmonic_amp_7")});
    }
    if (has_envelope_event(label)) {
        const bool sag = class_code(label) == 1 || class_code(label) == 5 ||
                         class_code(label) == 7;
        sp.depth = sag ? draw(rng, cfg.sag_residual, "sag_residual")
                       : draw(rng, cfg.swell_magnitude, "swell_magnitude");
        const double dur = draw(rng, cfg.event_cycles, "event_cycles") * cycle;
        const double hi = cfg.duration - margin - dur;
        if (hi <= margin)
            throw ParameterError("event_cycles too long for the window");
        sp.event_start = rng.uniform(margin, hi);
        sp.event_end = sp.event_start + dur;
    }
    if (has_transient(label)) {
        sp.transient_freq = draw(rng, cfg.transient_freq, "transient_freq");
        const double tau = draw(rng, cfg.transient_tau, "transient_tau");
        sp.transient_damping = 1.0 / tau;
        sp.transient_amplitude = draw(rng, cfg.transient_amplitude, "transient_amplitude");
        const double extent = transient_extent(tau, sp.transient_amplitude);
        if (has_envelope_event(label)) {
            // Combined sag/swell + transient: both disturbances share the
            // same switching instant, as in a fault that both drops the
            // voltage and rings the line.
            sp.transient_start = sp.event_start;
        } else {
            const double hi = cfg.duration - margin - extent;
            if (hi <= margin)
                throw ParameterError("transient extent too long for the window");
            sp.transient_start = rng.uniform(margin, hi);
        }
    }
    if (has_flicker(label)) {
        sp.flicker_mod_freq = draw(rng, cfg.flicker_freq, "flicker_freq");
        sp.flicker_mod_depth = draw(rng, cfg.flicker_depth, "flicker_depth");
    }

    // Ground-truth event window for the T0 oracle.
    if (has_envelope_event(label) && has_transient(label)) {
        const double tr_end =
            sp.transient_start + transient_extent(1.0 / sp.transient_damping,
                                                  sp.transient_amplitude);
        sp.truth_t0 = sp.event_start;
        sp.truth_duration =
            std::min(std::max(sp.event_end, tr_end), cfg.duration) - sp.event_start;
    } else if (has_envelope_event(label)) {
        sp.truth_t0 = sp.event_start;
        sp.truth_duration = sp.event_end - sp.event_start;
    } else if (has_transient(label)) {
        sp.truth_t0 = sp.transient_start;
        sp.truth_duration =
            transient_extent(1.0 / sp.transient_damping, sp.transient_amplitude);
    } else {
        sp.truth_t0 = 0.0;
        sp.truth_duration = 0.0;  // stationary classes: detector reports T or 0
    }

    // Noise assignment; the noise stream is separated from the parameter
    // stream so policy changes cannot shift parameter draws.
    sp.rng_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(class_code(label)),
                              static_cast<std::uint64_t>(index), 0x6e6f697365ULL);
    switch (cfg.noise.kind) {
        case NoisePolicy::Kind::None:
            sp.noise_snr_db = kNoNoise;
            break;
        case NoisePolicy::Kind::Fixed:
            sp.noise_snr_db = cfg.noise.fixed_snr_db;
            break;
        case NoisePolicy::Kind::Mixed: {
            // Deterministic split: the first `frac` share of indices is noisy
            // (parameters are i.i.d., so index order carries no bias).
            const auto cut = static_cast<std::size_t>(
                std::llround(cfg.noise.mixed_noisy_fraction *
                             static_cast<double>(cfg.per_class_count)));
            if (index < cut)
                sp.noise_snr_db = draw(rng, cfg.noise.mixed_snr_db, "mixed_snr_db");
            else
                sp.noise_snr_db = kNoNoise;
            break;
        }
    }
    return sp;
}

inline LabeledDataset make_dataset(const DatasetConfig& cfg) {
    if (cfg.per_class_count < 1) throw ParameterError("per_class_count must be >= 1");
    LabeledDataset ds;
    ds.config = cfg;
    ds.entries.reserve(cfg.per_class_count * kNumClasses);
    for (int c = 0; c < kNumClasses; ++c) {
        const ClassLabel label = class_from_code(c);
        for (std::size_t i = 0; i < cfg.per_class_count; ++i) {
            LabeledEntry e;
            e.label = label;
            e.spec = draw_spec(cfg, label, i);
            e.wave = synthesize(e.spec);
            ds.entries.push_back(std::move(e));
        }
    }
    return ds;
}

}  // namespace pqgdr
