// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "pqgdr/siggen.hpp"

using namespace pqgdr;
using Catch::Approx;

namespace {

constexpr double kAmp = 230.0 * 1.4142135623730951;

DisturbanceSpec base_spec(ClassLabel label) {
    DisturbanceSpec sp;
    sp.label = label;
    sp.phase = 0.7;
    sp.fundamental_freq = 50.0;
    return sp;
}

}  // namespace

TEST_CASE("default window geometry", "[siggen]") {
    const Waveform w = synthesize(base_spec(ClassLabel::C0_Harmonics));
    CHECK(w.samples.size() == kWindowSamples);
    CHECK(w.sample_rate == Approx(kDefaultSampleRate));
    CHECK(w.duration == Approx(kWindowDuration));
    double peak = 0.0;
    for (double v : w.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == Approx(kAmp).margin(0.5));
}

TEST_CASE("closed-form synthesis oracles", "[siggen]") {
    SECTION("harmonics (C0)") {
        DisturbanceSpec sp = base_spec(ClassLabel::C0_Harmonics);
        sp.harmonics = {{3, 0.10}, {5, 0.05}, {7, 0.03}};
        const Waveform w = synthesize(sp);
        for (std::size_t n = 0; n < w.samples.size(); n += 7) {
            const double t = static_cast<double>(n) / w.sample_rate;
            const double arg = 2.0 * kPi * 50.0 * t + 0.7;
            const double want =
                kAmp * (std::sin(arg) + 0.10 * std::sin(3 * arg) + 0.05 * std::sin(5 * arg) +
                        0.03 * std::sin(7 * arg));
            REQUIRE(w.samples[n] == Approx(want).margin(1e-9));
        }
    }
    SECTION("sag envelope (C1), half-open activity interval") {
        DisturbanceSpec sp = base_spec(ClassLabel::C1_Sag);
        sp.depth = 0.55;
        sp.event_start = 0.06;
        sp.event_end = 0.10;
        const Waveform w = synthesize(sp);
        for (std::size_t n = 0; n < w.samples.size(); n += 3) {
            const double t = static_cast<double>(n) / w.sample_rate;
            const double env = (t >= 0.06 && t < 0.10) ? 0.55 : 1.0;
            const double want = kAmp * env * std::sin(2.0 * kPi * 50.0 * t + 0.7);
            REQUIRE(w.samples[n] == Approx(want).margin(1e-9));
        }
    }
    SECTION("damped transient (C3)") {
        DisturbanceSpec sp = base_spec(ClassLabel::C3_Transient);
        sp.transient_freq = 1200.0;
        sp.transient_damping = 1.0 / 0.008;
        sp.transient_amplitude = 0.8;
        sp.transient_start = 0.05;
        const Waveform w = synthesize(sp);
        const double extent = transient_extent(0.008, 0.8);
        CHECK(extent == Approx(0.008 * std::log(100.0 * std::sqrt(2.0) * 0.8)));
        for (std::size_t n = 0; n < w.samples.size(); n += 3) {
            const double t = static_cast<double>(n) / w.sample_rate;
            double want = kAmp * std::sin(2.0 * kPi * 50.0 * t + 0.7);
            if (t >= 0.05 && t <= 0.05 + extent) {
                const double dt = t - 0.05;
                want += kAmp * 0.8 * std::exp(-dt / 0.008) *
                        std::sin(2.0 * kPi * 1200.0 * dt);
            }
            REQUIRE(w.samples[n] == Approx(want).margin(1e-9));
        }
    }
    SECTION("flicker modulation (C4)") {
        DisturbanceSpec sp = base_spec(ClassLabel::C4_Flicker);
        sp.flicker_mod_freq = 9.0;
        sp.flicker_mod_depth = 0.06;
        const Waveform w = synthesize(sp);
        for (std::size_t n = 0; n < w.samples.size(); n += 3) {
            const double t = static_cast<double>(n) / w.sample_rate;
            const double env = 1.0 + 0.06 * std::sin(2.0 * kPi * 9.0 * t);
            const double want = kAmp * env * std::sin(2.0 * kPi * 50.0 * t + 0.7);
            REQUIRE(w.samples[n] == Approx(want).margin(1e-9));
        }
    }
}

TEST_CASE("composite classes superpose exactly", "[siggen]") {
    // C7 = sag + additive transient: must equal the C1 window plus the C3
    // window minus the shared bare fundamental, sample for sample.
    DisturbanceSpec sag = base_spec(ClassLabel::C1_Sag);
    sag.depth = 0.6;
    sag.event_start = 0.055;
    sag.event_end = 0.125;

    DisturbanceSpec tr = base_spec(ClassLabel::C3_Transient);
    tr.transient_freq = 900.0;
    tr.transient_damping = 1.0 / 0.007;
    tr.transient_amplitude = 0.7;
    tr.transient_start = 0.055;

    DisturbanceSpec both = base_spec(ClassLabel::C7_TransientSag);
    both.depth = sag.depth;
    both.event_start = sag.event_start;
    both.event_end = sag.event_end;
    both.transient_freq = tr.transient_freq;
    both.transient_damping = tr.transient_damping;
    both.transient_amplitude = tr.transient_amplitude;
    both.transient_start = tr.transient_start;

    const Waveform w_sag = synthesize(sag);
    const Waveform w_tr = synthesize(tr);
    const Waveform w_both = synthesize(both);
    const Waveform w_fund = synthesize(base_spec(ClassLabel::C0_Harmonics));

    for (std::size_t n = 0; n < w_both.samples.size(); ++n) {
        const double want = w_sag.samples[n] + w_tr.samples[n] - w_fund.samples[n];
        REQUIRE(w_both.samples[n] == Approx(want).margin(1e-9));
    }
}

TEST_CASE("noise injection hits the target SNR exactly", "[siggen]") {
    const Waveform w = synthesize(base_spec(ClassLabel::C0_Harmonics));

    SECTION("realised SNR equals the request") {
        for (double snr : {20.0, 34.0, 50.0}) {
            const Waveform n = add_noise(w, snr, 99);
            double p_sig = 0.0, p_noise = 0.0;
            for (std::size_t i = 0; i < w.samples.size(); ++i) {
                p_sig += w.samples[i] * w.samples[i];
                const double d = n.samples[i] - w.samples[i];
                p_noise += d * d;
            }
            const double measured = 10.0 * std::log10(p_sig / p_noise);
            CHECK(measured == Approx(snr).margin(1e-9));
        }
    }
    SECTION("determinism and seed independence") {
        const Waveform a = add_noise(w, 34.0, 7);
        const Waveform b = add_noise(w, 34.0, 7);
        const Waveform c = add_noise(w, 34.0, 8);
        CHECK(a.samples == b.samples);
        CHECK(a.samples != c.samples);
    }
    SECTION("no-noise sentinel is a passthrough") {
        const Waveform a = add_noise(w, kNoNoise, 7);
        CHECK(a.samples == w.samples);
    }
    SECTION("zero-power input is rejected") {
        Waveform z = w;
        for (auto& v : z.samples) v = 0.0;
        CHECK_THROWS_AS(add_noise(z, 34.0, 1), DataError);
    }
}

TEST_CASE("draw_spec respects configured ranges", "[siggen]") {
    DatasetConfig cfg;
    cfg.per_class_count = 50;
    cfg.master_seed = 11;

    for (int c = 0; c < kNumClasses; ++c) {
        const ClassLabel label = class_from_code(c);
        for (std::size_t i = 0; i < cfg.per_class_count; ++i) {
            const DisturbanceSpec sp = draw_spec(cfg, label, i);
            CHECK(sp.label == label);
            CHECK(sp.fundamental_freq >= cfg.fundamental_freq.lo);
            CHECK(sp.fundamental_freq <= cfg.fundamental_freq.hi);
            if (has_envelope_event(label)) {
                const bool sag = c == 1 || c == 5 || c == 7;
                const Range r = sag ? cfg.sag_residual : cfg.swell_magnitude;
                CHECK(sp.depth >= r.lo);
                CHECK(sp.depth <= r.hi);
                CHECK(sp.event_start >= 0.02);
                CHECK(sp.event_end <= cfg.duration - 0.02);
                const double cycles = (sp.event_end - sp.event_start) * kNominalFreq;
                CHECK(cycles >= cfg.event_cycles.lo - 1e-9);
                CHECK(cycles <= cfg.event_cycles.hi + 1e-9);
            }
            if (has_transient(label)) {
                CHECK(sp.transient_freq >= cfg.transient_freq.lo);
                CHECK(sp.transient_freq <= cfg.transient_freq.hi);
                CHECK(1.0 / sp.transient_damping >= cfg.transient_tau.lo - 1e-12);
                CHECK(1.0 / sp.transient_damping <= cfg.transient_tau.hi + 1e-12);
                CHECK(sp.transient_amplitude >= cfg.transient_amplitude.lo);
                CHECK(sp.transient_amplitude <= cfg.transient_amplitude.hi);
            }
            if (has_harmonics(label)) {
                REQUIRE(sp.harmonics.size() == 3);
                CHECK(sp.harmonics[0].order == 3);
                CHECK(sp.harmonics[1].order == 5);
                CHECK(sp.harmonics[2].order == 7);
                CHECK(sp.harmonics[0].amplitude >= cfg.harmonic_amp_3.lo);
                CHECK(sp.harmonics[0].amplitude <= cfg.harmonic_amp_3.hi);
                CHECK(sp.harmonics[1].amplitude >= cfg.harmonic_amp_5.lo);
                CHECK(sp.harmonics[1].amplitude <= cfg.harmonic_amp_5.hi);
                CHECK(sp.harmonics[2].amplitude >= cfg.harmonic_amp_7.lo);
                CHECK(sp.harmonics[2].amplitude <= cfg.harmonic_amp_7.hi);
            }
            if (has_flicker(label)) {
                CHECK(sp.flicker_mod_freq >= cfg.flicker_freq.lo);
                CHECK(sp.flicker_mod_freq <= cfg.flicker_freq.hi);
                CHECK(sp.flicker_mod_depth >= cfg.flicker_depth.lo);
                CHECK(sp.flicker_mod_depth <= cfg.flicker_depth.hi);
            }
        }
    }
}

TEST_CASE("combined event classes share the switching instant", "[siggen]") {
    DatasetConfig cfg;
    cfg.per_class_count = 30;
    cfg.master_seed = 21;
    for (ClassLabel label : {ClassLabel::C7_TransientSag, ClassLabel::C8_TransientSwell}) {
        for (std::size_t i = 0; i < cfg.per_class_count; ++i) {
            const DisturbanceSpec sp = draw_spec(cfg, label, i);
            CHECK(sp.transient_start == sp.event_start);
        }
    }
}

TEST_CASE("ground-truth event bounds", "[siggen]") {
    DatasetConfig cfg;
    cfg.per_class_count = 30;
    cfg.master_seed = 31;

    SECTION("envelope-only classes") {
        const DisturbanceSpec sp = draw_spec(cfg, ClassLabel::C1_Sag, 0);
        CHECK(sp.truth_t0 == Approx(sp.event_start));
        CHECK(sp.truth_duration == Approx(sp.event_end - sp.event_start));
    }
    SECTION("transient-only classes use the 1% decay extent") {
        const DisturbanceSpec sp = draw_spec(cfg, ClassLabel::C3_Transient, 0);
        CHECK(sp.truth_t0 == Approx(sp.transient_start));
        CHECK(sp.truth_duration ==
              Approx(transient_extent(1.0 / sp.transient_damping, sp.transient_amplitude)));
    }
    SECTION("combined classes report the enclosing interval") {
        for (std::size_t i = 0; i < cfg.per_class_count; ++i) {
            const DisturbanceSpec sp = draw_spec(cfg, ClassLabel::C7_TransientSag, i);
            const double tr_end =
                sp.transient_start +
                transient_extent(1.0 / sp.transient_damping, sp.transient_amplitude);
            CHECK(sp.truth_t0 == Approx(sp.event_start));
            CHECK(sp.truth_t0 + sp.truth_duration ==
                  Approx(std::min(std::max(sp.event_end, tr_end), cfg.duration)));
        }
    }
    SECTION("stationary classes carry a null oracle") {
        const DisturbanceSpec sp = draw_spec(cfg, ClassLabel::C0_Harmonics, 0);
        CHECK(sp.truth_t0 == 0.0);
        CHECK(sp.truth_duration == 0.0);
    }
}

TEST_CASE("dataset generation is deterministic", "[siggen]") {
    DatasetConfig cfg;
    cfg.per_class_count = 5;
    cfg.master_seed = 77;
    cfg.noise = NoisePolicy::mixed({34.0, 50.0}, 0.5);

    const LabeledDataset a = make_dataset(cfg);
    const LabeledDataset b = make_dataset(cfg);
    REQUIRE(a.entries.size() == 50);
    REQUIRE(b.entries.size() == 50);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].label == b.entries[i].label);
        REQUIRE(a.entries[i].wave.samples == b.entries[i].wave.samples);
    }
}

TEST_CASE("noise policies assign SNR as documented", "[siggen]") {
    DatasetConfig cfg;
    cfg.per_class_count = 10;
    cfg.master_seed = 5;

    SECTION("none") {
        cfg.noise = NoisePolicy::none();
        const LabeledDataset ds = make_dataset(cfg);
        for (const auto& e : ds.entries) CHECK(e.spec.noise_snr_db == kNoNoise);
    }
    SECTION("fixed") {
        cfg.noise = NoisePolicy::fixed(40.0);
        const LabeledDataset ds = make_dataset(cfg);
        for (const auto& e : ds.entries) CHECK(e.spec.noise_snr_db == 40.0);
    }
    SECTION("mixed: the first fraction of indices per class is noisy") {
        cfg.noise = NoisePolicy::mixed({34.0, 50.0}, 0.5);
        for (int c = 0; c < kNumClasses; ++c) {
            for (std::size_t i = 0; i < cfg.per_class_count; ++i) {
                const DisturbanceSpec sp = draw_spec(cfg, class_from_code(c), i);
                if (i < 5) {
                    CHECK(sp.noise_snr_db >= 34.0);
                    CHECK(sp.noise_snr_db <= 50.0);
                } else {
                    CHECK(sp.noise_snr_db == kNoNoise);
                }
            }
        }
    }
    SECTION("noise policy does not shift parameter draws") {
        cfg.noise = NoisePolicy::none();
        const DisturbanceSpec clean = draw_spec(cfg, ClassLabel::C1_Sag, 2);
        cfg.noise = NoisePolicy::mixed({34.0, 50.0}, 1.0);
        const DisturbanceSpec noisy = draw_spec(cfg, ClassLabel::C1_Sag, 2);
        CHECK(clean.depth == noisy.depth);
        CHECK(clean.event_start == noisy.event_start);
        CHECK(clean.phase == noisy.phase);
        CHECK(noisy.noise_snr_db != kNoNoise);
    }
}

TEST_CASE("generator input validation", "[siggen]") {
    SECTION("dataset-level") {
        DatasetConfig cfg;
        cfg.per_class_count = 0;
        CHECK_THROWS_AS(make_dataset(cfg), ParameterError);

        DatasetConfig bad;
        bad.per_class_count = 1;
        bad.sag_residual = {0.9, 0.4};  // inverted
        CHECK_THROWS_AS(draw_spec(bad, ClassLabel::C1_Sag, 0), ParameterError);
    }
    SECTION("spec-level") {
        DisturbanceSpec sp = base_spec(ClassLabel::C1_Sag);
        sp.depth = 0.95;  // not a sag residual
        sp.event_start = 0.05;
        sp.event_end = 0.10;
        CHECK_THROWS_AS(synthesize(sp), ParameterError);

        sp = base_spec(ClassLabel::C2_Swell);
        sp.depth = 1.3;
        sp.event_start = 0.10;
        sp.event_end = 0.05;  // reversed interval
        CHECK_THROWS_AS(synthesize(sp), ParameterError);

        sp = base_spec(ClassLabel::C3_Transient);
        sp.transient_freq = 7000.0;  // above Nyquist
        sp.transient_damping = 100.0;
        sp.transient_amplitude = 0.5;
        sp.transient_start = 0.05;
        CHECK_THROWS_AS(synthesize(sp), ParameterError);

        sp = base_spec(ClassLabel::C0_Harmonics);
        sp.harmonics = {{200, 0.05}};  // 10 kHz at 50 Hz fundamental
        CHECK_THROWS_AS(synthesize(sp), ParameterError);

        sp = base_spec(ClassLabel::C4_Flicker);
        sp.flicker_mod_freq = 9.0;
        sp.flicker_mod_depth = 1.5;
        CHECK_THROWS_AS(synthesize(sp), ParameterError);
    }
    SECTION("class code round-trip") {
        for (int c = 0; c < kNumClasses; ++c) CHECK(class_code(class_from_code(c)) == c);
        CHECK_THROWS_AS(class_from_code(10), ParameterError);
        CHECK_THROWS_AS(class_from_code(-1), ParameterError);
    }
}
