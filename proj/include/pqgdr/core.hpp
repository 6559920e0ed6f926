// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pqgdr {

inline constexpr const char* kVersion = "1.0.0";

/// Default analysis geometry: a 10-cycle window of a 50 Hz fundamental,
/// sampled at 12.8 kHz, i.e. 2560 samples covering 0.2 s with a nominal
/// 256 samples per fundamental period.
inline constexpr double kDefaultSampleRate = 12800.0;
inline constexpr double kNominalFreq = 50.0;
inline constexpr double kWindowDuration = 0.2;
inline constexpr std::size_t kWindowSamples = 2560;
inline constexpr std::size_t kSamplesPerPeriod = 256;
inline constexpr int kLevels = 6;
inline constexpr int kNumClasses = 10;

// ---------------------------------------------------------------------------
// Error taxonomy.  ParameterError (and subclasses) mean the caller supplied an
// invalid configuration; DataError (and subclasses) mean the data could not be
// processed.  The CLI maps these onto exit codes 2 and 1 respectively.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid parameter/configuration supplied by the caller.
struct ParameterError : Error {
    using Error::Error;
};

/// Invalid run configuration (bad paths, mismatched class sets, ...).
struct ConfigError : ParameterError {
    using ParameterError::ParameterError;
};

/// Data that cannot be processed (malformed files, degenerate signals, ...).
struct DataError : Error {
    using Error::Error;
};

/// Array shape constraint violated (e.g. length not divisible by 2^J).
struct ShapeError : DataError {
    using DataError::DataError;
};

/// Frequency estimation failed or produced an out-of-range value.
struct EstimationError : DataError {
    using DataError::DataError;
};

/// File / serialization failure.
struct IoError : DataError {
    using DataError::DataError;
};

// ---------------------------------------------------------------------------
// Class labels
// ---------------------------------------------------------------------------

/// The ten disturbance classes, with stable integer codes 0-9.
enum class ClassLabel : int {
    C0_Harmonics = 0,
    C1_Sag = 1,
    C2_Swell = 2,
    C3_Transient = 3,
    C4_Flicker = 4,
    C5_HarmonicsSag = 5,
    C6_HarmonicsSwell = 6,
    C7_TransientSag = 7,
    C8_TransientSwell = 8,
    C9_TransientHarmonics = 9,
};

inline int class_code(ClassLabel c) { return static_cast<int>(c); }

inline ClassLabel class_from_code(int code) {
    if (code < 0 || code >= kNumClasses)
        throw ParameterError("class code out of range [0,9]: " + std::to_string(code));
    return static_cast<ClassLabel>(code);
}

inline std::string to_string(ClassLabel c) { return "C" + std::to_string(class_code(c)); }

inline std::string class_description(ClassLabel c) {
    switch (c) {
        case ClassLabel::C0_Harmonics: return "harmonics";
        case ClassLabel::C1_Sag: return "sag";
        case ClassLabel::C2_Swell: return "swell";
        case ClassLabel::C3_Transient: return "oscillatory transient";
        case ClassLabel::C4_Flicker: return "flicker";
        case ClassLabel::C5_HarmonicsSag: return "harmonics + sag";
        case ClassLabel::C6_HarmonicsSwell: return "harmonics + swell";
        case ClassLabel::C7_TransientSag: return "transient + sag";
        case ClassLabel::C8_TransientSwell: return "transient + swell";
        case ClassLabel::C9_TransientHarmonics: return "transient + harmonics";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Waveform
// ---------------------------------------------------------------------------

/// A uniformly sampled real-valued voltage signal.
struct Waveform {
    std::vector<double> samples;  ///< instantaneous voltage, volts
    double sample_rate = kDefaultSampleRate;  ///< Hz
    double nominal_freq = kNominalFreq;       ///< Hz
    double duration = kWindowDuration;        ///< seconds

    std::size_t size() const { return samples.size(); }

    /// Check the structural invariants; throws ShapeError on violation.
    void validate() const {
        if (samples.empty()) throw ShapeError("waveform has no samples");
        if (!(sample_rate > 0.0)) throw ShapeError("sample_rate must be positive");
        const auto expect =
            static_cast<std::size_t>(std::llround(sample_rate * duration));
        if (expect != samples.size())
            throw ShapeError("waveform length " + std::to_string(samples.size()) +
                             " != round(sample_rate * duration) = " +
                             std::to_string(expect));
    }
};

/// Root mean square of a sample vector.
inline double rms(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

/// Mean signal power (mean of squares).
inline double power(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

}  // namespace pqgdr
