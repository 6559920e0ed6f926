// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pqgdr/core.hpp"
#include "pqgdr/siggen.hpp"

namespace pqgdr {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Waveform files
// ---------------------------------------------------------------------------
//
// Two interchange formats, both round-trip exact:
//  * CSV: "<sample_rate>,<nominal_freq>" header line, then one sample per
//    line, 17-significant-digit decimal — the human-friendly default;
//  * binary ("PQWF" magic, u32 version, f64 sample_rate, f64 nominal_freq,
//    u64 count, then count little-endian f64 samples) — the fast option.

namespace detail {

inline void put_u32le(std::ofstream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64le(std::ofstream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64le(std::ofstream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64le(os, v);
}

inline std::uint32_t get_u32le(std::ifstream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64le(std::ifstream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64le(std::ifstream& is) {
    const std::uint64_t v = get_u64le(is);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_waveform_csv(const std::filesystem::path& path, const Waveform& w) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << detail::fmt_double(w.sample_rate) << ',' << detail::fmt_double(w.nominal_freq)
       << '\n';
    for (double v : w.samples) os << detail::fmt_double(v) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

inline Waveform read_waveform_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    Waveform w;
    std::string line;
    if (!std::getline(is, line)) throw DataError("empty waveform file: " + path.string());
    char* end = nullptr;
    w.sample_rate = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != ',')
        throw DataError("malformed waveform header in " + path.string());
    const char* second = end + 1;
    w.nominal_freq = std::strtod(second, &end);
    if (end == second) throw DataError("malformed waveform header in " + path.string());
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const char* begin = line.c_str();
        const double v = std::strtod(begin, &end);
        if (end == begin) throw DataError("malformed sample line in " + path.string());
        w.samples.push_back(v);
    }
    if (w.samples.empty()) throw DataError("waveform holds no samples: " + path.string());
    if (!(w.sample_rate > 0.0))
        throw DataError("non-positive sample rate in " + path.string());
    w.duration = static_cast<double>(w.samples.size()) / w.sample_rate;
    return w;
}

inline constexpr char kWaveformMagic[4] = {'P', 'Q', 'W', 'F'};
inline constexpr std::uint32_t kWaveformVersion = 1;

inline void write_waveform_bin(const std::filesystem::path& path, const Waveform& w) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(kWaveformMagic, 4);
    detail::put_u32le(os, kWaveformVersion);
    detail::put_f64le(os, w.sample_rate);
    detail::put_f64le(os, w.nominal_freq);
    detail::put_u64le(os, static_cast<std::uint64_t>(w.samples.size()));
    for (double v : w.samples) detail::put_f64le(os, v);
    if (!os) throw IoError("write failed: " + path.string());
}

inline Waveform read_waveform_bin(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kWaveformMagic, 4) != 0)
        throw DataError("not a PQWF waveform file: " + path.string());
    const std::uint32_t version = detail::get_u32le(is);
    if (version != kWaveformVersion)
        throw DataError("unsupported PQWF version " + std::to_string(version) + " in " +
                        path.string());
    Waveform w;
    w.sample_rate = detail::get_f64le(is);
    w.nominal_freq = detail::get_f64le(is);
    const std::uint64_t count = detail::get_u64le(is);
    if (!is || count == 0 || count > (1ull << 32))
        throw DataError("corrupt PQWF header in " + path.string());
    w.samples.resize(static_cast<std::size_t>(count));
    for (auto& v : w.samples) v = detail::get_f64le(is);
    if (!is) throw DataError("truncated PQWF file: " + path.string());
    if (!(w.sample_rate > 0.0))
        throw DataError("non-positive sample rate in " + path.string());
    w.duration = static_cast<double>(w.samples.size()) / w.sample_rate;
    return w;
}

/// Dispatch on extension: ".csv" or ".pqwf".
inline Waveform read_waveform(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return read_waveform_csv(path);
    if (ext == ".pqwf") return read_waveform_bin(path);
    throw ParameterError("unknown waveform extension '" + ext + "' (want .csv or .pqwf)");
}

// ---------------------------------------------------------------------------
// JSON round-trips for specs and configs
// ---------------------------------------------------------------------------

inline json spec_to_json(const DisturbanceSpec& sp) {
    json j;
    j["label"] = class_code(sp.label);
    j["fundamental_amplitude"] = sp.fundamental_amplitude;
    j["fundamental_freq"] = sp.fundamental_freq;
    j["phase"] = sp.phase;
    j["sample_rate"] = sp.sample_rate;
    j["duration"] = sp.duration;
    j["depth"] = sp.depth;
    j["event_start"] = sp.event_start;
    j["event_end"] = sp.event_end;
    json harm = json::array();
    for (const auto& h : sp.harmonics) harm.push_back({{"order", h.order}, {"amplitude", h.amplitude}});
    j["harmonics"] = std::move(harm);
    j["transient_freq"] = sp.transient_freq;
    j["transient_damping"] = sp.transient_damping;
    j["transient_amplitude"] = sp.transient_amplitude;
    j["transient_start"] = sp.transient_start;
    j["flicker_mod_freq"] = sp.flicker_mod_freq;
    j["flicker_mod_depth"] = sp.flicker_mod_depth;
    if (sp.noise_snr_db == kNoNoise)
        j["noise_snr_db"] = nullptr;
    else
        j["noise_snr_db"] = sp.noise_snr_db;
    j["rng_seed"] = sp.rng_seed;
    j["truth_t0"] = sp.truth_t0;
    j["truth_duration"] = sp.truth_duration;
    return j;
}

inline DisturbanceSpec spec_from_json(const json& j) {
    try {
        DisturbanceSpec sp;
        sp.label = class_from_code(j.at("label").get<int>());
        sp.fundamental_amplitude = j.at("fundamental_amplitude").get<double>();
        sp.fundamental_freq = j.at("fundamental_freq").get<double>();
        sp.phase = j.at("phase").get<double>();
        sp.sample_rate = j.at("sample_rate").get<double>();
        sp.duration = j.at("duration").get<double>();
        sp.depth = j.at("depth").get<double>();
        sp.event_start = j.at("event_start").get<double>();
        sp.event_end = j.at("event_end").get<double>();
        for (const auto& h : j.at("harmonics"))
            sp.harmonics.push_back({h.at("order").get<int>(), h.at("amplitude").get<double>()});
        sp.transient_freq = j.at("transient_freq").get<double>();
        sp.transient_damping = j.at("transient_damping").get<double>();
        sp.transient_amplitude = j.at("transient_amplitude").get<double>();
        sp.transient_start = j.at("transient_start").get<double>();
        sp.flicker_mod_freq = j.at("flicker_mod_freq").get<double>();
        sp.flicker_mod_depth = j.at("flicker_mod_depth").get<double>();
        const auto& snr = j.at("noise_snr_db");
        sp.noise_snr_db = snr.is_null() ? kNoNoise : snr.get<double>();
        sp.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        sp.truth_t0 = j.at("truth_t0").get<double>();
        sp.truth_duration = j.at("truth_duration").get<double>();
        return sp;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed disturbance spec: ") + e.what());
    }
}

inline json range_to_json(const Range& r) { return json{{"lo", r.lo}, {"hi", r.hi}}; }

inline Range range_from_json(const json& j) {
    return {j.at("lo").get<double>(), j.at("hi").get<double>()};
}

inline json config_to_json(const DatasetConfig& cfg) {
    json j;
    j["per_class_count"] = cfg.per_class_count;
    j["master_seed"] = cfg.master_seed;
    j["amplitude_pu"] = range_to_json(cfg.amplitude_pu);
    j["fundamental_freq"] = range_to_json(cfg.fundamental_freq);
    j["sag_residual"] = range_to_json(cfg.sag_residual);
    j["swell_magnitude"] = range_to_json(cfg.swell_magnitude);
    j["event_cycles"] = range_to_json(cfg.event_cycles);
    j["harmonic_amp_3"] = range_to_json(cfg.harmonic_amp_3);
    j["harmonic_amp_5"] = range_to_json(cfg.harmonic_amp_5);
    j["harmonic_amp_7"] = range_to_json(cfg.harmonic_amp_7);
    j["transient_freq"] = range_to_json(cfg.transient_freq);
    j["transient_tau"] = range_to_json(cfg.transient_tau);
    j["transient_amplitude"] = range_to_json(cfg.transient_amplitude);
    j["flicker_freq"] = range_to_json(cfg.flicker_freq);
    j["flicker_depth"] = range_to_json(cfg.flicker_depth);
    json np;
    switch (cfg.noise.kind) {
        case NoisePolicy::Kind::None:
            np["kind"] = "none";
            break;
        case NoisePolicy::Kind::Fixed:
            np["kind"] = "fixed";
            np["snr_db"] = cfg.noise.fixed_snr_db;
            break;
        case NoisePolicy::Kind::Mixed:
            np["kind"] = "mixed";
            np["snr_db"] = range_to_json(cfg.noise.mixed_snr_db);
            np["noisy_fraction"] = cfg.noise.mixed_noisy_fraction;
            break;
    }
    j["noise"] = std::move(np);
    j["sample_rate"] = cfg.sample_rate;
    j["duration"] = cfg.duration;
    return j;
}

inline DatasetConfig config_from_json(const json& j) {
    try {
        DatasetConfig cfg;
        cfg.per_class_count = j.at("per_class_count").get<std::size_t>();
        cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        cfg.amplitude_pu = range_from_json(j.at("amplitude_pu"));
        cfg.fundamental_freq = range_from_json(j.at("fundamental_freq"));
        cfg.sag_residual = range_from_json(j.at("sag_residual"));
        cfg.swell_magnitude = range_from_json(j.at("swell_magnitude"));
        cfg.event_cycles = range_from_json(j.at("event_cycles"));
        cfg.harmonic_amp_3 = range_from_json(j.at("harmonic_amp_3"));
        cfg.harmonic_amp_5 = range_from_json(j.at("harmonic_amp_5"));
        cfg.harmonic_amp_7 = range_from_json(j.at("harmonic_amp_7"));
        cfg.transient_freq = range_from_json(j.at("transient_freq"));
        cfg.transient_tau = range_from_json(j.at("transient_tau"));
        cfg.transient_amplitude = range_from_json(j.at("transient_amplitude"));
        cfg.flicker_freq = range_from_json(j.at("flicker_freq"));
        cfg.flicker_depth = range_from_json(j.at("flicker_depth"));
        const auto& np = j.at("noise");
        const std::string kind = np.at("kind").get<std::string>();
        if (kind == "none") {
            cfg.noise = NoisePolicy::none();
        } else if (kind == "fixed") {
            cfg.noise = NoisePolicy::fixed(np.at("snr_db").get<double>());
        } else if (kind == "mixed") {
            cfg.noise = NoisePolicy::mixed(range_from_json(np.at("snr_db")),
                                           np.at("noisy_fraction").get<double>());
        } else {
            throw DataError("unknown noise policy kind: " + kind);
        }
        cfg.sample_rate = j.at("sample_rate").get<double>();
        cfg.duration = j.at("duration").get<double>();
        return cfg;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed dataset config: ") + e.what());
    }
}

/// FNV-1a content digest of the canonical config JSON (hex string); lets a
/// consumer verify two datasets came from the same recipe at a glance.
inline std::string config_digest(const DatasetConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Dataset directories
// ---------------------------------------------------------------------------

inline constexpr const char* kManifestFormat = "pqgdr-dataset";
inline constexpr int kManifestVersion = 1;

/// Persist `ds` under `dir`: manifest.json plus one waveform file per entry
/// (C<code>_<index>.<ext>).  `binary` selects .pqwf over .csv payloads.
inline void save_dataset(const std::filesystem::path& dir, const LabeledDataset& ds,
                         bool binary = false) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    json manifest;
    manifest["format"] = kManifestFormat;
    manifest["version"] = kManifestVersion;
    manifest["config"] = config_to_json(ds.config);
    manifest["config_digest"] = config_digest(ds.config);
    manifest["waveform_format"] = binary ? "pqwf" : "csv";
    json entries = json::array();
    std::vector<std::size_t> per_class(kNumClasses, 0);
    for (const auto& e : ds.entries) {
        const int code = class_code(e.label);
        char name[32];
        std::snprintf(name, sizeof name, "C%d_%04zu.%s", code, per_class[code],
                      binary ? "pqwf" : "csv");
        ++per_class[code];
        if (binary)
            write_waveform_bin(dir / name, e.wave);
        else
            write_waveform_csv(dir / name, e.wave);
        json ent;
        ent["file"] = name;
        ent["label"] = code;
        ent["class"] = to_string(e.label);
        ent["spec"] = spec_to_json(e.spec);
        entries.push_back(std::move(ent));
    }
    manifest["entries"] = std::move(entries);

    std::ofstream os(dir / "manifest.json");
    if (!os) throw IoError("cannot write manifest under " + dir.string());
    os << manifest.dump(2) << '\n';
    if (!os) throw IoError("manifest write failed under " + dir.string());
}

/// Load a dataset directory written by save_dataset.  Every entry's stored
/// label must match its spec (manifest tampering guard).
inline LabeledDataset load_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream is(manifest_path);
    if (!is) throw IoError("cannot open " + manifest_path.string());
    json manifest;
    try {
        is >> manifest;
    } catch (const json::exception& e) {
        throw DataError("malformed manifest JSON: " + std::string(e.what()));
    }
    try {
        if (manifest.at("format").get<std::string>() != kManifestFormat)
            throw DataError("not a pqgdr dataset manifest: " + manifest_path.string());
        if (manifest.at("version").get<int>() != kManifestVersion)
            throw DataError("unsupported manifest version in " + manifest_path.string());
        LabeledDataset ds;
        ds.config = config_from_json(manifest.at("config"));
        for (const auto& ent : manifest.at("entries")) {
            LabeledEntry e;
            e.label = class_from_code(ent.at("label").get<int>());
            e.spec = spec_from_json(ent.at("spec"));
            if (e.spec.label != e.label)
                throw DataError("manifest label/spec mismatch for " +
                                ent.at("file").get<std::string>());
            e.wave = read_waveform(dir / ent.at("file").get<std::string>());
            ds.entries.push_back(std::move(e));
        }
        if (ds.entries.empty()) throw DataError("dataset is empty: " + dir.string());
        return ds;
    } catch (const json::exception& e) {
        throw DataError("malformed manifest: " + std::string(e.what()));
    }
}

}  // namespace pqgdr
