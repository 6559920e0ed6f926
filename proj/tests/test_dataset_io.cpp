// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pqgdr/dataset_io.hpp"

using namespace pqgdr;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("pqgdr_dsio_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spew(const fs::path& p, const std::string& bytes) {
    std::ofstream os(p, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Waveform awkward_wave() {
    Waveform w;
    w.sample_rate = 12800.0;
    w.nominal_freq = 50.0;
    w.samples = {0.1, -1.0 / 3.0, 3.141592653589793e5, -2.5e-17, 0.0,
                 230.00000000000003, -1e-300, 1e300};
    w.duration = static_cast<double>(w.samples.size()) / w.sample_rate;
    return w;
}

}  // namespace

TEST_CASE("CSV waveform round trip is bitwise exact", "[dataset_io]") {
    const fs::path dir = fresh_dir("csv");
    const Waveform w = awkward_wave();
    write_waveform_csv(dir / "w.csv", w);
    const Waveform r = read_waveform_csv(dir / "w.csv");
    CHECK(r.sample_rate == w.sample_rate);
    CHECK(r.nominal_freq == w.nominal_freq);
    REQUIRE(r.samples.size() == w.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); ++i) REQUIRE(r.samples[i] == w.samples[i]);
    CHECK(r.duration == Approx(w.duration));

    SECTION("layout: header line then one sample per line") {
        const std::string text = slurp(dir / "w.csv");
        CHECK(text.rfind("12800,50\n", 0) == 0);
        std::size_t lines = 0;
        for (char c : text)
            if (c == '\n') ++lines;
        CHECK(lines == 1 + w.samples.size());
    }
    fs::remove_all(dir);
}

TEST_CASE("CSV waveform rejects malformed input", "[dataset_io]") {
    const fs::path dir = fresh_dir("csvbad");
    SECTION("missing file") {
        CHECK_THROWS_AS(read_waveform_csv(dir / "nope.csv"), IoError);
    }
    SECTION("empty file") {
        spew(dir / "e.csv", "");
        CHECK_THROWS_AS(read_waveform_csv(dir / "e.csv"), DataError);
    }
    SECTION("garbage header") {
        spew(dir / "g.csv", "hello world\n1\n");
        CHECK_THROWS_AS(read_waveform_csv(dir / "g.csv"), DataError);
    }
    SECTION("header missing the comma") {
        spew(dir / "c.csv", "12800\n1\n");
        CHECK_THROWS_AS(read_waveform_csv(dir / "c.csv"), DataError);
    }
    SECTION("no samples") {
        spew(dir / "n.csv", "12800,50\n");
        CHECK_THROWS_AS(read_waveform_csv(dir / "n.csv"), DataError);
    }
    SECTION("bad sample line") {
        spew(dir / "s.csv", "12800,50\n1.5\nxyz\n");
        CHECK_THROWS_AS(read_waveform_csv(dir / "s.csv"), DataError);
    }
    fs::remove_all(dir);
}

TEST_CASE("binary waveform round trip and exact layout", "[dataset_io]") {
    const fs::path dir = fresh_dir("bin");
    const Waveform w = awkward_wave();
    write_waveform_bin(dir / "w.pqwf", w);

    SECTION("size and header bytes") {
        const std::string bytes = slurp(dir / "w.pqwf");
        REQUIRE(bytes.size() == 32 + 8 * w.samples.size());
        CHECK(bytes.compare(0, 4, "PQWF") == 0);
        CHECK(bytes[4] == 1);  // version u32 little-endian
        CHECK(bytes[5] == 0);
    }
    SECTION("round trip") {
        const Waveform r = read_waveform_bin(dir / "w.pqwf");
        CHECK(r.sample_rate == w.sample_rate);
        CHECK(r.nominal_freq == w.nominal_freq);
        REQUIRE(r.samples.size() == w.samples.size());
        for (std::size_t i = 0; i < w.samples.size(); ++i)
            REQUIRE(r.samples[i] == w.samples[i]);
    }
    SECTION("bad magic") {
        std::string bytes = slurp(dir / "w.pqwf");
        bytes[0] = 'X';
        spew(dir / "m.pqwf", bytes);
        CHECK_THROWS_AS(read_waveform_bin(dir / "m.pqwf"), DataError);
    }
    SECTION("unsupported version") {
        std::string bytes = slurp(dir / "w.pqwf");
        bytes[4] = 2;
        spew(dir / "v.pqwf", bytes);
        CHECK_THROWS_AS(read_waveform_bin(dir / "v.pqwf"), DataError);
    }
    SECTION("truncated payload") {
        std::string bytes = slurp(dir / "w.pqwf");
        bytes.resize(bytes.size() - 8);
        spew(dir / "t.pqwf", bytes);
        CHECK_THROWS_AS(read_waveform_bin(dir / "t.pqwf"), DataError);
    }
    fs::remove_all(dir);
}

TEST_CASE("read_waveform dispatches on the extension", "[dataset_io]") {
    const fs::path dir = fresh_dir("disp");
    const Waveform w = awkward_wave();
    write_waveform_csv(dir / "w.csv", w);
    write_waveform_bin(dir / "w.pqwf", w);
    CHECK(read_waveform(dir / "w.csv").samples == w.samples);
    CHECK(read_waveform(dir / "w.pqwf").samples == w.samples);
    CHECK_THROWS_AS(read_waveform(dir / "w.wav"), ParameterError);
    fs::remove_all(dir);
}

TEST_CASE("disturbance spec JSON round trip", "[dataset_io]") {
    DatasetConfig cfg;
    cfg.per_class_count = 4;
    cfg.master_seed = 555;
    cfg.noise = NoisePolicy::fixed(40.0);

    SECTION("field-rich noisy spec survives exactly") {
        const DisturbanceSpec sp = draw_spec(cfg, ClassLabel::C7_TransientSag, 1);
        const DisturbanceSpec back = spec_from_json(spec_to_json(sp));
        CHECK(back.label == sp.label);
        CHECK(back.fundamental_amplitude == sp.fundamental_amplitude);
        CHECK(back.fundamental_freq == sp.fundamental_freq);
        CHECK(back.phase == sp.phase);
        CHECK(back.depth == sp.depth);
        CHECK(back.event_start == sp.event_start);
        CHECK(back.event_end == sp.event_end);
        CHECK(back.transient_freq == sp.transient_freq);
        CHECK(back.transient_damping == sp.transient_damping);
        CHECK(back.transient_amplitude == sp.transient_amplitude);
        CHECK(back.transient_start == sp.transient_start);
        CHECK(back.noise_snr_db == sp.noise_snr_db);
        CHECK(back.rng_seed == sp.rng_seed);
        CHECK(back.truth_t0 == sp.truth_t0);
        CHECK(back.truth_duration == sp.truth_duration);
        REQUIRE(back.harmonics.size() == sp.harmonics.size());
        // The synthesized waveforms must be identical too.
        CHECK(synthesize(back).samples == synthesize(sp).samples);
    }
    SECTION("clean spec stores a null SNR and restores the sentinel") {
        cfg.noise = NoisePolicy::none();
        const DisturbanceSpec sp = draw_spec(cfg, ClassLabel::C0_Harmonics, 0);
        const json j = spec_to_json(sp);
        CHECK(j.at("noise_snr_db").is_null());
        CHECK(spec_from_json(j).noise_snr_db == kNoNoise);
        REQUIRE(j.at("harmonics").size() == 3);
        CHECK(j.at("harmonics").at(0).at("order") == 3);
        CHECK(j.at("harmonics").at(1).at("order") == 5);
        CHECK(j.at("harmonics").at(2).at("order") == 7);
    }
    SECTION("malformed spec JSON raises DataError") {
        json j = spec_to_json(draw_spec(cfg, ClassLabel::C1_Sag, 0));
        j.erase("phase");
        CHECK_THROWS_AS(spec_from_json(j), DataError);
    }
}

TEST_CASE("dataset config JSON round trip across noise kinds", "[dataset_io]") {
    DatasetConfig cfg;
    cfg.per_class_count = 7;
    cfg.master_seed = 998877;
    cfg.harmonic_amp_3 = {0.10, 0.11};

    SECTION("none") {
        const json j = config_to_json(cfg);
        CHECK(j.at("noise").at("kind") == "none");
        REQUIRE(j.contains("harmonic_amp_3"));
        REQUIRE(j.contains("harmonic_amp_5"));
        REQUIRE(j.contains("harmonic_amp_7"));
        const DatasetConfig back = config_from_json(j);
        CHECK(back.per_class_count == cfg.per_class_count);
        CHECK(back.master_seed == cfg.master_seed);
        CHECK(back.harmonic_amp_3.lo == cfg.harmonic_amp_3.lo);
        CHECK(back.harmonic_amp_3.hi == cfg.harmonic_amp_3.hi);
        CHECK(back.noise.kind == NoisePolicy::Kind::None);
        CHECK(config_digest(back) == config_digest(cfg));
    }
    SECTION("fixed") {
        cfg.noise = NoisePolicy::fixed(37.5);
        const DatasetConfig back = config_from_json(config_to_json(cfg));
        CHECK(back.noise.kind == NoisePolicy::Kind::Fixed);
        CHECK(back.noise.fixed_snr_db == 37.5);
    }
    SECTION("mixed") {
        cfg.noise = NoisePolicy::mixed({30.0, 45.0}, 0.75);
        const DatasetConfig back = config_from_json(config_to_json(cfg));
        CHECK(back.noise.kind == NoisePolicy::Kind::Mixed);
        CHECK(back.noise.mixed_snr_db.lo == 30.0);
        CHECK(back.noise.mixed_snr_db.hi == 45.0);
        CHECK(back.noise.mixed_noisy_fraction == 0.75);
    }
    SECTION("unknown noise kind rejected") {
        json j = config_to_json(cfg);
        j["noise"]["kind"] = "pink";
        CHECK_THROWS_AS(config_from_json(j), DataError);
    }
}

TEST_CASE("config digest tracks content", "[dataset_io]") {
    DatasetConfig a;
    DatasetConfig b;
    CHECK(config_digest(a) == config_digest(b));
    CHECK(config_digest(a).size() == 16);
    b.per_class_count = a.per_class_count + 1;
    CHECK(config_digest(a) != config_digest(b));
    DatasetConfig c;
    c.noise = NoisePolicy::fixed(40.0);
    CHECK(config_digest(a) != config_digest(c));
}

TEST_CASE("dataset directory save/load round trip", "[dataset_io]") {
    DatasetConfig cfg;
    cfg.per_class_count = 2;
    cfg.master_seed = 321;
    cfg.noise = NoisePolicy::mixed({34.0, 50.0}, 0.5);
    const LabeledDataset ds = make_dataset(cfg);
    REQUIRE(ds.entries.size() == 2 * kNumClasses);

    for (const bool binary : {false, true}) {
        const fs::path dir = fresh_dir(binary ? "ds_bin" : "ds_csv");
        save_dataset(dir, ds, binary);

        // File naming: C<code>_<index>.<ext>, zero-padded to four digits.
        const char* ext = binary ? "pqwf" : "csv";
        CHECK(fs::exists(dir / (std::string("C0_0000.") + ext)));
        CHECK(fs::exists(dir / (std::string("C9_0001.") + ext)));
        CHECK(fs::exists(dir / "manifest.json"));

        const LabeledDataset back = load_dataset(dir);
        REQUIRE(back.entries.size() == ds.entries.size());
        CHECK(config_digest(back.config) == config_digest(ds.config));
        for (std::size_t i = 0; i < ds.entries.size(); ++i) {
            CHECK(back.entries[i].label == ds.entries[i].label);
            REQUIRE(back.entries[i].wave.samples == ds.entries[i].wave.samples);
            CHECK(spec_to_json(back.entries[i].spec).dump() ==
                  spec_to_json(ds.entries[i].spec).dump());
        }
        fs::remove_all(dir);
    }
}

TEST_CASE("manifest is byte-identical across saves of the same dataset", "[dataset_io]") {
    DatasetConfig cfg;
    cfg.per_class_count = 1;
    cfg.master_seed = 13;
    const LabeledDataset ds = make_dataset(cfg);
    const fs::path a = fresh_dir("rep_a");
    const fs::path b = fresh_dir("rep_b");
    save_dataset(a, ds);
    save_dataset(b, ds);
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    CHECK(slurp(a / "C4_0000.csv") == slurp(b / "C4_0000.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("dataset loading guards", "[dataset_io]") {
    DatasetConfig cfg;
    cfg.per_class_count = 1;
    cfg.master_seed = 77;
    const LabeledDataset ds = make_dataset(cfg);

    SECTION("missing manifest") {
        const fs::path dir = fresh_dir("nomanifest");
        CHECK_THROWS_AS(load_dataset(dir), IoError);
        fs::remove_all(dir);
    }
    SECTION("malformed manifest JSON") {
        const fs::path dir = fresh_dir("badjson");
        spew(dir / "manifest.json", "{ nope");
        CHECK_THROWS_AS(load_dataset(dir), DataError);
        fs::remove_all(dir);
    }
    SECTION("wrong format tag") {
        const fs::path dir = fresh_dir("badfmt");
        save_dataset(dir, ds);
        json m = json::parse(slurp(dir / "manifest.json"));
        m["format"] = "other";
        spew(dir / "manifest.json", m.dump(2));
        CHECK_THROWS_AS(load_dataset(dir), DataError);
        fs::remove_all(dir);
    }
    SECTION("label/spec tamper is caught") {
        const fs::path dir = fresh_dir("tamper");
        save_dataset(dir, ds);
        json m = json::parse(slurp(dir / "manifest.json"));
        m["entries"][0]["label"] = 5;  // spec still says class 0
        spew(dir / "manifest.json", m.dump(2));
        CHECK_THROWS_AS(load_dataset(dir), DataError);
        fs::remove_all(dir);
    }
    SECTION("missing waveform file") {
        const fs::path dir = fresh_dir("missingwave");
        save_dataset(dir, ds);
        fs::remove(dir / "C3_0000.csv");
        CHECK_THROWS_AS(load_dataset(dir), IoError);
        fs::remove_all(dir);
    }
}
