// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

// pqgdr — command-line surface for the library: synthesize labelled
// disturbance datasets, compute the wavelet indices for waveform files,
// train/evaluate the one-vs-one SVM, and run noise sweeps.
//
// Exit codes: 0 success, 1 data/processing failure, 2 usage/configuration
// error.  Every command writes a run.json under --out echoing its fully
// resolved configuration; re-running from that echo reproduces the outputs.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pqgdr/pqgdr.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw pqgdr::IoError("cannot write " + path.string());
    os << j.dump(2) << '\n';
    if (!os) throw pqgdr::IoError("short write on " + path.string());
}

fs::path prepare_out_dir(const std::string& out) {
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw pqgdr::IoError("cannot create output directory " + dir.string() +
                                 ": " + ec.message());
    return dir;
}

void require_exists(const fs::path& p, const char* what) {
    if (!fs::exists(p))
        throw pqgdr::ConfigError(std::string(what) + " not found: " + p.string());
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::size_t per_class = 100;
    std::uint64_t seed = 0;
    std::string out;
    bool binary = false;
    std::string noise = "mixed";  // clean | fixed | mixed
    double snr = 40.0;
    double snr_lo = 34.0;
    double snr_hi = 50.0;
    double noisy_fraction = 0.5;
};

int cmd_generate(const GenerateArgs& a) {
    if (a.per_class == 0) throw pqgdr::ParameterError("--per-class must be positive");

    pqgdr::DatasetConfig cfg;
    cfg.per_class_count = a.per_class;
    cfg.master_seed = a.seed;
    if (a.noise == "clean")
        cfg.noise = pqgdr::NoisePolicy::none();
    else if (a.noise == "fixed")
        cfg.noise = pqgdr::NoisePolicy::fixed(a.snr);
    else if (a.noise == "mixed")
        cfg.noise = pqgdr::NoisePolicy::mixed({a.snr_lo, a.snr_hi}, a.noisy_fraction);
    else
        throw pqgdr::ParameterError("--noise must be clean, fixed or mixed (got '" +
                                    a.noise + "')");

    const pqgdr::LabeledDataset ds = pqgdr::make_dataset(cfg);
    const fs::path dir = prepare_out_dir(a.out);
    pqgdr::save_dataset(dir, ds, a.binary);

    json run{{"command", "generate"},
             {"version", pqgdr::kVersion},
             {"out", a.out},
             {"binary", a.binary},
             {"config", pqgdr::config_to_json(cfg)}};
    write_json_file(dir / "run.json", run);

    std::array<std::size_t, pqgdr::kNumClasses> counts{};
    for (const auto& e : ds.entries) ++counts[static_cast<std::size_t>(class_code(e.label))];
    for (int c = 0; c < pqgdr::kNumClasses; ++c)
        std::printf("C%d: %zu\n", c, counts[static_cast<std::size_t>(c)]);
    std::printf("total: %zu windows -> %s\n", ds.entries.size(), dir.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::string out;
    bool dump_itd = false;
};

json report_to_json(const std::string& file, const pqgdr::AnalysisReport& r) {
    json bands = json::array();
    for (double d : r.bands.detail) bands.push_back(d);
    return json{{"file", file},
                {"f_est_hz", r.f_est},
                {"f_fallback", r.f_fallback},
                {"k1_v", r.k1},
                {"k2_pct", r.k2},
                {"t0_s", r.t0},
                {"t0_duration_s", r.duration},
                {"mean_itd_pct", r.mean_itd},
                {"stationary", r.stationary},
                {"a6_rms_v", r.bands.approx},
                {"detail_rms_v", bands},
                {"s_rms_v", r.bands.total}};
}

int cmd_analyze(const AnalyzeArgs& a) {
    if (a.dump_itd && a.out.empty())
        throw pqgdr::ParameterError("--dump-itd needs --out to place the series files");

    fs::path dir;
    if (!a.out.empty()) dir = prepare_out_dir(a.out);

    json reports = json::array();
    std::size_t failures = 0;
    std::printf(
        "file,f_est_hz,fallback,k1_v,k2_pct,t0_s,t0_duration_s,mean_itd_pct,stationary\n");
    for (const std::string& in : a.inputs) {
        try {
            const pqgdr::Waveform w = pqgdr::read_waveform(in);
            std::vector<double> itd;
            const pqgdr::AnalysisReport r =
                pqgdr::analyze_window(w, a.dump_itd ? &itd : nullptr);
            std::printf("%s,%.6f,%d,%.4f,%.4f,%.6f,%.6f,%.4f,%d\n", in.c_str(), r.f_est,
                        r.f_fallback ? 1 : 0, r.k1, r.k2, r.t0, r.duration, r.mean_itd,
                        r.stationary ? 1 : 0);
            reports.push_back(report_to_json(in, r));
            if (a.dump_itd) {
                const fs::path series = dir / (fs::path(in).stem().string() + ".itd.csv");
                std::ofstream os(series, std::ios::binary);
                if (!os) throw pqgdr::IoError("cannot write " + series.string());
                os << "index,itd_pct\n";
                char buf[64];
                for (std::size_t i = 0; i < itd.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i, itd[i]);
                    os << buf;
                }
            }
        } catch (const pqgdr::Error& e) {
            ++failures;
            std::fprintf(stderr, "error: %s: %s\n", in.c_str(), e.what());
        }
    }

    if (!a.out.empty()) {
        write_json_file(dir / "report.json", reports);
        json run{{"command", "analyze"},
                 {"version", pqgdr::kVersion},
                 {"out", a.out},
                 {"dump_itd", a.dump_itd},
                 {"inputs", a.inputs}};
        write_json_file(dir / "run.json", run);
    }
    return failures == a.inputs.size() ? 1 : 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string dataset;
    std::string out;
    bool no_grid = false;
    double gamma = 1.0;
    double c = 10.0;
    bool gamma_set = false;
    bool c_set = false;
};

int cmd_train(const TrainArgs& a) {
    require_exists(a.dataset, "dataset directory");
    require_exists(fs::path(a.dataset) / "manifest.json", "dataset manifest");
    if (a.no_grid && !(a.gamma_set && a.c_set))
        throw pqgdr::ParameterError("--no-grid requires explicit --gamma and --c");

    const pqgdr::LabeledDataset ds = pqgdr::load_dataset(a.dataset);
    pqgdr::SvmParams base;
    base.gamma = a.gamma;
    base.C = a.c;
    const pqgdr::TrainResult tr = pqgdr::train_pipeline(ds, base, !a.no_grid);

    const fs::path dir = prepare_out_dir(a.out);
    pqgdr::save_model(dir / "model.json", tr.model);

    json run{{"command", "train"},
             {"version", pqgdr::kVersion},
             {"dataset", a.dataset},
             {"dataset_digest", pqgdr::config_digest(ds.config)},
             {"out", a.out},
             {"grid", !a.no_grid},
             {"gamma", tr.model.params.gamma},
             {"c", tr.model.params.C}};
    write_json_file(dir / "run.json", run);

    std::printf("trained on %zu windows\n", tr.items);
    if (a.no_grid)
        std::printf("fixed hyperparameters: gamma=%g C=%g\n", tr.model.params.gamma,
                    tr.model.params.C);
    else
        std::printf("grid pick: gamma=%g C=%g (validation %.2f%%)\n", tr.model.params.gamma,
                    tr.model.params.C, tr.validation_accuracy);
    std::printf("model -> %s\n", (dir / "model.json").string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string dataset;
    std::string model;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
    require_exists(a.model, "model file");
    require_exists(a.dataset, "dataset directory");
    require_exists(fs::path(a.dataset) / "manifest.json", "dataset manifest");

    const pqgdr::SvmModel model = pqgdr::load_model(a.model);
    const pqgdr::LabeledDataset ds = pqgdr::load_dataset(a.dataset);
    const pqgdr::ConfusionMatrix cm = pqgdr::evaluate(model, ds);

    const fs::path dir = prepare_out_dir(a.out);
    {
        std::ofstream os(dir / "confusion.csv", std::ios::binary);
        if (!os) throw pqgdr::IoError("cannot write " + (dir / "confusion.csv").string());
        os << cm.to_csv();
    }
    json cls = json::array();
    for (int c = 0; c < pqgdr::kNumClasses; ++c) cls.push_back(cm.class_accuracy(c));
    json metrics{{"items", cm.total()},
                 {"overall_accuracy_pct", cm.overall_accuracy()},
                 {"class_accuracy_pct", cls},
                 {"gamma", model.params.gamma},
                 {"c", model.params.C}};
    write_json_file(dir / "metrics.json", metrics);
    json run{{"command", "evaluate"},
             {"version", pqgdr::kVersion},
             {"dataset", a.dataset},
             {"dataset_digest", pqgdr::config_digest(ds.config)},
             {"model", a.model},
             {"out", a.out}};
    write_json_file(dir / "run.json", run);

    std::fputs(cm.to_csv().c_str(), stdout);
    std::printf("overall accuracy: %.2f%% on %zu windows\n", cm.overall_accuracy(),
                cm.total());
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string dataset;
    std::string model;
    std::string out;
    std::vector<double> snr;  // explicit list wins over the start/stop/step trio
    double start = 30.0, stop = 50.0, step = 2.0;
    bool trio_set = false;
    std::uint64_t sweep_seed = 1000;
};

int cmd_sweep(const SweepArgs& a) {
    require_exists(a.model, "model file");
    require_exists(a.dataset, "dataset directory");
    require_exists(fs::path(a.dataset) / "manifest.json", "dataset manifest");
    if (!a.snr.empty() && a.trio_set)
        throw pqgdr::ParameterError("give either --snr or --snr-start/stop/step, not both");

    std::vector<double> snrs = a.snr;
    if (snrs.empty()) {
        if (!(a.step > 0.0)) throw pqgdr::ParameterError("--snr-step must be > 0");
        if (a.start > a.stop)
            throw pqgdr::ParameterError("--snr-start must not exceed --snr-stop");
        for (double s = a.start; s <= a.stop + 1e-9; s += a.step) snrs.push_back(s);
    }

    const pqgdr::SvmModel model = pqgdr::load_model(a.model);
    const pqgdr::LabeledDataset ds = pqgdr::load_dataset(a.dataset);
    const pqgdr::NoiseSweepResult sw = pqgdr::noise_sweep(model, ds, snrs, a.sweep_seed);

    const fs::path dir = prepare_out_dir(a.out);
    {
        std::ofstream os(dir / "sweep.csv", std::ios::binary);
        if (!os) throw pqgdr::IoError("cannot write " + (dir / "sweep.csv").string());
        os << sw.to_csv();
    }
    json run{{"command", "sweep"},
             {"version", pqgdr::kVersion},
             {"dataset", a.dataset},
             {"dataset_digest", pqgdr::config_digest(ds.config)},
             {"model", a.model},
             {"out", a.out},
             {"snr_db", snrs},
             {"sweep_seed", a.sweep_seed}};
    write_json_file(dir / "run.json", run);

    std::fputs(sw.to_csv().c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pqgdr: power-quality disturbance synthesis, wavelet indices and "
                 "SVM classification"};
    app.require_subcommand(1);

    GenerateArgs g;
    CLI::App* gen = app.add_subcommand("generate", "synthesize a labelled dataset");
    gen->add_option("--per-class", g.per_class, "windows per class (10 classes)")
        ->capture_default_str();
    gen->add_option("--seed", g.seed, "master seed")->capture_default_str();
    gen->add_option("--out", g.out, "output dataset directory")->required();
    gen->add_flag("--binary", g.binary, "write .pqwf float64 payloads instead of CSV");
    gen->add_option("--noise", g.noise, "noise policy: clean, fixed or mixed")
        ->capture_default_str();
    gen->add_option("--snr", g.snr, "SNR in dB for --noise fixed")->capture_default_str();
    gen->add_option("--snr-lo", g.snr_lo, "mixed-policy lower SNR bound, dB")
        ->capture_default_str();
    gen->add_option("--snr-hi", g.snr_hi, "mixed-policy upper SNR bound, dB")
        ->capture_default_str();
    gen->add_option("--noisy-fraction", g.noisy_fraction,
                    "mixed-policy fraction of noisy windows")
        ->capture_default_str();

    AnalyzeArgs an;
    CLI::App* ana = app.add_subcommand("analyze", "compute indices for waveform files");
    ana->add_option("files", an.inputs, "waveform files (.csv or .pqwf)")->required();
    ana->add_option("--out", an.out, "directory for report.json / ITD dumps");
    ana->add_flag("--dump-itd", an.dump_itd, "write per-file ITD(n) series (needs --out)");

    TrainArgs t;
    CLI::App* tr = app.add_subcommand("train", "fit the one-vs-one SVM on a dataset");
    tr->add_option("--dataset", t.dataset, "training dataset directory")->required();
    tr->add_option("--out", t.out, "output directory for model.json")->required();
    tr->add_flag("--no-grid", t.no_grid, "skip grid search, use --gamma/--c as given");
    tr->add_option("--gamma", t.gamma, "RBF gamma (with --no-grid)")
        ->capture_default_str()
        ->trigger_on_parse()
        ->each([&t](const std::string&) { t.gamma_set = true; });
    tr->add_option("--c", t.c, "soft-margin C (with --no-grid)")
        ->capture_default_str()
        ->trigger_on_parse()
        ->each([&t](const std::string&) { t.c_set = true; });

    EvaluateArgs e;
    CLI::App* ev = app.add_subcommand("evaluate", "confusion matrix of a model on a dataset");
    ev->add_option("--dataset", e.dataset, "test dataset directory")->required();
    ev->add_option("--model", e.model, "model.json path")->required();
    ev->add_option("--out", e.out, "output directory")->required();

    SweepArgs s;
    CLI::App* sw = app.add_subcommand("sweep", "re-noise the test set across SNR levels");
    sw->add_option("--dataset", s.dataset, "test dataset directory")->required();
    sw->add_option("--model", s.model, "model.json path")->required();
    sw->add_option("--out", s.out, "output directory")->required();
    sw->add_option("--snr", s.snr, "explicit SNR levels, dB (comma separated)")
        ->delimiter(',');
    sw->add_option("--snr-start", s.start, "sweep start, dB")
        ->capture_default_str()
        ->each([&s](const std::string&) { s.trio_set = true; });
    sw->add_option("--snr-stop", s.stop, "sweep stop, dB")
        ->capture_default_str()
        ->each([&s](const std::string&) { s.trio_set = true; });
    sw->add_option("--snr-step", s.step, "sweep step, dB")
        ->capture_default_str()
        ->each([&s](const std::string&) { s.trio_set = true; });
    sw->add_option("--sweep-seed", s.sweep_seed, "seed for the per-level noise draws")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForVersion& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;
    }

    try {
        if (app.got_subcommand(gen)) return cmd_generate(g);
        if (app.got_subcommand(ana)) return cmd_analyze(an);
        if (app.got_subcommand(tr)) return cmd_train(t);
        if (app.got_subcommand(ev)) return cmd_evaluate(e);
        if (app.got_subcommand(sw)) return cmd_sweep(s);
        std::fprintf(stderr, "error: no command selected\n");
        return 2;
    } catch (const pqgdr::ParameterError& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 2;
    } catch (const pqgdr::Error& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
}
