// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pqgdr/core.hpp"
#include "pqgdr/indices.hpp"
#include "pqgdr/rng.hpp"
#include "pqgdr/siggen.hpp"
#include "pqgdr/svm.hpp"

namespace pqgdr {

// ---------------------------------------------------------------------------
// Deterministic parallel map
// ---------------------------------------------------------------------------

/// Worker count: PQGDR_THREADS if set (>= 1), else hardware concurrency.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("PQGDR_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            return static_cast<unsigned>(std::min<long>(v, 1024));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Run fn(0..n-1) across the thread budget.  Each index owns its output slot,
/// so results are in input order regardless of scheduling; the first exception
/// is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t want = std::min<std::size_t>(thread_budget(), n);
    if (want <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(want);
    for (std::size_t t = 0; t < want; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Feature extraction
// ---------------------------------------------------------------------------

struct FeatureFailure {
    std::size_t index = 0;
    std::string message;
};

/// Extraction result.  `features` and `labels` keep the dataset order and
/// size; a failed item leaves NaNs in its feature slot and an entry in
/// `failures` (ascending index) instead of aborting the batch.
struct FeatureSet {
    std::vector<Feature> features;
    std::vector<ClassLabel> labels;
    std::vector<FeatureFailure> failures;

    bool ok(std::size_t i) const {
        return std::isfinite(features[i][0]) && std::isfinite(features[i][1]);
    }
};

inline FeatureSet extract_features(const LabeledDataset& ds) {
    if (ds.entries.empty()) throw DataError("cannot extract features from an empty dataset");
    const std::size_t n = ds.entries.size();
    FeatureSet out;
    out.features.assign(n, {std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN()});
    out.labels.resize(n);
    std::vector<std::string> errors(n);
    parallel_for(n, [&](std::size_t i) {
        out.labels[i] = ds.entries[i].label;
        try {
            out.features[i] = feature_vector(ds.entries[i].wave);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty()) out.failures.push_back({i, errors[i]});
    return out;
}

// ---------------------------------------------------------------------------
// Confusion matrix
// ---------------------------------------------------------------------------

/// 10x10 count table; row = true class, column = predicted class.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

    void add(ClassLabel truth, ClassLabel predicted) {
        ++counts[static_cast<std::size_t>(class_code(truth))]
                [static_cast<std::size_t>(class_code(predicted))];
    }

    std::size_t row_total(int c) const {
        std::size_t s = 0;
        for (std::size_t v : counts[static_cast<std::size_t>(c)]) s += v;
        return s;
    }

    std::size_t total() const {
        std::size_t s = 0;
        for (int c = 0; c < kNumClasses; ++c) s += row_total(c);
        return s;
    }

    std::size_t diagonal() const {
        std::size_t s = 0;
        for (int c = 0; c < kNumClasses; ++c)
            s += counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        return s;
    }

    /// Per-class accuracy in percent; NaN when the class has no test items.
    double class_accuracy(int c) const {
        const std::size_t n = row_total(c);
        if (n == 0) return std::numeric_limits<double>::quiet_NaN();
        const auto d = counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        return 100.0 * static_cast<double>(d) / static_cast<double>(n);
    }

    double overall_accuracy() const {
        const std::size_t n = total();
        if (n == 0) return std::numeric_limits<double>::quiet_NaN();
        return 100.0 * static_cast<double>(diagonal()) / static_cast<double>(n);
    }

    bool operator==(const ConfusionMatrix& o) const { return counts == o.counts; }

    /// CSV: one row per true class with the ten predicted-class counts plus
    /// total and accuracy columns, then an `overall` row.
    std::string to_csv() const {
        std::string s = "class";
        for (int c = 0; c < kNumClasses; ++c) s += ",C" + std::to_string(c);
        s += ",total,accuracy_percent\n";
        char buf[64];
        for (int r = 0; r < kNumClasses; ++r) {
            s += "C" + std::to_string(r);
            for (int c = 0; c < kNumClasses; ++c)
                s += "," + std::to_string(counts[static_cast<std::size_t>(r)]
                                                [static_cast<std::size_t>(c)]);
            std::snprintf(buf, sizeof buf, ",%zu,%.4f", row_total(r), class_accuracy(r));
            s += buf;
            s += '\n';
        }
        s += "overall";
        for (int c = 0; c < kNumClasses; ++c) s += ",";
        std::snprintf(buf, sizeof buf, ",%zu,%.4f", total(), overall_accuracy());
        s += buf;
        s += '\n';
        return s;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["counts"] = nlohmann::ordered_json::array();
        for (int r = 0; r < kNumClasses; ++r)
            j["counts"].push_back(counts[static_cast<std::size_t>(r)]);
        nlohmann::ordered_json acc = nlohmann::ordered_json::array();
        for (int c = 0; c < kNumClasses; ++c) acc.push_back(class_accuracy(c));
        j["class_accuracy_percent"] = std::move(acc);
        j["overall_accuracy_percent"] = overall_accuracy();
        j["total"] = total();
        return j;
    }
};

/// Off-diagonal cells aggregated symmetrically (count(a,b) + count(b,a)),
/// sorted by descending count then ascending pair; used to inspect the
/// dominant confusions.
inline std::vector<std::pair<std::pair<int, int>, std::size_t>> top_confusions(
    const ConfusionMatrix& m) {
    std::vector<std::pair<std::pair<int, int>, std::size_t>> cells;
    for (int a = 0; a < kNumClasses; ++a) {
        for (int b = a + 1; b < kNumClasses; ++b) {
            const std::size_t n = m.counts[static_cast<std::size_t>(a)]
                                          [static_cast<std::size_t>(b)] +
                                  m.counts[static_cast<std::size_t>(b)]
                                          [static_cast<std::size_t>(a)];
            if (n > 0) cells.push_back({{a, b}, n});
        }
    }
    std::sort(cells.begin(), cells.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    return cells;
}

// ---------------------------------------------------------------------------
// Train / evaluate
// ---------------------------------------------------------------------------

inline std::string describe_failures(const std::vector<FeatureFailure>& fails) {
    std::string msg = std::to_string(fails.size()) + " item(s) failed feature extraction;"
                      " first: item " + std::to_string(fails.front().index) + ": " +
                      fails.front().message;
    return msg;
}

struct TrainResult {
    SvmModel model;
    double best_gamma = 0.0;
    double best_c = 0.0;
    double validation_accuracy = 0.0;  ///< percent, NaN when grid search skipped
    std::size_t items = 0;
};

/// Extract features from the training dataset and fit the OVO model; when
/// `grid` is set, hyperparameters come from the validation grid search,
/// otherwise `base` is used as-is.
inline TrainResult train_pipeline(const LabeledDataset& train, const SvmParams& base = {},
                                  bool grid = true) {
    const FeatureSet fs = extract_features(train);
    if (!fs.failures.empty()) throw DataError(describe_failures(fs.failures));
    TrainResult r;
    r.items = fs.features.size();
    if (grid) {
        GridSearchResult g = grid_search_svm(fs.features, fs.labels,
                                             {0.1, 0.5, 1.0, 2.0, 5.0}, {1.0, 10.0, 100.0},
                                             base);
        r.model = std::move(g.model);
        r.best_gamma = g.best_gamma;
        r.best_c = g.best_c;
        r.validation_accuracy = g.validation_accuracy;
    } else {
        r.model = train_svm(fs.features, fs.labels, base);
        r.best_gamma = base.gamma;
        r.best_c = base.C;
        r.validation_accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

/// Predict every test item and tabulate; every item appears exactly once.
inline ConfusionMatrix evaluate(const SvmModel& model, const LabeledDataset& test) {
    if (test.entries.empty()) throw DataError("empty test set");
    if (model.num_classes != kNumClasses)
        throw ConfigError("model covers " + std::to_string(model.num_classes) +
                          " classes, test set uses " + std::to_string(kNumClasses));
    const FeatureSet fs = extract_features(test);
    if (!fs.failures.empty()) throw DataError(describe_failures(fs.failures));
    std::vector<ClassLabel> pred(fs.features.size());
    parallel_for(fs.features.size(),
                 [&](std::size_t i) { pred[i] = model.predict(fs.features[i]); });
    ConfusionMatrix m;
    for (std::size_t i = 0; i < pred.size(); ++i) m.add(fs.labels[i], pred[i]);
    return m;
}

// ---------------------------------------------------------------------------
// Noise sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double snr_db = 0.0;
    double overall_accuracy = 0.0;                  ///< percent
    std::array<double, kNumClasses> class_accuracy{};  ///< percent
    ConfusionMatrix matrix;
};

struct NoiseSweepResult {
    std::vector<SweepRow> rows;
    std::uint64_t sweep_seed = 0;

    /// CSV suitable for plotting: snr_db, overall, then one column per class.
    std::string to_csv() const {
        std::string s = "snr_db,overall_accuracy";
        for (int c = 0; c < kNumClasses; ++c) s += ",C" + std::to_string(c);
        s += '\n';
        char buf[64];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%.6g,%.4f", r.snr_db, r.overall_accuracy);
            s += buf;
            for (int c = 0; c < kNumClasses; ++c) {
                std::snprintf(buf, sizeof buf, ",%.4f",
                              r.class_accuracy[static_cast<std::size_t>(c)]);
                s += buf;
            }
            s += '\n';
        }
        return s;
    }
};

/// Re-run the test set at each SNR level.  Each item is re-synthesised clean
/// from its stored spec, then noised at the level's SNR with a fresh seed
/// derive_seed(sweep_seed, level_index, item_index) — the same underlying
/// events across all levels, independent noise draws per level.
inline NoiseSweepResult noise_sweep(const SvmModel& model, const LabeledDataset& base_test,
                                    const std::vector<double>& snrs,
                                    std::uint64_t sweep_seed) {
    if (snrs.empty()) throw ParameterError("noise sweep needs at least one SNR level");
    for (std::size_t i = 1; i < snrs.size(); ++i)
        if (!(snrs[i] > snrs[i - 1]))
            throw ParameterError("sweep SNR levels must be strictly increasing");
    if (base_test.entries.empty()) throw DataError("empty test set");
    if (model.num_classes != kNumClasses)
        throw ConfigError("model covers " + std::to_string(model.num_classes) +
                          " classes, test set uses " + std::to_string(kNumClasses));

    const std::size_t n = base_test.entries.size();
    // Clean re-synthesis once; noise is re-drawn per level.
    std::vector<Waveform> clean(n);
    parallel_for(n, [&](std::size_t i) {
        DisturbanceSpec sp = base_test.entries[i].spec;
        sp.noise_snr_db = kNoNoise;
        clean[i] = synthesize(sp);
    });

    NoiseSweepResult out;
    out.sweep_seed = sweep_seed;
    out.rows.reserve(snrs.size());
    for (std::size_t level = 0; level < snrs.size(); ++level) {
        std::vector<ClassLabel> pred(n);
        std::vector<std::string> errors(n);
        parallel_for(n, [&](std::size_t i) {
            try {
                const Waveform noisy = add_noise(
                    clean[i], snrs[level],
                    derive_seed(sweep_seed, static_cast<std::uint64_t>(level),
                                static_cast<std::uint64_t>(i)));
                pred[i] = model.predict(feature_vector(noisy));
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        });
        SweepRow row;
        row.snr_db = snrs[level];
        for (std::size_t i = 0; i < n; ++i) {
            if (!errors[i].empty())
                throw DataError("sweep level " + std::to_string(snrs[level]) + " dB, item " +
                                std::to_string(i) + ": " + errors[i]);
            row.matrix.add(base_test.entries[i].label, pred[i]);
        }
        row.overall_accuracy = row.matrix.overall_accuracy();
        for (int c = 0; c < kNumClasses; ++c)
            row.class_accuracy[static_cast<std::size_t>(c)] = row.matrix.class_accuracy(c);
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reference experiment configuration
// ---------------------------------------------------------------------------

/// Dataset recipe for the headline confusion-matrix experiment: 100 items per
/// class, half clean and half noised at SNR drawn uniformly from [34, 50] dB.
/// Train and test sets use the same recipe with different master seeds
/// (disjoint parameter draws).
inline DatasetConfig reference_config(std::uint64_t master_seed,
                                      std::size_t per_class = 100) {
    DatasetConfig cfg;
    cfg.per_class_count = per_class;
    cfg.master_seed = master_seed;
    cfg.noise = NoisePolicy::mixed({34.0, 50.0}, 0.5);
    return cfg;
}

/// Clean-only variant of the same recipe.
inline DatasetConfig reference_config_clean(std::uint64_t master_seed,
                                            std::size_t per_class = 100) {
    DatasetConfig cfg = reference_config(master_seed, per_class);
    cfg.noise = NoisePolicy::none();
    return cfg;
}

}  // namespace pqgdr
