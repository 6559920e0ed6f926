// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pqgdr/core.hpp"

namespace pqgdr {

using Feature = std::array<double, 2>;  ///< (k1 volts, k2 percent)

// ---------------------------------------------------------------------------
// Feature standardisation
// ---------------------------------------------------------------------------

/// Per-dimension standardisation fit on training data.  Mandatory before the
/// RBF kernel: k1 (~1e2 volts) would otherwise dominate k2 (~1e0 percent) in
/// every distance.
struct FeatureScaler {
    Feature mean{0.0, 0.0};
    Feature std{1.0, 1.0};

    void fit(const std::vector<Feature>& xs) {
        if (xs.empty()) throw DataError("cannot fit scaler on empty feature set");
        for (std::size_t d = 0; d < 2; ++d) {
            double m = 0.0;
            for (const auto& x : xs) m += x[d];
            m /= static_cast<double>(xs.size());
            double v = 0.0;
            for (const auto& x : xs) v += (x[d] - m) * (x[d] - m);
            v /= static_cast<double>(xs.size());
            mean[d] = m;
            std[d] = std::sqrt(v);
            if (!(std[d] > 1e-12)) std[d] = 1.0;  // degenerate dimension: pass through
        }
    }

    Feature transform(const Feature& x) const {
        return {(x[0] - mean[0]) / std[0], (x[1] - mean[1]) / std[1]};
    }

    Feature inverse(const Feature& z) const {
        return {z[0] * std[0] + mean[0], z[1] * std[1] + mean[1]};
    }
};

// ---------------------------------------------------------------------------
// Kernels and hyperparameters
// ---------------------------------------------------------------------------

struct SvmParams {
    double C = 10.0;       ///< soft-margin box constraint
    double gamma = 1.0;    ///< RBF width (ignored for linear)
    bool linear = false;   ///< kernel switch: RBF (default) or linear
    double tol = 1e-3;     ///< KKT violation tolerance
    int max_passes = 50;   ///< consecutive violation-free sweeps to stop
};

inline double kernel(const Feature& a, const Feature& b, const SvmParams& p) {
    if (p.linear) return a[0] * b[0] + a[1] * b[1];
    const double d0 = a[0] - b[0], d1 = a[1] - b[1];
    return std::exp(-p.gamma * (d0 * d0 + d1 * d1));
}

// ---------------------------------------------------------------------------
// Binary soft-margin machine, trained by sequential minimal optimisation
// ---------------------------------------------------------------------------

/// One pairwise machine.  Positive decision votes class_a, negative class_b.
struct BinarySvm {
    int class_a = 0;
    int class_b = 0;
    std::vector<Feature> sv;    ///< support vectors, scaled feature space
    std::vector<double> coef;   ///< alpha_i * y_i per support vector
    double bias = 0.0;

    double decision(const Feature& x, const SvmParams& p) const {
        double f = bias;
        for (std::size_t i = 0; i < sv.size(); ++i) f += coef[i] * kernel(sv[i], x, p);
        return f;
    }
};

/// SMO on a two-class problem (y in {+1, -1}).  Deterministic: sweeps run in
/// index order; for each KKT violator the second multiplier is first chosen
/// by maximal |E1 - E2| (ties to the lowest index) and, if that pair cannot
/// move (clipped feasible interval, non-negative curvature, or a step below
/// the minimum), every remaining partner is tried in index order starting
/// just past the violator.  No randomness, so a fixed input order yields a
/// bit-identical machine, and a sweep with zero updates certifies that no
/// pair can make further progress.  Stops after `max_passes` consecutive
/// sweeps without an update (plus a generous hard cap as a safety net).
inline BinarySvm smo_train(const std::vector<Feature>& xs, const std::vector<int>& ys,
                           const SvmParams& p, int class_a, int class_b) {
    const std::size_t n = xs.size();
    if (n < 2) throw DataError("SMO needs at least two training points");

    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            k[i * n + j] = k[j * n + i] = kernel(xs[i], xs[j], p);

    std::vector<double> alpha(n, 0.0), f(n, 0.0);  // f = decision value per point
    double b = 0.0;

    // Attempt a joint step on the pair (i, j); true iff the alphas moved.
    const auto try_step = [&](std::size_t i, std::size_t j) -> bool {
        if (i == j) return false;
        const double ei = f[i] - static_cast<double>(ys[i]);
        const double ej = f[j] - static_cast<double>(ys[j]);

        const double ai_old = alpha[i], aj_old = alpha[j];
        double lo, hi;
        if (ys[i] != ys[j]) {
            lo = std::max(0.0, aj_old - ai_old);
            hi = std::min(p.C, p.C + aj_old - ai_old);
        } else {
            lo = std::max(0.0, ai_old + aj_old - p.C);
            hi = std::min(p.C, ai_old + aj_old);
        }
        if (lo >= hi) return false;
        const double eta = 2.0 * k[i * n + j] - k[i * n + i] - k[j * n + j];
        if (eta >= 0.0) return false;

        double aj = aj_old - static_cast<double>(ys[j]) * (ei - ej) / eta;
        aj = std::clamp(aj, lo, hi);
        if (std::abs(aj - aj_old) < 1e-5 * (aj + aj_old + 1e-5)) return false;
        const double ai = ai_old + static_cast<double>(ys[i] * ys[j]) * (aj_old - aj);

        const double di = static_cast<double>(ys[i]) * (ai - ai_old);
        const double dj = static_cast<double>(ys[j]) * (aj - aj_old);
        const double b1 = b - ei - di * k[i * n + i] - dj * k[i * n + j];
        const double b2 = b - ej - di * k[i * n + j] - dj * k[j * n + j];
        double b_new;
        if (ai > 0.0 && ai < p.C)
            b_new = b1;
        else if (aj > 0.0 && aj < p.C)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        const double db = b_new - b;
        for (std::size_t m = 0; m < n; ++m)
            f[m] += di * k[i * n + m] + dj * k[j * n + m] + db;
        alpha[i] = ai;
        alpha[j] = aj;
        b = b_new;
        return true;
    };

    int quiet_sweeps = 0;
    long hard_cap = 200000;

    while (quiet_sweeps < p.max_passes && hard_cap-- > 0) {
        int changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ei = f[i] - static_cast<double>(ys[i]);
            const double r = ei * static_cast<double>(ys[i]);
            if (!((r < -p.tol && alpha[i] < p.C) || (r > p.tol && alpha[i] > 0.0))) continue;

            // Second choice: maximise |ei - ej|, with an exhaustive fallback
            // so a blocked best-gap partner cannot stall the violator.
            std::size_t j = n;
            double best = -1.0;
            for (std::size_t cand = 0; cand < n; ++cand) {
                if (cand == i) continue;
                const double gap = std::abs(ei - (f[cand] - static_cast<double>(ys[cand])));
                if (gap > best) {
                    best = gap;
                    j = cand;
                }
            }
            bool moved = (j < n) && try_step(i, j);
            for (std::size_t off = 1; !moved && off < n; ++off) {
                const std::size_t cand = (i + off) % n;
                if (cand != j) moved = try_step(i, cand);
            }
            if (moved) ++changed;
        }
        quiet_sweeps = (changed == 0) ? quiet_sweeps + 1 : 0;
    }

    BinarySvm m;
    m.class_a = class_a;
    m.class_b = class_b;
    m.bias = b;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 1e-12) {
            m.sv.push_back(xs[i]);
            m.coef.push_back(alpha[i] * static_cast<double>(ys[i]));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// One-vs-one multiclass model
// ---------------------------------------------------------------------------

struct SvmModel {
    SvmParams params;
    FeatureScaler scaler;
    int num_classes = kNumClasses;
    std::vector<BinarySvm> machines;  ///< k(k-1)/2, pairs (a, b) with a < b

    /// Vote of every machine; ties broken by the larger sum of |decision|
    /// accumulated by the votes for each tied class, then by lower code.
    ClassLabel predict(const Feature& raw) const {
        if (!std::isfinite(raw[0]) || !std::isfinite(raw[1]))
            throw DataError("non-finite feature vector");
        const Feature x = scaler.transform(raw);
        std::vector<int> votes(num_classes, 0);
        std::vector<double> margin(num_classes, 0.0);
        for (const auto& m : machines) {
            const double d = m.decision(x, params);
            const int winner = (d >= 0.0) ? m.class_a : m.class_b;
            ++votes[winner];
            margin[winner] += std::abs(d);
        }
        int best = 0;
        for (int c = 1; c < num_classes; ++c) {
            if (votes[c] > votes[best] ||
                (votes[c] == votes[best] && margin[c] > margin[best]))
                best = c;
        }
        return class_from_code(best);
    }
};

/// Train the 45-machine one-vs-one model.  Features are standardised first;
/// every class must be represented.
inline SvmModel train_svm(const std::vector<Feature>& features,
                          const std::vector<ClassLabel>& labels, const SvmParams& params) {
    if (features.size() != labels.size() || features.empty())
        throw DataError("features/labels size mismatch or empty training set");
    for (const auto& x : features)
        if (!std::isfinite(x[0]) || !std::isfinite(x[1]))
            throw DataError("non-finite feature in training set");
    std::vector<std::size_t> count(kNumClasses, 0);
    for (ClassLabel l : labels) ++count[class_code(l)];
    for (int c = 0; c < kNumClasses; ++c)
        if (count[c] == 0)
            throw DataError("class " + to_string(class_from_code(c)) +
                            " has no training examples");

    SvmModel model;
    model.params = params;
    model.scaler.fit(features);
    std::vector<Feature> scaled(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
        scaled[i] = model.scaler.transform(features[i]);

    for (int a = 0; a < kNumClasses; ++a) {
        for (int b = a + 1; b < kNumClasses; ++b) {
            std::vector<Feature> xs;
            std::vector<int> ys;
            for (std::size_t i = 0; i < scaled.size(); ++i) {
                const int c = class_code(labels[i]);
                if (c == a) {
                    xs.push_back(scaled[i]);
                    ys.push_back(+1);
                } else if (c == b) {
                    xs.push_back(scaled[i]);
                    ys.push_back(-1);
                }
            }
            model.machines.push_back(smo_train(xs, ys, params, a, b));
        }
    }
    return model;
}

/// Hyperparameter grid search: hold out every fourth item of each class as a
/// validation split, train on the rest for each (gamma, C), pick the highest
/// validation accuracy (ties prefer smaller C, then smaller gamma), and refit
/// on the full training set with the winner.
struct GridSearchResult {
    SvmModel model;
    double best_gamma = 0.0;
    double best_c = 0.0;
    double validation_accuracy = 0.0;  ///< percent
};

inline GridSearchResult grid_search_svm(
    const std::vector<Feature>& features, const std::vector<ClassLabel>& labels,
    const std::vector<double>& gammas = {0.1, 0.5, 1.0, 2.0, 5.0},
    const std::vector<double>& cs = {1.0, 10.0, 100.0}, SvmParams base = {}) {
    if (gammas.empty() || cs.empty()) throw ParameterError("empty hyperparameter grid");
    if (features.size() != labels.size() || features.empty())
        throw DataError("features/labels size mismatch or empty training set");

    std::vector<Feature> train_x, val_x;
    std::vector<ClassLabel> train_y;
    std::vector<ClassLabel> val_y;
    std::vector<std::size_t> seen(kNumClasses, 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const int c = class_code(labels[i]);
        if (seen[c]++ % 4 == 3) {
            val_x.push_back(features[i]);
            val_y.push_back(labels[i]);
        } else {
            train_x.push_back(features[i]);
            train_y.push_back(labels[i]);
        }
    }
    if (val_x.empty()) throw DataError("training set too small for a validation split");

    struct Cell {
        double val_acc;
        double gamma;
        double c;
    };
    std::vector<Cell> cells;
    for (double c : cs) {
        for (double g : gammas) {
            SvmParams p = base;
            p.gamma = g;
            p.C = c;
            const SvmModel m = train_svm(train_x, train_y, p);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < val_x.size(); ++i)
                if (m.predict(val_x[i]) == val_y[i]) ++hits;
            cells.push_back({100.0 * static_cast<double>(hits) /
                                 static_cast<double>(val_x.size()),
                             g, c});
        }
    }
    // Stable sort on the insertion order (C ascending outer, gamma ascending
    // inner) implements the tie-break: smaller C, then smaller gamma.
    std::stable_sort(cells.begin(), cells.end(),
                     [](const Cell& a, const Cell& b) { return a.val_acc > b.val_acc; });

    // A near-flat kernel (small gamma x tight clusters) leaves the SMO dual
    // so ill-conditioned that the refit on the full set can land on a
    // qualitatively different solution than the split fit that was
    // validated.  A refit that cannot reproduce the cell's validation
    // accuracy on its own training data signals such an unstable cell; fall
    // through to the next-best cell instead of shipping it.
    GridSearchResult fallback;
    double fallback_acc = -1.0;
    for (const Cell& cell : cells) {
        SvmParams p = base;
        p.gamma = cell.gamma;
        p.C = cell.c;
        GridSearchResult r;
        r.model = train_svm(features, labels, p);
        r.best_gamma = cell.gamma;
        r.best_c = cell.c;
        r.validation_accuracy = cell.val_acc;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < features.size(); ++i)
            if (r.model.predict(features[i]) == labels[i]) ++hits;
        const double train_acc =
            100.0 * static_cast<double>(hits) / static_cast<double>(features.size());
        if (train_acc + 5.0 >= cell.val_acc) return r;
        if (train_acc > fallback_acc) {
            fallback_acc = train_acc;
            fallback = std::move(r);
        }
    }
    return fallback;
}

// ---------------------------------------------------------------------------
// Model persistence (versioned JSON)
// ---------------------------------------------------------------------------

inline constexpr const char* kModelFormat = "pqgdr-svm";
inline constexpr int kModelVersion = 1;

inline nlohmann::ordered_json model_to_json(const SvmModel& m) {
    nlohmann::ordered_json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["params"] = {{"C", m.params.C},
                   {"gamma", m.params.gamma},
                   {"kernel", m.params.linear ? "linear" : "rbf"},
                   {"tol", m.params.tol},
                   {"max_passes", m.params.max_passes}};
    j["scaler"] = {{"mean", {m.scaler.mean[0], m.scaler.mean[1]}},
                   {"std", {m.scaler.std[0], m.scaler.std[1]}}};
    j["num_classes"] = m.num_classes;
    nlohmann::ordered_json machines = nlohmann::ordered_json::array();
    for (const auto& mach : m.machines) {
        nlohmann::ordered_json jm;
        jm["class_a"] = mach.class_a;
        jm["class_b"] = mach.class_b;
        jm["bias"] = mach.bias;
        nlohmann::ordered_json sv = nlohmann::ordered_json::array();
        for (const auto& v : mach.sv) sv.push_back({v[0], v[1]});
        jm["support_vectors"] = std::move(sv);
        jm["coefficients"] = mach.coef;
        machines.push_back(std::move(jm));
    }
    j["machines"] = std::move(machines);
    return j;
}

inline SvmModel model_from_json(const nlohmann::ordered_json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat)
            throw DataError("not a pqgdr SVM model file");
        if (j.at("version").get<int>() != kModelVersion)
            throw DataError("unsupported model version " +
                            std::to_string(j.at("version").get<int>()));
        SvmModel m;
        const auto& p = j.at("params");
        m.params.C = p.at("C").get<double>();
        m.params.gamma = p.at("gamma").get<double>();
        const std::string kern = p.at("kernel").get<std::string>();
        if (kern != "rbf" && kern != "linear")
            throw DataError("unknown kernel '" + kern + "' in model file");
        m.params.linear = (kern == "linear");
        m.params.tol = p.at("tol").get<double>();
        m.params.max_passes = p.at("max_passes").get<int>();
        const auto& s = j.at("scaler");
        m.scaler.mean = {s.at("mean").at(0).get<double>(), s.at("mean").at(1).get<double>()};
        m.scaler.std = {s.at("std").at(0).get<double>(), s.at("std").at(1).get<double>()};
        m.num_classes = j.at("num_classes").get<int>();
        for (const auto& jm : j.at("machines")) {
            BinarySvm mach;
            mach.class_a = jm.at("class_a").get<int>();
            mach.class_b = jm.at("class_b").get<int>();
            mach.bias = jm.at("bias").get<double>();
            for (const auto& v : jm.at("support_vectors"))
                mach.sv.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            mach.coef = jm.at("coefficients").get<std::vector<double>>();
            if (mach.coef.size() != mach.sv.size())
                throw DataError("coefficient/support-vector count mismatch in model file");
            m.machines.push_back(std::move(mach));
        }
        const auto expected = static_cast<std::size_t>(m.num_classes) *
                              static_cast<std::size_t>(m.num_classes - 1) / 2;
        if (m.machines.size() != expected)
            throw DataError("model holds " + std::to_string(m.machines.size()) +
                            " machines, expected " + std::to_string(expected));
        return m;
    } catch (const nlohmann::ordered_json::exception& e) {
        throw DataError(std::string("malformed model JSON: ") + e.what());
    }
}

inline void save_model(const std::filesystem::path& path, const SvmModel& m) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << model_to_json(m).dump(2) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

inline SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    nlohmann::ordered_json j;
    try {
        is >> j;
    } catch (const nlohmann::ordered_json::exception& e) {
        throw DataError("malformed model JSON in " + path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace pqgdr
