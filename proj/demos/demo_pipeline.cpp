// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

// Miniature end-to-end run of the classification pipeline: synthesize a
// small labelled corpus, fit the one-vs-one SVM on the (k1, k2) features
// with fixed hyperparameters, and print the confusion matrix on a fresh
// test draw.  Build and run:
//
//   cmake --build build --target demo_pipeline && ./build/demo_pipeline
//
// At this desk scale (15 windows per class) expect a high-90s overall
// accuracy; the full experiment in the test suite uses 100 per class.

#include <cstdio>

#include "pqgdr/pqgdr.hpp"

int main() {
    using namespace pqgdr;

    const LabeledDataset train = make_dataset(reference_config(1, 15));
    const LabeledDataset test = make_dataset(reference_config(2, 15));
    std::printf("train: %zu windows, test: %zu windows\n", train.entries.size(),
                test.entries.size());

    SvmParams params;
    params.gamma = 5.0;
    params.C = 10.0;
    const TrainResult tr = train_pipeline(train, params, /*grid=*/false);
    std::printf("fitted %zu pairwise machines (gamma=%g, C=%g)\n",
                tr.model.machines.size(), tr.model.params.gamma, tr.model.params.C);

    const ConfusionMatrix cm = evaluate(tr.model, test);
    std::fputs(cm.to_csv().c_str(), stdout);
    std::printf("overall accuracy: %.2f%%\n", cm.overall_accuracy());
    return 0;
}
