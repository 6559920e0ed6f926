// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

// Umbrella header: the whole library in one include.

#include "pqgdr/core.hpp"        // constants, errors, ClassLabel, Waveform
#include "pqgdr/rng.hpp"         // splitmix64 seeding, deterministic Rng
#include "pqgdr/dmey.hpp"        // discrete Meyer filter pair (102 taps)
#include "pqgdr/freqsync.hpp"    // frequency estimation + synchronising resampler
#include "pqgdr/wmra.hpp"        // wavelet multiresolution analysis
#include "pqgdr/siggen.hpp"      // disturbance specs, synthesis, datasets
#include "pqgdr/indices.hpp"     // ITD(n), event window, GDR, feature vector
#include "pqgdr/dataset_io.hpp"  // waveform files, dataset manifests
#include "pqgdr/svm.hpp"         // one-vs-one soft-margin SVM (SMO)
#include "pqgdr/pipeline.hpp"    // end-to-end orchestration
