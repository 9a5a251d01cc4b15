// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectra/chem/codec.hpp"
#include "spectra/pipeline/dataset.hpp"
#include "spectra/spectral/spectral.hpp"

namespace spectra::pipeline {

struct AugmentedSample {
  chem::MolGraph graph;
  std::string smiles;
  double y_mix = 0.0;
  std::string parent_a;
  std::string parent_b;
  double mix_alpha = 0.0;
  chem::SanitizeMode sanitize_mode = chem::SanitizeMode::kStrict;
  bool solver_converged = true;
};

enum class Rejection : std::uint8_t {
  kNone,
  kSanitize,
  kDegenerateBasis,
  kEmptyGraph,
  kConvergence,
};
std::string to_string(Rejection r);

struct SynthConfig {
  double fgw_alpha = 0.5;
  // Matching on; off keeps B's node order (identity correspondence).
  bool align = true;
  chem::FeatureCodec codec;
};

struct SynthResult {
  std::optional<AugmentedSample> sample;
  Rejection rejection = Rejection::kNone;
  std::string detail;
  bool solver_converged = true;
};

/// Intermediate graph before decoding; exposed for inspection tools.
struct SynthGraphs {
  std::vector<int> permutation;
  std::array<spectral::SpectralDecomposition, chem::kNumChannels> spectra_a;
  std::array<spectral::SpectralDecomposition, chem::kNumChannels> spectra_b;
  chem::MolGraph mixed;   // thresholded edges, dummy nodes removed
  bool solver_converged = true;
  double objective = 0.0;
};

/// Runs match + per-channel spectral interpolation + thresholding and
/// dummy-node removal. Throws DegenerateBasis / ConvergenceError.
SynthGraphs synth_graphs(const chem::MolGraph &a, const chem::MolGraph &b, double mix,
                         const SynthConfig &config);

/// Full pair synthesis: graphs, decoding, canonical SMILES and label.
/// Failures are reported through SynthResult::rejection.
SynthResult synth_pair(const chem::MolGraph &a, const chem::MolGraph &b, double mix,
                       const SynthConfig &config);

struct AugmentConfig {
  double perc = 0.3;
  double fgw_alpha = 0.5;
  std::vector<double> mix_grid{0.1, 0.2, 0.3, 0.4, 0.5};
  std::uint64_t seed = 0;
  bool align = true;
  // Density-driven budgets; off spreads floor(N * perc) single-sample
  // budgets over a seeded shuffle of the training set.
  bool use_kde = true;
};

/// Grid value for the pair (i, j), drawn from a hash of (seed, i, j).
double pick_mix(const std::vector<double> &grid, std::uint64_t seed, int i, int j);

/// Parses "start:stop:step" (inclusive stop) or a comma list.
std::vector<double> parse_grid(const std::string &text);

struct RangeStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct GenerationReport {
  int attempted = 0;
  int produced = 0;
  std::map<std::string, int> rejections;
  int strict = 0;
  int relaxed = 0;
  int nonconverged = 0;
  // produced / attempted: share of candidates that passed sanitization.
  double validity = 0.0;
  // Share of emitted samples that re-sanitize: 1 by construction.
  double emitted_validity = 0.0;
  double uniqueness = 0.0;
  double novelty = 0.0;
  int unique = 0;
  int novel = 0;
  RangeStats original_atoms, original_rings, augmented_atoms, augmented_rings;
  bool uniform_weights_fallback = false;
};

struct AugmentResult {
  std::vector<AugmentedSample> samples;
  GenerationReport report;
  std::vector<int> budgets;
};

AugmentResult augment_dataset(const std::vector<Record> &train, const AugmentConfig &config);

/// Uniqueness, novelty and atom/ring statistics. attempted/produced are set
/// to the sample count; augment_dataset overrides them.
GenerationReport generation_metrics(const std::vector<Record> &train,
                                    const std::vector<AugmentedSample> &samples);

}  // namespace spectra::pipeline
