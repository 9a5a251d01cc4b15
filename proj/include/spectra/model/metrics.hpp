// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "spectra/model/model.hpp"

namespace spectra::model {

/// Inverse KDE density of each y (KDE fit on `train_labels` with Scott's
/// bandwidth), min-max normalized over `y` so values lie in [0, 1]. When
/// every inverse density is equal all relevances are 1. Throws
/// DegenerateLabels from the density fit.
std::vector<double> relevance(std::span<const double> train_labels, std::span<const double> y);

/// Integral over t in [0, 1] of the sum of squared errors whose relevance
/// is at least t, evaluated as a step function over sorted relevances.
double sera_from_relevance(std::span<const double> squared_errors,
                           std::span<const double> relevance);

/// SERA of predictions against targets with relevance from `train_labels`.
double sera(std::span<const double> preds, std::span<const double> targets,
            std::span<const double> train_labels);

struct BinReport {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  int train_count = 0;
  double mae = 0.0;
};

struct EvalReport {
  double mae = 0.0;
  double sera = 0.0;
  std::vector<BinReport> bins;
};

/// MAE, SERA and MAE per equal-width bin over the train-label range. Test
/// labels outside the range are clamped into the edge bins. Empty bins
/// report mae 0.
EvalReport evaluate_predictions(std::span<const double> preds, std::span<const double> targets,
                                std::span<const double> train_labels, int bins = 5);

EvalReport evaluate(const ModelParams &params, std::span<const GraphInput> test,
                    std::span<const double> train_labels, int bins = 5);

/// Indices of the `count` bins with the fewest training labels among bins
/// holding at least one test point, ties broken by lower index.
std::vector<int> lowest_density_bins(const EvalReport &report, int count);

}  // namespace spectra::model
