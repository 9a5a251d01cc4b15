// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spectra/model/model.hpp"

namespace spectra::model {

struct HistoryEntry {
  int epoch = 0;
  // Mean absolute error over the epoch's training batches, in target units.
  double train_loss = 0.0;
  // Eval-mode MAE on the validation set; NaN when there is none.
  double val_mae = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<HistoryEntry> history;
  // Epoch of the returned checkpoint (1-based; 0 when no epoch ran).
  int best_epoch = 0;
};

struct TrainOptions {
  std::function<void(const HistoryEntry &)> on_epoch;
};

/// Adam (0.9, 0.999, 1e-8) on the L1 loss of standardized targets with a
/// seeded shuffle each epoch. Returns the parameters with the lowest
/// validation MAE, or the final parameters when `val` is empty. Throws
/// TrainingError when a parameter becomes non-finite.
TrainResult train(std::span<const GraphInput> train_set, std::span<const GraphInput> val,
                  const ModelConfig &config, std::uint64_t seed,
                  const TrainOptions &options = {});

/// Eval-mode predictions in target units.
Eigen::VectorXd predict(const ModelParams &params, std::span<const GraphInput> graphs);

/// Mean absolute error of predict() against the stored targets.
double mean_absolute_error(const ModelParams &params, std::span<const GraphInput> graphs);

}  // namespace spectra::model
