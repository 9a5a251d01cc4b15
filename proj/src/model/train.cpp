// SPDX-License-Identifier: Apache-2.0
#include "spectra/model/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "spectra/error.hpp"

namespace spectra::model {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;
constexpr int kEvalBatch = 256;

void shuffle(std::vector<int> &v, std::mt19937_64 &rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

TrainResult train(std::span<const GraphInput> train_set, std::span<const GraphInput> val,
                  const ModelConfig &config, std::uint64_t seed, const TrainOptions &options) {
  if (train_set.empty()) {
    throw std::invalid_argument("training set is empty");
  }
  config.validate();
  TrainResult result;
  ModelParams params = init_params(config, static_cast<int>(train_set.front().x.cols()), seed);

  const double n = static_cast<double>(train_set.size());
  double mean = 0.0;
  for (const GraphInput &g : train_set) {
    mean += g.y;
  }
  mean /= n;
  double var = 0.0;
  for (const GraphInput &g : train_set) {
    var += (g.y - mean) * (g.y - mean);
  }
  params.target_mean = mean;
  params.target_scale = std::sqrt(var / n);
  const double divisor = params.target_scale > 0.0 ? params.target_scale : 1.0;

  std::seed_seq seq{seed, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(params.values.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(params.values.size());
  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  result.params = params;
  long step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, rng);
    double abs_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const GraphInput *> batch;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&train_set[static_cast<std::size_t>(order[i])]);
      }
      ForwardOptions fo;
      fo.mode = Mode::kTrain;
      fo.rng = &rng;
      const ForwardResult fr = forward(batch, params, fo);
      const double b = static_cast<double>(batch.size());
      Eigen::VectorXd grad_pred(fr.predictions.size());
      for (Eigen::Index i = 0; i < grad_pred.size(); ++i) {
        const double y = batch[static_cast<std::size_t>(i)]->y;
        const double diff = fr.predictions[i] - (y - params.target_mean) / divisor;
        abs_sum += std::abs(fr.predictions[i] * params.target_scale + params.target_mean - y);
        grad_pred[i] = (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) / b;
      }
      const Eigen::VectorXd grad = backward(fr.cache, params, grad_pred);
      ++step;
      m1 = kBeta1 * m1 + (1.0 - kBeta1) * grad;
      m2 = kBeta2 * m2 + (1.0 - kBeta2) * grad.cwiseAbs2();
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      params.values.array() -= config.learning_rate * (m1.array() / c1) /
                               ((m2.array() / c2).sqrt() + kAdamEpsilon);
      update_running_moments(params, fr.cache);
      if (!params.values.allFinite()) {
        throw TrainingError("non-finite parameters at epoch " + std::to_string(epoch) +
                            ", step " + std::to_string(step) + " (last batch loss " +
                            std::to_string(abs_sum) + ")");
      }
    }
    HistoryEntry entry;
    entry.epoch = epoch;
    entry.train_loss = abs_sum / n;
    entry.val_mae = val.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : mean_absolute_error(params, val);
    result.history.push_back(entry);
    if (options.on_epoch) {
      options.on_epoch(entry);
    }
    if (val.empty() || entry.val_mae < best) {
      best = val.empty() ? best : entry.val_mae;
      result.params = params;
      result.best_epoch = epoch;
    }
  }
  return result;
}

Eigen::VectorXd predict(const ModelParams &params, std::span<const GraphInput> graphs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(graphs.size()));
  for (std::size_t start = 0; start < graphs.size(); start += kEvalBatch) {
    const std::size_t end = std::min(graphs.size(), start + kEvalBatch);
    std::vector<const GraphInput *> batch;
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(&graphs[i]);
    }
    const ForwardResult fr = forward(batch, params, ForwardOptions{});
    out.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start)) =
        fr.predictions.array() * params.target_scale + params.target_mean;
  }
  return out;
}

double mean_absolute_error(const ModelParams &params, std::span<const GraphInput> graphs) {
  if (graphs.empty()) {
    return 0.0;
  }
  const Eigen::VectorXd p = predict(params, graphs);
  double sum = 0.0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    sum += std::abs(p[static_cast<Eigen::Index>(i)] - graphs[i].y);
  }
  return sum / static_cast<double>(graphs.size());
}

}  // namespace spectra::model
