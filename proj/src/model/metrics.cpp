// SPDX-License-Identifier: Apache-2.0
#include "spectra/model/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spectra/model/train.hpp"
#include "spectra/rarity/rarity.hpp"

namespace spectra::model {

std::vector<double> relevance(std::span<const double> train_labels, std::span<const double> y) {
  const rarity::LabelDensity density = rarity::kde_fit(train_labels);
  std::vector<double> inv(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    inv[i] = 1.0 / std::max(density(y[i]), std::numeric_limits<double>::min());
  }
  if (inv.empty()) {
    return inv;
  }
  const auto [lo, hi] = std::minmax_element(inv.begin(), inv.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double &v : inv) {
    v = range > 0.0 ? (v - min) / range : 1.0;
  }
  return inv;
}

double sera_from_relevance(std::span<const double> squared_errors,
                           std::span<const double> relevance) {
  if (squared_errors.size() != relevance.size()) {
    throw std::invalid_argument("sera: size mismatch");
  }
  std::vector<std::size_t> order(relevance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return relevance[a] > relevance[b]; });
  double cumulative = 0.0;
  double area = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cumulative += squared_errors[order[k]];
    const double top = std::clamp(relevance[order[k]], 0.0, 1.0);
    const double bottom =
        k + 1 < order.size() ? std::clamp(relevance[order[k + 1]], 0.0, 1.0) : 0.0;
    area += (top - bottom) * cumulative;
  }
  return area;
}

double sera(std::span<const double> preds, std::span<const double> targets,
            std::span<const double> train_labels) {
  if (preds.size() != targets.size()) {
    throw std::invalid_argument("sera: size mismatch");
  }
  std::vector<double> sq(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    sq[i] = (preds[i] - targets[i]) * (preds[i] - targets[i]);
  }
  return sera_from_relevance(sq, relevance(train_labels, targets));
}

EvalReport evaluate_predictions(std::span<const double> preds, std::span<const double> targets,
                                std::span<const double> train_labels, int bins) {
  if (preds.size() != targets.size() || targets.empty()) {
    throw std::invalid_argument("evaluate: need equally sized nonempty predictions and targets");
  }
  if (bins < 1 || train_labels.empty()) {
    throw std::invalid_argument("evaluate: need at least one bin and one training label");
  }
  EvalReport r;
  const auto [lo_it, hi_it] = std::minmax_element(train_labels.begin(), train_labels.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / bins;
  auto bin_of = [&](double y) {
    if (!(width > 0.0)) {
      return 0;
    }
    const double raw = std::floor((y - lo) / width);
    return static_cast<int>(std::clamp(raw, 0.0, static_cast<double>(bins - 1)));
  };
  r.bins.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    r.bins[b].lo = lo + b * width;
    r.bins[b].hi = b + 1 == bins ? *hi_it : lo + (b + 1) * width;
  }
  for (double y : train_labels) {
    ++r.bins[bin_of(y)].train_count;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = std::abs(preds[i] - targets[i]);
    total += e;
    BinReport &b = r.bins[bin_of(targets[i])];
    ++b.count;
    b.mae += e;
  }
  for (BinReport &b : r.bins) {
    if (b.count > 0) {
      b.mae /= b.count;
    }
  }
  r.mae = total / static_cast<double>(preds.size());
  r.sera = sera(preds, targets, train_labels);
  return r;
}

EvalReport evaluate(const ModelParams &params, std::span<const GraphInput> test,
                    std::span<const double> train_labels, int bins) {
  const Eigen::VectorXd p = predict(params, test);
  std::vector<double> preds(p.data(), p.data() + p.size());
  std::vector<double> targets;
  for (const GraphInput &g : test) {
    targets.push_back(g.y);
  }
  return evaluate_predictions(preds, targets, train_labels, bins);
}

std::vector<int> lowest_density_bins(const EvalReport &report, int count) {
  std::vector<int> candidates;
  for (std::size_t b = 0; b < report.bins.size(); ++b) {
    if (report.bins[b].count > 0) {
      candidates.push_back(static_cast<int>(b));
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return report.bins[a].train_count < report.bins[b].train_count;
  });
  if (static_cast<int>(candidates.size()) > count) {
    candidates.resize(static_cast<std::size_t>(count));
  }
  return candidates;
}

}  // namespace spectra::model
