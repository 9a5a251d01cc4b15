// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace spectra::rarity {

/// Gaussian kernel density estimate over a set of labels.
struct LabelDensity {
  std::vector<double> labels;
  double bandwidth = 1.0;

  double operator()(double y) const;
};

/// Scott's rule: sample standard deviation (ddof = 1) times n^(-1/5).
double scott_bandwidth(std::span<const double> labels);

/// Throws DegenerateLabels for fewer than two labels or zero variance.
LabelDensity kde_fit(std::span<const double> labels);

/// Density with a caller-chosen bandwidth.
LabelDensity kde_with_bandwidth(std::span<const double> labels, double bandwidth);

/// Normalized inverse densities at the fitted labels.
std::vector<double> rarity_weights(const LabelDensity &d);

/// floor(w_i * n * perc) per sample.
std::vector<int> allocate_budgets(std::span<const double> weights, int n, double perc);

/// All j != i ordered by |y_i - y_j|, ties by smaller j.
std::vector<int> partner_order(int i, std::span<const double> labels);

}  // namespace spectra::rarity
