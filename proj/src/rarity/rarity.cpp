// SPDX-License-Identifier: Apache-2.0
#include "spectra/rarity/rarity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "spectra/error.hpp"

namespace spectra::rarity {

double LabelDensity::operator()(double y) const {
  const double norm = 1.0 / (static_cast<double>(labels.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  for (double yi : labels) {
    const double z = (y - yi) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return norm * sum;
}

double scott_bandwidth(std::span<const double> labels) {
  const double n = static_cast<double>(labels.size());
  const double mean = std::accumulate(labels.begin(), labels.end(), 0.0) / n;
  double ss = 0.0;
  for (double y : labels) {
    ss += (y - mean) * (y - mean);
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  return sd * std::pow(n, -0.2);
}

LabelDensity kde_fit(std::span<const double> labels) {
  if (labels.size() < 2) {
    throw DegenerateLabels("density estimate needs at least two labels");
  }
  const double h = scott_bandwidth(labels);
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DegenerateLabels("labels have zero variance");
  }
  return kde_with_bandwidth(labels, h);
}

LabelDensity kde_with_bandwidth(std::span<const double> labels, double bandwidth) {
  if (labels.empty() || !(bandwidth > 0.0)) {
    throw std::invalid_argument("kde_with_bandwidth: need labels and h > 0");
  }
  return LabelDensity{{labels.begin(), labels.end()}, bandwidth};
}

std::vector<double> rarity_weights(const LabelDensity &d) {
  std::vector<double> w(d.labels.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = 1.0 / d(d.labels[i]);
    total += w[i];
  }
  for (double &x : w) {
    x /= total;
  }
  return w;
}

std::vector<int> allocate_budgets(std::span<const double> weights, int n, double perc) {
  if (perc < 0.0 || perc > 1.0) {
    throw std::invalid_argument("allocate_budgets: perc outside [0, 1]");
  }
  std::vector<int> c(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double x = weights[i] * n * perc;
    // Absorb representation error just below an integer.
    c[i] = static_cast<int>(std::floor(x + 1e-9));
  }
  return c;
}

std::vector<int> partner_order(int i, std::span<const double> labels) {
  std::vector<int> order;
  order.reserve(labels.size());
  for (int j = 0; j < static_cast<int>(labels.size()); ++j) {
    if (j != i) {
      order.push_back(j);
    }
  }
  const double yi = labels[i];
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(yi - labels[a]) < std::abs(yi - labels[b]);
  });
  return order;
}

}  // namespace spectra::rarity
