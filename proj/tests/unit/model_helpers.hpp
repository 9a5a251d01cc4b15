// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "random_graphs.hpp"
#include "spectra/model/model.hpp"

// Random model input on n nodes with feature width d and edge attributes
// drawn from [0, 3).
inline spectra::model::GraphInput random_input(int n, int d, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> attr(0.0, 3.0);
  const Eigen::MatrixXd w = random_weighted_graph(n, rng);
  spectra::model::GraphInput in;
  in.x.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      in.x(i, j) = g(rng);
    }
  }
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (w(u, v) > 0.0) {
        in.edges.emplace_back(u, v);
      }
    }
  }
  in.edge_attr.resize(static_cast<Eigen::Index>(in.edges.size()), spectra::model::kNumEdgeAttrs);
  for (Eigen::Index e = 0; e < in.edge_attr.rows(); ++e) {
    for (int c = 0; c < spectra::model::kNumEdgeAttrs; ++c) {
      in.edge_attr(e, c) = attr(rng);
    }
  }
  in.y = g(rng);
  return in;
}

// Node i of `in` becomes node perm[i].
inline spectra::model::GraphInput permute_input(const spectra::model::GraphInput &in,
                                                const std::vector<int> &perm) {
  spectra::model::GraphInput out = in;
  for (int i = 0; i < in.num_nodes(); ++i) {
    out.x.row(perm[i]) = in.x.row(i);
  }
  for (std::size_t e = 0; e < in.edges.size(); ++e) {
    const int u = perm[in.edges[e].first];
    const int v = perm[in.edges[e].second];
    out.edges[e] = {std::min(u, v), std::max(u, v)};
  }
  return out;
}

// Parameters with every entry randomized, including BN shifts, the edge
// projection and running moments.
inline spectra::model::ModelParams random_params(const spectra::model::ModelConfig &config,
                                                 int input_dim, std::mt19937_64 &rng) {
  spectra::model::ModelParams p = spectra::model::init_params(config, input_dim, rng());
  std::normal_distribution<double> g(0.0, 0.5);
  for (const auto &t : p.tensors) {
    if (!t.name.starts_with("cheb.")) {
      auto m = p.view(t);
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] += g(rng);
      }
    }
  }
  std::uniform_real_distribution<double> var(0.5, 2.0);
  for (int l = 0; l < config.num_layers; ++l) {
    for (Eigen::Index i = 0; i < config.hidden_dim; ++i) {
      p.running_mean[l][i] = g(rng);
      p.running_var[l][i] = var(rng);
    }
  }
  return p;
}

struct GradientCheck {
  std::string worst_tensor;
  double worst_relative_error = 0.0;
};

// Central finite differences (step 1e-4) of sum_g c[g] * prediction[g]
// against backward(), with lambda_max and the dropout mask held fixed.
inline GradientCheck check_gradients(const spectra::model::ModelParams &base,
                                     const std::vector<const spectra::model::GraphInput *> &batch,
                                     const Eigen::VectorXd &c, std::uint64_t dropout_seed) {
  using namespace spectra::model;
  std::vector<double> lambdas;
  {
    ForwardOptions o;
    o.mode = Mode::kTrain;
    std::mt19937_64 rng(dropout_seed);
    o.rng = &rng;
    const ForwardResult fr = forward(batch, base, o);
    for (const auto &g : fr.cache.graphs) {
      lambdas.push_back(g.lambda);
    }
  }
  auto objective = [&](const ModelParams &p, Eigen::VectorXd *grad) {
    ForwardOptions o;
    o.mode = Mode::kTrain;
    std::mt19937_64 rng(dropout_seed);
    o.rng = &rng;
    o.lambda_override = &lambdas;
    const ForwardResult fr = forward(batch, p, o);
    if (grad != nullptr) {
      *grad = backward(fr.cache, p, c);
    }
    return c.dot(fr.predictions);
  };
  Eigen::VectorXd analytic;
  objective(base, &analytic);
  const double h = 1e-4;
  GradientCheck out;
  ModelParams p = base;
  for (const ParamTensor &t : base.tensors) {
    Eigen::VectorXd fd(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const Eigen::Index at = t.offset + i;
      p.values[at] = base.values[at] + h;
      const double up = objective(p, nullptr);
      p.values[at] = base.values[at] - h;
      const double down = objective(p, nullptr);
      p.values[at] = base.values[at];
      fd[i] = (up - down) / (2.0 * h);
    }
    const Eigen::VectorXd a = analytic.segment(t.offset, t.size());
    const double denom = std::max({a.norm(), fd.norm(), 1e-8});
    const double rel = (a - fd).norm() / denom;
    if (rel >= out.worst_relative_error) {
      out.worst_relative_error = rel;
      out.worst_tensor = t.name;
    }
  }
  return out;
}
