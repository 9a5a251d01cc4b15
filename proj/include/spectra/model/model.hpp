// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "spectra/chem/molecule.hpp"

namespace spectra::model {

inline constexpr int kNumEdgeAttrs = 3;

struct ModelConfig {
  int hidden_dim = 256;
  int num_layers = 4;
  double dropout = 0.1;
  double learning_rate = 1e-3;
  int cheb_order = 3;
  int epochs = 500;
  int batch_size = 64;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
  bool operator==(const ModelConfig &) const = default;
};

/// Applies `key = value` lines to `config`. Blank lines and lines starting
/// with '#' are skipped. Throws std::invalid_argument on unknown keys or
/// malformed values.
void apply_config_text(ModelConfig &config, std::string_view text);

/// One molecule as model input. Edges are listed once with u < v;
/// edge_attr holds (bond code, stereo code, conjugation flag) per edge.
struct GraphInput {
  Eigen::MatrixXd x;
  std::vector<std::pair<int, int>> edges;
  Eigen::MatrixXd edge_attr;
  double y = 0.0;

  int num_nodes() const { return static_cast<int>(x.rows()); }
};

/// Node feature width produced by featurize.
int feature_dim();

/// Node features: one-hot element over the codec vocabulary plus an
/// "other" slot, then formal charge, aromatic flag, degree / 4 and
/// hydrogen count / 4. Edge attributes are the codec channel values.
GraphInput featurize(const chem::Molecule &m, double y);

struct ParamTensor {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index size() const { return rows * cols; }
};

/// Trainable values live in one flat vector. Tensor order: per layer the
/// Chebyshev weights cheb.l.k (d_in x hidden) then bn.l.gamma and
/// bn.l.beta; then edge.theta (3), edge.bias (1), head.w (hidden) and
/// head.b (1).
struct ModelParams {
  ModelConfig config;
  int input_dim = 0;
  std::vector<ParamTensor> tensors;
  Eigen::VectorXd values;
  std::vector<Eigen::VectorXd> running_mean;
  std::vector<Eigen::VectorXd> running_var;
  // Predictions are target_mean + target_scale * network output. The
  // scale is the population standard deviation of the training targets.
  double target_mean = 0.0;
  double target_scale = 1.0;

  const ParamTensor &tensor(std::string_view name) const;
  Eigen::Map<const Eigen::MatrixXd> view(const ParamTensor &t) const;
  Eigen::Map<Eigen::MatrixXd> view(const ParamTensor &t);

  Eigen::Map<const Eigen::MatrixXd> cheb(int layer, int k) const;
  Eigen::Map<const Eigen::VectorXd> bn_gamma(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bn_beta(int layer) const;
  Eigen::Map<const Eigen::VectorXd> edge_theta() const;
  double edge_bias() const;
  Eigen::Map<const Eigen::VectorXd> head_w() const;
  double head_b() const;
};

/// Glorot-uniform Chebyshev and head weights, unit BN scale, zero shifts,
/// zero edge projection, running moments (0, 1).
ModelParams init_params(const ModelConfig &config, int input_dim, std::uint64_t seed);

double softplus(double z);
double sigmoid(double z);

/// softplus(theta . e + bias) per row of `edge_attr`.
Eigen::VectorXd edge_weights(const Eigen::MatrixXd &edge_attr,
                             const Eigen::Ref<const Eigen::VectorXd> &theta, double bias);

/// I - D^(-1/2) W D^(-1/2) with zero rows and columns for isolated nodes.
Eigen::MatrixXd normalized_laplacian(int n, std::span<const std::pair<int, int>> edges,
                                     const Eigen::VectorXd &weights);

/// Largest eigenvalue of a symmetric PSD matrix, floored at 1e-6.
double lambda_max(const Eigen::MatrixXd &l);

/// 2 L / lambda - I.
Eigen::MatrixXd scaled_laplacian(const Eigen::MatrixXd &l, double lambda);

/// Sum_k T_k(lt) h w[k] with T_0 = h, T_1 = lt h, T_k = 2 lt T_{k-1} - T_{k-2}.
Eigen::MatrixXd cheb_forward(const Eigen::MatrixXd &lt, const Eigen::MatrixXd &h,
                             std::span<const Eigen::MatrixXd> w);

enum class Mode { kTrain, kEval };

struct ForwardOptions {
  Mode mode = Mode::kEval;
  // Dropout source in training mode; no dropout when null.
  std::mt19937_64 *rng = nullptr;
  // Per-graph lambda_max values used instead of power iteration.
  const std::vector<double> *lambda_override = nullptr;
};

struct GraphCache {
  int offset = 0;
  int n = 0;
  Eigen::VectorXd edge_z;
  Eigen::VectorXd edge_w;
  Eigen::VectorXd degree;
  double lambda = 1.0;
  Eigen::MatrixXd lt;
};

struct LayerCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> t;
  Eigen::MatrixXd x_hat;
  Eigen::VectorXd inv_std;
  Eigen::MatrixXd z;
  Eigen::MatrixXd mask;
};

struct ForwardCache {
  std::vector<GraphCache> graphs;
  std::vector<LayerCache> layers;
  Eigen::MatrixXd pooled;
  std::vector<Eigen::VectorXd> batch_mean;
  std::vector<Eigen::VectorXd> batch_var;
  std::vector<const GraphInput *> inputs;
};

struct ForwardResult {
  // Predictions in standardized target units.
  Eigen::VectorXd predictions;
  ForwardCache cache;
};

/// Runs the network on a nonempty batch. Parameters are not modified;
/// training-mode batch moments are returned in the cache.
ForwardResult forward(std::span<const GraphInput *const> batch, const ModelParams &params,
                      const ForwardOptions &options);

/// Gradient of sum_g grad_pred[g] * prediction[g] with respect to
/// params.values, for a cache produced in training mode. lambda_max is
/// treated as a constant.
Eigen::VectorXd backward(const ForwardCache &cache, const ModelParams &params,
                         const Eigen::VectorXd &grad_pred);

/// Folds the batch moments of a training-mode cache into the running
/// moments with momentum 0.1.
void update_running_moments(ModelParams &params, const ForwardCache &cache);

}  // namespace spectra::model
