// SPDX-License-Identifier: Apache-2.0
#include "spectra/model/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "spectra/chem/codec.hpp"

namespace spectra::model {

namespace {

constexpr double kBnEpsilon = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr double kLambdaFloor = 1e-6;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument("bad value for '" + std::string(key) + "': '" +
                                std::string(value) + "'");
  }
  return out;
}

double silu(double z) { return z * sigmoid(z); }

double silu_grad(double z) {
  const double s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

}  // namespace

void ModelConfig::validate() const {
  if (hidden_dim < 1) {
    throw std::invalid_argument("hidden_dim must be at least 1");
  }
  if (num_layers < 1) {
    throw std::invalid_argument("num_layers must be at least 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("dropout must be in [0, 1)");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (cheb_order < 1) {
    throw std::invalid_argument("cheb_order must be at least 1");
  }
  if (epochs < 0) {
    throw std::invalid_argument("epochs must be non-negative");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("batch_size must be at least 1");
  }
}

void apply_config_text(ModelConfig &config, std::string_view text) {
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("expected key = value: '" + std::string(line) + "'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "hidden_dim") {
      config.hidden_dim = parse_number<int>(key, value);
    } else if (key == "num_layers") {
      config.num_layers = parse_number<int>(key, value);
    } else if (key == "dropout") {
      config.dropout = parse_number<double>(key, value);
    } else if (key == "learning_rate") {
      config.learning_rate = parse_number<double>(key, value);
    } else if (key == "cheb_order") {
      config.cheb_order = parse_number<int>(key, value);
    } else if (key == "epochs") {
      config.epochs = parse_number<int>(key, value);
    } else if (key == "batch_size") {
      config.batch_size = parse_number<int>(key, value);
    } else {
      throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
    }
  }
  config.validate();
}

int feature_dim() {
  return static_cast<int>(chem::FeatureCodec{}.elements.size()) + 1 + 4;
}

GraphInput featurize(const chem::Molecule &m, double y) {
  const chem::FeatureCodec codec;
  const chem::MolGraph g = chem::mol_to_graph(m, codec, y);
  const int n = m.num_atoms();
  const int slots = static_cast<int>(codec.elements.size()) + 1;
  GraphInput out;
  out.y = y;
  out.x = Eigen::MatrixXd::Zero(n, feature_dim());
  for (int i = 0; i < n; ++i) {
    const auto it = std::find(codec.elements.begin(), codec.elements.end(), m.atoms[i].element);
    out.x(i, static_cast<int>(it - codec.elements.begin())) = 1.0;
    out.x(i, slots + 0) = g.x(i, chem::FeatureCodec::kCharge);
    out.x(i, slots + 1) = g.x(i, chem::FeatureCodec::kAromatic);
    out.x(i, slots + 2) = g.x(i, chem::FeatureCodec::kDegree) / 4.0;
    out.x(i, slots + 3) = g.x(i, chem::FeatureCodec::kHydrogens) / 4.0;
  }
  out.edge_attr.resize(m.num_bonds(), kNumEdgeAttrs);
  for (int e = 0; e < m.num_bonds(); ++e) {
    const int u = std::min(m.bonds[e].u, m.bonds[e].v);
    const int v = std::max(m.bonds[e].u, m.bonds[e].v);
    out.edges.emplace_back(u, v);
    for (int c = 0; c < kNumEdgeAttrs; ++c) {
      out.edge_attr(e, c) = g.w[c](u, v);
    }
  }
  return out;
}

const ParamTensor &ModelParams::tensor(std::string_view name) const {
  for (const ParamTensor &t : tensors) {
    if (t.name == name) {
      return t;
    }
  }
  throw std::out_of_range("no parameter tensor '" + std::string(name) + "'");
}

Eigen::Map<const Eigen::MatrixXd> ModelParams::view(const ParamTensor &t) const {
  return {values.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<Eigen::MatrixXd> ModelParams::view(const ParamTensor &t) {
  return {values.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<const Eigen::MatrixXd> ModelParams::cheb(int layer, int k) const {
  return view(tensors[static_cast<std::size_t>(layer * (config.cheb_order + 2) + k)]);
}

Eigen::Map<const Eigen::VectorXd> ModelParams::bn_gamma(int layer) const {
  const ParamTensor &t = tensors[static_cast<std::size_t>(layer * (config.cheb_order + 2) +
                                                         config.cheb_order)];
  return {values.data() + t.offset, t.size()};
}

Eigen::Map<const Eigen::VectorXd> ModelParams::bn_beta(int layer) const {
  const ParamTensor &t = tensors[static_cast<std::size_t>(layer * (config.cheb_order + 2) +
                                                         config.cheb_order + 1)];
  return {values.data() + t.offset, t.size()};
}

Eigen::Map<const Eigen::VectorXd> ModelParams::edge_theta() const {
  const ParamTensor &t = tensors[tensors.size() - 4];
  return {values.data() + t.offset, t.size()};
}

double ModelParams::edge_bias() const { return values[tensors[tensors.size() - 3].offset]; }

Eigen::Map<const Eigen::VectorXd> ModelParams::head_w() const {
  const ParamTensor &t = tensors[tensors.size() - 2];
  return {values.data() + t.offset, t.size()};
}

double ModelParams::head_b() const { return values[tensors.back().offset]; }

ModelParams init_params(const ModelConfig &config, int input_dim, std::uint64_t seed) {
  config.validate();
  if (input_dim < 1) {
    throw std::invalid_argument("input_dim must be at least 1");
  }
  ModelParams p;
  p.config = config;
  p.input_dim = input_dim;
  Eigen::Index offset = 0;
  auto add = [&](std::string name, Eigen::Index rows, Eigen::Index cols) {
    p.tensors.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  const int h = config.hidden_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    const int d_in = l == 0 ? input_dim : h;
    for (int k = 0; k < config.cheb_order; ++k) {
      add("cheb." + std::to_string(l) + "." + std::to_string(k), d_in, h);
    }
    add("bn." + std::to_string(l) + ".gamma", h, 1);
    add("bn." + std::to_string(l) + ".beta", h, 1);
  }
  add("edge.theta", kNumEdgeAttrs, 1);
  add("edge.bias", 1, 1);
  add("head.w", h, 1);
  add("head.b", 1, 1);
  p.values = Eigen::VectorXd::Zero(offset);

  std::mt19937_64 rng(seed);
  auto glorot = [&](const ParamTensor &t) {
    const double limit = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    auto m = p.view(t);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, j) = u(rng);
      }
    }
  };
  for (const ParamTensor &t : p.tensors) {
    if (t.name.starts_with("cheb.") || t.name == "head.w") {
      glorot(t);
    } else if (t.name.ends_with(".gamma")) {
      p.view(t).setOnes();
    }
  }
  p.running_mean.assign(config.num_layers, Eigen::VectorXd::Zero(h));
  p.running_var.assign(config.num_layers, Eigen::VectorXd::Ones(h));
  return p;
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::VectorXd edge_weights(const Eigen::MatrixXd &edge_attr,
                             const Eigen::Ref<const Eigen::VectorXd> &theta, double bias) {
  Eigen::VectorXd z = edge_attr * theta;
  for (Eigen::Index e = 0; e < z.size(); ++e) {
    z[e] = softplus(z[e] + bias);
  }
  return z;
}

Eigen::MatrixXd normalized_laplacian(int n, std::span<const std::pair<int, int>> edges,
                                     const Eigen::VectorXd &weights) {
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    degree[edges[e].first] += weights[static_cast<Eigen::Index>(e)];
    degree[edges[e].second] += weights[static_cast<Eigen::Index>(e)];
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (degree[i] > 0.0) {
      l(i, i) = 1.0;
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    const double s = weights[static_cast<Eigen::Index>(e)] / std::sqrt(degree[u] * degree[v]);
    l(u, v) -= s;
    l(v, u) -= s;
  }
  return l;
}

double lambda_max(const Eigen::MatrixXd &l) {
  if (l.rows() == 0) {
    return kLambdaFloor;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l, Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().maxCoeff(), kLambdaFloor);
}

Eigen::MatrixXd scaled_laplacian(const Eigen::MatrixXd &l, double lambda) {
  Eigen::MatrixXd lt = (2.0 / lambda) * l;
  lt.diagonal().array() -= 1.0;
  return lt;
}

Eigen::MatrixXd cheb_forward(const Eigen::MatrixXd &lt, const Eigen::MatrixXd &h,
                             std::span<const Eigen::MatrixXd> w) {
  Eigen::MatrixXd out = h * w[0];
  if (w.size() == 1) {
    return out;
  }
  Eigen::MatrixXd prev = h;
  Eigen::MatrixXd cur = lt * h;
  out += cur * w[1];
  for (std::size_t k = 2; k < w.size(); ++k) {
    Eigen::MatrixXd next = 2.0 * (lt * cur) - prev;
    out += next * w[k];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

ForwardResult forward(std::span<const GraphInput *const> batch, const ModelParams &params,
                      const ForwardOptions &options) {
  if (batch.empty()) {
    throw std::invalid_argument("forward needs a nonempty batch");
  }
  const ModelConfig &cfg = params.config;
  const bool training = options.mode == Mode::kTrain;
  ForwardResult result;
  ForwardCache &cache = result.cache;
  cache.inputs.assign(batch.begin(), batch.end());

  int total = 0;
  for (const GraphInput *g : batch) {
    total += g->num_nodes();
  }
  Eigen::MatrixXd h(total, params.input_dim);
  const auto theta = params.edge_theta();
  const double bias = params.edge_bias();
  for (std::size_t gi = 0; gi < batch.size(); ++gi) {
    const GraphInput &g = *batch[gi];
    GraphCache gc;
    gc.offset = gi == 0 ? 0 : cache.graphs.back().offset + cache.graphs.back().n;
    gc.n = g.num_nodes();
    gc.edge_z = g.edge_attr * theta;
    gc.edge_z.array() += bias;
    gc.edge_w = gc.edge_z.unaryExpr([](double z) { return softplus(z); });
    gc.degree = Eigen::VectorXd::Zero(gc.n);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      gc.degree[g.edges[e].first] += gc.edge_w[static_cast<Eigen::Index>(e)];
      gc.degree[g.edges[e].second] += gc.edge_w[static_cast<Eigen::Index>(e)];
    }
    const Eigen::MatrixXd l = normalized_laplacian(gc.n, g.edges, gc.edge_w);
    gc.lambda = options.lambda_override != nullptr ? (*options.lambda_override)[gi]
                                                   : lambda_max(l);
    gc.lt = scaled_laplacian(l, gc.lambda);
    h.middleRows(gc.offset, gc.n) = g.x;
    cache.graphs.push_back(std::move(gc));
  }

  auto apply_lt = [&](const Eigen::MatrixXd &m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (const GraphCache &gc : cache.graphs) {
      out.middleRows(gc.offset, gc.n).noalias() = gc.lt * m.middleRows(gc.offset, gc.n);
    }
    return out;
  };

  std::bernoulli_distribution keep(1.0 - cfg.dropout);
  const double keep_scale = 1.0 / (1.0 - cfg.dropout);
  for (int layer = 0; layer < cfg.num_layers; ++layer) {
    LayerCache lc;
    lc.input = h;
    lc.t.push_back(h);
    if (cfg.cheb_order > 1) {
      lc.t.push_back(apply_lt(h));
    }
    for (int k = 2; k < cfg.cheb_order; ++k) {
      lc.t.push_back(2.0 * apply_lt(lc.t[k - 1]) - lc.t[k - 2]);
    }
    Eigen::MatrixXd y = lc.t[0] * params.cheb(layer, 0);
    for (int k = 1; k < cfg.cheb_order; ++k) {
      y.noalias() += lc.t[k] * params.cheb(layer, k);
    }

    Eigen::VectorXd mean;
    Eigen::VectorXd var;
    if (training) {
      mean = y.colwise().mean().transpose();
      var = (y.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
      cache.batch_mean.push_back(mean);
      cache.batch_var.push_back(var);
    } else {
      mean = params.running_mean[layer];
      var = params.running_var[layer];
    }
    lc.inv_std = (var.array() + kBnEpsilon).rsqrt().matrix();
    lc.x_hat = (y.rowwise() - mean.transpose()).array().rowwise() * lc.inv_std.transpose().array();
    lc.z = (lc.x_hat.array().rowwise() * params.bn_gamma(layer).transpose().array()).rowwise() +
           params.bn_beta(layer).transpose().array();
    h = lc.z.unaryExpr([](double z) { return silu(z); });
    if (training && options.rng != nullptr && cfg.dropout > 0.0) {
      lc.mask.resize(h.rows(), h.cols());
      for (Eigen::Index j = 0; j < h.cols(); ++j) {
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
          lc.mask(i, j) = keep(*options.rng) ? keep_scale : 0.0;
        }
      }
      h.array() *= lc.mask.array();
    }
    cache.layers.push_back(std::move(lc));
  }

  cache.pooled.resize(static_cast<Eigen::Index>(batch.size()), cfg.hidden_dim);
  for (std::size_t gi = 0; gi < batch.size(); ++gi) {
    const GraphCache &gc = cache.graphs[gi];
    if (gc.n == 0) {
      cache.pooled.row(static_cast<Eigen::Index>(gi)).setZero();
    } else {
      cache.pooled.row(static_cast<Eigen::Index>(gi)) =
          h.middleRows(gc.offset, gc.n).colwise().mean();
    }
  }
  result.predictions = cache.pooled * params.head_w();
  result.predictions.array() += params.head_b();
  return result;
}

Eigen::VectorXd backward(const ForwardCache &cache, const ModelParams &params,
                         const Eigen::VectorXd &grad_pred) {
  const ModelConfig &cfg = params.config;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.values.size());
  auto slot = [&](std::size_t index) {
    const ParamTensor &t = params.tensors[index];
    return Eigen::Map<Eigen::MatrixXd>(grad.data() + t.offset, t.rows, t.cols);
  };
  const std::size_t nt = params.tensors.size();
  slot(nt - 2) = cache.pooled.transpose() * grad_pred;
  slot(nt - 1)(0, 0) = grad_pred.sum();

  const Eigen::Index total = cache.layers.front().input.rows();
  Eigen::MatrixXd gh = Eigen::MatrixXd::Zero(total, cfg.hidden_dim);
  for (std::size_t gi = 0; gi < cache.graphs.size(); ++gi) {
    const GraphCache &gc = cache.graphs[gi];
    if (gc.n > 0) {
      const Eigen::RowVectorXd row =
          grad_pred[static_cast<Eigen::Index>(gi)] * params.head_w().transpose() /
          static_cast<double>(gc.n);
      gh.middleRows(gc.offset, gc.n).rowwise() = row;
    }
  }

  // Gradient with respect to the scaled Laplacian entries on each edge,
  // summed over both orientations and all layers.
  std::vector<Eigen::VectorXd> g_lt_edge(cache.graphs.size());
  for (std::size_t gi = 0; gi < cache.graphs.size(); ++gi) {
    g_lt_edge[gi] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cache.inputs[gi]->edges.size()));
  }
  auto apply_lt = [&](const Eigen::MatrixXd &m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (const GraphCache &gc : cache.graphs) {
      out.middleRows(gc.offset, gc.n).noalias() = gc.lt * m.middleRows(gc.offset, gc.n);
    }
    return out;
  };
  // Accumulates coeff * sum over edges (u,v) of a[u].b[v] + a[v].b[u].
  auto accumulate_edges = [&](const Eigen::MatrixXd &a, const Eigen::MatrixXd &b, double coeff) {
    for (std::size_t gi = 0; gi < cache.graphs.size(); ++gi) {
      const GraphCache &gc = cache.graphs[gi];
      const auto &edges = cache.inputs[gi]->edges;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const int u = gc.offset + edges[e].first;
        const int v = gc.offset + edges[e].second;
        g_lt_edge[gi][static_cast<Eigen::Index>(e)] +=
            coeff * (a.row(u).dot(b.row(v)) + a.row(v).dot(b.row(u)));
      }
    }
  };

  for (int layer = cfg.num_layers - 1; layer >= 0; --layer) {
    const LayerCache &lc = cache.layers[static_cast<std::size_t>(layer)];
    const std::size_t base = static_cast<std::size_t>(layer * (cfg.cheb_order + 2));
    Eigen::MatrixXd ga = gh;
    if (lc.mask.size() > 0) {
      ga.array() *= lc.mask.array();
    }
    const Eigen::MatrixXd gz = ga.array() * lc.z.unaryExpr([](double z) { return silu_grad(z); }).array();
    slot(base + cfg.cheb_order) = (gz.array() * lc.x_hat.array()).colwise().sum().transpose();
    slot(base + cfg.cheb_order + 1) = gz.colwise().sum().transpose();
    const Eigen::MatrixXd gxh = gz.array().rowwise() * params.bn_gamma(layer).transpose().array();
    const double n = static_cast<double>(gxh.rows());
    const Eigen::RowVectorXd sum_g = gxh.colwise().sum();
    const Eigen::RowVectorXd sum_gx = (gxh.array() * lc.x_hat.array()).colwise().sum();
    Eigen::MatrixXd gy = n * gxh;
    gy.rowwise() -= sum_g;
    gy.array() -= lc.x_hat.array().rowwise() * sum_gx.array();
    gy.array().rowwise() *= (lc.inv_std.transpose().array() / n);

    std::vector<Eigen::MatrixXd> gt(static_cast<std::size_t>(cfg.cheb_order));
    for (int k = 0; k < cfg.cheb_order; ++k) {
      slot(base + k).noalias() = lc.t[k].transpose() * gy;
      gt[k].noalias() = gy * params.cheb(layer, k).transpose();
    }
    for (int k = cfg.cheb_order - 1; k >= 2; --k) {
      gt[k - 1] += 2.0 * apply_lt(gt[k]);
      gt[k - 2] -= gt[k];
      accumulate_edges(gt[k], lc.t[k - 1], 2.0);
    }
    if (cfg.cheb_order > 1) {
      gt[0] += apply_lt(gt[1]);
      accumulate_edges(gt[1], lc.t[0], 1.0);
    }
    gh = std::move(gt[0]);
  }

  // Scaled Laplacian off-diagonal entries are -(2/lambda) w_uv / sqrt(d_u d_v).
  Eigen::VectorXd g_theta = Eigen::VectorXd::Zero(kNumEdgeAttrs);
  double g_bias = 0.0;
  for (std::size_t gi = 0; gi < cache.graphs.size(); ++gi) {
    const GraphCache &gc = cache.graphs[gi];
    const GraphInput &g = *cache.inputs[gi];
    const std::size_t ne = g.edges.size();
    if (ne == 0) {
      continue;
    }
    const double c = -2.0 / gc.lambda;
    Eigen::VectorXd s(static_cast<Eigen::Index>(ne));
    Eigen::VectorXd gd = Eigen::VectorXd::Zero(gc.n);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto [u, v] = g.edges[e];
      const Eigen::Index ei = static_cast<Eigen::Index>(e);
      s[ei] = gc.edge_w[ei] / std::sqrt(gc.degree[u] * gc.degree[v]);
      const double gs = c * g_lt_edge[gi][ei];
      gd[u] -= 0.5 * gs * s[ei] / gc.degree[u];
      gd[v] -= 0.5 * gs * s[ei] / gc.degree[v];
    }
    for (std::size_t e = 0; e < ne; ++e) {
      const auto [u, v] = g.edges[e];
      const Eigen::Index ei = static_cast<Eigen::Index>(e);
      const double gs = c * g_lt_edge[gi][ei];
      const double gw = gs / std::sqrt(gc.degree[u] * gc.degree[v]) + gd[u] + gd[v];
      const double gzv = gw * sigmoid(gc.edge_z[ei]);
      g_theta += gzv * g.edge_attr.row(ei).transpose();
      g_bias += gzv;
    }
  }
  slot(nt - 4) = g_theta;
  slot(nt - 3)(0, 0) = g_bias;
  return grad;
}

void update_running_moments(ModelParams &params, const ForwardCache &cache) {
  for (std::size_t l = 0; l < cache.batch_mean.size(); ++l) {
    params.running_mean[l] =
        (1.0 - kBnMomentum) * params.running_mean[l] + kBnMomentum * cache.batch_mean[l];
    params.running_var[l] =
        (1.0 - kBnMomentum) * params.running_var[l] + kBnMomentum * cache.batch_var[l];
  }
}

}  // namespace spectra::model
