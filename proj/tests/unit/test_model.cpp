// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "model_helpers.hpp"
#include "spectra/chem/smiles.hpp"
#include "spectra/error.hpp"
#include "spectra/model/io.hpp"
#include "spectra/model/metrics.hpp"
#include "spectra/model/model.hpp"
#include "spectra/model/train.hpp"

using namespace spectra;
using namespace spectra::model;

namespace {

ModelConfig small_config(int hidden, int layers, int k, double dropout) {
  ModelConfig c;
  c.hidden_dim = hidden;
  c.num_layers = layers;
  c.cheb_order = k;
  c.dropout = dropout;
  return c;
}

Eigen::VectorXd eval_predict(const ModelParams &p, const std::vector<const GraphInput *> &batch) {
  return forward(batch, p, ForwardOptions{}).predictions;
}

double silu_ref(double z) { return z / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("config") {
  ModelConfig c;
  CHECK(c.hidden_dim == 256);
  CHECK(c.num_layers == 4);
  CHECK(c.cheb_order == 3);
  CHECK(c.batch_size == 64);
  apply_config_text(c, "# model\nhidden_dim = 32\n\ndropout=0.2\nepochs = 7\n");
  CHECK(c.hidden_dim == 32);
  CHECK(c.dropout == 0.2);
  CHECK(c.epochs == 7);
  CHECK_THROWS(apply_config_text(c, "depth = 3"));
  CHECK_THROWS(apply_config_text(c, "cheb_order = 0"));
  CHECK_THROWS(apply_config_text(c, "dropout = 1"));
  CHECK_THROWS(apply_config_text(c, "hidden_dim = x"));
}

TEST_CASE("featurize") {
  const GraphInput g = featurize(chem::mol_from_smiles("C=CO"), 1.5);
  CHECK(g.x.rows() == 3);
  CHECK(g.x.cols() == feature_dim());
  CHECK(g.edges.size() == 2);
  CHECK(g.y == 1.5);
  CHECK(g.x.leftCols(14).rowwise().sum().isOnes());
  CHECK(g.edge_attr(0, 0) == 2.0);
  CHECK(g.edge_attr(1, 0) == 1.0);
  const GraphInput na = featurize(chem::mol_from_smiles("[Na+].[Cl-]"), 0.0);
  CHECK(na.x(0, 13) == 1.0);
  CHECK(na.x(0, 14) == 1.0);
}

TEST_CASE("edge weights") {
  Eigen::MatrixXd e(2, 3);
  e << 1, 0, 1, 2, 1.5, 0;
  const Eigen::VectorXd zero = edge_weights(e, Eigen::Vector3d::Zero(), 0.0);
  CHECK(zero[0] == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(zero[1] == zero[0]);
  const Eigen::VectorXd w = edge_weights(e, Eigen::Vector3d(0.5, 0.0, 0.5), 0.0);
  CHECK(w[0] == doctest::Approx(1.3132616875182228).epsilon(1e-15));
  double prev = 1e300;
  for (double bias : {0.0, -5.0, -50.0, -500.0}) {
    const double v = edge_weights(e, Eigen::Vector3d::Zero(), bias)[0];
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("normalized laplacian and lambda_max") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const GraphInput g = random_input(2 + trial % 20, 1, rng);
    const Eigen::VectorXd w = edge_weights(g.edge_attr, Eigen::Vector3d(0.3, -0.2, 0.1), 0.1);
    const Eigen::MatrixXd l = normalized_laplacian(g.num_nodes(), g.edges, w);
    CHECK((l - l.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    const double top = es.eigenvalues().maxCoeff();
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(top <= 2.0 + 1e-12);
    const double est = lambda_max(l);
    CHECK(std::abs(est - top) <= 1e-12);
  }
  const Eigen::MatrixXd single = normalized_laplacian(1, {}, Eigen::VectorXd());
  CHECK(single(0, 0) == 0.0);
  CHECK(lambda_max(single) == 1e-6);
  CHECK(scaled_laplacian(single, lambda_max(single))(0, 0) == -1.0);
}

TEST_CASE("chebyshev convolution") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  auto random_matrix = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = g(rng);
    }
    return m;
  };
  const Eigen::MatrixXd h = random_matrix(5, 3);
  const Eigen::MatrixXd lt = random_matrix(5, 5);
  std::vector<Eigen::MatrixXd> w{random_matrix(3, 2), random_matrix(3, 2), random_matrix(3, 2)};
  CHECK(cheb_forward(lt, h, std::span(w).first(1)) == h * w[0]);
  CHECK(cheb_forward(lt, h, std::vector<Eigen::MatrixXd>(3, Eigen::MatrixXd::Zero(3, 2))).isZero(0));

  const Eigen::MatrixXd h1 = random_matrix(1, 3);
  const Eigen::MatrixXd l1 = scaled_laplacian(normalized_laplacian(1, {}, {}), 1e-6);
  const Eigen::MatrixXd out = cheb_forward(l1, h1, w);
  CHECK((out - h1 * (w[0] - w[1] + w[2])).norm() < 1e-14);

  // T_2 against the explicit polynomial 2 lt^2 - I.
  const Eigen::MatrixXd t2 = cheb_forward(lt, h, std::vector<Eigen::MatrixXd>{
                                                      Eigen::MatrixXd::Zero(3, 2),
                                                      Eigen::MatrixXd::Zero(3, 2), w[2]});
  const Eigen::MatrixXd poly = (2.0 * lt * lt - Eigen::MatrixXd::Identity(5, 5)) * h * w[2];
  CHECK((t2 - poly).norm() < 1e-12 * poly.norm());
}

TEST_CASE("forward matches a hand-rolled two-node computation") {
  ModelConfig c = small_config(2, 1, 2, 0.0);
  ModelParams p = init_params(c, 1, 5);
  std::mt19937_64 rng(8);
  p = random_params(c, 1, rng);
  p.view(p.tensor("edge.theta")).setZero();
  p.view(p.tensor("edge.bias")).setZero();

  GraphInput g;
  g.x.resize(2, 1);
  g.x << 1.0, 2.0;
  g.edges = {{0, 1}};
  g.edge_attr = Eigen::MatrixXd::Zero(1, 3);
  const std::vector<const GraphInput *> batch{&g};
  ForwardOptions o;
  o.mode = Mode::kTrain;
  const double pred = forward(batch, p, o).predictions[0];

  // Two nodes joined by one edge: normalized Laplacian [[1,-1],[-1,1]],
  // lambda_max 2, scaled Laplacian [[0,-1],[-1,0]].
  const double x[2] = {1.0, 2.0};
  const double t1[2] = {-x[1], -x[0]};
  const auto w0 = p.cheb(0, 0);
  const auto w1 = p.cheb(0, 1);
  double pooled[2] = {0.0, 0.0};
  for (int f = 0; f < 2; ++f) {
    double y[2];
    for (int i = 0; i < 2; ++i) {
      y[i] = x[i] * w0(0, f) + t1[i] * w1(0, f);
    }
    const double mean = 0.5 * (y[0] + y[1]);
    const double var = 0.5 * ((y[0] - mean) * (y[0] - mean) + (y[1] - mean) * (y[1] - mean));
    for (int i = 0; i < 2; ++i) {
      const double z = p.bn_gamma(0)[f] * (y[i] - mean) / std::sqrt(var + 1e-5) + p.bn_beta(0)[f];
      pooled[f] += 0.5 * silu_ref(z);
    }
  }
  const double expected = pooled[0] * p.head_w()[0] + pooled[1] * p.head_w()[1] + p.head_b();
  CHECK(pred == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("forward symmetries") {
  std::mt19937_64 rng(21);
  const ModelConfig c = small_config(8, 3, 3, 0.1);
  const ModelParams p = random_params(c, 4, rng);
  const GraphInput g = random_input(7, 4, rng);
  const GraphInput h = random_input(5, 4, rng);

  const std::vector<const GraphInput *> twice{&g, &g};
  const Eigen::VectorXd a = eval_predict(p, twice);
  CHECK(a[0] == a[1]);
  CHECK(eval_predict(p, twice) == a);

  ForwardOptions o;
  o.mode = Mode::kTrain;
  const Eigen::VectorXd t = forward(twice, p, o).predictions;
  CHECK(t[0] == doctest::Approx(t[1]).epsilon(1e-14));

  // Eval mode is independent of batch composition.
  const std::vector<const GraphInput *> mixed{&h, &g};
  CHECK(eval_predict(p, mixed)[1] == doctest::Approx(a[0]).epsilon(1e-13));
}

TEST_CASE("node permutation invariance") {
  std::mt19937_64 rng(4);
  const ModelConfig c = small_config(16, 3, 3, 0.0);
  for (int trial = 0; trial < 40; ++trial) {
    const ModelParams p = random_params(c, 5, rng);
    const GraphInput g = random_input(3 + trial % 25, 5, rng);
    std::vector<int> perm(static_cast<std::size_t>(g.num_nodes()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const GraphInput q = permute_input(g, perm);
    const double a = eval_predict(p, {&g})[0];
    const double b = eval_predict(p, {&q})[0];
    CAPTURE(trial);
    CHECK(std::abs(a - b) < 1e-6);
  }
}

TEST_CASE("first-order filter is a per-node model") {
  std::mt19937_64 rng(9);
  const ModelConfig c = small_config(6, 1, 1, 0.0);
  const ModelParams p = random_params(c, 3, rng);
  const GraphInput g = random_input(6, 3, rng);
  GraphInput bare = g;
  bare.edges.clear();
  bare.edge_attr.resize(0, 3);
  CHECK(eval_predict(p, {&g}) == eval_predict(p, {&bare}));

  double expected = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const Eigen::RowVectorXd y = g.x.row(i) * p.cheb(0, 0);
    for (int f = 0; f < c.hidden_dim; ++f) {
      const double z = p.bn_gamma(0)[f] * (y[f] - p.running_mean[0][f]) /
                           std::sqrt(p.running_var[0][f] + 1e-5) +
                       p.bn_beta(0)[f];
      expected += silu_ref(z) * p.head_w()[f] / g.num_nodes();
    }
  }
  expected += p.head_b();
  CHECK(eval_predict(p, {&g})[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    const ModelConfig c = small_config(5, 2, 3, 0.1);
    const ModelParams p = random_params(c, 4, rng);
    const GraphInput a = random_input(6, 4, rng);
    const GraphInput b = random_input(6, 4, rng);
    Eigen::VectorXd w(2);
    w << 0.7, -1.3;
    const GradientCheck r = check_gradients(p, {&a, &b}, w, seed + 100);
    CAPTURE(seed);
    CAPTURE(r.worst_tensor);
    CHECK(r.worst_relative_error < 1e-4);
  }
}

TEST_CASE("backward edge cases") {
  std::mt19937_64 rng(2);
  const ModelConfig c = small_config(4, 2, 3, 0.0);
  const ModelParams p = random_params(c, 3, rng);
  const GraphInput g = random_input(5, 3, rng);
  ForwardOptions o;
  o.mode = Mode::kTrain;
  const ForwardResult fr = forward(std::vector<const GraphInput *>{&g, &g}, p, o);
  CHECK(backward(fr.cache, p, Eigen::VectorXd::Zero(2)).isZero(0));
  const Eigen::VectorXd first = backward(fr.cache, p, Eigen::Vector2d(1.0, 0.0));
  const Eigen::VectorXd second = backward(fr.cache, p, Eigen::Vector2d(0.0, 1.0));
  CHECK((first - second).norm() <= 1e-12 * first.norm());
}

TEST_CASE("sera identities") {
  const std::vector<double> sq{1.0, 1.0, 1.0};
  CHECK(sera_from_relevance(sq, std::vector<double>{1.0, 0.5, 0.0}) == 1.5);
  const std::vector<double> e{0.3, 2.5, 0.01, 7.0};
  CHECK(sera_from_relevance(e, std::vector<double>(4, 1.0)) == 0.3 + 2.5 + 0.01 + 7.0);
  CHECK(sera_from_relevance(std::vector<double>(4, 0.0), std::vector<double>{0.1, 0.9, 1, 0}) ==
        0.0);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 12;
    std::vector<double> err(n);
    std::vector<double> phi(n);
    for (int i = 0; i < n; ++i) {
      err[i] = u(rng) * 3.0;
      phi[i] = u(rng);
    }
    const double s = sera_from_relevance(err, phi);
    CHECK(s >= 0.0);
    CHECK(s <= std::accumulate(err.begin(), err.end(), 0.0) + 1e-12);
    const int i = static_cast<int>(rng() % static_cast<unsigned>(n));
    phi[i] *= u(rng);
    CHECK(sera_from_relevance(err, phi) <= s + 1e-12);
  }

  const std::vector<double> train{0.0, 0.1, 0.2, 0.3, 2.0};
  const std::vector<double> targets{0.1, 1.0, 2.0};
  const std::vector<double> phi = relevance(train, targets);
  CHECK(*std::min_element(phi.begin(), phi.end()) == 0.0);
  CHECK(*std::max_element(phi.begin(), phi.end()) == 1.0);
  CHECK(phi[0] == 0.0);
  CHECK(sera(targets, targets, train) == 0.0);
  CHECK_THROWS_AS(relevance(std::vector<double>{1.0}, targets), DegenerateLabels);
}

TEST_CASE("binned evaluation") {
  const std::vector<double> train{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  const EvalReport one = evaluate_predictions(std::vector<double>{0.7}, std::vector<double>{0.5},
                                              train, 5);
  CHECK(one.mae == doctest::Approx(0.2));
  CHECK(one.bins[0].count == 1);
  CHECK(one.bins[0].mae == doctest::Approx(0.2));
  for (int b = 1; b < 5; ++b) {
    CHECK(one.bins[b].count == 0);
    CHECK(one.bins[b].mae == 0.0);
  }
  CHECK(one.bins[4].hi == 5.0);
  CHECK(one.bins[0].train_count == 1);
  CHECK(one.bins[4].train_count == 2);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(2.5, 2.0);
  std::vector<double> preds;
  std::vector<double> targets;
  for (int i = 0; i < 40; ++i) {
    targets.push_back(g(rng));
    preds.push_back(targets.back() + g(rng) - 2.5);
  }
  const EvalReport r = evaluate_predictions(preds, targets, train, 5);
  int count = 0;
  double weighted = 0.0;
  for (const BinReport &b : r.bins) {
    count += b.count;
    weighted += b.count * b.mae;
  }
  CHECK(count == 40);
  CHECK(std::abs(weighted / count - r.mae) < 1e-10);
  const std::vector<int> low = lowest_density_bins(r, 2);
  CHECK(low.size() == 2);
}

TEST_CASE("training") {
  std::mt19937_64 rng(12);
  std::vector<GraphInput> data;
  for (int i = 0; i < 12; ++i) {
    data.push_back(random_input(4 + i % 5, 4, rng));
  }
  ModelConfig c = small_config(16, 2, 2, 0.0);
  c.epochs = 5;
  c.batch_size = 5;
  const std::span<const GraphInput> all(data);
  const TrainResult a = train(all.first(10), all.subspan(10), c, 3);
  const TrainResult b = train(all.first(10), all.subspan(10), c, 3);
  REQUIRE(a.history.size() == 5);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
    CHECK(a.history[i].val_mae == b.history[i].val_mae);
  }
  CHECK(serialize_model({a.params, {}}) == serialize_model({b.params, {}}));
  const TrainResult other = train(all.first(10), all.subspan(10), c, 4);
  CHECK(other.history[0].train_loss != a.history[0].train_loss);
  double best = 1e300;
  for (const HistoryEntry &h : a.history) {
    best = std::min(best, h.val_mae);
  }
  CHECK(a.history[static_cast<std::size_t>(a.best_epoch - 1)].val_mae == best);
  CHECK(mean_absolute_error(a.params, all.subspan(10)) == best);
  CHECK_THROWS(train({}, {}, c, 0));
}

TEST_CASE("constant target fit") {
  std::mt19937_64 rng(13);
  std::vector<GraphInput> data;
  for (int i = 0; i < 12; ++i) {
    data.push_back(random_input(4 + i % 4, 4, rng));
    data.back().y = 3.0;
  }
  ModelConfig c = small_config(16, 2, 3, 0.1);
  c.epochs = 50;
  c.batch_size = 4;
  const std::span<const GraphInput> all(data);
  const TrainResult r = train(all.first(9), all.subspan(9), c, 0);
  CHECK(r.params.target_scale == 0.0);
  CHECK(mean_absolute_error(r.params, all.subspan(9)) == 0.0);
}

TEST_CASE("small memorization") {
  std::mt19937_64 rng(14);
  std::vector<GraphInput> data;
  for (int i = 0; i < 10; ++i) {
    data.push_back(random_input(4 + i % 6, 4, rng));
  }
  ModelConfig c = small_config(32, 2, 3, 0.0);
  c.epochs = 300;
  c.batch_size = 10;
  const TrainResult r = train(data, {}, c, 1);
  CHECK(r.best_epoch == 300);
  CHECK(mean_absolute_error(r.params, data) < 0.05);
}

TEST_CASE("model file") {
  std::mt19937_64 rng(15);
  const ModelConfig c = small_config(6, 2, 3, 0.1);
  SavedModel m{random_params(c, 4, rng), {0.5, 1.5, -2.0}};
  m.params.target_mean = 0.25;
  m.params.target_scale = 1.75;
  const std::string bytes = serialize_model(m);
  CHECK(bytes.substr(0, 8) == "SPECTRAM");
  const SavedModel back = deserialize_model(bytes);
  CHECK(back.params.config == c);
  CHECK(back.params.values == m.params.values);
  CHECK(back.train_labels == m.train_labels);
  CHECK(serialize_model(back) == bytes);
  const GraphInput g = random_input(5, 4, rng);
  CHECK(predict(back.params, std::vector<GraphInput>{g}) ==
        predict(m.params, std::vector<GraphInput>{g}));

  CHECK_THROWS_AS(deserialize_model("NOTMODEL" + bytes.substr(8)), SchemaError);
  CHECK_THROWS_AS(deserialize_model(bytes.substr(0, bytes.size() - 3)), SchemaError);
  CHECK_THROWS_AS(deserialize_model(bytes + "x"), SchemaError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.bin"), IoError);
  const std::string json = eval_report_json(EvalReport{0.5, 0.25, {BinReport{0, 1, 2, 3, 0.5}}});
  CHECK(json.find("\"binned_mae\"") != std::string::npos);
}
