// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "random_graphs.hpp"
#include "spectra/error.hpp"
#include "spectra/spectral/spectral.hpp"

using namespace spectra;
using namespace spectra::spectral;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double max_abs(const MatrixXd &m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

MatrixXd p2(double weight) {
  MatrixXd w = MatrixXd::Zero(2, 2);
  w(0, 1) = w(1, 0) = weight;
  return w;
}

}  // namespace

TEST_CASE("laplacian examples") {
  const MatrixXd l = laplacian(p2(1.0));
  CHECK(l(0, 0) == 1.0);
  CHECK(l(0, 1) == -1.0);
  CHECK(l(1, 1) == 1.0);
  CHECK(laplacian(MatrixXd::Zero(3, 3)).isZero());
  const MatrixXd l2 = laplacian(p2(2.0));
  CHECK(l2(0, 0) == 2.0);
  CHECK(l2(1, 0) == -2.0);

  chem::MolGraph g;
  g.x = MatrixXd::Zero(2, 5);
  g.w = {p2(1.0), MatrixXd::Zero(2, 2), p2(1.0)};
  const auto ls = channel_laplacians(g);
  CHECK(ls[1].isZero());
  CHECK(ls[2](0, 1) == -1.0);
}

TEST_CASE("eig_sym examples") {
  const SpectralDecomposition d = eig_sym(laplacian(p2(1.0)));
  CHECK(d.values(0) == doctest::Approx(0.0));
  CHECK(d.values(1) == doctest::Approx(2.0));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(d.vectors(0, 0) == doctest::Approx(s));
  CHECK(d.vectors(1, 0) == doctest::Approx(s));
  // Tie in magnitude: the lower index is made nonnegative.
  CHECK(d.vectors(0, 1) == doctest::Approx(s));
  CHECK(d.vectors(1, 1) == doctest::Approx(-s));

  const SpectralDecomposition z = eig_sym(MatrixXd::Zero(3, 3));
  CHECK(z.values.isZero());
  CHECK(z.vectors.isApprox(MatrixXd::Identity(3, 3)));

  MatrixXd tri = MatrixXd::Ones(3, 3);
  tri.diagonal().setZero();
  const SpectralDecomposition t = eig_sym(laplacian(tri));
  CHECK(t.values(0) == doctest::Approx(0.0));
  CHECK(t.values(1) == doctest::Approx(3.0));
  CHECK(t.values(2) == doctest::Approx(3.0));

  MatrixXd bad = MatrixXd::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(eig_sym(bad), std::invalid_argument);
}

TEST_CASE("eigendecomposition properties on random graphs") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + static_cast<int>(rng() % 30);
    const MatrixXd w = random_weighted_graph(n, rng);
    const MatrixXd l = laplacian(w);
    CHECK(max_abs(l.rowwise().sum()) < 1e-8);
    CHECK(laplacian_to_adjacency(l) == w);
    const SpectralDecomposition d = eig_sym(l);
    const MatrixXd rebuilt = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
    CHECK(max_abs(rebuilt - l) < 1e-6);
    CHECK(max_abs(d.vectors.transpose() * d.vectors - MatrixXd::Identity(n, n)) < 1e-8);
    CHECK(d.values(0) >= -1e-8);
    for (int i = 1; i < n; ++i) {
      CHECK(d.values(i) >= d.values(i - 1));
    }
  }
}

TEST_CASE("procrustes examples") {
  std::mt19937_64 rng(5);
  const MatrixXd u = random_orthogonal(5, rng);
  CHECK(max_abs(procrustes_align(u, u) - MatrixXd::Identity(5, 5)) < 1e-12);

  VectorXd signs(5);
  signs << 1, -1, -1, 1, -1;
  const MatrixXd r = procrustes_align(u, u * signs.asDiagonal());
  CHECK(max_abs(r - MatrixXd(signs.asDiagonal())) < 1e-12);

  const MatrixXd v = random_orthogonal(5, rng);
  const MatrixXd best = procrustes_align(u, v);
  CHECK(max_abs(best.transpose() * best - MatrixXd::Identity(5, 5)) < 1e-10);
  const MatrixXd target = u.transpose() * v;
  const double best_dist = (target - best).norm();
  for (int t = 0; t < 1000; ++t) {
    CHECK(best_dist <= (target - random_orthogonal(5, rng)).norm() + 1e-12);
  }
}

TEST_CASE("interpolate_spectrum examples") {
  const SpectralDecomposition a = eig_sym(laplacian(p2(1.0)));
  const SpectralDecomposition b = eig_sym(laplacian(p2(3.0)));
  const MatrixXd mid = interpolate_spectrum(a, b, 0.5);
  CHECK(mid(0, 0) == doctest::Approx(2.0));
  CHECK(mid(0, 1) == doctest::Approx(-2.0));
  CHECK(mid(1, 1) == doctest::Approx(2.0));
  const MatrixXd w = laplacian_to_adjacency(mid);
  CHECK(w(0, 1) == doctest::Approx(2.0));
  CHECK(w(0, 0) == 0.0);

  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng() % 20);
    const MatrixXd la = laplacian(random_weighted_graph(n, rng));
    const MatrixXd lb = laplacian(random_weighted_graph(n, rng));
    const SpectralDecomposition da = eig_sym(la);
    const SpectralDecomposition db = eig_sym(lb);
    CHECK(max_abs(interpolate_spectrum(da, db, 0.0) - la) < 1e-8);
    for (int k = 1; k <= 9; ++k) {
      const MatrixXd lm = interpolate_spectrum(da, db, k / 10.0);
      CHECK(max_abs(lm - lm.transpose()) < 1e-10);
      const MatrixXd wm = laplacian_to_adjacency(lm);
      CHECK(max_abs(wm - wm.transpose()) < 1e-10);
      CHECK(wm.minCoeff() >= 0.0);
    }
    const MatrixXd end = interpolate_spectrum(da, db, 1.0);
    const SpectralDecomposition de = eig_sym(end);
    CHECK(max_abs(de.values - db.values) < 1e-8);
  }
}

TEST_CASE("orthonormal factor") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + static_cast<int>(rng() % 12);
    const MatrixXd q = random_orthogonal(n, rng);
    const MatrixXd u = orthonormal_factor(0.5 * q + 0.5 * random_orthogonal(n, rng));
    CHECK(max_abs(u.transpose() * u - MatrixXd::Identity(n, n)) < 1e-8);
  }
  CHECK_THROWS_AS(orthonormal_factor(MatrixXd::Zero(3, 3)), DegenerateBasis);
  const MatrixXd id = MatrixXd::Identity(4, 4);
  CHECK(max_abs(orthonormal_factor(id) - id) < 1e-15);
}

TEST_CASE("interpolate_features") {
  MatrixXd a(1, 5), b(1, 5);
  a << 6, 0, 0, 1, 3;
  b << 8, 0, 0, 1, 1;
  MatrixXd expect(1, 5);
  expect << 7, 0, 0, 1, 2;
  CHECK(interpolate_features(a, b, 0.5) == expect);
  CHECK(interpolate_features(a, b, 0.0) == a);
  CHECK(interpolate_features(a, a, 0.3).isApprox(a));
}

TEST_CASE("laplacian_to_adjacency clipping") {
  MatrixXd l(2, 2);
  l << 1, 0.3, 0.3, 1;
  CHECK(laplacian_to_adjacency(l).isZero());
}
