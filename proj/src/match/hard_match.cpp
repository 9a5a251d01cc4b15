// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <stdexcept>

#include "spectra/match/match.hpp"

namespace spectra::match {
namespace {

chem::MolGraph pad(const chem::MolGraph &g, int n) {
  const int old = g.num_nodes();
  chem::MolGraph out;
  out.y = g.y;
  out.x = Eigen::MatrixXd::Zero(n, g.x.cols());
  out.x.topRows(old) = g.x;
  for (int c = 0; c < chem::kNumChannels; ++c) {
    out.w[c] = Eigen::MatrixXd::Zero(n, n);
    out.w[c].topLeftCorner(old, old) = g.w[c];
  }
  out.chirality = g.chirality;
  if (!out.chirality.empty()) {
    out.chirality.resize(n, chem::Chirality::kNone);
  }
  return out;
}

}  // namespace

PaddedPair pad_pair(const chem::MolGraph &a, const chem::MolGraph &b) {
  if (a.x.cols() != b.x.cols()) {
    throw std::invalid_argument("pad_pair: feature widths differ");
  }
  PaddedPair out;
  out.n_a = a.num_nodes();
  out.n_b = b.num_nodes();
  out.n = std::max(out.n_a, out.n_b);
  out.a = pad(a, out.n);
  out.b = pad(b, out.n);
  return out;
}

Eigen::MatrixXd feature_cost(const Eigen::MatrixXd &x_a, const Eigen::MatrixXd &x_b,
                             int real_a, int real_b) {
  if (x_a.cols() != x_b.cols()) {
    throw std::invalid_argument("feature_cost: feature widths differ");
  }
  const Eigen::Index ra = real_a < 0 ? x_a.rows() : real_a;
  const Eigen::Index rb = real_b < 0 ? x_b.rows() : real_b;
  const Eigen::Index d = x_a.cols();
  Eigen::MatrixXd za = Eigen::MatrixXd::Zero(x_a.rows(), d);
  Eigen::MatrixXd zb = Eigen::MatrixXd::Zero(x_b.rows(), d);
  const double count = static_cast<double>(ra + rb);
  for (Eigen::Index c = 0; c < d && count > 0; ++c) {
    const double mean =
        (x_a.col(c).head(ra).sum() + x_b.col(c).head(rb).sum()) / count;
    const double var = ((x_a.col(c).head(ra).array() - mean).square().sum() +
                        (x_b.col(c).head(rb).array() - mean).square().sum()) /
                       count;
    if (var <= 0.0) {
      continue;
    }
    const double sd = std::sqrt(var);
    za.col(c) = (x_a.col(c).array() - mean) / sd;
    zb.col(c) = (x_b.col(c).array() - mean) / sd;
  }
  Eigen::MatrixXd m(x_a.rows(), x_b.rows());
  for (Eigen::Index i = 0; i < x_a.rows(); ++i) {
    for (Eigen::Index j = 0; j < x_b.rows(); ++j) {
      m(i, j) = (za.row(i) - zb.row(j)).squaredNorm();
    }
  }
  return m;
}

chem::MolGraph reorder(const chem::MolGraph &g, const std::vector<int> &perm) {
  const int n = g.num_nodes();
  chem::MolGraph out;
  out.y = g.y;
  out.x.resize(n, g.x.cols());
  for (int i = 0; i < n; ++i) {
    out.x.row(i) = g.x.row(perm[i]);
  }
  for (int c = 0; c < chem::kNumChannels; ++c) {
    out.w[c].resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        out.w[c](i, k) = g.w[c](perm[i], perm[k]);
      }
    }
  }
  if (!g.chirality.empty()) {
    out.chirality.resize(n);
    for (int i = 0; i < n; ++i) {
      out.chirality[i] = g.chirality[perm[i]];
    }
  }
  return out;
}

MatchResult hard_match(const chem::MolGraph &a, const chem::MolGraph &b,
                       double fgw_alpha, const FgwOptions &options) {
  MatchResult out;
  out.fgw_alpha = fgw_alpha;
  out.padded = pad_pair(a, b);
  const PaddedPair &pp = out.padded;
  const Eigen::MatrixXd m = feature_cost(pp.a.x, pp.b.x, pp.n_a, pp.n_b);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(pp.n, 1.0 / pp.n);
  out.coupling = fgw_coupling(pp.a.w[chem::kBondChannel], pp.b.w[chem::kBondChannel],
                              m, uniform, uniform, fgw_alpha, options);
  out.permutation = hungarian(-out.coupling.t);
  out.b_permuted = reorder(pp.b, out.permutation);
  return out;
}

}  // namespace spectra::match
