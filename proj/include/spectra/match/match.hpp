// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Core>

#include "spectra/chem/codec.hpp"

namespace spectra::match {

struct Coupling {
  Eigen::MatrixXd t;
  Eigen::VectorXd p;
  Eigen::VectorXd q;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct PaddedPair {
  chem::MolGraph a;
  chem::MolGraph b;
  int n = 0;
  int n_a = 0;  // real nodes of a
  int n_b = 0;  // real nodes of b
};

/// Zero-pads both graphs (features, channels, chirality tags) to the larger
/// node count.
PaddedPair pad_pair(const chem::MolGraph &a, const chem::MolGraph &b);

/// Squared Euclidean distances between rows after column standardization.
/// Column mean and population standard deviation come from the first
/// `real_a` rows of x_a and `real_b` rows of x_b (all rows when negative);
/// every row is standardized with them. Zero-variance columns contribute 0.
Eigen::MatrixXd feature_cost(const Eigen::MatrixXd &x_a, const Eigen::MatrixXd &x_b,
                             int real_a = -1, int real_b = -1);

/// Minimum-cost assignment: result[i] is the column given to row i. Among
/// optimal assignments the lexicographically smallest is returned.
std::vector<int> hungarian(const Eigen::MatrixXd &cost);

/// Sum of cost(i, perm[i]).
double assignment_cost(const Eigen::MatrixXd &cost, const std::vector<int> &perm);

/// Exact transport plan minimizing <M, T> with marginals p and q.
Eigen::MatrixXd linear_transport(const Eigen::MatrixXd &m, const Eigen::VectorXd &p,
                                 const Eigen::VectorXd &q);

struct FgwOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-9;
};

/// (1 - alpha) * GW(A, B, T) + alpha * <M, T> for the squared loss.
double fgw_objective(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                     const Eigen::MatrixXd &m, const Eigen::MatrixXd &t,
                     double fgw_alpha);

/// Conditional-gradient solver for the fused Gromov-Wasserstein problem,
/// started from p q^T. Each linearized step is solved exactly and followed
/// by an exact line search on the quadratic objective. `converged` is false
/// when the iteration cap was hit; the returned plan is still feasible.
/// The per-iteration objective trace is written to `trace` when given.
Coupling fgw_coupling(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                      const Eigen::MatrixXd &m, const Eigen::VectorXd &p,
                      const Eigen::VectorXd &q, double fgw_alpha,
                      const FgwOptions &options = {},
                      std::vector<double> *trace = nullptr);

struct MatchResult {
  std::vector<int> permutation;  // B node assigned to each A node
  Coupling coupling;
  double fgw_alpha = 0.0;
  PaddedPair padded;
  chem::MolGraph b_permuted;  // padded B reordered onto A's nodes
};

/// Reorders a graph: node i of the result is node perm[i] of g.
chem::MolGraph reorder(const chem::MolGraph &g, const std::vector<int> &perm);

/// pad -> feature cost -> FGW on bond-channel adjacencies with uniform
/// marginals -> Hungarian rounding of -T.
MatchResult hard_match(const chem::MolGraph &a, const chem::MolGraph &b,
                       double fgw_alpha, const FgwOptions &options = {});

}  // namespace spectra::match
