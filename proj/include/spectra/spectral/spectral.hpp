// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include <Eigen/Core>

#include "spectra/chem/codec.hpp"

namespace spectra::spectral {

using ChannelLaplacians = std::array<Eigen::MatrixXd, chem::kNumChannels>;

/// Unnormalized Laplacian D - W.
Eigen::MatrixXd laplacian(const Eigen::MatrixXd &w);

ChannelLaplacians channel_laplacians(const chem::MolGraph &g);

struct SpectralDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
};

/// Full symmetric eigendecomposition. Each eigenvector is signed so that
/// its largest-magnitude entry is nonnegative (lowest index on ties).
/// Throws std::invalid_argument when `l` is not symmetric within 1e-10 and
/// ConvergenceError when the solver fails.
SpectralDecomposition eig_sym(const Eigen::MatrixXd &l);

/// Flips column signs in place to the convention used by eig_sym.
void fix_signs(Eigen::MatrixXd &u);

/// Orthogonal polar factor P Q^T of U_A^T U_B (P S Q^T its SVD).
Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd &u_a,
                                 const Eigen::MatrixXd &u_b);

/// Orthonormal QR factor with a nonnegative triangular diagonal. Throws
/// DegenerateBasis when a diagonal entry falls below `tol`.
Eigen::MatrixXd orthonormal_factor(const Eigen::MatrixXd &m, double tol = 1e-8);

/// U_B is rotated onto U_A, eigenvectors and eigenvalues are blended
/// linearly, the basis is re-orthonormalized and the Laplacian rebuilt
/// (symmetrized).
Eigen::MatrixXd interpolate_spectrum(const SpectralDecomposition &a,
                                     const SpectralDecomposition &b, double mix);

Eigen::MatrixXd interpolate_features(const Eigen::MatrixXd &x_a,
                                     const Eigen::MatrixXd &x_b_perm, double mix);

/// max(0, -L) off the diagonal, zero diagonal, symmetrized.
Eigen::MatrixXd laplacian_to_adjacency(const Eigen::MatrixXd &l);

}  // namespace spectra::spectral
