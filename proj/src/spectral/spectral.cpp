// SPDX-License-Identifier: Apache-2.0
#include "spectra/spectral/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "spectra/error.hpp"

namespace spectra::spectral {

Eigen::MatrixXd laplacian(const Eigen::MatrixXd &w) {
  Eigen::MatrixXd l = -w;
  l.diagonal() += w.rowwise().sum();
  return l;
}

ChannelLaplacians channel_laplacians(const chem::MolGraph &g) {
  ChannelLaplacians out;
  for (int c = 0; c < chem::kNumChannels; ++c) {
    out[c] = laplacian(g.w[c]);
  }
  return out;
}

void fix_signs(Eigen::MatrixXd &u) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    const double peak = u.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, j)) >= peak - 1e-12 * peak) {
        if (u(i, j) < 0.0) {
          u.col(j) = -u.col(j);
        }
        break;
      }
    }
  }
}

SpectralDecomposition eig_sym(const Eigen::MatrixXd &l) {
  if (l.rows() != l.cols()) {
    throw std::invalid_argument("eig_sym: matrix is not square");
  }
  if (l.size() > 0 && (l - l.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("eig_sym: matrix is not symmetric");
  }
  SpectralDecomposition d;
  if (l.size() == 0) {
    d.values.resize(0);
    d.vectors.resize(0, 0);
    return d;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("symmetric eigensolver did not converge");
  }
  d.values = solver.eigenvalues();
  d.vectors = solver.eigenvectors();
  fix_signs(d.vectors);
  return d;
}

Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd &u_a,
                                 const Eigen::MatrixXd &u_b) {
  const Eigen::MatrixXd m = u_a.transpose() * u_b;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Eigen::MatrixXd orthonormal_factor(const Eigen::MatrixXd &m, double tol) {
  const Eigen::Index n = m.rows();
  const Eigen::Index k = m.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  const Eigen::MatrixXd &r = qr.matrixQR();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double d = r(j, j);
    if (!(std::abs(d) >= tol)) {
      throw DegenerateBasis("interpolated eigenbasis is rank deficient");
    }
    if (d < 0.0) {
      q.col(j) = -q.col(j);
    }
  }
  return q;
}

Eigen::MatrixXd interpolate_spectrum(const SpectralDecomposition &a,
                                     const SpectralDecomposition &b, double mix) {
  if (a.vectors.rows() != b.vectors.rows() || a.vectors.cols() != b.vectors.cols()) {
    throw std::invalid_argument("interpolate_spectrum: size mismatch");
  }
  const Eigen::MatrixXd r = procrustes_align(a.vectors, b.vectors);
  const Eigen::MatrixXd u_b = b.vectors * r;
  const Eigen::MatrixXd blend = (1.0 - mix) * a.vectors + mix * u_b;
  const Eigen::MatrixXd u = orthonormal_factor(blend);
  const Eigen::VectorXd values = (1.0 - mix) * a.values + mix * b.values;
  const Eigen::MatrixXd l = u * values.asDiagonal() * u.transpose();
  return 0.5 * (l + l.transpose());
}

Eigen::MatrixXd interpolate_features(const Eigen::MatrixXd &x_a,
                                     const Eigen::MatrixXd &x_b_perm, double mix) {
  return (1.0 - mix) * x_a + mix * x_b_perm;
}

Eigen::MatrixXd laplacian_to_adjacency(const Eigen::MatrixXd &l) {
  Eigen::MatrixXd w = (-l).cwiseMax(0.0);
  w.diagonal().setZero();
  return 0.5 * (w + w.transpose());
}

}  // namespace spectra::spectral
