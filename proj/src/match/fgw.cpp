// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spectra/match/match.hpp"

namespace spectra::match {
namespace {

double inner(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y) {
  return x.cwiseProduct(y).sum();
}

Eigen::MatrixXd const_cost(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                           const Eigen::VectorXd &p, const Eigen::VectorXd &q) {
  const Eigen::VectorXd ra = a.cwiseProduct(a) * p;
  const Eigen::VectorXd rb = b.cwiseProduct(b) * q;
  return ra * Eigen::RowVectorXd::Ones(q.size()) +
         Eigen::VectorXd::Ones(p.size()) * rb.transpose();
}

double objective_with(const Eigen::MatrixXd &c, const Eigen::MatrixXd &a,
                      const Eigen::MatrixXd &b, const Eigen::MatrixXd &m,
                      const Eigen::MatrixXd &t, double alpha) {
  const double gw = inner(c, t) - 2.0 * inner(a * t * b, t);
  return (1.0 - alpha) * gw + alpha * inner(m, t);
}

}  // namespace

double fgw_objective(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                     const Eigen::MatrixXd &m, const Eigen::MatrixXd &t,
                     double fgw_alpha) {
  const Eigen::VectorXd p = t.rowwise().sum();
  const Eigen::VectorXd q = t.colwise().sum().transpose();
  return objective_with(const_cost(a, b, p, q), a, b, m, t, fgw_alpha);
}

Coupling fgw_coupling(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                      const Eigen::MatrixXd &m, const Eigen::VectorXd &p,
                      const Eigen::VectorXd &q, double fgw_alpha,
                      const FgwOptions &options, std::vector<double> *trace) {
  const Eigen::Index n = p.size();
  const Eigen::Index k = q.size();
  if (a.rows() != n || a.cols() != n || b.rows() != k || b.cols() != k ||
      m.rows() != n || m.cols() != k) {
    throw std::invalid_argument("fgw_coupling: shape mismatch");
  }
  if (fgw_alpha < 0.0 || fgw_alpha > 1.0) {
    throw std::invalid_argument("fgw_coupling: alpha outside [0, 1]");
  }
  const double alpha = fgw_alpha;
  const Eigen::MatrixXd c = const_cost(a, b, p, q);

  Coupling out;
  out.p = p;
  out.q = q;
  out.t = p * q.transpose();
  out.converged = false;
  double f = objective_with(c, a, b, m, out.t, alpha);
  if (trace != nullptr) {
    trace->assign(1, f);
  }
  for (int it = 1; it <= options.max_iterations; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd atb = a * out.t * b;
    const Eigen::MatrixXd grad = (1.0 - alpha) * 2.0 * (c - 2.0 * atb) + alpha * m;
    const Eigen::MatrixXd d = linear_transport(grad, p, q) - out.t;
    // f(T + tau D) = f + lin * tau + quad * tau^2
    const double lin =
        (1.0 - alpha) * (inner(c, d) - 4.0 * inner(atb, d)) + alpha * inner(m, d);
    const double quad = -2.0 * (1.0 - alpha) * inner(a * d * b, d);
    double tau = 0.0;
    if (quad > 0.0) {
      tau = std::clamp(-lin / (2.0 * quad), 0.0, 1.0);
    } else if (lin + quad < 0.0) {
      tau = 1.0;
    }
    if (tau == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd next = out.t + tau * d;
    const double f_next = objective_with(c, a, b, m, next, alpha);
    if (f_next > f) {
      out.converged = true;
      break;
    }
    const double decrease = f - f_next;
    out.t = next;
    f = f_next;
    if (trace != nullptr) {
      trace->push_back(f);
    }
    if (decrease <= options.relative_tolerance * std::abs(f + decrease)) {
      out.converged = true;
      break;
    }
  }
  out.objective = f;
  return out;
}

}  // namespace spectra::match
