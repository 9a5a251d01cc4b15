// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spectra/match/match.hpp"

namespace spectra::match {
namespace {

bool is_uniform(const Eigen::VectorXd &v) {
  if (v.size() == 0) {
    return true;
  }
  const double first = v(0);
  return (v.array() - first).abs().maxCoeff() <= 1e-15 * std::max(1.0, std::abs(first));
}

// Successive shortest paths on the bipartite transportation network.
// Nodes: 0 source, 1..n rows, n+1..n+m columns, n+m+1 sink.
Eigen::MatrixXd min_cost_flow(const Eigen::MatrixXd &cost, const Eigen::VectorXd &p,
                              const Eigen::VectorXd &q) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  const double eps = 1e-15;
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n, m);
  Eigen::VectorXd supply = p;
  Eigen::VectorXd demand = q;
  const int nodes = n + m + 2;
  const int sink = n + m + 1;
  while (true) {
    std::vector<double> dist(nodes, inf);
    std::vector<int> prev(nodes, -1);
    dist[0] = 0.0;
    // Bellman-Ford: residual arcs are source->row (supply), row->col
    // (always), col->row (positive flow), col->sink (demand).
    for (int round = 0; round < nodes; ++round) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        if (supply(i) > eps && dist[0] < dist[1 + i]) {
          dist[1 + i] = dist[0];
          prev[1 + i] = 0;
          changed = true;
        }
      }
      for (int i = 0; i < n; ++i) {
        if (dist[1 + i] == inf) {
          continue;
        }
        for (int j = 0; j < m; ++j) {
          const double d = dist[1 + i] + cost(i, j);
          if (d < dist[1 + n + j] - 1e-15) {
            dist[1 + n + j] = d;
            prev[1 + n + j] = 1 + i;
            changed = true;
          }
        }
      }
      for (int j = 0; j < m; ++j) {
        if (dist[1 + n + j] == inf) {
          continue;
        }
        for (int i = 0; i < n; ++i) {
          if (flow(i, j) > eps) {
            const double d = dist[1 + n + j] - cost(i, j);
            if (d < dist[1 + i] - 1e-15) {
              dist[1 + i] = d;
              prev[1 + i] = 1 + n + j;
              changed = true;
            }
          }
        }
        if (demand(j) > eps && dist[1 + n + j] < dist[sink]) {
          dist[sink] = dist[1 + n + j];
          prev[sink] = 1 + n + j;
          changed = true;
        }
      }
      if (!changed) {
        break;
      }
    }
    if (dist[sink] == inf) {
      break;
    }
    // Bottleneck along the path.
    double amount = inf;
    for (int x = sink; x != 0; x = prev[x]) {
      const int y = prev[x];
      if (x == sink) {
        amount = std::min(amount, demand(y - 1 - n));
      } else if (y == 0) {
        amount = std::min(amount, supply(x - 1));
      } else if (y > n) {
        amount = std::min(amount, flow(x - 1, y - 1 - n));
      }
    }
    for (int x = sink; x != 0; x = prev[x]) {
      const int y = prev[x];
      if (x == sink) {
        demand(y - 1 - n) -= amount;
      } else if (y == 0) {
        supply(x - 1) -= amount;
      } else if (y > n) {
        flow(x - 1, y - 1 - n) -= amount;
      } else {
        flow(y - 1, x - 1 - n) += amount;
      }
    }
  }
  return flow;
}

}  // namespace

Eigen::MatrixXd linear_transport(const Eigen::MatrixXd &m, const Eigen::VectorXd &p,
                                 const Eigen::VectorXd &q) {
  if (m.rows() != p.size() || m.cols() != q.size()) {
    throw std::invalid_argument("linear_transport: shape mismatch");
  }
  if (m.rows() == m.cols() && is_uniform(p) && is_uniform(q) && m.rows() > 0) {
    const int n = static_cast<int>(m.rows());
    const std::vector<int> perm = hungarian(m);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      t(i, perm[i]) = p(i);
    }
    return t;
  }
  return min_cost_flow(m, p, q);
}

}  // namespace spectra::match
