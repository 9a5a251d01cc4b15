// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

#include "spectra/match/match.hpp"

namespace spectra::match {
namespace {

struct Assignment {
  std::vector<int> col_of;
  std::vector<int> row_of;
  std::vector<double> u;
  std::vector<double> v;
};

// Shortest augmenting path method with row and column potentials.
Assignment solve(const Eigen::MatrixXd &a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment out;
  out.col_of.assign(n, -1);
  out.row_of.assign(n, -1);
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  for (int j = 1; j <= n; ++j) {
    out.col_of[p[j] - 1] = j - 1;
    out.row_of[j - 1] = p[j] - 1;
  }
  return out;
}

}  // namespace

std::vector<int> hungarian(const Eigen::MatrixXd &cost) {
  if (cost.rows() != cost.cols()) {
    throw std::invalid_argument("hungarian: cost matrix must be square");
  }
  if (!cost.allFinite()) {
    throw std::invalid_argument("hungarian: non-finite cost");
  }
  const int n = static_cast<int>(cost.rows());
  if (n == 0) {
    return {};
  }
  Assignment s = solve(cost);
  const double tol = 1e-9 * std::max(1.0, cost.cwiseAbs().maxCoeff());
  auto tight = [&](int i, int j) { return cost(i, j) - s.u[i] - s.v[j] <= tol; };

  // Every optimal assignment uses only tight edges of the optimal duals, so
  // the lexicographically smallest one is found greedily row by row,
  // rerouting the current matching along alternating tight paths.
  std::vector<bool> fixed_col(n, false);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == s.col_of[i]) {
        break;
      }
      if (fixed_col[j] || !tight(i, j)) {
        continue;
      }
      const int start = s.row_of[j];
      const int target = s.col_of[i];
      std::vector<int> parent_row(n, -1);
      std::vector<bool> seen_col(n, false);
      seen_col[j] = true;
      std::deque<int> queue{start};
      bool found = false;
      while (!queue.empty() && !found) {
        const int x = queue.front();
        queue.pop_front();
        for (int c = 0; c < n; ++c) {
          if (seen_col[c] || fixed_col[c] || !tight(x, c)) {
            continue;
          }
          seen_col[c] = true;
          parent_row[c] = x;
          if (c == target) {
            found = true;
            break;
          }
          queue.push_back(s.row_of[c]);
        }
      }
      if (!found) {
        continue;
      }
      int c = target;
      while (true) {
        const int x = parent_row[c];
        const int previous = s.col_of[x];
        s.col_of[x] = c;
        s.row_of[c] = x;
        if (x == start) {
          break;
        }
        c = previous;
      }
      s.col_of[i] = j;
      s.row_of[j] = i;
      break;
    }
    fixed_col[s.col_of[i]] = true;
  }
  return s.col_of;
}

double assignment_cost(const Eigen::MatrixXd &cost, const std::vector<int> &perm) {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    total += cost(static_cast<Eigen::Index>(i), perm[i]);
  }
  return total;
}

}  // namespace spectra::match
