// SPDX-License-Identifier: Apache-2.0
#include "spectra/chem/rings.hpp"

#include <algorithm>
#include <functional>

namespace spectra::chem {

std::vector<bool> ring_bond_flags(const Molecule &m) {
  const int n = m.num_atoms();
  const auto adj = adjacency(m);
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> ring(m.bonds.size(), true);
  int timer = 0;

  // Iterative Tarjan bridge search.
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) {
      continue;
    }
    std::vector<Frame> stack{{root, -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame &f = stack.back();
      if (f.next < adj[f.atom].size()) {
        const Neighbor nb = adj[f.atom][f.next++];
        if (nb.bond == f.parent_bond) {
          continue;
        }
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame &parent = stack.back();
          low[parent.atom] = std::min(low[parent.atom], low[done.atom]);
          if (low[done.atom] > disc[parent.atom]) {
            ring[done.parent_bond] = false;
          }
        }
      }
    }
  }
  return ring;
}

std::vector<int> connected_components(const Molecule &m, int *count) {
  const int n = m.num_atoms();
  const auto adj = adjacency(m);
  std::vector<int> label(n, -1);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) {
      continue;
    }
    std::vector<int> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (const Neighbor &nb : adj[a]) {
        if (label[nb.atom] < 0) {
          label[nb.atom] = next;
          stack.push_back(nb.atom);
        }
      }
    }
    ++next;
  }
  if (count != nullptr) {
    *count = next;
  }
  return label;
}

std::vector<std::vector<int>> simple_cycles(const Molecule &m, int max_size) {
  const int n = m.num_atoms();
  const auto ring = ring_bond_flags(m);
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < m.num_bonds(); ++i) {
    if (ring[i]) {
      adj[m.bonds[i].u].push_back(m.bonds[i].v);
      adj[m.bonds[i].v].push_back(m.bonds[i].u);
    }
  }
  for (auto &a : adj) {
    std::sort(a.begin(), a.end());
  }

  std::vector<std::vector<int>> cycles;
  std::vector<int> path;
  std::vector<bool> on_path(n, false);
  // Each cycle is reported once: rooted at its smallest atom, with the
  // second atom smaller than the last.
  std::function<void(int, int)> extend = [&](int root, int atom) {
    for (int nb : adj[atom]) {
      if (nb < root) {
        continue;
      }
      if (nb == root) {
        if (path.size() >= 3 && path[1] < path.back()) {
          cycles.push_back(path);
        }
        continue;
      }
      if (on_path[nb] || static_cast<int>(path.size()) >= max_size) {
        continue;
      }
      on_path[nb] = true;
      path.push_back(nb);
      extend(root, nb);
      path.pop_back();
      on_path[nb] = false;
    }
  };
  for (int root = 0; root < n; ++root) {
    if (adj[root].size() < 2) {
      continue;
    }
    path.assign(1, root);
    on_path[root] = true;
    extend(root, root);
    on_path[root] = false;
  }
  return cycles;
}

}  // namespace spectra::chem
