// SPDX-License-Identifier: Apache-2.0
#include "spectra/chem/molecule.hpp"

#include <algorithm>
#include <cassert>
#include <utility>

namespace spectra::chem {

double bond_order_value(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return 1.0;
  case BondOrder::kDouble:
    return 2.0;
  case BondOrder::kTriple:
    return 3.0;
  case BondOrder::kAromatic:
    return 1.5;
  }
  return 0.0;
}

int Molecule::find_bond(int a, int b) const {
  for (int i = 0; i < num_bonds(); ++i) {
    const Bond &bd = bonds[i];
    if ((bd.u == a && bd.v == b) || (bd.u == b && bd.v == a)) {
      return i;
    }
  }
  return -1;
}

std::vector<std::vector<Neighbor>> adjacency(const Molecule &m) {
  std::vector<std::vector<Neighbor>> adj(m.atoms.size());
  for (int i = 0; i < m.num_bonds(); ++i) {
    adj[m.bonds[i].u].push_back({m.bonds[i].v, i});
    adj[m.bonds[i].v].push_back({m.bonds[i].u, i});
  }
  return adj;
}

int permutation_parity(std::span<const int> from, std::span<const int> to) {
  assert(from.size() == to.size());
  std::vector<int> work(from.begin(), from.end());
  int swaps = 0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (work[i] == to[i]) {
      continue;
    }
    auto it = std::find(work.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                        work.end(), to[i]);
    assert(it != work.end());
    std::iter_swap(work.begin() + static_cast<std::ptrdiff_t>(i), it);
    ++swaps;
  }
  return swaps & 1;
}

Chirality flip(Chirality c) {
  switch (c) {
  case Chirality::kCounterClockwise:
    return Chirality::kClockwise;
  case Chirality::kClockwise:
    return Chirality::kCounterClockwise;
  default:
    return c;
  }
}

std::vector<int> chiral_reference_order(const Molecule &m, int atom) {
  std::vector<int> order;
  if (m.atoms[atom].explicit_h == 1) {
    order.push_back(-1);
  }
  std::vector<int> nbrs;
  for (const Bond &b : m.bonds) {
    if (b.u == atom) {
      nbrs.push_back(b.v);
    } else if (b.v == atom) {
      nbrs.push_back(b.u);
    }
  }
  std::sort(nbrs.begin(), nbrs.end());
  order.insert(order.end(), nbrs.begin(), nbrs.end());
  return order;
}

void normalize_bond_list(Molecule &m) {
  for (Bond &b : m.bonds) {
    if (b.u > b.v) {
      std::swap(b.u, b.v);
      std::swap(b.stereo_ref_u, b.stereo_ref_v);
    }
  }
  std::sort(m.bonds.begin(), m.bonds.end(), [](const Bond &a, const Bond &b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });
}

Molecule permute_atoms(const Molecule &m, std::span<const int> perm) {
  assert(perm.size() == m.atoms.size());
  Molecule out;
  out.atoms.resize(m.atoms.size());
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    out.atoms[perm[i]] = m.atoms[i];
  }
  out.bonds = m.bonds;
  for (Bond &b : out.bonds) {
    b.u = perm[b.u];
    b.v = perm[b.v];
    if (b.stereo_ref_u >= 0) {
      b.stereo_ref_u = perm[b.stereo_ref_u];
    }
    if (b.stereo_ref_v >= 0) {
      b.stereo_ref_v = perm[b.stereo_ref_v];
    }
  }
  normalize_bond_list(out);
  // A chirality tag is defined against index-sorted neighbours, so it flips
  // whenever the relabelling reorders them oddly.
  for (int i = 0; i < m.num_atoms(); ++i) {
    if (m.atoms[i].chirality == Chirality::kNone) {
      continue;
    }
    std::vector<int> old_order = chiral_reference_order(m, i);
    for (int &x : old_order) {
      if (x >= 0) {
        x = perm[x];
      }
    }
    const std::vector<int> new_order = chiral_reference_order(out, perm[i]);
    if (permutation_parity(old_order, new_order) != 0) {
      out.atoms[perm[i]].chirality = flip(out.atoms[perm[i]].chirality);
    }
  }
  return out;
}

}  // namespace spectra::chem
