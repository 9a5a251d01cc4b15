// SPDX-License-Identifier: Apache-2.0
#include "spectra/chem/descriptors.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

#include "spectra/chem/elements.hpp"
#include "spectra/chem/rings.hpp"

namespace spectra::chem {
namespace {

constexpr std::uint32_t kFnvOffset = 2166136261u;
constexpr std::uint32_t kFnvPrime = 16777619u;

std::uint32_t fnv_mix(std::uint32_t h, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) {
    h ^= (value >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

int bond_code(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return 1;
  case BondOrder::kDouble:
    return 2;
  case BondOrder::kTriple:
    return 3;
  case BondOrder::kAromatic:
    return 4;
  }
  return 0;
}

}  // namespace

double molecular_weight(const Molecule &m) {
  double total = 0.0;
  for (const Atom &a : m.atoms) {
    total += atomic_mass(a.element) + a.explicit_h * atomic_mass(1);
  }
  return total;
}

int ring_count(const Molecule &m) {
  int components = 0;
  connected_components(m, &components);
  return m.num_bonds() - m.num_atoms() + components;
}

std::vector<bool> morgan_fingerprint(const Molecule &m, int radius, int nbits) {
  std::vector<bool> bits(static_cast<std::size_t>(std::max(nbits, 1)), false);
  const int n = m.num_atoms();
  const auto adj = adjacency(m);
  std::vector<std::uint32_t> ids(n);
  for (int i = 0; i < n; ++i) {
    const Atom &a = m.atoms[i];
    std::uint32_t h = kFnvOffset;
    h = fnv_mix(h, static_cast<std::uint32_t>(a.element));
    h = fnv_mix(h, static_cast<std::uint32_t>(a.formal_charge));
    h = fnv_mix(h, static_cast<std::uint32_t>(adj[i].size()));
    h = fnv_mix(h, static_cast<std::uint32_t>(a.explicit_h));
    h = fnv_mix(h, a.aromatic ? 1u : 0u);
    ids[i] = h;
  }
  auto set_bits = [&] {
    for (std::uint32_t id : ids) {
      bits[id % bits.size()] = true;
    }
  };
  set_bits();
  for (int round = 1; round <= radius; ++round) {
    std::vector<std::uint32_t> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint32_t>> env;
      for (const Neighbor &nb : adj[i]) {
        env.emplace_back(bond_code(m.bonds[nb.bond].order), ids[nb.atom]);
      }
      std::sort(env.begin(), env.end());
      std::uint32_t h = fnv_mix(kFnvOffset, static_cast<std::uint32_t>(round));
      h = fnv_mix(h, ids[i]);
      for (const auto &[code, id] : env) {
        h = fnv_mix(h, static_cast<std::uint32_t>(code));
        h = fnv_mix(h, id);
      }
      next[i] = h;
    }
    ids = std::move(next);
    set_bits();
  }
  return bits;
}

double tanimoto(const std::vector<bool> &a, const std::vector<bool> &b) {
  const std::size_t n = std::min(a.size(), b.size());
  int both = 0;
  int either = 0;
  for (std::size_t i = 0; i < n; ++i) {
    both += (a[i] && b[i]) ? 1 : 0;
    either += (a[i] || b[i]) ? 1 : 0;
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / either;
}

}  // namespace spectra::chem
