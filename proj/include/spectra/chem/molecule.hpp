// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spectra::chem {

enum class BondOrder : std::uint8_t { kSingle, kDouble, kTriple, kAromatic };

enum class BondStereo : std::uint8_t { kNone, kCis, kTrans };

// Tetrahedral parity. The reference neighbour order is: the implicit
// hydrogen first (when the atom carries exactly one), then the bonded
// neighbours sorted by ascending atom index. kCounterClockwise is SMILES '@'
// with respect to that order.
enum class Chirality : std::uint8_t { kNone, kCounterClockwise, kClockwise };

struct Atom {
  int element = 6;
  int formal_charge = 0;
  bool aromatic = false;
  // Total hydrogen count attached to this atom (implicit hydrogens are
  // materialised here by the parser).
  int explicit_h = 0;
  Chirality chirality = Chirality::kNone;

  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  int u = 0;
  int v = 0;
  BondOrder order = BondOrder::kSingle;
  BondStereo stereo = BondStereo::kNone;
  bool conjugated = false;
  // Reference substituents for cis/trans: a neighbour of u and a neighbour
  // of v (excluding the partner). -1 when the bond carries no stereo.
  int stereo_ref_u = -1;
  int stereo_ref_v = -1;

  friend bool operator==(const Bond &, const Bond &) = default;
};

double bond_order_value(BondOrder order);

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }

  // Index of the bond joining a and b, or -1.
  int find_bond(int a, int b) const;

  friend bool operator==(const Molecule &, const Molecule &) = default;
};

// Per-atom adjacency: list of (neighbour, bond index) in bond-list order.
struct Neighbor {
  int atom;
  int bond;
};
std::vector<std::vector<Neighbor>> adjacency(const Molecule &m);

// Relabels atoms: atom i of `m` becomes atom perm[i] of the result. Bond
// endpoints, stereo references and chirality parities are remapped so the
// result describes the same molecule.
Molecule permute_atoms(const Molecule &m, std::span<const int> perm);

// Sorts bonds by (u, v) with u < v; swaps stereo references accordingly.
void normalize_bond_list(Molecule &m);

// Parity (0 even, 1 odd) of the permutation taking `from` onto `to`. Both
// must contain the same distinct values.
int permutation_parity(std::span<const int> from, std::span<const int> to);

// Reference neighbour order used by Atom::chirality; -1 stands for the
// implicit hydrogen.
std::vector<int> chiral_reference_order(const Molecule &m, int atom);

Chirality flip(Chirality c);

}  // namespace spectra::chem
