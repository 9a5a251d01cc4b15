// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spectra/chem/molecule.hpp"
#include "spectra/chem/sanitize.hpp"

namespace spectra::chem {

inline constexpr int kNumChannels = 3;
enum Channel : int { kBondChannel = 0, kStereoChannel = 1, kConjugationChannel = 2 };

/// Numeric graph: node features, three symmetric channel adjacencies
/// (bond order, stereo code, conjugation flag) and a scalar target.
struct MolGraph {
  Eigen::MatrixXd x;
  std::array<Eigen::MatrixXd, kNumChannels> w;
  double y = 0.0;
  // Per-node tetrahedral tags carried alongside the numeric data. Not a
  // feature column; empty when unknown.
  std::vector<Chirality> chirality;

  int num_nodes() const { return static_cast<int>(x.rows()); }
  // True when some channel has a positive entry at (u, v).
  bool has_edge(int u, int v) const;
};

/// Column layout of MolGraph::x and the discrete value tables.
struct FeatureCodec {
  enum Column : int {
    kElement = 0,
    kCharge = 1,
    kAromatic = 2,
    kDegree = 3,
    kHydrogens = 4,
  };
  static constexpr int kNumColumns = 5;

  // Elements a decoded element column may round to (by atomic number).
  std::vector<int> elements{1, 5, 6, 7, 8, 9, 14, 15, 16, 17, 34, 35, 53};
  // Channel-1 weight at or above which an edge is emitted.
  double edge_threshold = 0.5;

  // Nearest vocabulary element to `value`; ties go to the lighter element.
  // Values below 0.5 decode to 0 (no atom).
  int nearest_element(double value) const;
};

/// Numeric code of a bond order on the bond channel: 1, 1.5, 2, 3.
double bond_channel_value(BondOrder order);
/// Nearest bond order to a channel value; ties go to the lower order.
BondOrder nearest_bond_order(double value);
/// Stereo channel code: none 0, cis 1, trans 2.
double stereo_channel_value(BondStereo stereo);
BondStereo nearest_stereo(double value);

MolGraph mol_to_graph(const Molecule &m, const FeatureCodec &codec, double y);

struct DecodedMolecule {
  Molecule mol;
  SanitizeMode mode = SanitizeMode::kStrict;
};

/// Rounds every node row and every edge with bond-channel weight at or
/// above the threshold to the nearest discrete value, then sanitizes
/// strictly, falling back to relaxed mode. Throws SanitizeError when both
/// fail.
DecodedMolecule graph_to_mol(const MolGraph &g, const FeatureCodec &codec);

/// Rounded Molecule before sanitization.
Molecule decode_unsanitized(const MolGraph &g, const FeatureCodec &codec);

}  // namespace spectra::chem
