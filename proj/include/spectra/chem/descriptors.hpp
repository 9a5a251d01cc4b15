// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "spectra/chem/molecule.hpp"

namespace spectra::chem {

/// Sum of standard atomic weights, hydrogens included (g/mol).
double molecular_weight(const Molecule &m);

/// Cycle rank |E| - |V| + number of connected components.
int ring_count(const Molecule &m);

/// Folded ECFP-style fingerprint. Radius-0 identifiers hash (element,
/// charge, degree, hydrogens, aromatic); each round rehashes an atom's
/// identifier with its sorted (bond order, neighbour identifier) pairs.
std::vector<bool> morgan_fingerprint(const Molecule &m, int radius, int nbits);

/// |a AND b| / |a OR b|; 0 when both are empty.
double tanimoto(const std::vector<bool> &a, const std::vector<bool> &b);

}  // namespace spectra::chem
