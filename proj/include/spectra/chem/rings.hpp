// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "spectra/chem/molecule.hpp"

namespace spectra::chem {

// True for every bond that lies on at least one cycle (i.e. is not a bridge).
std::vector<bool> ring_bond_flags(const Molecule &m);

// Connected-component label per atom, labels numbered in order of first atom.
std::vector<int> connected_components(const Molecule &m, int *count = nullptr);

// All simple cycles of length <= max_size, each as an atom sequence starting
// at its smallest atom index. Only ring bonds are followed.
std::vector<std::vector<int>> simple_cycles(const Molecule &m, int max_size);

}  // namespace spectra::chem
