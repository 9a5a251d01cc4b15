// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spectra/chem/molecule.hpp"
#include "spectra/chem/sanitize.hpp"

namespace spectra::chem {

/// Parses a SMILES string.
///
/// Supported: organic-subset atoms, bracket atoms with charge, hydrogen
/// count and tetrahedral chirality (@/@@), ring closures (digits and %nn),
/// branches, the bond symbols - = # : / \ and dot-separated components.
/// Isotopes, wildcards and atom classes are rejected. Implicit hydrogens of
/// unbracketed atoms are assigned from the default valence and stored in
/// Atom::explicit_h. Text after the first whitespace is ignored.
///
/// Throws SyntaxError on malformed input and ValenceError when an atom
/// exceeds its largest allowed valence. The result is not sanitized.
Molecule parse_smiles(std::string_view text);

/// parse_smiles followed by sanitize(mode).
Molecule mol_from_smiles(std::string_view text,
                         SanitizeMode mode = SanitizeMode::kStrict);

/// Atom equivalence classes from iterative neighbourhood refinement of
/// (element, charge, degree, hydrogens, aromatic), without tie-breaking.
/// Class ids are ordered, dense and start at 0.
std::vector<int> symmetry_classes(const Molecule &m);

/// Canonical atom ranks (0 = first). Ranks are a permutation of 0..n-1.
std::vector<int> canonical_ranks(const Molecule &m);

/// Canonical SMILES of a sanitized molecule. Output is independent of the
/// input atom order for molecules whose symmetry classes are resolved by
/// neighbourhood refinement.
std::string write_canonical_smiles(const Molecule &m);

/// Hydrogen count an unbracketed organic atom would receive from the parser.
int default_implicit_h(const Molecule &m, int atom);

}  // namespace spectra::chem
