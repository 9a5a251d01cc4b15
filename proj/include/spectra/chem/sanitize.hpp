// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "spectra/chem/molecule.hpp"

namespace spectra::chem {

enum class SanitizeMode { kStrict, kRelaxed };

std::string_view to_string(SanitizeMode mode);

/// Returns a sanitized copy of `m`.
///
/// Strict: structural checks, kekulization of aromatic systems, valence
/// check against the element table, aromaticity perception (Hückel 4n+2 on
/// rings of up to 8 atoms), conjugation flags and stereo clean-up.
///
/// Relaxed: hydrogen counts are recomputed as
/// max(0, default valence - bond order sum) with charges untouched; aromatic
/// flags that cannot be kekulized are dropped; then the strict checks run.
///
/// Throws SanitizeError when no legal valence assignment results.
Molecule sanitize(const Molecule &m, SanitizeMode mode);

/// True when every atom's total valence is in its allowed set, using a
/// Kekulé assignment for aromatic bonds.
bool valences_ok(const Molecule &m);

/// Replaces aromatic bonds by an alternating single/double assignment.
/// Throws SanitizeError when no assignment exists.
Molecule kekulize(const Molecule &m);

}  // namespace spectra::chem
