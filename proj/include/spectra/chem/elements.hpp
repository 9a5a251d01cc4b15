// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace spectra::chem {

inline constexpr int kMaxElement = 118;

std::string_view element_symbol(int z);
// Case-sensitive lookup of a standard element symbol ("C", "Cl", ...).
std::optional<int> element_from_symbol(std::string_view symbol);

// Standard atomic weight in g/mol (3 decimals).
double atomic_mass(int z);

// Allowed total valences (bond orders + hydrogens) for an element carrying
// the given formal charge. Returns nullopt for elements without a valence
// model, which are left unconstrained. An empty span means no legal state.
std::optional<std::span<const int>> allowed_valences(int z, int charge);

// Smallest allowed valence >= `used`, or nullopt when `used` exceeds the
// largest one (or the element is unconstrained).
std::optional<int> target_valence(int z, int charge, int used);

// Largest allowed valence; nullopt for unconstrained elements.
std::optional<int> max_valence(int z, int charge);

// Elements writable without brackets in SMILES: B C N O P S F Cl Br I.
bool in_organic_subset(int z);

// Elements that may be perceived aromatic.
bool aromatic_capable(int z);

}  // namespace spectra::chem
