// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>

#include "spectra/chem/elements.hpp"
#include "spectra/chem/rings.hpp"
#include "spectra/chem/smiles.hpp"
#include "spectra/error.hpp"

namespace spectra::chem {
namespace {

struct ParsedBond {
  char symbol = 0;  // one of - = # : / \ or 0 when implicit
  int written_from = -1;
};

struct RingOpening {
  int atom;
  char symbol;
  std::size_t slot;
};

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  Molecule parse() {
    if (text_.empty()) {
      fail("empty SMILES");
    }
    int prev = -1;
    char pending = 0;
    std::vector<int> branches;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) != 0) {
        break;
      }
      if (c == '(') {
        if (prev < 0 || pending != 0) {
          fail("branch without preceding atom");
        }
        branches.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (branches.empty()) {
          fail("unbalanced ')'");
        }
        if (pending != 0) {
          fail("bond symbol before ')'");
        }
        prev = branches.back();
        branches.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (pending != 0 || prev < 0) {
          fail("misplaced '.'");
        }
        prev = -1;
        ++pos_;
      } else if (is_bond_symbol(c)) {
        if (pending != 0) {
          fail("consecutive bond symbols");
        }
        if (prev < 0) {
          fail("bond symbol without preceding atom");
        }
        pending = c;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '%') {
        if (prev < 0) {
          fail("ring closure without preceding atom");
        }
        ring_closure(prev, pending, read_ring_number());
        pending = 0;
      } else {
        const int atom = read_atom();
        if (prev >= 0) {
          add_bond(prev, atom, pending, prev);
          order_[prev].push_back(atom);
          order_[atom].insert(order_[atom].begin(), prev);
        }
        pending = 0;
        prev = atom;
      }
    }
    if (mol_.atoms.empty()) {
      fail("no atoms");
    }
    if (pending != 0) {
      fail("dangling bond symbol");
    }
    if (!branches.empty()) {
      fail("unbalanced '('");
    }
    if (!rings_.empty()) {
      fail("unclosed ring " + std::to_string(rings_.begin()->first));
    }
    finish();
    return std::move(mol_);
  }

 private:
  [[noreturn]] void fail(const std::string &what) const {
    throw SyntaxError("SMILES '" + std::string(text_) + "' at " +
                      std::to_string(pos_) + ": " + what);
  }

  static bool is_bond_symbol(char c) {
    return c == '-' || c == '=' || c == '#' || c == ':' || c == '/' ||
           c == '\\';
  }

  int read_ring_number() {
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() ||
          std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) == 0 ||
          std::isdigit(static_cast<unsigned char>(text_[pos_ + 2])) == 0) {
        fail("malformed %nn ring closure");
      }
      const int num = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
      return num;
    }
    return text_[pos_++] - '0';
  }

  int new_atom(int element, bool aromatic, bool bracket) {
    Atom a;
    a.element = element;
    a.aromatic = aromatic;
    mol_.atoms.push_back(a);
    bracket_.push_back(bracket);
    order_.emplace_back();
    parsed_chirality_.push_back(Chirality::kNone);
    return mol_.num_atoms() - 1;
  }

  int read_atom() {
    const char c = text_[pos_];
    if (c == '[') {
      return read_bracket_atom();
    }
    if (c == '*') {
      fail("wildcard atoms are not supported");
    }
    // Organic subset.
    if (text_.substr(pos_, 2) == "Cl") {
      pos_ += 2;
      return new_atom(17, false, false);
    }
    if (text_.substr(pos_, 2) == "Br") {
      pos_ += 2;
      return new_atom(35, false, false);
    }
    static const std::map<char, std::pair<int, bool>> kOrganic = {
        {'B', {5, false}},  {'C', {6, false}}, {'N', {7, false}},
        {'O', {8, false}},  {'P', {15, false}}, {'S', {16, false}},
        {'F', {9, false}},  {'I', {53, false}}, {'b', {5, true}},
        {'c', {6, true}},   {'n', {7, true}},  {'o', {8, true}},
        {'p', {15, true}},  {'s', {16, true}},
    };
    auto it = kOrganic.find(c);
    if (it == kOrganic.end()) {
      fail(std::string("unknown atom symbol '") + c + "'");
    }
    ++pos_;
    return new_atom(it->second.first, it->second.second, false);
  }

  int read_bracket_atom() {
    ++pos_;  // '['
    auto peek = [&]() -> char {
      return pos_ < text_.size() ? text_[pos_] : '\0';
    };
    if (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
      fail("isotopes are not supported");
    }
    if (peek() == '*') {
      fail("wildcard atoms are not supported");
    }
    int element = 0;
    bool aromatic = false;
    if (std::islower(static_cast<unsigned char>(peek())) != 0) {
      static const std::map<std::string, int> kAromatic = {
          {"se", 34}, {"as", 33}, {"te", 52}, {"b", 5}, {"c", 6},
          {"n", 7},   {"o", 8},   {"p", 15},  {"s", 16}};
      for (std::size_t len : {2u, 1u}) {
        auto it = kAromatic.find(std::string(text_.substr(pos_, len)));
        if (it != kAromatic.end()) {
          element = it->second;
          pos_ += len;
          break;
        }
      }
      if (element == 0) {
        fail("unknown aromatic symbol");
      }
      aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(peek())) != 0) {
      // Two-letter symbols take precedence ("Cl" before "C").
      if (pos_ + 1 < text_.size() &&
          std::islower(static_cast<unsigned char>(text_[pos_ + 1])) != 0) {
        if (auto z = element_from_symbol(text_.substr(pos_, 2))) {
          element = *z;
          pos_ += 2;
        }
      }
      if (element == 0) {
        if (auto z = element_from_symbol(text_.substr(pos_, 1))) {
          element = *z;
          pos_ += 1;
        } else {
          fail("unknown element");
        }
      }
    } else {
      fail("expected element symbol in bracket atom");
    }
    const int atom = new_atom(element, aromatic, true);

    if (peek() == '@') {
      ++pos_;
      Chirality ch = Chirality::kCounterClockwise;
      if (peek() == '@') {
        ++pos_;
        ch = Chirality::kClockwise;
      }
      if (std::isupper(static_cast<unsigned char>(peek())) != 0 &&
          peek() != 'H') {
        fail("only @ and @@ chirality is supported");
      }
      parsed_chirality_[atom] = ch;
    }
    int hydrogens = 0;
    if (peek() == 'H') {
      ++pos_;
      hydrogens = 1;
      if (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
        hydrogens = peek() - '0';
        ++pos_;
      }
    }
    mol_.atoms[atom].explicit_h = hydrogens;
    if (hydrogens == 1 && parsed_chirality_[atom] != Chirality::kNone) {
      order_[atom].push_back(-1);
    }
    int charge = 0;
    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      charge = unit;
      if (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
        charge = unit * (peek() - '0');
        ++pos_;
      } else {
        while (peek() == sign) {
          charge += unit;
          ++pos_;
        }
      }
    }
    mol_.atoms[atom].formal_charge = charge;
    if (peek() == ':') {
      fail("atom classes are not supported");
    }
    if (peek() != ']') {
      fail("expected ']'");
    }
    ++pos_;
    return atom;
  }

  void add_bond(int a, int b, char symbol, int written_from) {
    if (a == b) {
      fail("self bond");
    }
    if (mol_.find_bond(a, b) >= 0) {
      fail("duplicate bond");
    }
    Bond bond;
    bond.u = a;
    bond.v = b;
    switch (symbol) {
    case '=':
      bond.order = BondOrder::kDouble;
      break;
    case '#':
      bond.order = BondOrder::kTriple;
      break;
    case ':':
      bond.order = BondOrder::kAromatic;
      break;
    case 0:
      bond.order = mol_.atoms[a].aromatic && mol_.atoms[b].aromatic
                       ? BondOrder::kAromatic
                       : BondOrder::kSingle;
      break;
    default:
      bond.order = BondOrder::kSingle;
      break;
    }
    mol_.bonds.push_back(bond);
    parsed_bonds_.push_back({symbol, written_from});
  }

  void ring_closure(int atom, char symbol, int number) {
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_[number] = {atom, symbol, order_[atom].size()};
      order_[atom].push_back(-2);  // filled when the ring closes
      return;
    }
    const RingOpening open = it->second;
    rings_.erase(it);
    char resolved = symbol;
    int written_from = atom;
    if (open.symbol != 0) {
      if (symbol != 0 && symbol != open.symbol &&
          !((symbol == '/' || symbol == '\\') &&
            (open.symbol == '/' || open.symbol == '\\'))) {
        fail("conflicting ring closure bond symbols");
      }
      if (symbol == 0) {
        resolved = open.symbol;
        written_from = open.atom;
      }
    }
    if (open.atom == atom) {
      fail("ring closure to itself");
    }
    add_bond(open.atom, atom, resolved, written_from);
    order_[open.atom][open.slot] = atom;
    order_[atom].push_back(open.atom);
  }

  void finish() {
    // Implicit aromatic bonds that end up outside rings (e.g. between two
    // aromatic rings written without '-') are single bonds.
    const auto ring = ring_bond_flags(mol_);
    for (int i = 0; i < mol_.num_bonds(); ++i) {
      if (mol_.bonds[i].order == BondOrder::kAromatic && !ring[i] &&
          parsed_bonds_[i].symbol == 0) {
        mol_.bonds[i].order = BondOrder::kSingle;
      }
    }
    assign_implicit_hydrogens();
    check_valences();
    assign_double_bond_stereo(ring);
    assign_chirality();
  }

  void assign_implicit_hydrogens() {
    for (int i = 0; i < mol_.num_atoms(); ++i) {
      if (!bracket_[i]) {
        mol_.atoms[i].explicit_h = default_implicit_h(mol_, i);
      }
    }
  }

  void check_valences() {
    std::vector<int> used(mol_.atoms.size(), 0);
    for (const Bond &b : mol_.bonds) {
      const int order = b.order == BondOrder::kAromatic
                            ? 1
                            : static_cast<int>(bond_order_value(b.order));
      used[b.u] += order;
      used[b.v] += order;
    }
    for (int i = 0; i < mol_.num_atoms(); ++i) {
      const Atom &a = mol_.atoms[i];
      auto allowed = allowed_valences(a.element, a.formal_charge);
      if (!allowed || allowed->empty()) {
        continue;
      }
      if (used[i] + a.explicit_h > allowed->back()) {
        throw ValenceError("atom " + std::to_string(i) + " (" +
                           std::string(element_symbol(a.element)) +
                           ") exceeds maximum valence in '" +
                           std::string(text_) + "'");
      }
    }
  }

  // Height of substituent `sub` relative to double-bond atom `center`
  // from the directional bond between them: +1 above, -1 below, 0 unknown.
  int substituent_height(int bond_index, int center) const {
    const ParsedBond &pb = parsed_bonds_[bond_index];
    if (pb.symbol != '/' && pb.symbol != '\\') {
      return 0;
    }
    const int up = pb.symbol == '/' ? 1 : -1;
    // "X/C": the right atom (C) is higher, so X is low.
    return pb.written_from == center ? up : -up;
  }

  void assign_double_bond_stereo(const std::vector<bool> &ring) {
    const auto adj = adjacency(mol_);
    for (int i = 0; i < mol_.num_bonds(); ++i) {
      Bond &b = mol_.bonds[i];
      if (b.order != BondOrder::kDouble || ring[i]) {
        continue;
      }
      int ref_u = -1, height_u = 0, ref_v = -1, height_v = 0;
      for (const Neighbor &nb : adj[b.u]) {
        if (nb.atom == b.v) {
          continue;
        }
        if (int h = substituent_height(nb.bond, b.u); h != 0) {
          ref_u = nb.atom;
          height_u = h;
          break;
        }
      }
      for (const Neighbor &nb : adj[b.v]) {
        if (nb.atom == b.u) {
          continue;
        }
        if (int h = substituent_height(nb.bond, b.v); h != 0) {
          ref_v = nb.atom;
          height_v = h;
          break;
        }
      }
      if (ref_u < 0 || ref_v < 0) {
        continue;
      }
      b.stereo = height_u == height_v ? BondStereo::kCis : BondStereo::kTrans;
      b.stereo_ref_u = ref_u;
      b.stereo_ref_v = ref_v;
    }
  }

  void assign_chirality() {
    for (int i = 0; i < mol_.num_atoms(); ++i) {
      if (parsed_chirality_[i] == Chirality::kNone) {
        continue;
      }
      std::vector<int> written = order_[i];
      // An implicit hydrogen on the first atom of a SMILES comes first.
      const std::vector<int> ref = chiral_reference_order(mol_, i);
      if (written.size() != ref.size() || ref.size() < 3) {
        continue;
      }
      Chirality c = parsed_chirality_[i];
      if (permutation_parity(written, ref) != 0) {
        c = flip(c);
      }
      mol_.atoms[i].chirality = c;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Molecule mol_;
  std::vector<bool> bracket_;
  std::vector<std::vector<int>> order_;
  std::vector<Chirality> parsed_chirality_;
  std::vector<ParsedBond> parsed_bonds_;
  std::map<int, RingOpening> rings_;
};

}  // namespace

int default_implicit_h(const Molecule &m, int atom) {
  const Atom &a = m.atoms[atom];
  int non_aromatic = 0;
  int aromatic = 0;
  for (const Bond &b : m.bonds) {
    if (b.u != atom && b.v != atom) {
      continue;
    }
    if (b.order == BondOrder::kAromatic) {
      ++aromatic;
    } else {
      non_aromatic += static_cast<int>(bond_order_value(b.order));
    }
  }
  const int used = non_aromatic + aromatic;
  auto target = target_valence(a.element, a.formal_charge, used);
  if (!target) {
    return 0;
  }
  // An aromatic atom owes one more valence to its share of the pi system.
  const int pi = (a.aromatic && aromatic > 0) ? 1 : 0;
  return std::max(0, *target - used - pi);
}

Molecule parse_smiles(std::string_view text) {
  return SmilesParser(text).parse();
}

Molecule mol_from_smiles(std::string_view text, SanitizeMode mode) {
  return sanitize(parse_smiles(text), mode);
}

}  // namespace spectra::chem
