// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>

#include "spectra/chem/elements.hpp"
#include "spectra/chem/smiles.hpp"

namespace spectra::chem {
namespace {

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

template <typename Key>
int dense_rank(const std::vector<Key> &keys, std::vector<int> &out) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) {
    idx[i] = i;
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return keys[a] < keys[b]; });
  out.assign(n, 0);
  int cls = 0;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && keys[idx[i - 1]] < keys[idx[i]]) {
      ++cls;
    }
    out[idx[i]] = cls;
  }
  return n == 0 ? 0 : cls + 1;
}

int count_classes(const std::vector<int> &cls) {
  return cls.empty() ? 0 : *std::max_element(cls.begin(), cls.end()) + 1;
}

void refine(const Molecule &m, const std::vector<std::vector<Neighbor>> &adj,
            std::vector<int> &cls) {
  const int n = m.num_atoms();
  int classes = count_classes(cls);
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  while (true) {
    std::vector<Key> keys(n);
    for (int i = 0; i < n; ++i) {
      keys[i].first = cls[i];
      for (const Neighbor &nb : adj[i]) {
        keys[i].second.emplace_back(cls[nb.atom],
                                    bond_code(m.bonds[nb.bond].order));
      }
      std::sort(keys[i].second.begin(), keys[i].second.end());
    }
    std::vector<int> next;
    const int next_classes = dense_rank(keys, next);
    cls = std::move(next);
    if (next_classes == classes) {
      break;
    }
    classes = next_classes;
  }
}

std::vector<int> initial_classes(const Molecule &m,
                                 const std::vector<std::vector<Neighbor>> &adj) {
  using Key = std::tuple<int, int, int, int, int>;
  std::vector<Key> keys(m.atoms.size());
  for (int i = 0; i < m.num_atoms(); ++i) {
    const Atom &a = m.atoms[i];
    keys[i] = {a.element, a.formal_charge, static_cast<int>(adj[i].size()),
               a.explicit_h, a.aromatic ? 1 : 0};
  }
  std::vector<int> cls;
  dense_rank(keys, cls);
  return cls;
}

}  // namespace

std::vector<int> symmetry_classes(const Molecule &m) {
  const auto adj = adjacency(m);
  std::vector<int> cls = initial_classes(m, adj);
  refine(m, adj, cls);
  return cls;
}

std::vector<int> canonical_ranks(const Molecule &m) {
  const int n = m.num_atoms();
  const auto adj = adjacency(m);
  std::vector<int> cls = initial_classes(m, adj);
  refine(m, adj, cls);
  while (count_classes(cls) < n) {
    // Split the lowest tied class: its smallest-index member goes first.
    std::vector<int> members(n, 0);
    for (int c : cls) {
      ++members[c];
    }
    int tied = 0;
    while (members[tied] < 2) {
      ++tied;
    }
    int chosen = -1;
    for (int i = 0; i < n; ++i) {
      if (cls[i] == tied) {
        chosen = i;
        break;
      }
    }
    std::vector<int> keys(n);
    for (int i = 0; i < n; ++i) {
      keys[i] = cls[i] * 2 + ((cls[i] == tied && i != chosen) ? 1 : 0);
    }
    dense_rank(keys, cls);
    refine(m, adj, cls);
  }
  return cls;
}

namespace {

class SmilesWriter {
 public:
  explicit SmilesWriter(const Molecule &m)
      : m_(m), adj_(adjacency(m)), rank_(canonical_ranks(m)) {
    for (auto &nbrs : adj_) {
      std::sort(nbrs.begin(), nbrs.end(), [&](const Neighbor &a,
                                              const Neighbor &b) {
        return rank_[a.atom] < rank_[b.atom];
      });
    }
  }

  std::string write() {
    const int n = m_.num_atoms();
    if (n == 0) {
      return {};
    }
    visited_.assign(n, false);
    children_.assign(n, {});
    closes_.assign(n, {});
    opens_.assign(n, {});
    parent_bond_.assign(n, -1);
    position_.assign(n, -1);
    closure_bond_.assign(m_.bonds.size(), false);

    std::vector<int> by_rank(n);
    for (int i = 0; i < n; ++i) {
      by_rank[rank_[i]] = i;
    }
    std::vector<int> roots;
    for (int a : by_rank) {
      if (!visited_[a]) {
        roots.push_back(a);
        discover(a, -1);
      }
    }
    for (int a = 0; a < n; ++a) {
      std::sort(opens_[a].begin(), opens_[a].end(),
                [&](const Neighbor &x, const Neighbor &y) {
                  return rank_[x.atom] < rank_[y.atom];
                });
    }
    assign_stereo_marks();

    std::string out;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (i > 0) {
        out += '.';
      }
      emit(roots[i], out);
    }
    return out;
  }

 private:
  void discover(int a, int parent_bond) {
    visited_[a] = true;
    parent_bond_[a] = parent_bond;
    position_[a] = next_position_++;
    for (const Neighbor &nb : adj_[a]) {
      if (nb.bond == parent_bond || closure_bond_[nb.bond]) {
        continue;
      }
      if (visited_[nb.atom]) {
        // Back edge to an ancestor: ring closure opened there, closed here.
        closure_bond_[nb.bond] = true;
        closes_[a].push_back(nb);
        opens_[nb.atom].push_back({a, nb.bond});
        continue;
      }
      children_[a].push_back(nb);
      discover(nb.atom, nb.bond);
    }
  }

  // Height of substituent x relative to double-bond atom a implied by a mark.
  int height_from_mark(int a, int bond, char mark) const {
    const int up = mark == '/' ? 1 : -1;
    const int from = written_from(bond);
    return from == a ? up : -up;
  }

  int written_from(int bond) const {
    const Bond &b = m_.bonds[bond];
    return position_[b.u] < position_[b.v] ? b.u : b.v;
  }

  int written_at(int bond) const {
    const Bond &b = m_.bonds[bond];
    return std::max(position_[b.u], position_[b.v]);
  }

  char mark_for_height(int a, int bond, int height) const {
    const int from = written_from(bond);
    const int up = from == a ? height : -height;
    return up > 0 ? '/' : '\\';
  }

  // Assigns '/' and '\' to tree single bonds so that every stereo double bond
  // is reproduced. Bonds whose constraints cannot be met are left unmarked.
  void assign_stereo_marks() {
    marks_.assign(m_.bonds.size(), 0);
    std::vector<int> stereo_bonds;
    for (int i = 0; i < m_.num_bonds(); ++i) {
      if (m_.bonds[i].stereo != BondStereo::kNone &&
          m_.bonds[i].order == BondOrder::kDouble) {
        stereo_bonds.push_back(i);
      }
    }
    std::sort(stereo_bonds.begin(), stereo_bonds.end(), [&](int x, int y) {
      auto key = [&](int i) {
        const Bond &b = m_.bonds[i];
        return std::minmax(rank_[b.u], rank_[b.v]);
      };
      return key(x) < key(y);
    });

    for (int bi : stereo_bonds) {
      const Bond &b = m_.bonds[bi];
      std::vector<std::pair<int, char>> tentative;
      // Returns the substituent height of `ref` on side `a`, or 0 if no
      // markable substituent exists.
      auto side = [&](int a, int partner, int ref, int wanted) -> bool {
        // Candidate substituents in written order.
        std::vector<Neighbor> subs;
        for (const Neighbor &nb : adj_[a]) {
          if (nb.atom != partner && !closure_bond_[nb.bond] &&
              m_.bonds[nb.bond].order == BondOrder::kSingle) {
            subs.push_back(nb);
          }
        }
        if (subs.empty()) {
          return false;
        }
        std::sort(subs.begin(), subs.end(),
                  [&](const Neighbor &x, const Neighbor &y) {
                    return position_[x.atom] < position_[y.atom];
                  });
        auto height_of = [&](int atom) { return atom == ref ? wanted : -wanted; };
        // Existing marks on this side must agree.
        for (const Neighbor &nb : subs) {
          if (marks_[nb.bond] != 0 &&
              height_from_mark(a, nb.bond, marks_[nb.bond]) !=
                  height_of(nb.atom)) {
            return false;
          }
        }
        for (const Neighbor &nb : subs) {
          if (marks_[nb.bond] != 0) {
            return true;
          }
        }
        const Neighbor &first = subs.front();
        tentative.emplace_back(first.bond,
                               mark_for_height(a, first.bond,
                                               height_of(first.atom)));
        return true;
      };

      // Anchor on a side that already carries a mark when there is one.
      int height_u = 1;
      bool anchored = false;
      for (const Neighbor &nb : adj_[b.u]) {
        if (nb.atom != b.v && marks_[nb.bond] != 0) {
          const int h = height_from_mark(b.u, nb.bond, marks_[nb.bond]);
          height_u = nb.atom == b.stereo_ref_u ? h : -h;
          anchored = true;
          break;
        }
      }
      for (const Neighbor &nb : adj_[b.v]) {
        if (anchored) {
          break;
        }
        if (nb.atom != b.u && marks_[nb.bond] != 0) {
          const int h = height_from_mark(b.v, nb.bond, marks_[nb.bond]);
          const int height_v = nb.atom == b.stereo_ref_v ? h : -h;
          height_u = b.stereo == BondStereo::kCis ? height_v : -height_v;
          anchored = true;
        }
      }
      const int height_v =
          b.stereo == BondStereo::kCis ? height_u : -height_u;
      if (!side(b.u, b.v, b.stereo_ref_u, height_u) ||
          !side(b.v, b.u, b.stereo_ref_v, height_v)) {
        continue;
      }
      if (!anchored && !tentative.empty()) {
        // Free choice: the first mark written is '/'.
        auto first = std::min_element(
            tentative.begin(), tentative.end(), [&](const auto &x, const auto &y) {
              return written_at(x.first) < written_at(y.first);
            });
        if (first->second == '\\') {
          for (auto &t : tentative) {
            t.second = t.second == '/' ? '\\' : '/';
          }
        }
      }
      for (auto [bond, mark] : tentative) {
        marks_[bond] = mark;
      }
    }
  }

  std::string bond_symbol(int bond) const {
    const Bond &b = m_.bonds[bond];
    const bool both_aromatic = m_.atoms[b.u].aromatic && m_.atoms[b.v].aromatic;
    switch (b.order) {
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    case BondOrder::kAromatic:
      return both_aromatic ? "" : ":";
    case BondOrder::kSingle:
      if (marks_[bond] != 0) {
        return std::string(1, marks_[bond]);
      }
      return both_aromatic ? "-" : "";
    }
    return "";
  }

  std::string atom_token(int a, const std::vector<int> &written) const {
    const Atom &atom = m_.atoms[a];
    Chirality chir = atom.chirality;
    if (chir != Chirality::kNone) {
      const std::vector<int> ref = chiral_reference_order(m_, a);
      if (ref.size() != written.size()) {
        chir = Chirality::kNone;
      } else if (permutation_parity(ref, written) != 0) {
        chir = flip(chir);
      }
    }
    std::string symbol(element_symbol(atom.element));
    if (atom.aromatic) {
      std::transform(symbol.begin(), symbol.end(), symbol.begin(),
                     [](char c) { return static_cast<char>(std::tolower(c)); });
    }
    const bool bare = in_organic_subset(atom.element) &&
                      atom.formal_charge == 0 && chir == Chirality::kNone &&
                      atom.explicit_h == default_implicit_h(m_, a);
    if (bare) {
      return symbol;
    }
    std::string out = "[" + symbol;
    if (chir == Chirality::kCounterClockwise) {
      out += "@";
    } else if (chir == Chirality::kClockwise) {
      out += "@@";
    }
    if (atom.explicit_h > 0) {
      out += "H";
      if (atom.explicit_h > 1) {
        out += std::to_string(atom.explicit_h);
      }
    }
    if (atom.formal_charge != 0) {
      out += atom.formal_charge > 0 ? "+" : "-";
      if (std::abs(atom.formal_charge) > 1) {
        out += std::to_string(std::abs(atom.formal_charge));
      }
    }
    out += "]";
    return out;
  }

  void emit(int a, std::string &out) {
    // Ring digits: openings take the lowest free digits before this atom's
    // closings release theirs, so one atom never reuses a digit.
    std::vector<int> close_digits;
    for (const Neighbor &nb : closes_[a]) {
      close_digits.push_back(digit_of_bond_.at(nb.bond));
    }
    std::vector<int> open_digits;
    for (const Neighbor &nb : opens_[a]) {
      int d = 1;
      while (used_digits_.count(d) != 0) {
        ++d;
      }
      used_digits_.insert(d);
      digit_of_bond_[nb.bond] = d;
      open_digits.push_back(d);
    }
    for (int d : close_digits) {
      used_digits_.erase(d);
    }

    std::vector<int> written;
    if (parent_bond_[a] >= 0) {
      const Bond &pb = m_.bonds[parent_bond_[a]];
      written.push_back(pb.u == a ? pb.v : pb.u);
    }
    if (m_.atoms[a].explicit_h == 1 &&
        m_.atoms[a].chirality != Chirality::kNone) {
      written.push_back(-1);
    }
    for (const Neighbor &nb : closes_[a]) {
      written.push_back(nb.atom);
    }
    for (const Neighbor &nb : opens_[a]) {
      written.push_back(nb.atom);
    }
    for (const Neighbor &nb : children_[a]) {
      written.push_back(nb.atom);
    }

    out += atom_token(a, written);
    auto digit_text = [](int d) {
      return d < 10 ? std::to_string(d) : "%" + std::to_string(d);
    };
    for (std::size_t i = 0; i < closes_[a].size(); ++i) {
      out += bond_symbol(closes_[a][i].bond);
      out += digit_text(close_digits[i]);
    }
    for (int d : open_digits) {
      out += digit_text(d);
    }
    const auto &kids = children_[a];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool branch = i + 1 < kids.size();
      if (branch) {
        out += '(';
      }
      out += bond_symbol(kids[i].bond);
      emit(kids[i].atom, out);
      if (branch) {
        out += ')';
      }
    }
  }

  const Molecule &m_;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<int> rank_;
  std::vector<bool> visited_;
  std::vector<std::vector<Neighbor>> children_, closes_, opens_;
  std::vector<int> parent_bond_, position_;
  std::vector<bool> closure_bond_;
  std::vector<char> marks_;
  int next_position_ = 0;
  std::set<int> used_digits_;
  std::map<int, int> digit_of_bond_;
};

}  // namespace

std::string write_canonical_smiles(const Molecule &m) {
  return SmilesWriter(m).write();
}

}  // namespace spectra::chem
