// SPDX-License-Identifier: Apache-2.0
#include "spectra/chem/sanitize.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "spectra/chem/elements.hpp"
#include "spectra/chem/rings.hpp"
#include "spectra/chem/smiles.hpp"
#include "spectra/error.hpp"

namespace spectra::chem {
namespace {

constexpr int kMaxAromaticRing = 8;
constexpr long kKekuleStepLimit = 200000;

[[noreturn]] void reject(const std::string &what) { throw SanitizeError(what); }

void check_structure(const Molecule &m) {
  const int n = m.num_atoms();
  std::set<std::pair<int, int>> seen;
  for (const Bond &b : m.bonds) {
    if (b.u < 0 || b.v < 0 || b.u >= n || b.v >= n) {
      reject("bond endpoint out of range");
    }
    if (b.u == b.v) {
      reject("self bond on atom " + std::to_string(b.u));
    }
    if (!seen.insert(std::minmax(b.u, b.v)).second) {
      reject("duplicate bond " + std::to_string(b.u) + "-" +
             std::to_string(b.v));
    }
  }
  for (const Atom &a : m.atoms) {
    if (a.element < 1 || a.element > kMaxElement) {
      reject("element out of range");
    }
    if (a.explicit_h < 0) {
      reject("negative hydrogen count");
    }
  }
}

// Bond-order sum with aromatic bonds counted once, plus hydrogens.
std::vector<int> valence_sums(const Molecule &m) {
  std::vector<int> sum(m.atoms.size(), 0);
  for (const Bond &b : m.bonds) {
    const int order = b.order == BondOrder::kAromatic
                          ? 1
                          : static_cast<int>(bond_order_value(b.order));
    sum[b.u] += order;
    sum[b.v] += order;
  }
  for (int i = 0; i < m.num_atoms(); ++i) {
    sum[i] += m.atoms[i].explicit_h;
  }
  return sum;
}

void check_aromatic_consistency(const Molecule &m) {
  const auto ring = ring_bond_flags(m);
  std::vector<bool> has_aromatic_bond(m.atoms.size(), false);
  for (int i = 0; i < m.num_bonds(); ++i) {
    const Bond &b = m.bonds[i];
    if (b.order != BondOrder::kAromatic) {
      continue;
    }
    if (!ring[i]) {
      reject("aromatic bond outside a ring");
    }
    if (!m.atoms[b.u].aromatic || !m.atoms[b.v].aromatic) {
      reject("aromatic bond between non-aromatic atoms");
    }
    has_aromatic_bond[b.u] = has_aromatic_bond[b.v] = true;
  }
  for (int i = 0; i < m.num_atoms(); ++i) {
    const Atom &a = m.atoms[i];
    if (a.aromatic && (!has_aromatic_bond[i] || !aromatic_capable(a.element))) {
      reject("aromatic atom " + std::to_string(i) + " outside aromatic system");
    }
  }
}

class Kekulizer {
 public:
  explicit Kekulizer(const Molecule &m) : m_(m), adj_(adjacency(m)) {}

  // Returns false when no alternating assignment exists.
  bool solve(std::vector<bool> &double_bond) {
    const int n = m_.num_atoms();
    const auto sum = valence_sums(m_);
    need_.assign(n, false);
    for (int i = 0; i < n; ++i) {
      bool touches = false;
      for (const Neighbor &nb : adj_[i]) {
        touches |= m_.bonds[nb.bond].order == BondOrder::kAromatic;
      }
      if (!touches) {
        continue;
      }
      const Atom &a = m_.atoms[i];
      auto target = target_valence(a.element, a.formal_charge, sum[i]);
      if (!target) {
        return false;
      }
      const int need = *target - sum[i];
      if (need > 1) {
        return false;
      }
      need_[i] = need == 1;
    }
    matched_.assign(n, false);
    double_bond.assign(m_.bonds.size(), false);
    chosen_ = &double_bond;
    steps_ = 0;
    return search();
  }

 private:
  bool candidate(const Neighbor &nb) const {
    return m_.bonds[nb.bond].order == BondOrder::kAromatic &&
           need_[nb.atom] && !matched_[nb.atom];
  }

  bool search() {
    if (++steps_ > kKekuleStepLimit) {
      return false;
    }
    // Most constrained open atom first.
    int best = -1;
    int best_options = 0;
    for (int i = 0; i < m_.num_atoms(); ++i) {
      if (!need_[i] || matched_[i]) {
        continue;
      }
      int options = 0;
      for (const Neighbor &nb : adj_[i]) {
        options += candidate(nb) ? 1 : 0;
      }
      if (options == 0) {
        return false;
      }
      if (best < 0 || options < best_options) {
        best = i;
        best_options = options;
      }
    }
    if (best < 0) {
      return true;
    }
    matched_[best] = true;
    for (const Neighbor &nb : adj_[best]) {
      if (!candidate(nb)) {
        continue;
      }
      matched_[nb.atom] = true;
      (*chosen_)[nb.bond] = true;
      if (search()) {
        return true;
      }
      (*chosen_)[nb.bond] = false;
      matched_[nb.atom] = false;
    }
    matched_[best] = false;
    return false;
  }

  const Molecule &m_;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<bool> need_, matched_;
  std::vector<bool> *chosen_ = nullptr;
  long steps_ = 0;
};

bool integer_valences_ok(const Molecule &m) {
  const auto sum = valence_sums(m);
  for (int i = 0; i < m.num_atoms(); ++i) {
    const Atom &a = m.atoms[i];
    auto allowed = allowed_valences(a.element, a.formal_charge);
    if (!allowed) {
      continue;
    }
    if (std::find(allowed->begin(), allowed->end(), sum[i]) == allowed->end()) {
      return false;
    }
  }
  return true;
}

// Pi electrons an atom contributes to `ring`, or -1 if it breaks conjugation.
int ring_electrons(const Molecule &k, const std::vector<std::vector<Neighbor>> &adj,
                   const std::vector<bool> &ring_bond,
                   const std::vector<bool> &aromatic_bond,
                   const std::set<int> &ring_bonds, int atom) {
  const Atom &a = k.atoms[atom];
  if (!aromatic_capable(a.element)) {
    return -1;
  }
  int doubles = 0;
  int double_bond = -1;
  for (const Neighbor &nb : adj[atom]) {
    const BondOrder o = k.bonds[nb.bond].order;
    if (o == BondOrder::kTriple) {
      return -1;
    }
    if (o == BondOrder::kDouble) {
      ++doubles;
      double_bond = nb.bond;
    }
  }
  const int connections = static_cast<int>(adj[atom].size()) + a.explicit_h;
  if (doubles > 1) {
    return -1;
  }
  if (doubles == 1) {
    if (ring_bonds.count(double_bond) != 0 || aromatic_bond[double_bond]) {
      return 1;
    }
    const Bond &b = k.bonds[double_bond];
    const int other = b.u == atom ? b.v : b.u;
    const int z = k.atoms[other].element;
    if (!ring_bond[double_bond] && (z == 7 || z == 8 || z == 16)) {
      return 0;
    }
    return -1;
  }
  if (a.element == 6 && a.formal_charge == 1 && connections == 3) {
    return 0;
  }
  if (a.element == 5 && a.formal_charge == 0 && connections == 3) {
    return 0;
  }
  if ((a.element == 7 || a.element == 15) && a.formal_charge == 0 &&
      connections == 3) {
    return 2;
  }
  if ((a.element == 8 || a.element == 16 || a.element == 34) &&
      a.formal_charge == 0 && connections == 2) {
    return 2;
  }
  if (a.element == 6 && a.formal_charge == -1 && connections == 3) {
    return 2;
  }
  return -1;
}

// Marks Hückel rings of a Kekulé molecule as aromatic.
Molecule perceive_aromaticity(const Molecule &k) {
  const auto adj = adjacency(k);
  const auto ring_bond = ring_bond_flags(k);
  const auto cycles = simple_cycles(k, kMaxAromaticRing);
  std::vector<std::set<int>> cycle_bonds(cycles.size());
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const auto &cyc = cycles[c];
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      cycle_bonds[c].insert(k.find_bond(cyc[i], cyc[(i + 1) % cyc.size()]));
    }
  }
  std::vector<bool> aromatic_bond(k.bonds.size(), false);
  std::vector<bool> aromatic_cycle(cycles.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      if (aromatic_cycle[c]) {
        continue;
      }
      int electrons = 0;
      bool ok = true;
      for (int atom : cycles[c]) {
        const int e =
            ring_electrons(k, adj, ring_bond, aromatic_bond, cycle_bonds[c], atom);
        if (e < 0) {
          ok = false;
          break;
        }
        electrons += e;
      }
      if (!ok || electrons % 4 != 2) {
        continue;
      }
      aromatic_cycle[c] = true;
      changed = true;
      for (int b : cycle_bonds[c]) {
        aromatic_bond[b] = true;
      }
    }
  }
  Molecule out = k;
  for (Atom &a : out.atoms) {
    a.aromatic = false;
  }
  for (int i = 0; i < out.num_bonds(); ++i) {
    if (aromatic_bond[i]) {
      Bond &b = out.bonds[i];
      b.order = BondOrder::kAromatic;
      out.atoms[b.u].aromatic = out.atoms[b.v].aromatic = true;
    }
  }
  return out;
}

void assign_conjugation(Molecule &m) {
  const auto adj = adjacency(m);
  const int n = m.num_atoms();
  std::vector<bool> unsaturated(n, false);
  for (const Bond &b : m.bonds) {
    if (b.order != BondOrder::kSingle) {
      unsaturated[b.u] = unsaturated[b.v] = true;
    }
  }
  auto lone_pair = [&](int i) {
    const Atom &a = m.atoms[i];
    return !unsaturated[i] && a.formal_charge <= 0 &&
           (a.element == 7 || a.element == 8 || a.element == 16);
  };
  for (Bond &b : m.bonds) {
    if (b.order != BondOrder::kSingle) {
      b.conjugated = true;
      continue;
    }
    b.conjugated = (unsaturated[b.u] && unsaturated[b.v]) ||
                   (unsaturated[b.u] && lone_pair(b.v)) ||
                   (unsaturated[b.v] && lone_pair(b.u));
  }
}

void clean_stereo(Molecule &m) {
  const auto adj = adjacency(m);
  const auto ring = ring_bond_flags(m);
  const auto cls = symmetry_classes(m);

  for (int i = 0; i < m.num_bonds(); ++i) {
    Bond &b = m.bonds[i];
    if (b.stereo == BondStereo::kNone) {
      b.stereo_ref_u = b.stereo_ref_v = -1;
      continue;
    }
    bool keep = b.order == BondOrder::kDouble && !ring[i];
    // Re-anchors a side on its lowest-index substituent. Returns false when
    // the side carries no distinguishable substituents.
    auto normalize = [&](int center, int partner, int &ref) {
      std::vector<int> subs;
      for (const Neighbor &nb : adj[center]) {
        if (nb.atom != partner) {
          subs.push_back(nb.atom);
        }
      }
      std::sort(subs.begin(), subs.end());
      if (subs.empty() || subs.size() > 2 ||
          std::find(subs.begin(), subs.end(), ref) == subs.end()) {
        return false;
      }
      if (subs.size() == 2 && cls[subs[0]] == cls[subs[1]]) {
        return false;
      }
      if (ref != subs.front()) {
        ref = subs.front();
        b.stereo = b.stereo == BondStereo::kCis ? BondStereo::kTrans
                                                 : BondStereo::kCis;
      }
      return true;
    };
    keep = keep && normalize(b.u, b.v, b.stereo_ref_u) &&
           normalize(b.v, b.u, b.stereo_ref_v);
    if (!keep) {
      b.stereo = BondStereo::kNone;
      b.stereo_ref_u = b.stereo_ref_v = -1;
    }
  }

  for (int i = 0; i < m.num_atoms(); ++i) {
    Atom &a = m.atoms[i];
    if (a.chirality == Chirality::kNone) {
      continue;
    }
    const auto order = chiral_reference_order(m, i);
    const bool three_ok =
        a.element == 16 || a.element == 34 || a.element == 15;
    bool keep = order.size() == 4 || (order.size() == 3 && three_ok);
    std::set<int> seen;
    for (int x : order) {
      if (x >= 0 && !seen.insert(cls[x]).second) {
        keep = false;
      }
    }
    for (const Neighbor &nb : adj[i]) {
      if (m.bonds[nb.bond].order != BondOrder::kSingle) {
        keep = keep && three_ok;
      }
    }
    if (!keep) {
      a.chirality = Chirality::kNone;
    }
  }
}

Molecule apply_kekule(const Molecule &m, const std::vector<bool> &double_bond) {
  Molecule out = m;
  for (int i = 0; i < out.num_bonds(); ++i) {
    Bond &b = out.bonds[i];
    if (b.order == BondOrder::kAromatic) {
      b.order = double_bond[i] ? BondOrder::kDouble : BondOrder::kSingle;
    }
  }
  for (Atom &a : out.atoms) {
    a.aromatic = false;
  }
  return out;
}

bool try_kekulize(const Molecule &m, Molecule &out) {
  std::vector<bool> double_bond;
  if (!Kekulizer(m).solve(double_bond)) {
    return false;
  }
  out = apply_kekule(m, double_bond);
  return true;
}

Molecule strict(const Molecule &in) {
  check_structure(in);
  Molecule m = in;
  normalize_bond_list(m);
  check_aromatic_consistency(m);
  Molecule kek;
  if (!try_kekulize(m, kek)) {
    reject("aromatic system cannot be kekulized");
  }
  if (!integer_valences_ok(kek)) {
    reject("valence outside the allowed set");
  }
  Molecule out = perceive_aromaticity(kek);
  Molecule check;
  if (!try_kekulize(out, check)) {
    out = kek;
  }
  // Stereo on double bonds absorbed into aromatic rings is dropped by
  // clean_stereo; keep the original tags otherwise.
  for (int i = 0; i < out.num_bonds(); ++i) {
    out.bonds[i].stereo = m.bonds[i].stereo;
    out.bonds[i].stereo_ref_u = m.bonds[i].stereo_ref_u;
    out.bonds[i].stereo_ref_v = m.bonds[i].stereo_ref_v;
  }
  assign_conjugation(out);
  clean_stereo(out);
  return out;
}

Molecule relax(const Molecule &in) {
  check_structure(in);
  Molecule m = in;
  normalize_bond_list(m);
  const auto ring = ring_bond_flags(m);
  for (int i = 0; i < m.num_bonds(); ++i) {
    Bond &b = m.bonds[i];
    if (b.order == BondOrder::kAromatic &&
        (!ring[i] || !aromatic_capable(m.atoms[b.u].element) ||
         !aromatic_capable(m.atoms[b.v].element))) {
      b.order = BondOrder::kSingle;
    }
  }
  auto refresh = [](Molecule &x) {
    for (Atom &a : x.atoms) {
      a.aromatic = false;
    }
    for (const Bond &b : x.bonds) {
      if (b.order == BondOrder::kAromatic) {
        x.atoms[b.u].aromatic = x.atoms[b.v].aromatic = true;
      }
    }
    for (int i = 0; i < x.num_atoms(); ++i) {
      x.atoms[i].explicit_h = default_implicit_h(x, i);
    }
  };
  refresh(m);
  Molecule kek;
  if (!try_kekulize(m, kek)) {
    for (Bond &b : m.bonds) {
      if (b.order == BondOrder::kAromatic) {
        b.order = BondOrder::kSingle;
      }
    }
    refresh(m);
  }
  return strict(m);
}

}  // namespace

std::string_view to_string(SanitizeMode mode) {
  return mode == SanitizeMode::kStrict ? "strict" : "relaxed";
}

Molecule sanitize(const Molecule &m, SanitizeMode mode) {
  return mode == SanitizeMode::kStrict ? strict(m) : relax(m);
}

bool valences_ok(const Molecule &m) {
  Molecule kek;
  if (!try_kekulize(m, kek)) {
    return false;
  }
  return integer_valences_ok(kek);
}

Molecule kekulize(const Molecule &m) {
  Molecule kek;
  if (!try_kekulize(m, kek)) {
    reject("aromatic system cannot be kekulized");
  }
  return kek;
}

}  // namespace spectra::chem
