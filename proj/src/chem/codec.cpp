// SPDX-License-Identifier: Apache-2.0
#include "spectra/chem/codec.hpp"

#include <algorithm>
#include <cmath>

#include "spectra/error.hpp"

namespace spectra::chem {

bool MolGraph::has_edge(int u, int v) const {
  for (const auto &c : w) {
    if (c(u, v) > 0.0) {
      return true;
    }
  }
  return false;
}

int FeatureCodec::nearest_element(double value) const {
  if (!(value >= 0.5)) {
    return 0;
  }
  int best = 0;
  double best_gap = 0.0;
  for (int z : elements) {
    const double gap = std::abs(value - z);
    if (best == 0 || gap < best_gap || (gap == best_gap && z < best)) {
      best = z;
      best_gap = gap;
    }
  }
  return best;
}

double bond_channel_value(BondOrder order) { return bond_order_value(order); }

BondOrder nearest_bond_order(double value) {
  static constexpr std::array<std::pair<double, BondOrder>, 4> kOrders{{
      {1.0, BondOrder::kSingle},
      {1.5, BondOrder::kAromatic},
      {2.0, BondOrder::kDouble},
      {3.0, BondOrder::kTriple},
  }};
  BondOrder best = BondOrder::kSingle;
  double best_gap = std::abs(value - 1.0);
  for (const auto &[code, order] : kOrders) {
    const double gap = std::abs(value - code);
    if (gap < best_gap) {
      best = order;
      best_gap = gap;
    }
  }
  return best;
}

double stereo_channel_value(BondStereo stereo) {
  switch (stereo) {
  case BondStereo::kCis:
    return 1.0;
  case BondStereo::kTrans:
    return 2.0;
  default:
    return 0.0;
  }
}

BondStereo nearest_stereo(double value) {
  const long code = std::clamp(std::lround(value), 0L, 2L);
  return code == 1 ? BondStereo::kCis
                   : (code == 2 ? BondStereo::kTrans : BondStereo::kNone);
}

MolGraph mol_to_graph(const Molecule &m, const FeatureCodec &codec, double y) {
  (void)codec;
  const int n = m.num_atoms();
  MolGraph g;
  g.y = y;
  g.x = Eigen::MatrixXd::Zero(n, FeatureCodec::kNumColumns);
  for (auto &c : g.w) {
    c = Eigen::MatrixXd::Zero(n, n);
  }
  std::vector<int> degree(n, 0);
  for (const Bond &b : m.bonds) {
    ++degree[b.u];
    ++degree[b.v];
    const double vals[kNumChannels] = {bond_channel_value(b.order),
                                       stereo_channel_value(b.stereo),
                                       b.conjugated ? 1.0 : 0.0};
    for (int c = 0; c < kNumChannels; ++c) {
      g.w[c](b.u, b.v) = g.w[c](b.v, b.u) = vals[c];
    }
  }
  g.chirality.resize(n);
  for (int i = 0; i < n; ++i) {
    const Atom &a = m.atoms[i];
    g.x(i, FeatureCodec::kElement) = a.element;
    g.x(i, FeatureCodec::kCharge) = a.formal_charge;
    g.x(i, FeatureCodec::kAromatic) = a.aromatic ? 1.0 : 0.0;
    g.x(i, FeatureCodec::kDegree) = degree[i];
    g.x(i, FeatureCodec::kHydrogens) = a.explicit_h;
    g.chirality[i] = a.chirality;
  }
  return g;
}

Molecule decode_unsanitized(const MolGraph &g, const FeatureCodec &codec) {
  const int n = g.num_nodes();
  Molecule m;
  m.atoms.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!g.x.row(i).allFinite()) {
      throw SanitizeError("non-finite node features");
    }
    Atom &a = m.atoms[i];
    a.element = codec.nearest_element(g.x(i, FeatureCodec::kElement));
    if (a.element == 0) {
      throw SanitizeError("node " + std::to_string(i) + " has no element");
    }
    a.formal_charge =
        static_cast<int>(std::lround(g.x(i, FeatureCodec::kCharge)));
    a.aromatic = g.x(i, FeatureCodec::kAromatic) >= 0.5;
    a.explicit_h = static_cast<int>(
        std::max(0L, std::lround(g.x(i, FeatureCodec::kHydrogens))));
    if (static_cast<int>(g.chirality.size()) == n) {
      a.chirality = g.chirality[i];
    }
  }
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double order = g.w[kBondChannel](u, v);
      if (!std::isfinite(order) || order < codec.edge_threshold) {
        continue;
      }
      Bond b;
      b.u = u;
      b.v = v;
      b.order = nearest_bond_order(order);
      b.stereo = nearest_stereo(g.w[kStereoChannel](u, v));
      b.conjugated = g.w[kConjugationChannel](u, v) >= 0.5;
      m.bonds.push_back(b);
    }
  }
  // Stereo codes refer to the lowest-index substituent on each side.
  const auto adj = adjacency(m);
  for (Bond &b : m.bonds) {
    if (b.stereo == BondStereo::kNone) {
      continue;
    }
    auto lowest = [&](int center, int partner) {
      int best = -1;
      for (const Neighbor &nb : adj[center]) {
        if (nb.atom != partner && (best < 0 || nb.atom < best)) {
          best = nb.atom;
        }
      }
      return best;
    };
    b.stereo_ref_u = lowest(b.u, b.v);
    b.stereo_ref_v = lowest(b.v, b.u);
    if (b.stereo_ref_u < 0 || b.stereo_ref_v < 0) {
      b.stereo = BondStereo::kNone;
      b.stereo_ref_u = b.stereo_ref_v = -1;
    }
  }
  return m;
}

DecodedMolecule graph_to_mol(const MolGraph &g, const FeatureCodec &codec) {
  const Molecule raw = decode_unsanitized(g, codec);
  try {
    return {sanitize(raw, SanitizeMode::kStrict), SanitizeMode::kStrict};
  } catch (const SanitizeError &) {
    return {sanitize(raw, SanitizeMode::kRelaxed), SanitizeMode::kRelaxed};
  }
}

}  // namespace spectra::chem
