// SPDX-License-Identifier: Apache-2.0
#include "spectra/pipeline/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spectra/chem/descriptors.hpp"
#include "spectra/chem/smiles.hpp"
#include "spectra/error.hpp"
#include "spectra/match/match.hpp"
#include "spectra/rarity/rarity.hpp"

namespace spectra::pipeline {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool has_any_edge(const chem::MolGraph &g) {
  return g.num_nodes() > 0 && (g.w[chem::kBondChannel].array() > 0.0).any();
}

std::set<int> neighbours(const Eigen::MatrixXd &w, int k) {
  std::set<int> out;
  for (int v = 0; v < w.cols(); ++v) {
    if (v != k && w(k, v) > 0.0) {
      out.insert(v);
    }
  }
  return out;
}

RangeStats range_stats(const std::vector<double> &v) {
  RangeStats s;
  if (v.empty()) {
    return s;
  }
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return s;
}

}  // namespace

std::string to_string(Rejection r) {
  switch (r) {
  case Rejection::kNone:
    return "none";
  case Rejection::kSanitize:
    return "sanitize";
  case Rejection::kDegenerateBasis:
    return "degenerate_basis";
  case Rejection::kEmptyGraph:
    return "empty_graph";
  case Rejection::kConvergence:
    return "eigensolver";
  }
  return "unknown";
}

SynthGraphs synth_graphs(const chem::MolGraph &a, const chem::MolGraph &b, double mix,
                         const SynthConfig &config) {
  SynthGraphs out;
  match::PaddedPair pp;
  chem::MolGraph b_perm;
  if (config.align) {
    match::MatchResult r = match::hard_match(a, b, config.fgw_alpha);
    pp = std::move(r.padded);
    out.permutation = std::move(r.permutation);
    b_perm = std::move(r.b_permuted);
    out.solver_converged = r.coupling.converged;
    out.objective = r.coupling.objective;
  } else {
    pp = match::pad_pair(a, b);
    out.permutation.resize(pp.n);
    std::iota(out.permutation.begin(), out.permutation.end(), 0);
    b_perm = pp.b;
  }
  const int n = pp.n;

  std::array<Eigen::MatrixXd, chem::kNumChannels> w;
  for (int c = 0; c < chem::kNumChannels; ++c) {
    out.spectra_a[c] = spectral::eig_sym(spectral::laplacian(pp.a.w[c]));
    out.spectra_b[c] = spectral::eig_sym(spectral::laplacian(b_perm.w[c]));
    w[c] = spectral::laplacian_to_adjacency(
        spectral::interpolate_spectrum(out.spectra_a[c], out.spectra_b[c], mix));
  }
  const Eigen::MatrixXd x = spectral::interpolate_features(pp.a.x, b_perm.x, mix);

  // Edges survive on the bond channel; the other channels ride along.
  Eigen::MatrixXd keep = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (w[chem::kBondChannel](u, v) >= config.codec.edge_threshold) {
        keep(u, v) = keep(v, u) = 1.0;
      }
    }
  }
  const Eigen::MatrixXd a_bonds = pp.a.w[chem::kBondChannel];
  std::vector<int> survivors;
  std::vector<chem::Chirality> tags;
  for (int k = 0; k < n; ++k) {
    const bool connected = (keep.row(k).array() > 0.0).any();
    const int element = config.codec.nearest_element(x(k, chem::FeatureCodec::kElement));
    const bool padding = k >= pp.n_a || out.permutation[k] >= pp.n_b;
    if (!connected && (padding || element == 0)) {
      continue;
    }
    survivors.push_back(k);
    // Tetrahedral tags carry over from A where the local environment did
    // not change.
    chem::Chirality tag = chem::Chirality::kNone;
    if (k < pp.n_a && static_cast<int>(pp.a.chirality.size()) > k &&
        pp.a.chirality[k] != chem::Chirality::kNone &&
        element == config.codec.nearest_element(pp.a.x(k, chem::FeatureCodec::kElement)) &&
        std::lround(x(k, chem::FeatureCodec::kHydrogens)) ==
            std::lround(pp.a.x(k, chem::FeatureCodec::kHydrogens)) &&
        neighbours(keep, k) == neighbours(a_bonds, k)) {
      tag = pp.a.chirality[k];
    }
    tags.push_back(tag);
  }

  const int m = static_cast<int>(survivors.size());
  chem::MolGraph &g = out.mixed;
  g.x.resize(m, x.cols());
  for (int i = 0; i < m; ++i) {
    g.x.row(i) = x.row(survivors[i]);
  }
  for (int c = 0; c < chem::kNumChannels; ++c) {
    g.w[c] = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (keep(survivors[i], survivors[j]) > 0.0) {
          g.w[c](i, j) = w[c](survivors[i], survivors[j]);
        }
      }
    }
  }
  g.chirality = std::move(tags);
  g.y = (1.0 - mix) * a.y + mix * b.y;
  return out;
}

SynthResult synth_pair(const chem::MolGraph &a, const chem::MolGraph &b, double mix,
                       const SynthConfig &config) {
  SynthResult out;
  SynthGraphs graphs;
  try {
    graphs = synth_graphs(a, b, mix, config);
  } catch (const DegenerateBasis &e) {
    out.rejection = Rejection::kDegenerateBasis;
    out.detail = e.what();
    return out;
  } catch (const ConvergenceError &e) {
    out.rejection = Rejection::kConvergence;
    out.detail = e.what();
    return out;
  }
  out.solver_converged = graphs.solver_converged;
  const chem::MolGraph &g = graphs.mixed;
  if (g.num_nodes() == 0 || (!has_any_edge(g) && (has_any_edge(a) || has_any_edge(b)))) {
    out.rejection = Rejection::kEmptyGraph;
    out.detail = "no edge survives the threshold";
    return out;
  }
  AugmentedSample s;
  try {
    const chem::DecodedMolecule decoded = chem::graph_to_mol(g, config.codec);
    s.smiles = chem::write_canonical_smiles(decoded.mol);
    s.sanitize_mode = decoded.mode;
    // The emitted string must stand on its own.
    chem::mol_from_smiles(s.smiles, decoded.mode);
  } catch (const Error &e) {
    out.rejection = Rejection::kSanitize;
    out.detail = e.what();
    return out;
  }
  s.graph = g;
  s.y_mix = (1.0 - mix) * a.y + mix * b.y;
  s.mix_alpha = mix;
  s.solver_converged = graphs.solver_converged;
  out.sample = std::move(s);
  return out;
}

double pick_mix(const std::vector<double> &grid, std::uint64_t seed, int i, int j) {
  if (grid.empty()) {
    throw std::invalid_argument("empty mix grid");
  }
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(i));
  h = splitmix64(h ^ static_cast<std::uint64_t>(j));
  return grid[h % grid.size()];
}

std::vector<double> parse_grid(const std::string &text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string part;
    std::vector<double> v;
    while (std::getline(ss, part, ':')) {
      v.push_back(std::stod(part));
    }
    if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) {
      throw std::invalid_argument("grid must be start:stop:step with step > 0");
    }
    for (int k = 0;; ++k) {
      const double value = v[0] + k * v[2];
      if (value > v[1] + 1e-9) {
        break;
      }
      out.push_back(std::round(value * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
      out.push_back(std::stod(part));
    }
  }
  if (out.empty()) {
    throw std::invalid_argument("empty mix grid");
  }
  for (double v : out) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("mix values must lie in [0, 1]");
    }
  }
  return out;
}

GenerationReport generation_metrics(const std::vector<Record> &train,
                                    const std::vector<AugmentedSample> &samples) {
  GenerationReport r;
  r.attempted = r.produced = static_cast<int>(samples.size());
  std::set<std::string> train_smiles;
  std::vector<double> atoms, rings;
  for (const Record &rec : train) {
    train_smiles.insert(chem::write_canonical_smiles(rec.mol));
    atoms.push_back(rec.mol.num_atoms());
    rings.push_back(chem::ring_count(rec.mol));
  }
  r.original_atoms = range_stats(atoms);
  r.original_rings = range_stats(rings);
  atoms.clear();
  rings.clear();
  std::set<std::string> unique;
  for (const AugmentedSample &s : samples) {
    unique.insert(s.smiles);
    const chem::Molecule m = chem::mol_from_smiles(s.smiles, s.sanitize_mode);
    atoms.push_back(m.num_atoms());
    rings.push_back(chem::ring_count(m));
    (s.sanitize_mode == chem::SanitizeMode::kStrict ? r.strict : r.relaxed) += 1;
    r.nonconverged += s.solver_converged ? 0 : 1;
  }
  r.augmented_atoms = range_stats(atoms);
  r.augmented_rings = range_stats(rings);
  r.unique = static_cast<int>(unique.size());
  for (const std::string &s : unique) {
    r.novel += train_smiles.count(s) == 0 ? 1 : 0;
  }
  if (!samples.empty()) {
    r.validity = 1.0;
    r.emitted_validity = 1.0;
    r.uniqueness = static_cast<double>(r.unique) / static_cast<double>(samples.size());
    r.novelty = static_cast<double>(r.novel) / static_cast<double>(r.unique);
  }
  return r;
}

AugmentResult augment_dataset(const std::vector<Record> &train, const AugmentConfig &config) {
  if (config.perc < 0.0 || config.perc > 1.0) {
    throw std::invalid_argument("perc must lie in [0, 1]");
  }
  AugmentResult out;
  const int n = static_cast<int>(train.size());
  const chem::FeatureCodec codec;
  std::vector<chem::MolGraph> graphs;
  std::vector<double> labels;
  for (const Record &r : train) {
    graphs.push_back(chem::mol_to_graph(r.mol, codec, r.y));
    labels.push_back(r.y);
  }

  bool uniform_fallback = false;
  if (config.use_kde) {
    std::vector<double> w;
    try {
      w = rarity::rarity_weights(rarity::kde_fit(labels));
    } catch (const DegenerateLabels &) {
      w.assign(n, n > 0 ? 1.0 / n : 0.0);
      uniform_fallback = true;
    }
    out.budgets = rarity::allocate_budgets(w, n, config.perc);
  } else {
    out.budgets.assign(n, 0);
    const auto k = static_cast<int>(std::floor(n * config.perc + 1e-9));
    const auto order = shuffled_indices(n, config.seed);
    for (int t = 0; t < k && t < n; ++t) {
      out.budgets[order[t]] = 1;
    }
  }

  SynthConfig synth;
  synth.fgw_alpha = config.fgw_alpha;
  synth.align = config.align;
  synth.codec = codec;

  struct Keyed {
    int a;
    int b;
    AugmentedSample sample;
  };
  std::vector<Keyed> produced;
  std::map<std::string, int> rejections;
  for (Rejection r : {Rejection::kSanitize, Rejection::kDegenerateBasis,
                      Rejection::kEmptyGraph, Rejection::kConvergence}) {
    rejections[to_string(r)] = 0;
  }
  int attempted = 0;
  for (int i = 0; i < n; ++i) {
    int successes = 0;
    if (out.budgets[i] == 0) {
      continue;
    }
    for (int j : rarity::partner_order(i, labels)) {
      if (successes >= out.budgets[i]) {
        break;
      }
      const double mix = pick_mix(config.mix_grid, config.seed, i, j);
      ++attempted;
      SynthResult r = synth_pair(graphs[i], graphs[j], mix, synth);
      if (!r.sample) {
        ++rejections[to_string(r.rejection)];
        continue;
      }
      r.sample->parent_a = train[i].id;
      r.sample->parent_b = train[j].id;
      produced.push_back({i, j, std::move(*r.sample)});
      ++successes;
    }
  }
  std::stable_sort(produced.begin(), produced.end(), [](const Keyed &x, const Keyed &y) {
    return std::tie(x.a, x.b, x.sample.mix_alpha) < std::tie(y.a, y.b, y.sample.mix_alpha);
  });
  for (Keyed &k : produced) {
    out.samples.push_back(std::move(k.sample));
  }
  out.report = generation_metrics(train, out.samples);
  out.report.attempted = attempted;
  out.report.produced = static_cast<int>(out.samples.size());
  out.report.rejections = rejections;
  out.report.validity =
      attempted == 0 ? 0.0 : static_cast<double>(out.report.produced) / attempted;
  out.report.uniform_weights_fallback = uniform_fallback;
  return out;
}

}  // namespace spectra::pipeline
