// SPDX-License-Identifier: Apache-2.0
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "../unit/corpus.hpp"
#include "../unit/model_helpers.hpp"
#include "../unit/random_graphs.hpp"
#include "spectra/chem/codec.hpp"
#include "spectra/chem/smiles.hpp"
#include "spectra/error.hpp"
#include "spectra/match/match.hpp"
#include "spectra/model/metrics.hpp"
#include "spectra/model/train.hpp"
#include "spectra/pipeline/augment.hpp"
#include "spectra/pipeline/dataset.hpp"
#include "spectra/rarity/rarity.hpp"
#include "spectra/spectral/spectral.hpp"

using namespace spectra;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const std::string kFixtures = SPECTRA_FIXTURES;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<int> iota_perm(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

MatrixXd permutation_plan(const std::vector<int> &perm) {
  const int n = static_cast<int>(perm.size());
  MatrixXd t = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    t(i, perm[i]) = 1.0 / n;
  }
  return t;
}

MatrixXd permute_sym(const MatrixXd &a, const std::vector<int> &perm) {
  MatrixXd out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      out(i, k) = a(perm[i], perm[k]);
    }
  }
  return out;
}

double marginal_residual(const match::Coupling &c) {
  return std::max((c.t.rowwise().sum() - c.p).cwiseAbs().maxCoeff(),
                  (c.t.colwise().sum().transpose() - c.q).cwiseAbs().maxCoeff());
}

pipeline::Dataset desk200() {
  pipeline::LoadOptions o;
  o.id_col = "id";
  return pipeline::load_dataset(kFixtures + "/desk200.csv", o);
}

std::vector<model::GraphInput> featurize(const std::vector<pipeline::Record> &records) {
  std::vector<model::GraphInput> out;
  for (const pipeline::Record &r : records) {
    out.push_back(model::featurize(r.mol, r.y));
  }
  return out;
}

// 1 -------------------------------------------------------------------------
Outcome spectral_round_trip() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  int inexact = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 30;
    chem::MolGraph g;
    g.x = MatrixXd::Zero(n, chem::FeatureCodec::kNumColumns);
    for (auto &w : g.w) {
      w = random_weighted_graph(n, rng);
    }
    const spectral::ChannelLaplacians ls = spectral::channel_laplacians(g);
    for (int c = 0; c < chem::kNumChannels; ++c) {
      if (spectral::laplacian_to_adjacency(ls[c]) != g.w[c]) {
        ++inexact;
      }
      const spectral::SpectralDecomposition d = spectral::eig_sym(ls[c]);
      const MatrixXd back = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
      worst = std::max(worst, (back - ls[c]).cwiseAbs().maxCoeff());
    }
  }
  return {inexact == 0 && worst < 1e-6,
          "500 graphs x 3 channels, inexact adjacency " + std::to_string(inexact) +
              ", max reconstruction error " + fmt(worst)};
}

// 2 -------------------------------------------------------------------------
Outcome endpoint_identity() {
  std::vector<std::string> corpus = load_corpus();
  corpus.resize(std::min<std::size_t>(corpus.size(), 20));
  int ok = 0;
  for (const std::string &smi : corpus) {
    const chem::Molecule m = chem::mol_from_smiles(smi);
    const chem::MolGraph g = chem::mol_to_graph(m, chem::FeatureCodec{}, 0.0);
    const pipeline::SynthResult r = pipeline::synth_pair(g, g, 0.0, {});
    if (r.sample && r.sample->smiles == chem::write_canonical_smiles(m)) {
      ++ok;
    } else {
      std::cerr << "  endpoint mismatch for " << smi << '\n';
    }
  }
  return {corpus.size() == 20 && ok == 20,
          std::to_string(ok) + "/" + std::to_string(corpus.size()) + " parents reproduced"};
}

// 3 -------------------------------------------------------------------------
Outcome transport() {
  std::mt19937_64 rng(3);
  double worst_marginal = 0.0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const MatrixXd a = random_weighted_graph(n, rng);
    std::vector<int> perm = iota_perm(n);
    if (trial % 2 == 1) {
      std::shuffle(perm.begin(), perm.end(), rng);
    }
    const MatrixXd b = permute_sym(a, perm);
    const VectorXd u = VectorXd::Constant(n, 1.0 / n);
    const MatrixXd zero = MatrixXd::Zero(n, n);
    const match::Coupling c = match::fgw_coupling(a, b, zero, u, u, 0.0);
    worst_marginal = std::max(worst_marginal, marginal_residual(c));
    std::vector<int> q = iota_perm(n);
    double best = std::numeric_limits<double>::infinity();
    do {
      best = std::min(best, match::fgw_objective(a, b, zero, permutation_plan(q), 0.0));
    } while (std::next_permutation(q.begin(), q.end()));
    worst_gap = std::max(worst_gap, std::abs(c.objective - best));
  }
  // General marginals and fused costs.
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    const MatrixXd a = random_weighted_graph(n, rng);
    const MatrixXd b = random_weighted_graph(n, rng);
    MatrixXd m(n, n);
    VectorXd p(n);
    VectorXd q(n);
    for (int i = 0; i < n; ++i) {
      p[i] = unit(rng);
      q[i] = unit(rng);
      for (int j = 0; j < n; ++j) {
        m(i, j) = unit(rng);
      }
    }
    p /= p.sum();
    q /= q.sum();
    worst_marginal =
        std::max(worst_marginal, marginal_residual(match::fgw_coupling(a, b, m, p, q, 0.5)));
  }
  int hungarian_bad = 0;
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5;
    MatrixXd c(n, n);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      c.data()[i] = trial % 2 == 0 ? cost(rng) : std::floor(cost(rng) / 3.0);
    }
    std::vector<int> q = iota_perm(n);
    double best = std::numeric_limits<double>::infinity();
    do {
      best = std::min(best, match::assignment_cost(c, q));
    } while (std::next_permutation(q.begin(), q.end()));
    if (std::abs(match::assignment_cost(c, match::hungarian(c)) - best) > 1e-9) {
      ++hungarian_bad;
    }
  }
  return {worst_marginal < 1e-7 && worst_gap < 1e-6 && hungarian_bad == 0,
          "max marginal residual " + fmt(worst_marginal) + ", max GW gap to n! optimum " +
              fmt(worst_gap) + ", Hungarian mismatches " + std::to_string(hungarian_bad) +
              "/200"};
}

// 4 -------------------------------------------------------------------------
Outcome procrustes() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mix(0.0, 1.0);
  double worst = 0.0;
  int degenerate = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 30;
    const MatrixXd ua = random_orthogonal(n, rng);
    const MatrixXd ub = random_orthogonal(n, rng);
    const MatrixXd r = spectral::procrustes_align(ua, ub);
    const MatrixXd id = MatrixXd::Identity(n, n);
    worst = std::max(worst, (r.transpose() * r - id).cwiseAbs().maxCoeff());
    const double m = mix(rng);
    try {
      const MatrixXd u = spectral::orthonormal_factor((1.0 - m) * ua + m * (ub * r));
      worst = std::max(worst, (u.transpose() * u - id).cwiseAbs().maxCoeff());
    } catch (const DegenerateBasis &) {
      ++degenerate;
    }
  }
  return {worst < 1e-8, "1000 trials, max orthogonality defect " + fmt(worst) +
                            ", degenerate blends " + std::to_string(degenerate)};
}

// 5 -------------------------------------------------------------------------
Outcome rarity_machinery() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  int order_bad = 0;
  int budget_bad = 0;
  double scott_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 40;
    std::vector<double> y(static_cast<std::size_t>(n));
    for (double &v : y) {
      v = trial % 3 == 0 ? std::round(g(rng) * 2.0) : g(rng) * (1.0 + trial % 5);
    }
    if (*std::min_element(y.begin(), y.end()) == *std::max_element(y.begin(), y.end())) {
      y[0] += 1.0;
    }
    const rarity::LabelDensity d = rarity::kde_fit(y);
    const std::vector<double> w = rarity::rarity_weights(d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (d(y[i]) < d(y[j]) && !(w[i] > w[j])) {
          ++order_bad;
        }
      }
    }
    for (double perc : {0.1, 0.3, 0.5, 1.0}) {
      const std::vector<int> c = rarity::allocate_budgets(w, n, perc);
      if (std::accumulate(c.begin(), c.end(), 0) > n * perc + 1e-9) {
        ++budget_bad;
      }
    }
    double mean = 0.0;
    for (double v : y) {
      mean += v;
    }
    mean /= n;
    double ss = 0.0;
    for (double v : y) {
      ss += (v - mean) * (v - mean);
    }
    const double closed = std::sqrt(ss / (n - 1)) * std::pow(n, -0.2);
    scott_err = std::max(scott_err, std::abs(rarity::scott_bandwidth(y) - closed));
  }
  return {order_bad == 0 && budget_bad == 0 && scott_err <= 1e-12,
          "ordering violations " + std::to_string(order_bad) + ", budget violations " +
              std::to_string(budget_bad) + ", max Scott error " + fmt(scott_err)};
}

// 6 -------------------------------------------------------------------------
Outcome chemistry() {
  const std::vector<std::string> corpus = load_corpus();
  int round_trip = 0;
  int invariant = 0;
  std::mt19937_64 rng(6);
  for (const std::string &smi : corpus) {
    const chem::Molecule m = chem::mol_from_smiles(smi);
    const std::string canon = chem::write_canonical_smiles(m);
    if (chem::write_canonical_smiles(chem::mol_from_smiles(canon)) == canon) {
      ++round_trip;
    }
    bool same = true;
    for (int k = 0; k < 100; ++k) {
      std::vector<int> perm = iota_perm(m.num_atoms());
      std::shuffle(perm.begin(), perm.end(), rng);
      same = same && chem::write_canonical_smiles(chem::permute_atoms(m, perm)) == canon;
    }
    invariant += same ? 1 : 0;
  }
  const pipeline::Dataset ds = desk200();
  pipeline::AugmentConfig c;
  c.perc = 0.3;
  const pipeline::AugmentResult r = pipeline::augment_dataset(ds.subset(pipeline::Split::kTrain), c);
  int resanitized = 0;
  for (const pipeline::AugmentedSample &s : r.samples) {
    try {
      chem::mol_from_smiles(s.smiles, s.sanitize_mode);
      ++resanitized;
    } catch (const Error &) {
    }
  }
  int rejected = 0;
  for (const auto &[reason, count] : r.report.rejections) {
    rejected += count;
  }
  const int n = static_cast<int>(corpus.size());
  const bool accounting = r.report.attempted == r.report.produced + rejected &&
                          r.report.produced == static_cast<int>(r.samples.size());
  return {round_trip == n && invariant == n &&
              resanitized == static_cast<int>(r.samples.size()) && accounting &&
              r.report.emitted_validity == (r.samples.empty() ? 0.0 : 1.0),
          "round trip " + std::to_string(round_trip) + "/" + std::to_string(n) +
              ", relabel-invariant " + std::to_string(invariant) + "/" + std::to_string(n) +
              ", re-sanitized samples " + std::to_string(resanitized) + "/" +
              std::to_string(r.samples.size()) + ", attempted " +
              std::to_string(r.report.attempted) + " = produced " +
              std::to_string(r.report.produced) + " + rejected " + std::to_string(rejected) +
              ", pre-filter validity " + fmt(r.report.validity)};
}

// 7 -------------------------------------------------------------------------
Outcome gradient_check() {
  double worst = 0.0;
  std::string where;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 70);
    model::ModelConfig c;
    c.hidden_dim = 8;
    c.num_layers = 2;
    c.cheb_order = 3;
    const int d = model::feature_dim();
    const model::ModelParams p = random_params(c, d, rng);
    const model::GraphInput a = random_input(6, d, rng);
    const model::GraphInput b = random_input(6, d, rng);
    Eigen::VectorXd w(2);
    w << 1.0, -0.5;
    const GradientCheck r = check_gradients(p, {&a, &b}, w, seed);
    if (r.worst_relative_error >= worst) {
      worst = r.worst_relative_error;
      where = r.worst_tensor;
    }
  }
  return {worst < 1e-4, "5 seeds, worst relative error " + fmt(worst) + " (" + where + ")"};
}

// 8 -------------------------------------------------------------------------
Outcome memorization() {
  const pipeline::Dataset ds = desk200();
  std::vector<pipeline::Record> twenty(ds.records.begin(), ds.records.begin() + 20);
  const std::vector<model::GraphInput> data = featurize(twenty);
  const model::ModelConfig c;
  // The training set doubles as the checkpoint set, so the returned
  // parameters are the best eval-mode fit reached within the epoch budget.
  const model::TrainResult r = model::train(data, data, c, 0);
  const double best = model::mean_absolute_error(r.params, data);
  int first = 0;
  for (const model::HistoryEntry &h : r.history) {
    if (h.val_mae < 0.05) {
      first = h.epoch;
      break;
    }
  }
  return {best < 0.05 && first > 0 && first <= 500,
          "default config, eval-mode train MAE first below 0.05 at epoch " +
              std::to_string(first) + ", best " + fmt(best) + " at epoch " +
              std::to_string(r.best_epoch) + ", final epoch " + fmt(r.history.back().val_mae)};
}

// 9 -------------------------------------------------------------------------
model::ModelConfig ablation_config() { return model::ModelConfig{}; }

double pooled_bin_mae(const model::EvalReport &r, const std::vector<int> &bins) {
  double sum = 0.0;
  int count = 0;
  for (int b : bins) {
    sum += r.bins[b].mae * r.bins[b].count;
    count += r.bins[b].count;
  }
  return count > 0 ? sum / count : 0.0;
}

Outcome ablation() {
  const pipeline::Dataset ds = desk200();
  const std::vector<pipeline::Record> train_records = ds.subset(pipeline::Split::kTrain);
  const std::vector<model::GraphInput> train = featurize(train_records);
  const std::vector<model::GraphInput> val = featurize(ds.subset(pipeline::Split::kVal));
  const std::vector<model::GraphInput> test = featurize(ds.subset(pipeline::Split::kTest));
  std::vector<double> labels;
  for (const pipeline::Record &r : train_records) {
    labels.push_back(r.y);
  }
  const model::ModelConfig cfg = ablation_config();
  double base_mae = 0.0;
  double aug_mae = 0.0;
  double base_rare = 0.0;
  double aug_rare = 0.0;
  std::size_t augmented = 0;
  std::vector<int> rare;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const model::TrainResult base = model::train(train, val, cfg, seed);
    const model::EvalReport rb = model::evaluate(base.params, test, labels);

    pipeline::AugmentConfig ac;
    ac.perc = 0.3;
    ac.seed = seed;
    const pipeline::AugmentResult ar = pipeline::augment_dataset(train_records, ac);
    std::vector<model::GraphInput> with_aug = train;
    for (const pipeline::AugmentedSample &s : ar.samples) {
      with_aug.push_back(model::featurize(chem::mol_from_smiles(s.smiles, s.sanitize_mode), s.y_mix));
    }
    augmented += ar.samples.size();
    const model::TrainResult full = model::train(with_aug, val, cfg, seed);
    const model::EvalReport rf = model::evaluate(full.params, test, labels);

    rare = model::lowest_density_bins(rb, 2);
    base_mae += rb.mae / 3.0;
    aug_mae += rf.mae / 3.0;
    base_rare += pooled_bin_mae(rb, rare) / 3.0;
    aug_rare += pooled_bin_mae(rf, rare) / 3.0;
    std::cerr << "  seed " << seed << ": test MAE " << rb.mae << " -> " << rf.mae
              << ", rare-bin MAE " << pooled_bin_mae(rb, rare) << " -> "
              << pooled_bin_mae(rf, rare) << " (" << ar.samples.size() << " samples)\n";
  }
  std::string bins;
  for (int b : rare) {
    bins += (bins.empty() ? "" : ",") + std::to_string(b);
  }
  return {aug_mae <= base_mae + 0.02 && aug_rare <= base_rare + 0.05,
          "mean test MAE " + fmt(base_mae) + " -> " + fmt(aug_mae) + " with augmentation, bins {" +
              bins + "} MAE " + fmt(base_rare) + " -> " + fmt(aug_rare) + ", " +
              std::to_string(augmented / 3) + " samples per run"};
}

// 10 ------------------------------------------------------------------------
Outcome sera_identities() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int sse_bad = 0;
  int monotone_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 20;
    std::vector<double> err(static_cast<std::size_t>(n));
    std::vector<double> phi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      err[i] = u(rng) * 4.0;
      phi[i] = u(rng);
    }
    double sse = 0.0;
    for (double e : err) {
      sse += e;
    }
    if (model::sera_from_relevance(err, std::vector<double>(err.size(), 1.0)) != sse) {
      ++sse_bad;
    }
    const double before = model::sera_from_relevance(err, phi);
    const std::size_t i = rng() % static_cast<std::size_t>(n);
    phi[i] *= u(rng);
    if (model::sera_from_relevance(err, phi) > before + 1e-12) {
      ++monotone_bad;
    }
  }
  const double step = model::sera_from_relevance(std::vector<double>{1.0, 1.0, 1.0},
                                                 std::vector<double>{1.0, 0.5, 0.0});
  return {sse_bad == 0 && monotone_bad == 0 && step == 1.5,
          "full-relevance mismatches " + std::to_string(sse_bad) + "/1000, step integral " +
              fmt(step) + ", monotonicity violations " + std::to_string(monotone_bad) + "/1000"};
}

// 11 ------------------------------------------------------------------------
std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("spectra_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = SPECTRA_CLI;
  const std::string data = kFixtures + "/desk200.csv";
  {
    std::ofstream cfg(dir / "model.cfg");
    cfg << "hidden_dim = 16\nnum_layers = 2\nepochs = 5\nbatch_size = 32\n";
  }
  bool ok = true;
  for (int run = 0; run < 2; ++run) {
    const std::string tag = std::to_string(run);
    const std::string aug = (dir / ("aug" + tag + ".csv")).string();
    const std::string report = (dir / ("report" + tag + ".json")).string();
    const std::string model = (dir / ("model" + tag + ".bin")).string();
    const std::string augment_cmd = cli + " augment --input " + data +
                                    " --id-col id --perc 0.3 --seed 7 --out " + aug +
                                    " --report " + report + " 2>/dev/null";
    const std::string train_cmd = cli + " train --data " + data + " --id-col id --aug " + aug +
                                  " --config " + (dir / "model.cfg").string() +
                                  " --seed 3 --out " + model + " 2>/dev/null";
    ok = ok && std::system(augment_cmd.c_str()) == 0 && std::system(train_cmd.c_str()) == 0;
  }
  const bool same_aug = slurp(dir / "aug0.csv") == slurp(dir / "aug1.csv");
  const bool same_report = slurp(dir / "report0.json") == slurp(dir / "report1.json");
  const bool same_model = slurp(dir / "model0.bin") == slurp(dir / "model1.bin");
  const auto aug_bytes = fs::exists(dir / "aug0.csv") ? fs::file_size(dir / "aug0.csv") : 0;
  const auto model_bytes = fs::exists(dir / "model0.bin") ? fs::file_size(dir / "model0.bin") : 0;
  fs::remove_all(dir);
  return {ok && same_aug && same_report && same_model && aug_bytes > 0 && model_bytes > 0,
          std::string("augment CSV ") + (same_aug ? "identical" : "differs") + " (" +
              std::to_string(aug_bytes) + " bytes), report " +
              (same_report ? "identical" : "differs") + ", model " +
              (same_model ? "identical" : "differs") + " (" + std::to_string(model_bytes) +
              " bytes)"};
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;  // <= 0 when no runtime bound applies
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char **argv) {
  const std::vector<Criterion> criteria{
      {1, "spectral round trip", 10, spectral_round_trip},
      {2, "endpoint identity", 30, endpoint_identity},
      {3, "transport feasibility and optimality", 60, transport},
      {4, "Procrustes and QR orthogonality", 0, procrustes},
      {5, "rarity machinery", 0, rarity_machinery},
      {6, "chemistry round trip and validity", 0, chemistry},
      {7, "gradient check", 60, gradient_check},
      {8, "overfit sanity", 120, memorization},
      {9, "ablation direction", 1200, ablation},
      {10, "SERA identities", 0, sera_identities},
      {11, "determinism", 0, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    only.insert(std::atoi(argv[i]));
  }
  int failed = 0;
  for (const Criterion &c : criteria) {
    if (!only.empty() && !only.contains(c.id)) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_seconds <= 0 || seconds < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %s: %s; %.1f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), seconds,
                c.budget_seconds > 0 ? (" (limit " + fmt(c.budget_seconds) + " s)").c_str() : "");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
