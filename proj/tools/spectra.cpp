// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spectra/chem/codec.hpp"
#include "spectra/chem/smiles.hpp"
#include "spectra/error.hpp"
#include "spectra/match/match.hpp"
#include "spectra/model/io.hpp"
#include "spectra/model/metrics.hpp"
#include "spectra/model/train.hpp"
#include "spectra/pipeline/augment.hpp"
#include "spectra/pipeline/dataset.hpp"
#include "spectra/pipeline/io.hpp"
#include "spectra/rarity/rarity.hpp"

namespace {

using namespace spectra;

struct DataOptions {
  std::string smiles_col = "smiles";
  std::string target_col = "y";
  std::string id_col;
  std::uint64_t split_seed = 0;
};

void add_data_options(CLI::App *sub, DataOptions &d) {
  sub->add_option("--smiles-col", d.smiles_col, "SMILES column name")->capture_default_str();
  sub->add_option("--target-col", d.target_col, "target column name")->capture_default_str();
  sub->add_option("--id-col", d.id_col, "id column name (row numbers when empty)");
  sub->add_option("--split-seed", d.split_seed, "seed of the train/val/test split")
      ->capture_default_str();
}

pipeline::Dataset load(const std::string &path, const DataOptions &d) {
  pipeline::LoadOptions o;
  o.smiles_col = d.smiles_col;
  o.target_col = d.target_col;
  o.id_col = d.id_col;
  o.split_seed = d.split_seed;
  pipeline::Dataset ds = pipeline::load_dataset(path, o);
  for (const std::string &w : ds.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  return ds;
}

std::vector<model::GraphInput> featurize(const std::vector<pipeline::Record> &records) {
  std::vector<model::GraphInput> out;
  out.reserve(records.size());
  for (const pipeline::Record &r : records) {
    out.push_back(model::featurize(r.mol, r.y));
  }
  return out;
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string real(double v) { return pipeline::format_real(v); }

// --- augment ---------------------------------------------------------------

struct AugmentArgs {
  DataOptions data;
  std::string input;
  std::string out;
  std::string report;
  std::string format = "csv";
  double perc = 0.3;
  double fgw_alpha = 0.5;
  std::string grid = "0.1:0.5:0.1";
  std::uint64_t seed = 0;
  bool no_align = false;
  bool no_kde = false;
  bool all = false;
};

int run_augment(const AugmentArgs &a) {
  const pipeline::Dataset ds = load(a.input, a.data);
  const std::vector<pipeline::Record> train =
      a.all ? ds.records : ds.subset(pipeline::Split::kTrain);
  pipeline::AugmentConfig c;
  c.perc = a.perc;
  c.fgw_alpha = a.fgw_alpha;
  c.mix_grid = pipeline::parse_grid(a.grid);
  c.seed = a.seed;
  c.align = !a.no_align;
  c.use_kde = !a.no_kde;
  const pipeline::AugmentResult r = pipeline::augment_dataset(train, c);
  pipeline::export_samples(r.samples, a.out, a.format);
  if (!a.report.empty()) {
    pipeline::write_text_file(a.report, pipeline::report_json(r.report));
  }
  std::cerr << "augment: " << train.size() << " training molecules, " << r.report.attempted
            << " attempted, " << r.report.produced << " produced\n";
  return 0;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  DataOptions data;
  std::string data_path;
  std::string aug;
  std::string config;
  std::string out;
  std::string history;
  std::uint64_t seed = 0;
  std::optional<int> epochs;
  std::optional<int> hidden_dim;
  std::optional<int> num_layers;
  std::optional<int> cheb_order;
  std::optional<int> batch_size;
  std::optional<double> dropout;
  std::optional<double> learning_rate;
  bool verbose = false;
};

int run_train(const TrainArgs &a) {
  model::ModelConfig cfg;
  if (!a.config.empty()) {
    model::apply_config_text(cfg, read_text(a.config));
  }
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.hidden_dim) cfg.hidden_dim = *a.hidden_dim;
  if (a.num_layers) cfg.num_layers = *a.num_layers;
  if (a.cheb_order) cfg.cheb_order = *a.cheb_order;
  if (a.batch_size) cfg.batch_size = *a.batch_size;
  if (a.dropout) cfg.dropout = *a.dropout;
  if (a.learning_rate) cfg.learning_rate = *a.learning_rate;
  cfg.validate();

  const pipeline::Dataset ds = load(a.data_path, a.data);
  const std::vector<pipeline::Record> train_records = ds.subset(pipeline::Split::kTrain);
  std::vector<model::GraphInput> train = featurize(train_records);
  const std::vector<model::GraphInput> val = featurize(ds.subset(pipeline::Split::kVal));
  std::size_t augmented = 0;
  if (!a.aug.empty()) {
    for (const pipeline::SampleRow &row : pipeline::load_samples(a.aug)) {
      const chem::SanitizeMode mode = row.sanitize_mode == "relaxed"
                                          ? chem::SanitizeMode::kRelaxed
                                          : chem::SanitizeMode::kStrict;
      train.push_back(model::featurize(chem::mol_from_smiles(row.smiles, mode), row.y));
      ++augmented;
    }
  }
  model::TrainOptions opts;
  if (a.verbose) {
    opts.on_epoch = [](const model::HistoryEntry &h) {
      std::cerr << "epoch " << h.epoch << " train_loss " << h.train_loss << " val_mae "
                << h.val_mae << '\n';
    };
  }
  const model::TrainResult r = model::train(train, val, cfg, a.seed, opts);
  model::SavedModel saved{r.params, {}};
  for (const pipeline::Record &rec : train_records) {
    saved.train_labels.push_back(rec.y);
  }
  model::save_model(a.out, saved);
  if (!a.history.empty()) {
    std::string csv = "epoch,train_loss,val_mae\n";
    for (const model::HistoryEntry &h : r.history) {
      csv += std::to_string(h.epoch) + "," + real(h.train_loss) + "," + real(h.val_mae) + "\n";
    }
    pipeline::write_text_file(a.history, csv);
  }
  std::cerr << "train: " << train_records.size() << " original + " << augmented
            << " augmented samples, best epoch " << r.best_epoch << '\n';
  return 0;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  DataOptions data;
  std::string model;
  std::string data_path;
  std::string report;
  std::string split = "test";
  int bins = 5;
};

int run_eval(const EvalArgs &a) {
  const model::SavedModel m = model::load_model(a.model);
  const pipeline::Dataset ds = load(a.data_path, a.data);
  std::vector<pipeline::Record> records;
  if (a.split == "all") {
    records = ds.records;
  } else {
    const pipeline::Split s = a.split == "train" ? pipeline::Split::kTrain
                              : a.split == "val" ? pipeline::Split::kVal
                                                 : pipeline::Split::kTest;
    records = ds.subset(s);
  }
  if (records.empty()) {
    throw SchemaError("no records in the '" + a.split + "' split");
  }
  const std::vector<model::GraphInput> graphs = featurize(records);
  const model::EvalReport r = model::evaluate(m.params, graphs, m.train_labels, a.bins);
  const std::string json = model::eval_report_json(r);
  if (a.report.empty()) {
    std::cout << json;
  } else {
    pipeline::write_text_file(a.report, json);
  }
  return 0;
}

// --- match -----------------------------------------------------------------

struct MatchArgs {
  std::string a;
  std::string b;
  double fgw_alpha = 0.5;
  std::string dump_spectra;
};

std::string smiles_argument(const std::string &arg) {
  if (!std::filesystem::is_regular_file(arg)) {
    return arg;
  }
  std::istringstream in(read_text(arg));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string token;
    if (fields >> token && token.front() != '#') {
      return token;
    }
  }
  throw SchemaError("no SMILES in '" + arg + "'");
}

int run_match(const MatchArgs &args) {
  const chem::FeatureCodec codec;
  const chem::MolGraph a = chem::mol_to_graph(chem::mol_from_smiles(smiles_argument(args.a)), codec, 0.0);
  const chem::MolGraph b = chem::mol_to_graph(chem::mol_from_smiles(smiles_argument(args.b)), codec, 0.0);
  const match::MatchResult m = match::hard_match(a, b, args.fgw_alpha);
  const match::Coupling &c = m.coupling;
  nlohmann::ordered_json j;
  j["n"] = m.padded.n;
  j["n_a"] = m.padded.n_a;
  j["n_b"] = m.padded.n_b;
  j["fgw_alpha"] = m.fgw_alpha;
  j["permutation"] = m.permutation;
  j["objective"] = c.objective;
  j["iterations"] = c.iterations;
  j["converged"] = c.converged;
  j["row_marginal_residual"] = (c.t.rowwise().sum() - c.p).cwiseAbs().maxCoeff();
  j["col_marginal_residual"] = (c.t.colwise().sum().transpose() - c.q).cwiseAbs().maxCoeff();
  std::cout << j.dump(2) << '\n';

  if (!args.dump_spectra.empty()) {
    pipeline::SynthConfig sc;
    sc.fgw_alpha = args.fgw_alpha;
    const pipeline::SynthGraphs g = pipeline::synth_graphs(a, b, 0.0, sc);
    for (int ch = 0; ch < chem::kNumChannels; ++ch) {
      std::string csv = "index,lambda_a,lambda_b\n";
      const Eigen::VectorXd &la = g.spectra_a[ch].values;
      const Eigen::VectorXd &lb = g.spectra_b[ch].values;
      for (Eigen::Index i = 0; i < la.size(); ++i) {
        csv += std::to_string(i) + "," + real(la[i]) + "," + real(lb[i]) + "\n";
      }
      pipeline::write_text_file(args.dump_spectra + ".channel" + std::to_string(ch) + ".csv", csv);
    }
  }
  return 0;
}

// --- stats -----------------------------------------------------------------

struct StatsArgs {
  DataOptions data;
  std::string input;
  std::string out;
  bool kde = false;
  int grid = 200;
};

int run_stats(const StatsArgs &a) {
  const pipeline::Dataset ds = load(a.input, a.data);
  std::vector<double> y;
  for (const pipeline::Record &r : ds.records) {
    y.push_back(r.y);
  }
  std::string text;
  if (a.kde) {
    const rarity::LabelDensity d = rarity::kde_fit(y);
    double inv_total = 0.0;
    for (double v : y) {
      inv_total += 1.0 / d(v);
    }
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const double start = *lo - 3.0 * d.bandwidth;
    const double stop = *hi + 3.0 * d.bandwidth;
    text = "y,density,weight\n";
    const int n = std::max(a.grid, 2);
    for (int i = 0; i < n; ++i) {
      const double v = start + (stop - start) * i / (n - 1);
      const double rho = d(v);
      text += real(v) + "," + real(rho) + "," + real(1.0 / rho / inv_total) + "\n";
    }
  } else {
    nlohmann::ordered_json j;
    j["records"] = ds.records.size();
    j["skipped"] = ds.skipped;
    double mean = 0.0;
    for (double v : y) {
      mean += v;
    }
    mean /= static_cast<double>(std::max<std::size_t>(y.size(), 1));
    double var = 0.0;
    for (double v : y) {
      var += (v - mean) * (v - mean);
    }
    j["mean"] = mean;
    j["std"] = y.size() > 1 ? std::sqrt(var / static_cast<double>(y.size() - 1)) : 0.0;
    if (!y.empty()) {
      j["min"] = *std::min_element(y.begin(), y.end());
      j["max"] = *std::max_element(y.begin(), y.end());
    }
    if (y.size() > 1) {
      j["scott_bandwidth"] = rarity::scott_bandwidth(y);
    }
    text = j.dump(2) + "\n";
  }
  if (a.out.empty()) {
    std::cout << text;
  } else {
    pipeline::write_text_file(a.out, text);
  }
  return 0;
}

// Expands `augment --config FILE` into flags placed before the explicit
// ones, so explicit flags take precedence.
std::vector<std::string> expand_config(int argc, char **argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2 || args[1] != "augment") {
    return args;
  }
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) {
    return args;
  }
  std::vector<std::string> extra;
  std::istringstream in(read_text(path));
  std::string line;
  auto trim = [](std::string t) {
    const auto b = t.find_first_not_of(" \t\r\"");
    const auto e = t.find_last_not_of(" \t\r\"");
    return b == std::string::npos ? std::string{} : t.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == '[') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line is not key = value: '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = trim(line.substr(eq + 1));
    if (key == "no-align" || key == "no-kde" || key == "all") {
      if (value == "true" || value == "1" || value == "yes") {
        extra.push_back("--" + key);
      }
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  args.insert(args.begin() + 2, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Spectral augmentation of molecular regression data"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  AugmentArgs aug;
  CLI::App *augment = app.add_subcommand("augment", "synthesize augmented molecules");
  std::string augment_config;
  augment->add_option("--config", augment_config, "key = value file mirroring the flags");
  augment->add_option("--input", aug.input, "input CSV")->required();
  augment->add_option("--out", aug.out, "output sample file")->required();
  augment->add_option("--report", aug.report, "generation report JSON");
  augment->add_option("--format", aug.format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
  augment->add_option("--perc", aug.perc, "augmentation rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  augment->add_option("--fgw-alpha", aug.fgw_alpha, "structure/feature trade-off")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  augment->add_option("--mix-alpha-grid", aug.grid, "start:stop:step or comma list")
      ->capture_default_str();
  augment->add_option("--seed", aug.seed, "run seed")->capture_default_str();
  augment->add_flag("--no-align", aug.no_align, "skip graph matching");
  augment->add_flag("--no-kde", aug.no_kde, "uniform budgets instead of density weights");
  augment->add_flag("--all", aug.all, "augment every record instead of the train split");
  add_data_options(augment, aug.data);

  TrainArgs tr;
  CLI::App *train = app.add_subcommand("train", "train the spectral regressor");
  train->add_option("--data", tr.data_path, "input CSV")->required();
  train->add_option("--aug", tr.aug, "augmented sample CSV");
  train->add_option("--config", tr.config, "model config (key = value)");
  train->add_option("--out", tr.out, "model file")->required();
  train->add_option("--history", tr.history, "per-epoch history CSV");
  train->add_option("--seed", tr.seed, "training seed")->capture_default_str();
  train->add_option("--epochs", tr.epochs, "override epochs");
  train->add_option("--hidden-dim", tr.hidden_dim, "override hidden_dim");
  train->add_option("--num-layers", tr.num_layers, "override num_layers");
  train->add_option("--cheb-order", tr.cheb_order, "override cheb_order");
  train->add_option("--batch-size", tr.batch_size, "override batch_size");
  train->add_option("--dropout", tr.dropout, "override dropout");
  train->add_option("--learning-rate", tr.learning_rate, "override learning_rate");
  train->add_flag("--verbose", tr.verbose, "log every epoch to stderr");
  add_data_options(train, tr.data);

  EvalArgs ev;
  CLI::App *eval = app.add_subcommand("eval", "evaluate a trained model");
  eval->add_option("--model", ev.model, "model file")->required();
  eval->add_option("--data", ev.data_path, "input CSV")->required();
  eval->add_option("--bins", ev.bins, "equal-width target bins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_option("--report", ev.report, "report JSON (stdout when omitted)");
  eval->add_option("--split", ev.split, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}))
      ->capture_default_str();
  add_data_options(eval, ev.data);

  MatchArgs ma;
  CLI::App *match = app.add_subcommand("match", "match two molecules");
  match->add_option("a", ma.a, "SMILES or file with SMILES")->required();
  match->add_option("b", ma.b, "SMILES or file with SMILES")->required();
  match->add_option("--fgw-alpha", ma.fgw_alpha, "structure/feature trade-off")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  match->add_option("--dump-spectra", ma.dump_spectra,
                    "write PREFIX.channelK.csv eigenvalue tables");

  StatsArgs st;
  CLI::App *stats = app.add_subcommand("stats", "label statistics");
  stats->add_option("--input", st.input, "input CSV")->required();
  stats->add_option("--out", st.out, "output file (stdout when omitted)");
  stats->add_flag("--kde", st.kde, "emit the (y, density, weight) grid as CSV");
  stats->add_option("--grid", st.grid, "grid points for --kde")->capture_default_str();
  add_data_options(stats, st.data);

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    args.pop_back();
    app.parse(std::move(args));
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  try {
    if (augment->parsed()) return run_augment(aug);
    if (train->parsed()) return run_train(tr);
    if (eval->parsed()) return run_eval(ev);
    if (match->parsed()) return run_match(ma);
    if (stats->parsed()) return run_stats(st);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
