// SPDX-License-Identifier: Apache-2.0
#include "spectra/pipeline/dataset.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "spectra/chem/smiles.hpp"
#include "spectra/error.hpp"

namespace spectra::pipeline {

std::vector<int> Dataset::indices(Split s) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(split.size()); ++i) {
    if (split[i] == s) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<Record> Dataset::subset(Split s) const {
  std::vector<Record> out;
  for (int i : indices(s)) {
    out.push_back(records[i]);
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

std::string csv_escape(const std::string &field) {
  if (field.find_first_of(",\"\n") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  return out + "\"";
}

std::vector<int> shuffled_indices(int n, std::uint64_t seed) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    order[i] = i;
  }
  std::mt19937_64 rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

std::vector<Split> assign_splits(int n, std::uint64_t seed, double train_fraction,
                                 double val_fraction) {
  if (train_fraction < 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0) {
    throw std::invalid_argument("split fractions must be nonnegative and sum to <= 1");
  }
  const auto n_train = static_cast<int>(std::llround(n * train_fraction));
  const auto n_val =
      std::min(n - n_train, static_cast<int>(std::llround(n * val_fraction)));
  std::vector<Split> tags(n, Split::kTest);
  const auto order = shuffled_indices(n, seed);
  for (int k = 0; k < n; ++k) {
    if (k < n_train) {
      tags[order[k]] = Split::kTrain;
    } else if (k < n_train + n_val) {
      tags[order[k]] = Split::kVal;
    }
  }
  return tags;
}

Dataset read_dataset(std::istream &in, const LoadOptions &options) {
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("empty CSV: no header row");
  }
  const auto header = split_csv_line(line);
  auto column = [&](const std::string &name) {
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
      if (header[i] == name) {
        return i;
      }
    }
    throw SchemaError("missing column '" + name + "'");
  };
  const int smiles_col = column(options.smiles_col);
  const int target_col = column(options.target_col);
  const int id_col = options.id_col.empty() ? -1 : column(options.id_col);

  Dataset d;
  std::set<std::string> ids;
  int row = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    ++row;
    const auto fields = split_csv_line(line);
    const auto where = "row " + std::to_string(row) + ": ";
    const int needed = std::max({smiles_col, target_col, id_col});
    if (static_cast<int>(fields.size()) <= needed) {
      d.warnings.push_back(where + "too few fields");
      ++d.skipped;
      continue;
    }
    Record r;
    r.id = id_col >= 0 ? fields[id_col] : std::to_string(row);
    r.smiles = fields[smiles_col];
    try {
      std::size_t used = 0;
      r.y = std::stod(fields[target_col], &used);
      if (!std::isfinite(r.y)) {
        throw std::invalid_argument("non-finite");
      }
    } catch (const std::exception &) {
      d.warnings.push_back(where + "bad target '" + fields[target_col] + "'");
      ++d.skipped;
      continue;
    }
    try {
      r.mol = chem::mol_from_smiles(r.smiles);
    } catch (const Error &e) {
      d.warnings.push_back(where + "skipped '" + r.smiles + "': " + e.what());
      ++d.skipped;
      continue;
    }
    if (!ids.insert(r.id).second) {
      d.warnings.push_back(where + "duplicate id '" + r.id + "'");
      ++d.skipped;
      continue;
    }
    d.records.push_back(std::move(r));
  }
  d.split = assign_splits(static_cast<int>(d.records.size()), options.split_seed,
                          options.train_fraction, options.val_fraction);
  return d;
}

Dataset load_dataset(const std::string &path, const LoadOptions &options) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  return read_dataset(in, options);
}

}  // namespace spectra::pipeline
