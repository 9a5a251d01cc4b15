// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "spectra/chem/molecule.hpp"

namespace spectra::pipeline {

struct Record {
  std::string id;
  std::string smiles;
  double y = 0.0;
  chem::Molecule mol;  // strictly sanitized
};

enum class Split : std::uint8_t { kTrain, kVal, kTest };

struct LoadOptions {
  std::string smiles_col = "smiles";
  std::string target_col = "y";
  // Optional id column; row numbers (0-based, data rows) are used otherwise.
  std::string id_col;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
};

struct Dataset {
  std::vector<Record> records;
  std::vector<Split> split;
  int skipped = 0;
  std::vector<std::string> warnings;

  std::vector<int> indices(Split s) const;
  std::vector<Record> subset(Split s) const;
};

/// Splits a CSV line into fields. Double quotes delimit fields that contain
/// commas; "" inside quotes is a literal quote.
std::vector<std::string> split_csv_line(const std::string &line);
/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string &field);

/// Reads a CSV with a header row. Rows whose SMILES fail to parse or
/// sanitize, whose target is not a finite number, or whose id repeats are
/// skipped with a warning. Throws IoError / SchemaError.
Dataset load_dataset(const std::string &path, const LoadOptions &options);
Dataset read_dataset(std::istream &in, const LoadOptions &options);

/// Seeded Fisher-Yates order of 0..n-1 from mt19937_64 draws.
std::vector<int> shuffled_indices(int n, std::uint64_t seed);

/// Assigns train/val/test tags: the first round(n * train_fraction) shuffled
/// records train, the next round(n * val_fraction) validate, the rest test.
std::vector<Split> assign_splits(int n, std::uint64_t seed, double train_fraction,
                                 double val_fraction);

}  // namespace spectra::pipeline
