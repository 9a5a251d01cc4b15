// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "spectra/pipeline/augment.hpp"

namespace spectra::pipeline {

/// One row of the sample CSV.
struct SampleRow {
  std::string smiles;
  double y = 0.0;
  std::string parent_a;
  std::string parent_b;
  double mix_alpha = 0.0;
  std::string sanitize_mode;

  friend bool operator==(const SampleRow &, const SampleRow &) = default;
};

SampleRow to_row(const AugmentedSample &s);

/// CSV header: smiles,y,parent_a,parent_b,mix_alpha,sanitize_mode. Reals
/// are written with 17 significant digits.
void write_samples_csv(std::ostream &out, const std::vector<AugmentedSample> &samples);
std::vector<SampleRow> read_samples_csv(std::istream &in);

/// One JSON object per line with the CSV fields, the convergence flag and
/// the numeric graph (x, w).
void write_samples_jsonl(std::ostream &out, const std::vector<AugmentedSample> &samples);

std::string report_json(const GenerationReport &report);

/// Path helpers; throw IoError.
void export_samples(const std::vector<AugmentedSample> &samples, const std::string &path,
                    const std::string &format);
std::vector<SampleRow> load_samples(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);

/// printf("%.17g").
std::string format_real(double v);

}  // namespace spectra::pipeline
