// SPDX-License-Identifier: Apache-2.0
#include "spectra/pipeline/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spectra/error.hpp"

namespace spectra::pipeline {
namespace {

constexpr const char *kHeader = "smiles,y,parent_a,parent_b,mix_alpha,sanitize_mode";

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd &m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json stats_json(const RangeStats &s) {
  return {{"min", s.min}, {"mean", s.mean}, {"max", s.max}};
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SampleRow to_row(const AugmentedSample &s) {
  return {s.smiles,   s.y_mix,     s.parent_a,
          s.parent_b, s.mix_alpha, std::string(chem::to_string(s.sanitize_mode))};
}

void write_samples_csv(std::ostream &out, const std::vector<AugmentedSample> &samples) {
  out << kHeader << '\n';
  for (const AugmentedSample &s : samples) {
    const SampleRow r = to_row(s);
    out << csv_escape(r.smiles) << ',' << format_real(r.y) << ',' << csv_escape(r.parent_a)
        << ',' << csv_escape(r.parent_b) << ',' << format_real(r.mix_alpha) << ','
        << r.sanitize_mode << '\n';
  }
}

std::vector<SampleRow> read_samples_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line).size() != 6 ||
      split_csv_line(line)[0] != "smiles") {
    throw SchemaError(std::string("sample CSV header must be '") + kHeader + "'");
  }
  std::vector<SampleRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 6) {
      throw SchemaError("sample CSV row with " + std::to_string(f.size()) + " fields");
    }
    rows.push_back({f[0], std::stod(f[1]), f[2], f[3], std::stod(f[4]), f[5]});
  }
  return rows;
}

void write_samples_jsonl(std::ostream &out, const std::vector<AugmentedSample> &samples) {
  for (const AugmentedSample &s : samples) {
    nlohmann::ordered_json j;
    j["smiles"] = s.smiles;
    j["y"] = s.y_mix;
    j["parent_a"] = s.parent_a;
    j["parent_b"] = s.parent_b;
    j["mix_alpha"] = s.mix_alpha;
    j["sanitize_mode"] = chem::to_string(s.sanitize_mode);
    j["solver_converged"] = s.solver_converged;
    j["x"] = matrix_json(s.graph.x);
    nlohmann::ordered_json w = nlohmann::ordered_json::array();
    for (const auto &c : s.graph.w) {
      w.push_back(matrix_json(c));
    }
    j["w"] = std::move(w);
    out << j.dump() << '\n';
  }
}

std::string report_json(const GenerationReport &r) {
  nlohmann::ordered_json j;
  j["attempted"] = r.attempted;
  j["produced"] = r.produced;
  j["validity"] = r.validity;
  j["emitted_validity"] = r.emitted_validity;
  j["uniqueness"] = r.uniqueness;
  j["novelty"] = r.novelty;
  j["unique"] = r.unique;
  j["novel"] = r.novel;
  j["strict"] = r.strict;
  j["relaxed"] = r.relaxed;
  j["solver_nonconverged"] = r.nonconverged;
  j["uniform_weights_fallback"] = r.uniform_weights_fallback;
  j["rejections"] = r.rejections;
  j["original"] = {{"atoms", stats_json(r.original_atoms)},
                   {"rings", stats_json(r.original_rings)}};
  j["augmented"] = {{"atoms", stats_json(r.augmented_atoms)},
                    {"rings", stats_json(r.augmented_rings)}};
  return j.dump(2) + "\n";
}

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out << text;
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

void export_samples(const std::vector<AugmentedSample> &samples, const std::string &path,
                    const std::string &format) {
  std::ostringstream ss;
  if (format == "csv") {
    write_samples_csv(ss, samples);
  } else if (format == "jsonl") {
    write_samples_jsonl(ss, samples);
  } else {
    throw std::invalid_argument("unknown export format '" + format + "'");
  }
  write_text_file(path, ss.str());
}

std::vector<SampleRow> load_samples(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  return read_samples_csv(in);
}

}  // namespace spectra::pipeline
