// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "spectra/model/metrics.hpp"
#include "spectra/model/model.hpp"

namespace spectra::model {

struct SavedModel {
  ModelParams params;
  // Training labels, kept for relevance and binning at evaluation time.
  std::vector<double> train_labels;
};

/// Little-endian binary: magic "SPECTRAM", u32 version, config block,
/// input width, target scaling, flat parameters, running moments and
/// training labels. Throws IoError.
void save_model(const std::string &path, const SavedModel &model);
std::string serialize_model(const SavedModel &model);

/// Throws IoError on unreadable files and SchemaError on malformed content.
SavedModel load_model(const std::string &path);
SavedModel deserialize_model(const std::string &bytes);

std::string eval_report_json(const EvalReport &report);

}  // namespace spectra::model
