// SPDX-License-Identifier: Apache-2.0
#include "spectra/model/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spectra/error.hpp"

namespace spectra::model {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'E', 'C', 'T', 'R', 'A', 'M'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u32(std::uint32_t v) { bytes(v, 4); }
  void i32(std::int32_t v) { bytes(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void f64(double v) { bytes(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const char *p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  void bytes(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
    }
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string &s) : s_(s) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() { return bytes(8); }
  double f64() { return std::bit_cast<double>(bytes(8)); }
  void raw(char *p, std::size_t n) {
    need(n);
    std::memcpy(p, s_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) {
      throw SchemaError("model file is truncated");
    }
  }
  std::uint64_t bytes(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::string &s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const SavedModel &model) {
  const ModelParams &p = model.params;
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.i32(p.config.hidden_dim);
  w.i32(p.config.num_layers);
  w.i32(p.config.cheb_order);
  w.i32(p.config.epochs);
  w.i32(p.config.batch_size);
  w.f64(p.config.dropout);
  w.f64(p.config.learning_rate);
  w.i32(p.input_dim);
  w.f64(p.target_mean);
  w.f64(p.target_scale);
  w.u64(static_cast<std::uint64_t>(p.values.size()));
  for (Eigen::Index i = 0; i < p.values.size(); ++i) {
    w.f64(p.values[i]);
  }
  for (int l = 0; l < p.config.num_layers; ++l) {
    for (Eigen::Index i = 0; i < p.config.hidden_dim; ++i) {
      w.f64(p.running_mean[l][i]);
    }
    for (Eigen::Index i = 0; i < p.config.hidden_dim; ++i) {
      w.f64(p.running_var[l][i]);
    }
  }
  w.u64(model.train_labels.size());
  for (double y : model.train_labels) {
    w.f64(y);
  }
  return w.take();
}

SavedModel deserialize_model(const std::string &bytes) {
  Reader r(bytes);
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw SchemaError("not a model file");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw SchemaError("unsupported model file version " + std::to_string(version));
  }
  ModelConfig c;
  c.hidden_dim = r.i32();
  c.num_layers = r.i32();
  c.cheb_order = r.i32();
  c.epochs = r.i32();
  c.batch_size = r.i32();
  c.dropout = r.f64();
  c.learning_rate = r.f64();
  const int input_dim = r.i32();
  SavedModel out;
  try {
    out.params = init_params(c, input_dim, 0);
  } catch (const std::invalid_argument &e) {
    throw SchemaError(std::string("bad model config: ") + e.what());
  }
  ModelParams &p = out.params;
  p.target_mean = r.f64();
  p.target_scale = r.f64();
  if (r.u64() != static_cast<std::uint64_t>(p.values.size())) {
    throw SchemaError("parameter count does not match the config");
  }
  for (Eigen::Index i = 0; i < p.values.size(); ++i) {
    p.values[i] = r.f64();
  }
  for (int l = 0; l < c.num_layers; ++l) {
    for (Eigen::Index i = 0; i < c.hidden_dim; ++i) {
      p.running_mean[l][i] = r.f64();
    }
    for (Eigen::Index i = 0; i < c.hidden_dim; ++i) {
      p.running_var[l][i] = r.f64();
    }
  }
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    out.train_labels.push_back(r.f64());
  }
  if (!r.done()) {
    throw SchemaError("trailing bytes in model file");
  }
  return out;
}

void save_model(const std::string &path, const SavedModel &model) {
  std::ofstream out(path, std::ios::binary);
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
}

SavedModel load_model(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

std::string eval_report_json(const EvalReport &report) {
  nlohmann::ordered_json j;
  j["mae"] = report.mae;
  j["sera"] = report.sera;
  nlohmann::ordered_json bins = nlohmann::ordered_json::array();
  for (const BinReport &b : report.bins) {
    nlohmann::ordered_json jb;
    jb["lo"] = b.lo;
    jb["hi"] = b.hi;
    jb["count"] = b.count;
    jb["train_count"] = b.train_count;
    jb["mae"] = b.mae;
    bins.push_back(std::move(jb));
  }
  j["binned_mae"] = std::move(bins);
  return j.dump(2) + "\n";
}

}  // namespace spectra::model
