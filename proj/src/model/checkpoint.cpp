// SPDX-License-Identifier: Apache-2.0
#include "selnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace selnet {

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n) {
      std::ostringstream msg;
      msg << "checkpoint truncated while reading " << what << " at byte " << pos_ << " (need " << n
          << ", have " << data_.size() - pos_ << ")";
      throw CheckpointTruncatedError(msg.str());
    }
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_++])) << (8 * i);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

template <class Enum>
Enum checked_enum(std::uint8_t raw, std::uint8_t count, const char* what) {
  if (raw >= count) {
    throw CheckpointFormatError(std::string("checkpoint: invalid ") + what + " code " + std::to_string(raw));
  }
  return static_cast<Enum>(raw);
}

struct Record {
  std::uint64_t rows;
  std::uint64_t cols;
  std::vector<double> values;
};

}  // namespace

std::string serialize_checkpoint(const SelectorNet& model) {
  // parameters()/buffers() hand out mutable views, so walk a copy.
  SelectorNet m = model;
  const SelectorNetConfig& c = model.config();
  Writer w;
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u8(kCheckpointVersion);
  w.u64(c.feature_dim);
  w.u64(c.steps);
  w.u64(c.embed_dim);
  w.u8(static_cast<std::uint8_t>(c.selector_variant));
  w.u8(static_cast<std::uint8_t>(c.fab_variant));
  w.u8(static_cast<std::uint8_t>(c.resblock_variant));
  w.u8(static_cast<std::uint8_t>(c.fab_step_input));
  w.u64(c.seed);

  std::vector<std::pair<std::string, const Matrix*>> records;
  for (const auto& p : m.parameters()) records.emplace_back(p.name, &p.param->value);
  for (const auto& b : m.buffers()) records.emplace_back(b.name, b.value);
  w.u64(records.size());
  for (const auto& [name, mat] : records) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u64(mat->rows());
    w.u64(mat->cols());
    for (double v : mat->values()) w.f64(v);
  }
  return w.take();
}

SelectorNet deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof kCheckpointMagic ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
    throw CheckpointMagicError("checkpoint: bad magic (expected \"SELNET1\")");
  }
  r.bytes(sizeof kCheckpointMagic, "magic");
  const std::uint8_t version = r.u8("version");
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint: unsupported version " + std::to_string(version) +
                                 " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }

  SelectorNetConfig config;
  config.feature_dim = r.u64("feature_dim");
  config.steps = r.u64("steps");
  config.embed_dim = r.u64("embed_dim");
  config.selector_variant = checked_enum<SelectorVariant>(r.u8("selector variant"), 6, "selector variant");
  config.fab_variant = checked_enum<FabVariant>(r.u8("FAB variant"), 2, "FAB variant");
  config.resblock_variant = checked_enum<ResBlockVariant>(r.u8("ResBlock variant"), 2, "ResBlock variant");
  config.fab_step_input = checked_enum<FabStepInput>(r.u8("FAB step input"), 2, "FAB step input");
  config.seed = r.u64("seed");
  if (config.feature_dim == 0 || config.steps == 0 || config.feature_dim > (1u << 20) ||
      config.steps > 4096 || config.embed_dim > (1u << 20)) {
    throw CheckpointFormatError("checkpoint: implausible dimensions in config block");
  }

  const std::uint64_t count = r.u64("record count");
  std::map<std::string, Record> records;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t len = r.u32("record name length");
    std::string name = r.bytes(len, "record name");
    Record rec;
    rec.rows = r.u64("record rows");
    rec.cols = r.u64("record cols");
    if (rec.cols != 0 && rec.rows > r.remaining() / 8 / rec.cols) {
      throw CheckpointTruncatedError("checkpoint truncated in values of record '" + name + "'");
    }
    rec.values.resize(rec.rows * rec.cols);
    for (double& v : rec.values) v = r.f64("record values");
    if (!records.emplace(name, std::move(rec)).second) {
      throw CheckpointFormatError("checkpoint: duplicate record '" + name + "'");
    }
  }
  if (r.remaining() != 0) {
    throw CheckpointFormatError("checkpoint: " + std::to_string(r.remaining()) + " trailing bytes");
  }

  SelectorNet model(config);
  auto assign = [&](const std::string& name, Matrix& target) {
    auto it = records.find(name);
    if (it == records.end()) throw CheckpointFormatError("checkpoint: missing record '" + name + "'");
    const Record& rec = it->second;
    if (rec.rows != target.rows() || rec.cols != target.cols()) {
      throw CheckpointFormatError("checkpoint: record '" + name + "' has shape " + std::to_string(rec.rows) +
                                  "x" + std::to_string(rec.cols) + ", model expects " + target.shape_string());
    }
    std::copy(rec.values.begin(), rec.values.end(), target.values().begin());
    records.erase(it);
  };
  for (auto& p : model.parameters()) assign(p.name, p.param->value);
  for (auto& b : model.buffers()) assign(b.name, *b.value);
  if (!records.empty()) {
    throw CheckpointFormatError("checkpoint: unexpected record '" + records.begin()->first + "'");
  }
  return model;
}

void save_checkpoint(const SelectorNet& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

SelectorNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace selnet
