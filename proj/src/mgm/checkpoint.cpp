/**
 * @file checkpoint.cpp
 */

#include "melotrans/mgm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace melotrans::mgm {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'T', 'C', 'K'};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw CheckpointError("cannot open " + path + " for writing");
  }
  template <typename T>
  void put(T v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void finish(const std::string& path) {
    out_.flush();
    if (!out_) throw CheckpointError("write failed: " + path);
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw CheckpointError("cannot open " + path);
  }
  template <typename T>
  T get() {
    T v{};
    bytes(reinterpret_cast<char*>(&v), sizeof v);
    return v;
  }
  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw CheckpointError(path_ + ": truncated checkpoint");
  }

 private:
  std::string path_;
  std::ifstream in_;
};

}  // namespace

void save_checkpoint(const EncoderDecoder& model, const std::string& path) {
  Writer w(path);
  const ModelConfig& c = model.config();
  w.bytes(kMagic, 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  for (int v : {c.layers_enc, c.layers_dec, c.heads, c.d_model, c.d_ff, c.max_len, c.batch, c.epochs}) {
    w.put<std::int32_t>(v);
  }
  for (double v : {c.lr, c.beta1, c.beta2}) w.put<double>(v);
  w.put<std::uint64_t>(c.seed);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.kind()));
  const auto& all = model.params().all();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(all.size()));
  for (const auto& [name, var] : all) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(var->value.rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(var->value.cols()));
    for (Eigen::Index r = 0; r < var->value.rows(); ++r) {
      for (Eigen::Index k = 0; k < var->value.cols(); ++k) w.put<double>(var->value(r, k));
    }
  }
  w.finish(path);
}

std::unique_ptr<EncoderDecoder> load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw CheckpointError(path + ": not a checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  ModelConfig c;
  for (int* v : {&c.layers_enc, &c.layers_dec, &c.heads, &c.d_model, &c.d_ff, &c.max_len, &c.batch, &c.epochs}) {
    *v = r.get<std::int32_t>();
  }
  for (double* v : {&c.lr, &c.beta1, &c.beta2}) *v = r.get<double>();
  c.seed = r.get<std::uint64_t>();
  const auto kind_byte = r.get<std::uint8_t>();
  if (kind_byte > 1) throw CheckpointError(path + ": unknown model kind " + std::to_string(kind_byte));

  std::unique_ptr<EncoderDecoder> model;
  try {
    model = std::make_unique<EncoderDecoder>(c, static_cast<ModelKind>(kind_byte));
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  const auto& all = model->params().all();
  const auto count = r.get<std::uint32_t>();
  if (count != all.size()) {
    throw CheckpointError(path + ": expected " + std::to_string(all.size()) + " parameters, found " +
                          std::to_string(count));
  }
  for (const auto& [name, var] : all) {
    const auto len = r.get<std::uint32_t>();
    if (len > 4096) throw CheckpointError(path + ": corrupt parameter name");
    std::string stored(len, '\0');
    r.bytes(stored.data(), len);
    if (stored != name) throw CheckpointError(path + ": expected parameter " + name + ", found " + stored);
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (rows != var->value.rows() || cols != var->value.cols()) {
      throw CheckpointError(path + ": shape mismatch for " + name);
    }
    for (Eigen::Index i = 0; i < var->value.rows(); ++i) {
      for (Eigen::Index k = 0; k < var->value.cols(); ++k) var->value(i, k) = r.get<double>();
    }
  }
  return model;
}

}  // namespace melotrans::mgm
