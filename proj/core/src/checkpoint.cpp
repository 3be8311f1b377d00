#include "rotascore/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "binio.hpp"
#include "rotascore/errors.hpp"

namespace rotascore {

namespace {
constexpr char kMagic[4] = {'R', 'S', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  ckpt.config.validate();
  if (!ckpt.params.all_finite()) throw DataError("checkpoint: refusing to save non-finite parameters");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);

  binio::write_bytes(out, kMagic, sizeof(kMagic));
  binio::write_pod<std::uint32_t>(out, kVersion);
  binio::write_pod<std::int32_t>(out, ckpt.config.model_dim);
  binio::write_pod<std::int32_t>(out, ckpt.config.heads);
  binio::write_pod<std::int32_t>(out, ckpt.config.layers);
  binio::write_pod<std::int32_t>(out, ckpt.config.ff_dim);
  binio::write_pod<std::int32_t>(out, ckpt.config.max_seq_len);
  binio::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(ckpt.config.mode));
  binio::write_pod<double>(out, ckpt.config.time_scale);
  binio::write_pod<double>(out, ckpt.config.rope_base);
  binio::write_pod<std::int32_t>(out, ckpt.params.feature_dim);
  binio::write_pod<std::uint64_t>(out, ckpt.train_seed);
  binio::write_pod<double>(out, ckpt.valid_fraction);

  const auto named = ckpt.params.named();
  binio::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    binio::write_string(out, name);
    binio::write_pod<std::int32_t>(out, tensor->rows());
    binio::write_pod<std::int32_t>(out, tensor->cols());
    binio::write_bytes(out, tensor->data().data(), tensor->data().size() * sizeof(double));
  }
  out.flush();
  if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);

  char magic[4];
  binio::read_bytes(in, magic, sizeof(magic), "checkpoint magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path + ": not a checkpoint (bad magic)");
  }
  const auto version = binio::read_pod<std::uint32_t>(in, "checkpoint version");
  if (version != kVersion) {
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.config.model_dim = binio::read_pod<std::int32_t>(in, "model_dim");
  ckpt.config.heads = binio::read_pod<std::int32_t>(in, "heads");
  ckpt.config.layers = binio::read_pod<std::int32_t>(in, "layers");
  ckpt.config.ff_dim = binio::read_pod<std::int32_t>(in, "ff_dim");
  ckpt.config.max_seq_len = binio::read_pod<std::int32_t>(in, "max_seq_len");
  const auto mode = binio::read_pod<std::uint8_t>(in, "position mode");
  if (mode > 3) throw DataError(path + ": invalid position mode tag");
  ckpt.config.mode = static_cast<PositionMode>(mode);
  ckpt.config.time_scale = binio::read_pod<double>(in, "time_scale");
  ckpt.config.rope_base = binio::read_pod<double>(in, "rope_base");
  const auto feature_dim = binio::read_pod<std::int32_t>(in, "feature_dim");
  ckpt.train_seed = binio::read_pod<std::uint64_t>(in, "train_seed");
  ckpt.valid_fraction = binio::read_pod<double>(in, "valid_fraction");

  try {
    ckpt.config.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": invalid encoder config: " + e.what());
  }
  if (feature_dim < 1) throw DataError(path + ": invalid feature_dim");
  if (!(ckpt.valid_fraction > 0.0) || !(ckpt.valid_fraction < 1.0)) {
    throw DataError(path + ": invalid valid_fraction");
  }

  // Allocate the parameter tree from the config, then fill tensors by name in
  // the canonical order; any drift between file and registry is a data error.
  ckpt.params = EncoderParams::init(ckpt.config, feature_dim, /*seed=*/0);
  auto named = ckpt.params.named();
  const auto count = binio::read_pod<std::uint32_t>(in, "tensor count");
  if (count != named.size()) {
    throw DataError(path + ": tensor count " + std::to_string(count) + " does not match the " +
                    std::to_string(named.size()) + " expected for this config");
  }
  for (auto& [name, tensor] : named) {
    const std::string file_name = binio::read_string(in, "tensor name");
    if (file_name != name) {
      throw DataError(path + ": tensor order mismatch, expected '" + name + "', found '" +
                      file_name + "'");
    }
    const auto rows = binio::read_pod<std::int32_t>(in, "tensor rows");
    const auto cols = binio::read_pod<std::int32_t>(in, "tensor cols");
    if (rows != tensor->rows() || cols != tensor->cols()) {
      throw DataError(path + ": tensor '" + name + "' has shape " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", expected " + tensor->shape_str());
    }
    binio::read_bytes(in, tensor->data().data(), tensor->data().size() * sizeof(double),
                      name.c_str());
  }
  if (!ckpt.params.all_finite()) throw DataError(path + ": non-finite parameter values");
  return ckpt;
}

}  // namespace rotascore
