#pragma once

#include <cstdint>
#include <string>

#include "rotascore/encoder.hpp"

namespace rotascore {

/// A trained model plus everything needed to reproduce its evaluation split:
/// the architecture, the feature width it expects, and the seed / fraction the
/// trainer used to carve out validation entities.
struct Checkpoint {
  EncoderConfig config;
  EncoderParams params;
  std::uint64_t train_seed = 0;
  double valid_fraction = 0.2;
};

/// Versioned little-endian binary container. save -> load -> save reproduces
/// identical bytes; corrupt or truncated files raise DataError.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rotascore
