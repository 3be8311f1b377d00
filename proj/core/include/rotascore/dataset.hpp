#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotascore/data.hpp"

namespace rotascore {

// Featurized sequence container. `split_tags` is optional: when non-empty it
// pins each sequence to a side (0 = train, 1 = valid) so downstream consumers
// cannot re-split differently and leak entities across sides. Ingested data
// carries pinned tags; synthetic data is split at training time by seed.
struct Dataset {
  int feature_dim = 0;
  std::vector<Sequence> sequences;
  std::vector<std::uint8_t> split_tags;

  bool has_split() const { return !split_tags.empty(); }
  void validate() const;
};

// Binary container IO. The layout is fixed-width little-endian with a magic
// header, so files round-trip byte-identically across runs.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace rotascore
