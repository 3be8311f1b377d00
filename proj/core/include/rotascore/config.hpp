#pragma once

#include <string>
#include <vector>

#include "rotascore/encoder.hpp"
#include "rotascore/train.hpp"

namespace rotascore {

/// Data-handling knobs read from the [data] config section.
struct DataConfig {
  std::vector<std::string> grouping = {"card1", "card2", "card3", "card4", "card5", "card6"};
  int hash_buckets = 64;
};

/// Everything the CLI reads from one config file: architecture, trainer and
/// data sections. Parsed from sectioned key=value text ('#' or ';' comments).
/// Unknown sections/keys and duplicate keys are data errors so typos fail
/// loudly instead of silently using a default.
struct AppConfig {
  EncoderConfig encoder;
  TrainConfig train;
  DataConfig data;

  void validate() const;  // throws DataError with the offending field

  /// Canonical text form: fixed section and key order, one value per line.
  /// Reparsing the dump reproduces the config.
  std::string canonical() const;

  /// FNV-1a hex digest of canonical(), recorded in eval reports so a report
  /// can be traced to the exact configuration that produced it.
  std::string digest() const;
};

AppConfig parse_config_text(const std::string& text);
AppConfig load_config(const std::string& path);

}  // namespace rotascore
