#include "rotascore/dataset.hpp"

#include <cmath>
#include <fstream>

#include "binio.hpp"
#include "rotascore/errors.hpp"

namespace rotascore {

namespace {
constexpr char kMagic[4] = {'R', 'S', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void Dataset::validate() const {
  if (feature_dim < 1) throw DataError("dataset: feature_dim must be >= 1");
  if (!split_tags.empty() && split_tags.size() != sequences.size()) {
    throw DataError("dataset: split tag count does not match sequence count");
  }
  for (const auto& tag : split_tags) {
    if (tag > 1) throw DataError("dataset: split tag must be 0 or 1");
  }
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    if (seq.tokens.empty()) throw DataError("dataset: empty sequence at index " + std::to_string(s));
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      const auto& tok = seq.tokens[i];
      if (static_cast<int>(tok.features.size()) != feature_dim) {
        throw DataError("dataset: token feature width mismatch in sequence " + std::to_string(s));
      }
      for (double f : tok.features) {
        if (!std::isfinite(f)) throw DataError("dataset: non-finite feature in sequence " + std::to_string(s));
      }
      if (!std::isfinite(tok.timestamp)) {
        throw DataError("dataset: non-finite timestamp in sequence " + std::to_string(s));
      }
      if (tok.label != 0 && tok.label != 1) {
        throw DataError("dataset: token label must be 0 or 1 in sequence " + std::to_string(s));
      }
      if (i > 0 && tok.timestamp < seq.tokens[i - 1].timestamp) {
        throw DataError("dataset: timestamps not nondecreasing in sequence " + std::to_string(s));
      }
    }
  }
}

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);

  binio::write_bytes(out, kMagic, sizeof(kMagic));
  binio::write_pod<std::uint32_t>(out, kVersion);
  binio::write_pod<std::int32_t>(out, ds.feature_dim);
  binio::write_pod<std::uint64_t>(out, ds.sequences.size());
  binio::write_pod<std::uint8_t>(out, ds.has_split() ? 1 : 0);

  for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
    const auto& seq = ds.sequences[s];
    binio::write_string(out, seq.entity_id);
    binio::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(seq.tokens.size()));
    if (ds.has_split()) binio::write_pod<std::uint8_t>(out, ds.split_tags[s]);
    for (const auto& tok : seq.tokens) {
      binio::write_pod<double>(out, tok.timestamp);
      binio::write_pod<std::int8_t>(out, static_cast<std::int8_t>(tok.label));
      binio::write_bytes(out, tok.features.data(), tok.features.size() * sizeof(double));
    }
  }
  out.flush();
  if (!out) throw DataError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset: " + path);

  char magic[4];
  binio::read_bytes(in, magic, sizeof(magic), "dataset magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path + ": not a dataset container (bad magic)");
  }
  const auto version = binio::read_pod<std::uint32_t>(in, "dataset version");
  if (version != kVersion) {
    throw DataError(path + ": unsupported dataset version " + std::to_string(version));
  }

  Dataset ds;
  ds.feature_dim = binio::read_pod<std::int32_t>(in, "feature_dim");
  const auto n_seq = binio::read_pod<std::uint64_t>(in, "sequence count");
  const auto has_split = binio::read_pod<std::uint8_t>(in, "split flag");
  if (ds.feature_dim < 1) throw DataError(path + ": invalid feature_dim");
  if (has_split > 1) throw DataError(path + ": invalid split flag");

  ds.sequences.reserve(n_seq);
  if (has_split) ds.split_tags.reserve(n_seq);
  for (std::uint64_t s = 0; s < n_seq; ++s) {
    Sequence seq;
    seq.entity_id = binio::read_string(in, "entity id");
    const auto n_tok = binio::read_pod<std::uint32_t>(in, "token count");
    if (has_split) ds.split_tags.push_back(binio::read_pod<std::uint8_t>(in, "split tag"));
    seq.tokens.reserve(n_tok);
    for (std::uint32_t t = 0; t < n_tok; ++t) {
      TransactionToken tok;
      tok.timestamp = binio::read_pod<double>(in, "timestamp");
      tok.label = binio::read_pod<std::int8_t>(in, "label");
      tok.features.resize(ds.feature_dim);
      binio::read_bytes(in, tok.features.data(), tok.features.size() * sizeof(double), "features");
      seq.tokens.push_back(std::move(tok));
    }
    ds.sequences.push_back(std::move(seq));
  }
  ds.validate();
  return ds;
}

}  // namespace rotascore
