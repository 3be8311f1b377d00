#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rotascore {

/// One transaction as a sequence element: a fixed-width feature vector, the
/// event time in seconds, and the fraud label.
struct TransactionToken {
  std::vector<double> features;
  double timestamp = 0.0;
  int label = 0;
};

/// Time-ordered transactions of one entity (or one window of them). The
/// sequence label is the label of its last token, the transaction under
/// evaluation.
struct Sequence {
  std::string entity_id;
  std::vector<TransactionToken> tokens;
  int label() const { return tokens.back().label; }
};

/// Raw string table after loading and joining the transaction/identity CSVs.
/// Empty string means missing. Row order matches the transaction file.
struct RecordTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  int id_col = -1;
  int dt_col = -1;
  int fraud_col = -1;

  long long dt(std::size_t row) const;
  int fraud(std::size_t row) const;
  int column_index(const std::string& name) const;  // -1 if absent
};

/// Reads the transaction table and left-joins the optional identity table on
/// TransactionID. Rows without identity keep those columns missing. Rejects a
/// duplicated TransactionID in the identity table (ambiguous join) and any
/// missing required header.
RecordTable load_transactions(const std::string& transactions_csv,
                              const std::string& identity_csv = "");

/// Indices of one entity's records, sorted by TransactionDT (stable on ties),
/// already windowed to at most max_seq_len records.
struct RawSequence {
  std::string entity_id;
  std::vector<std::size_t> record_rows;
};

/// Groups records by the composite key over grouping_columns, orders each
/// group by TransactionDT, and splits it into consecutive windows. Every
/// record lands in exactly one window. Output is ordered by entity id.
std::vector<RawSequence> build_sequences(const RecordTable& records,
                                         std::span<const std::string> grouping_columns,
                                         int max_seq_len);

/// Featurization plan fitted on the training split only. Numeric columns are
/// standardized (missing -> imputed 0 post-standardization plus a 0/1
/// indicator); categorical columns are hashed into fixed buckets and one-hot
/// encoded; the per-token inter-transaction gap is appended as one more
/// standardized numeric feature.
struct FeatureSchema {
  struct Column {
    std::string name;
    int table_col = -1;
    bool categorical = false;
    double mean = 0.0;
    double stddev = 1.0;
  };
  std::vector<Column> columns;
  int hash_buckets = 64;
  double gap_mean = 0.0;
  double gap_stddev = 1.0;
  bool fitted = false;

  int feature_dim() const;
};

FeatureSchema fit_schema(const RecordTable& records, std::span<const RawSequence> train_sequences,
                         int hash_buckets);

std::vector<Sequence> featurize(const RecordTable& records, std::span<const RawSequence> sequences,
                                const FeatureSchema& schema);

/// Stable 64-bit FNV-1a; the bucket assignment must not change across runs or
/// platforms.
std::uint64_t stable_hash(std::string_view s);

/// Entity-level split: every distinct entity id goes entirely to one side.
/// Returns one side flag per input (0 = train, 1 = valid), deterministic in
/// the seed.
std::vector<std::uint8_t> split_sides(std::span<const std::string> entity_ids,
                                      double valid_fraction, std::uint64_t seed);

}  // namespace rotascore
