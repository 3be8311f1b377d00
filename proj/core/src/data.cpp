#include "rotascore/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "rotascore/errors.hpp"
#include "rotascore/rng.hpp"

namespace rotascore {

namespace {

constexpr const char* kIdColumn = "TransactionID";
constexpr const char* kDtColumn = "TransactionDT";
constexpr const char* kFraudColumn = "isFraud";
constexpr const char* kAmtColumn = "TransactionAmt";
constexpr char kKeySep = '\x1f';
constexpr const char* kMissingCategory = "\x01missing";

// RFC-4180-ish CSV: quoted fields may contain commas, quotes double up.
// Handles trailing CR from CRLF files.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open csv file: " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty csv file: " + path);
  t.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.columns.size()) {
      throw DataError(path + ": row " + std::to_string(t.rows.size() + 2) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

int find_column(const CsvTable& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  return it == t.columns.end() ? -1 : static_cast<int>(it - t.columns.begin());
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_ll(const std::string& s, long long& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

long long RecordTable::dt(std::size_t row) const {
  long long v = 0;
  if (!parse_ll(rows[row][dt_col], v)) {
    throw DataError("bad TransactionDT at row " + std::to_string(row));
  }
  return v;
}

int RecordTable::fraud(std::size_t row) const {
  const std::string& s = rows[row][fraud_col];
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw DataError("bad isFraud value '" + s + "' at row " + std::to_string(row));
}

int RecordTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

RecordTable load_transactions(const std::string& transactions_csv, const std::string& identity_csv) {
  CsvTable tx = read_csv(transactions_csv);
  for (const char* required : {kIdColumn, kDtColumn, kFraudColumn}) {
    if (find_column(tx, required) < 0) {
      throw DataError(transactions_csv + ": missing required column '" + required + "'");
    }
  }

  RecordTable out;
  out.columns = tx.columns;
  out.rows = std::move(tx.rows);
  out.id_col = find_column(tx, kIdColumn);
  out.dt_col = find_column(tx, kDtColumn);
  out.fraud_col = find_column(tx, kFraudColumn);

  // Validate the row-level invariants up front.
  const int amt_col = out.column_index(kAmtColumn);
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    if (out.dt(r) < 0) throw DataError("negative TransactionDT at row " + std::to_string(r));
    out.fraud(r);
    if (amt_col >= 0 && !out.rows[r][amt_col].empty()) {
      double amt = 0.0;
      if (!parse_double(out.rows[r][amt_col], amt) || !(amt > 0.0)) {
        throw DataError("TransactionAmt must be > 0 at row " + std::to_string(r) + ", got '" +
                        out.rows[r][amt_col] + "'");
      }
    }
  }

  if (identity_csv.empty()) return out;

  CsvTable ident = read_csv(identity_csv);
  const int ident_id = find_column(ident, kIdColumn);
  if (ident_id < 0) throw DataError(identity_csv + ": missing required column '" + std::string(kIdColumn) + "'");

  std::unordered_map<std::string, std::size_t> by_id;
  by_id.reserve(ident.rows.size());
  for (std::size_t r = 0; r < ident.rows.size(); ++r) {
    const auto [it, inserted] = by_id.emplace(ident.rows[r][ident_id], r);
    if (!inserted) {
      throw DataError(identity_csv + ": duplicate TransactionID '" + ident.rows[r][ident_id] +
                      "' makes the join ambiguous");
    }
  }

  // Left join: append every identity column except the join key.
  std::vector<int> ident_cols;
  for (int c = 0; c < static_cast<int>(ident.columns.size()); ++c) {
    if (c == ident_id) continue;
    ident_cols.push_back(c);
    out.columns.push_back(ident.columns[c]);
  }
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    const auto it = by_id.find(out.rows[r][out.id_col]);
    for (int c : ident_cols) {
      out.rows[r].push_back(it == by_id.end() ? std::string() : ident.rows[it->second][c]);
    }
  }
  return out;
}

std::vector<RawSequence> build_sequences(const RecordTable& records,
                                         std::span<const std::string> grouping_columns,
                                         int max_seq_len) {
  if (grouping_columns.empty()) {
    throw std::invalid_argument("build_sequences: empty grouping key set");
  }
  if (max_seq_len < 1) throw std::invalid_argument("build_sequences: max_seq_len must be >= 1");
  std::vector<int> key_cols;
  for (const auto& name : grouping_columns) {
    const int c = records.column_index(name);
    if (c < 0) throw DataError("build_sequences: grouping column '" + name + "' not in schema");
    key_cols.push_back(c);
  }

  // Ordered map keeps the output deterministic by entity id.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < records.rows.size(); ++r) {
    std::string key;
    for (std::size_t i = 0; i < key_cols.size(); ++i) {
      if (i > 0) key.push_back(kKeySep);
      key += records.rows[r][key_cols[i]];
    }
    groups[key].push_back(r);
  }

  std::vector<RawSequence> out;
  for (auto& [key, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return records.dt(a) < records.dt(b); });
    for (std::size_t start = 0; start < rows.size(); start += max_seq_len) {
      RawSequence seq;
      seq.entity_id = key;
      const std::size_t end = std::min(rows.size(), start + max_seq_len);
      seq.record_rows.assign(rows.begin() + start, rows.begin() + end);
      out.push_back(std::move(seq));
    }
  }
  return out;
}

int FeatureSchema::feature_dim() const {
  int dim = 0;
  for (const auto& c : columns) dim += c.categorical ? hash_buckets : 2;
  return dim + 1;  // + standardized gap
}

std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

FeatureSchema fit_schema(const RecordTable& records, std::span<const RawSequence> train_sequences,
                         int hash_buckets) {
  if (hash_buckets < 2) throw std::invalid_argument("fit_schema: hash_buckets must be >= 2");

  FeatureSchema schema;
  schema.hash_buckets = hash_buckets;

  // Feature columns: everything except the id, timestamp and label.
  std::vector<int> feature_cols;
  for (int c = 0; c < static_cast<int>(records.columns.size()); ++c) {
    if (c == records.id_col || c == records.dt_col || c == records.fraud_col) continue;
    feature_cols.push_back(c);
  }

  for (int c : feature_cols) {
    FeatureSchema::Column col;
    col.name = records.columns[c];
    col.table_col = c;

    // Numeric unless any non-missing train value fails to parse.
    double sum = 0.0, sum_sq = 0.0;
    long long n = 0;
    bool numeric = true;
    for (const auto& seq : train_sequences) {
      for (std::size_t r : seq.record_rows) {
        const std::string& v = records.rows[r][c];
        if (v.empty()) continue;
        double x = 0.0;
        if (!parse_double(v, x)) {
          numeric = false;
          break;
        }
        sum += x;
        sum_sq += x * x;
        ++n;
      }
      if (!numeric) break;
    }
    if (numeric && n > 0) {
      col.categorical = false;
      col.mean = sum / n;
      const double var = std::max(0.0, sum_sq / n - col.mean * col.mean);
      col.stddev = std::max(std::sqrt(var), 1e-6);
    } else {
      col.categorical = true;
    }
    schema.columns.push_back(std::move(col));
  }

  // Gap statistics over train tokens (first token of a window has gap 0).
  double gsum = 0.0, gsum_sq = 0.0;
  long long gn = 0;
  for (const auto& seq : train_sequences) {
    for (std::size_t i = 0; i < seq.record_rows.size(); ++i) {
      const double gap =
          i == 0 ? 0.0
                 : static_cast<double>(records.dt(seq.record_rows[i]) - records.dt(seq.record_rows[i - 1]));
      gsum += gap;
      gsum_sq += gap * gap;
      ++gn;
    }
  }
  if (gn > 0) {
    schema.gap_mean = gsum / gn;
    const double var = std::max(0.0, gsum_sq / gn - schema.gap_mean * schema.gap_mean);
    schema.gap_stddev = std::max(std::sqrt(var), 1e-6);
  }

  schema.fitted = true;
  return schema;
}

std::vector<Sequence> featurize(const RecordTable& records, std::span<const RawSequence> sequences,
                                const FeatureSchema& schema) {
  if (!schema.fitted) throw std::invalid_argument("featurize: schema is not fitted");
  const int dim = schema.feature_dim();

  std::vector<Sequence> out;
  out.reserve(sequences.size());
  for (const auto& raw : sequences) {
    Sequence seq;
    seq.entity_id = raw.entity_id;
    seq.tokens.reserve(raw.record_rows.size());
    for (std::size_t i = 0; i < raw.record_rows.size(); ++i) {
      const std::size_t r = raw.record_rows[i];
      TransactionToken tok;
      tok.features.assign(dim, 0.0);
      int off = 0;
      for (const auto& col : schema.columns) {
        const std::string& v = records.rows[r][col.table_col];
        if (col.categorical) {
          const std::string_view key = v.empty() ? std::string_view(kMissingCategory) : std::string_view(v);
          const int bucket = static_cast<int>(stable_hash(key) % schema.hash_buckets);
          tok.features[off + bucket] = 1.0;
          off += schema.hash_buckets;
        } else {
          if (v.empty()) {
            tok.features[off] = 0.0;  // imputed mean, post-standardization
            tok.features[off + 1] = 1.0;
          } else {
            double x = 0.0;
            if (!parse_double(v, x)) {
              throw DataError("featurize: non-numeric value '" + v + "' in numeric column " + col.name);
            }
            tok.features[off] = (x - col.mean) / col.stddev;
            tok.features[off + 1] = 0.0;
          }
          off += 2;
        }
      }
      const double gap =
          i == 0 ? 0.0
                 : static_cast<double>(records.dt(r) - records.dt(raw.record_rows[i - 1]));
      tok.features[off] = (gap - schema.gap_mean) / schema.gap_stddev;
      tok.timestamp = static_cast<double>(records.dt(r));
      tok.label = records.fraud(r);
      seq.tokens.push_back(std::move(tok));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<std::uint8_t> split_sides(std::span<const std::string> entity_ids,
                                      double valid_fraction, std::uint64_t seed) {
  if (!(valid_fraction > 0.0) || !(valid_fraction < 1.0)) {
    throw std::invalid_argument("split_sides: valid_fraction must be in (0, 1)");
  }
  std::vector<std::string> distinct(entity_ids.begin(), entity_ids.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Rng rng(Rng::mix(seed, 0x73706c69));  // split stream
  rng.shuffle(distinct);

  const std::size_t n_valid = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(valid_fraction * static_cast<double>(distinct.size()))),
      1, distinct.size() - 1);
  std::set<std::string> valid_entities(distinct.begin(), distinct.begin() + n_valid);

  std::vector<std::uint8_t> sides;
  sides.reserve(entity_ids.size());
  for (const auto& id : entity_ids) {
    sides.push_back(valid_entities.count(id) ? 1 : 0);
  }
  return sides;
}

}  // namespace rotascore
