#include "rotascore/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rotascore/data.hpp"
#include "rotascore/errors.hpp"

namespace rotascore {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw DataError("config: key '" + key + "' needs a finite number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw DataError("config: key '" + key + "' needs an integer, got '" + v + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      const std::string item = trim(cur);
      if (!item.empty()) out.push_back(item);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string item = trim(cur);
  if (!item.empty()) out.push_back(item);
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void AppConfig::validate() const {
  try {
    encoder.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  if (data.hash_buckets < 2) throw DataError("config: data.hash_buckets must be >= 2");
  if (data.grouping.empty()) throw DataError("config: data.grouping must list at least one column");
}

std::string AppConfig::canonical() const {
  std::string out;
  out += "[encoder]\n";
  out += "model_dim = " + std::to_string(encoder.model_dim) + "\n";
  out += "heads = " + std::to_string(encoder.heads) + "\n";
  out += "layers = " + std::to_string(encoder.layers) + "\n";
  out += "ff_dim = " + std::to_string(encoder.ff_dim) + "\n";
  out += "max_seq_len = " + std::to_string(encoder.max_seq_len) + "\n";
  out += "mode = " + std::string(to_string(encoder.mode)) + "\n";
  out += "time_scale = " + fmt_double(encoder.time_scale) + "\n";
  out += "rope_base = " + fmt_double(encoder.rope_base) + "\n";
  out += "\n[train]\n";
  out += "learning_rate = " + fmt_double(train.learning_rate) + "\n";
  out += "batch_size = " + std::to_string(train.batch_size) + "\n";
  out += "epochs = " + std::to_string(train.epochs) + "\n";
  out += "seed = " + std::to_string(train.seed) + "\n";
  out += "pos_weight = " +
         (train.pos_weight_override ? fmt_double(*train.pos_weight_override) : std::string("auto")) +
         "\n";
  out += "beta1 = " + fmt_double(train.beta1) + "\n";
  out += "beta2 = " + fmt_double(train.beta2) + "\n";
  out += "adam_eps = " + fmt_double(train.adam_eps) + "\n";
  out += "valid_fraction = " + fmt_double(train.valid_fraction) + "\n";
  out += "\n[data]\n";
  out += "grouping = ";
  for (std::size_t i = 0; i < data.grouping.size(); ++i) {
    if (i > 0) out += ",";
    out += data.grouping[i];
  }
  out += "\n";
  out += "hash_buckets = " + std::to_string(data.hash_buckets) + "\n";
  return out;
}

std::string AppConfig::digest() const {
  const std::uint64_t h = stable_hash(canonical());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AppConfig parse_config_text(const std::string& text) {
  AppConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw DataError("config: malformed section at line " + std::to_string(line_no));
      section = trim(t.substr(1, t.size() - 2));
      if (section != "encoder" && section != "train" && section != "data") {
        throw DataError("config: unknown section '" + section + "'");
      }
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError("config: expected key = value at line " + std::to_string(line_no));
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw DataError("config: empty key at line " + std::to_string(line_no));
    if (section.empty()) {
      throw DataError("config: key '" + key + "' appears before any [section]");
    }
    if (!seen.insert(section + "." + key).second) {
      throw DataError("config: duplicate key '" + section + "." + key + "'");
    }

    if (section == "encoder") {
      if (key == "model_dim") cfg.encoder.model_dim = static_cast<int>(to_int(key, value));
      else if (key == "heads") cfg.encoder.heads = static_cast<int>(to_int(key, value));
      else if (key == "layers") cfg.encoder.layers = static_cast<int>(to_int(key, value));
      else if (key == "ff_dim") cfg.encoder.ff_dim = static_cast<int>(to_int(key, value));
      else if (key == "max_seq_len") cfg.encoder.max_seq_len = static_cast<int>(to_int(key, value));
      else if (key == "mode") {
        const auto mode = parse_position_mode(value);
        if (!mode) throw DataError("config: unknown position mode '" + value + "'");
        cfg.encoder.mode = *mode;
      } else if (key == "time_scale") cfg.encoder.time_scale = to_double(key, value);
      else if (key == "rope_base") cfg.encoder.rope_base = to_double(key, value);
      else throw DataError("config: unknown key 'encoder." + key + "'");
    } else if (section == "train") {
      if (key == "learning_rate") cfg.train.learning_rate = to_double(key, value);
      else if (key == "batch_size") cfg.train.batch_size = static_cast<int>(to_int(key, value));
      else if (key == "epochs") cfg.train.epochs = static_cast<int>(to_int(key, value));
      else if (key == "seed") cfg.train.seed = static_cast<std::uint64_t>(to_int(key, value));
      else if (key == "pos_weight") {
        if (value == "auto") cfg.train.pos_weight_override.reset();
        else cfg.train.pos_weight_override = to_double(key, value);
      } else if (key == "beta1") cfg.train.beta1 = to_double(key, value);
      else if (key == "beta2") cfg.train.beta2 = to_double(key, value);
      else if (key == "adam_eps") cfg.train.adam_eps = to_double(key, value);
      else if (key == "valid_fraction") cfg.train.valid_fraction = to_double(key, value);
      else throw DataError("config: unknown key 'train." + key + "'");
    } else {
      if (key == "grouping") {
        cfg.data.grouping = split_list(value);
      } else if (key == "hash_buckets") {
        cfg.data.hash_buckets = static_cast<int>(to_int(key, value));
      } else {
        throw DataError("config: unknown key 'data." + key + "'");
      }
    }
  }

  cfg.validate();
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace rotascore
