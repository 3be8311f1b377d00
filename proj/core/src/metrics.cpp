#include "rotascore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rotascore/errors.hpp"

namespace rotascore {

long long ScoredSet::positives() const {
  return std::count(labels.begin(), labels.end(), 1);
}

long long ScoredSet::negatives() const {
  return std::count(labels.begin(), labels.end(), 0);
}

void ScoredSet::validate_for_auc() const {
  if (scores.empty() || scores.size() != labels.size()) {
    throw std::invalid_argument("ScoredSet: scores and labels must be nonempty and aligned");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("ScoredSet: labels must be 0 or 1");
  }
  if (positives() == 0 || negatives() == 0) {
    throw std::invalid_argument("ScoredSet: both classes required for ROC/AUC");
  }
}

std::vector<RocPoint> roc_curve(const ScoredSet& s) {
  s.validate_for_auc();
  const std::size_t n = s.scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });

  const double pos = static_cast<double>(s.positives());
  const double neg = static_cast<double>(s.negatives());

  std::vector<RocPoint> points;
  points.emplace_back(0.0, 0.0);
  long long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    const double threshold = s.scores[idx[i]];
    // consume the whole tie group before emitting a point
    while (i < n && s.scores[idx[i]] == threshold) {
      if (s.labels[idx[i]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    points.emplace_back(fp / neg, tp / pos);
  }
  return points;
}

double auc_trapezoid(std::span<const RocPoint> points) {
  if (points.size() < 2) throw std::invalid_argument("auc_trapezoid: need at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto& [x0, y0] = points[i - 1];
    const auto& [x1, y1] = points[i];
    area += (x1 - x0) * 0.5 * (y0 + y1);
  }
  return area;
}

double auc_rank(const ScoredSet& s) {
  s.validate_for_auc();
  const std::size_t n = s.scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return s.scores[a] < s.scores[b]; });

  // Sum of average ranks over positives; ties share the mean rank of their group.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && s.scores[idx[j]] == s.scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));  // 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (s.labels[idx[t]] == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double pos = static_cast<double>(s.positives());
  const double neg = static_cast<double>(s.negatives());
  return (rank_sum_pos - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["config_digest"] = r.config_digest;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  j["auc"] = r.auc;
  auto roc = nlohmann::ordered_json::array();
  for (const auto& [fpr, tpr] : r.roc) roc.push_back({fpr, tpr});
  j["roc"] = std::move(roc);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report parse error: ") + e.what());
  }
  EvalReport r;
  try {
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.n_pos = j.at("n_pos").get<long long>();
    r.n_neg = j.at("n_neg").get<long long>();
    r.auc = j.at("auc").get<double>();
    for (const auto& p : j.at("roc")) {
      r.roc.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report field error: ") + e.what());
  }
  return r;
}

void save_report(const EvalReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write report file: " + path);
  out << report_to_json(r);
}

EvalReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read report file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return report_from_json(text);
}

void save_roc_points(std::span<const RocPoint> points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write roc file: " + path);
  out << "fpr\ttpr\n";
  char buf[64];
  for (const auto& [fpr, tpr] : points) {
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\n", fpr, tpr);
    out << buf;
  }
}

}  // namespace rotascore
