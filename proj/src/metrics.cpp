#include "rl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rl/parser.hpp"

namespace rl {

void MetricRecord::set(const std::string& key, double value) {
  for (auto& [k, v] : fields_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  fields_.emplace_back(key, value);
}

std::optional<double> MetricRecord::get(const std::string& key) const {
  for (const auto& [k, v] : fields_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

double MetricRecord::at(const std::string& key) const {
  auto v = get(key);
  if (!v) throw std::out_of_range("no metric '" + key + "'");
  return *v;
}

std::vector<double> MetricsLog::series(const std::string& key) const {
  std::vector<double> out;
  for (const auto& r : records_) {
    if (auto v = r.get(key)) out.push_back(*v);
  }
  return out;
}

void MetricsLog::write_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& r : records_) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.fields()) {
      if (std::isfinite(v)) j[k] = v;
      else j[k] = nullptr;
    }
    out << j.dump() << "\n";
  }
}

void MetricsLog::write_csv(const std::string& path) const {
  std::vector<std::string> cols;
  for (const auto& r : records_) {
    for (const auto& [k, v] : r.fields()) {
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : records_) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ",";
      if (auto v = r.get(cols[i])) out << format_number(*v);
    }
    out << "\n";
  }
}

double top1_accuracy(const std::vector<std::vector<double>>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) throw std::invalid_argument("top1_accuracy: size mismatch");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto best = std::max_element(scores[i].begin(), scores[i].end()) - scores[i].begin();
    if (best == labels[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(scores.size());
}

double hamming_accuracy(const std::vector<std::vector<double>>& probs, const std::vector<std::vector<int>>& labels) {
  if (probs.size() != labels.size() || probs.empty()) throw std::invalid_argument("hamming_accuracy: size mismatch");
  std::size_t wrong = 0, total = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i].size() != labels[i].size()) throw std::invalid_argument("hamming_accuracy: width mismatch");
    for (std::size_t j = 0; j < probs[i].size(); ++j) {
      int pred = probs[i][j] > 0.5 ? 1 : 0;
      wrong += pred != labels[i][j];
      ++total;
    }
  }
  return 1.0 - static_cast<double>(wrong) / static_cast<double>(total);
}

double rmse(const std::vector<double>& predicted, const std::vector<double>& target) {
  if (predicted.size() != target.size() || predicted.empty()) throw std::invalid_argument("rmse: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += (predicted[i] - target[i]) * (predicted[i] - target[i]);
  return std::sqrt(s / static_cast<double>(predicted.size()));
}

namespace {

// Two-sided 97.5% quantile of Student's t for small df, then the normal value.
double t_quantile(std::size_t df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                 2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                 2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df == 0) return 0.0;
  if (df <= 30) return table[df - 1];
  return 1.960;
}

}  // namespace

MeanCi mean_ci95(const std::vector<double>& xs) {
  MeanCi r;
  r.n = xs.size();
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  r.half_width = t_quantile(xs.size() - 1) * sd / std::sqrt(static_cast<double>(xs.size()));
  return r;
}

}  // namespace rl
