#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rl {

// Ordered name -> value pairs for one logged step.
class MetricRecord {
 public:
  void set(const std::string& key, double value);
  std::optional<double> get(const std::string& key) const;
  double at(const std::string& key) const;  // throws std::out_of_range
  const std::vector<std::pair<std::string, double>>& fields() const { return fields_; }

 private:
  std::vector<std::pair<std::string, double>> fields_;
};

class MetricsLog {
 public:
  void add(MetricRecord r) { records_.push_back(std::move(r)); }
  const std::vector<MetricRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  const MetricRecord& back() const { return records_.back(); }
  std::vector<double> series(const std::string& key) const;

  // One JSON object per line.
  void write_jsonl(const std::string& path) const;
  // Columns are the union of keys in first-seen order; missing cells stay empty.
  void write_csv(const std::string& path) const;

 private:
  std::vector<MetricRecord> records_;
};

// Fraction of rows whose argmax matches the label.
double top1_accuracy(const std::vector<std::vector<double>>& scores, const std::vector<int>& labels);
// 1 - Hamming loss with predictions thresholded at 0.5.
double hamming_accuracy(const std::vector<std::vector<double>>& probs, const std::vector<std::vector<int>>& labels);
double rmse(const std::vector<double>& predicted, const std::vector<double>& target);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t interval
  std::size_t n = 0;
};
MeanCi mean_ci95(const std::vector<double>& xs);

}  // namespace rl
