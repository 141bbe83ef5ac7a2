#include "rl/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "rl/parser.hpp"

namespace rl {

std::size_t Dataset::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw DataError(this->name + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

Dataset Dataset::take_rows(const std::vector<std::size_t>& idx) const {
  Dataset out{name, provenance, columns, idx.size(), {}};
  out.values.reserve(idx.size() * width());
  for (std::size_t r : idx) {
    if (r >= rows) throw DataError(name + ": row " + std::to_string(r) + " out of range");
    out.values.insert(out.values.end(), values.begin() + r * width(), values.begin() + (r + 1) * width());
  }
  return out;
}

Tensor Dataset::matrix(const std::vector<std::size_t>& cols) const {
  std::vector<double> v;
  v.reserve(rows * cols.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c : cols) {
      if (c >= width()) throw DataError(name + ": column " + std::to_string(c) + " out of range");
      v.push_back(at(r, c));
    }
  }
  return Tensor({rows, cols.size()}, std::move(v));
}

Tensor Dataset::matrix(std::size_t first, std::size_t count) const {
  std::vector<std::size_t> cols(count);
  for (std::size_t i = 0; i < count; ++i) cols[i] = first + i;
  return matrix(cols);
}

std::vector<double> Dataset::column_values(std::size_t col) const {
  std::vector<double> v(rows);
  for (std::size_t r = 0; r < rows; ++r) v[r] = at(r, col);
  return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  Dataset d;
  d.name = path;
  d.provenance = "bundled-csv:" + path;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  d.columns = split_line(line);
  for (const auto& r : schema.required) {
    if (std::find(d.columns.begin(), d.columns.end(), r) == d.columns.end()) {
      throw DataError(path + ": missing column '" + r + "'");
    }
  }
  if (d.columns.size() < schema.min_columns) {
    throw DataError(path + ": expected at least " + std::to_string(schema.min_columns) + " columns, found " +
                    std::to_string(d.columns.size()));
  }
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    auto cells = split_line(line);
    if (cells.size() != d.columns.size()) {
      throw DataError(path + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(d.columns.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const std::string& s = cells[c];
      auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw DataError(path + ": row " + std::to_string(row) + ", column '" + d.columns[c] +
                        "': not a number: '" + s + "'");
      }
      d.values.push_back(v);
    }
  }
  d.rows = row;
  return d;
}

void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < d.width(); ++c) out << (c ? "," : "") << d.columns[c];
  out << "\n";
  for (std::size_t r = 0; r < d.rows; ++r) {
    for (std::size_t c = 0; c < d.width(); ++c) out << (c ? "," : "") << format_number(d.at(r, c));
    out << "\n";
  }
}

Split split_rows(const Dataset& d, std::size_t n_train, Rng& rng) {
  if (n_train > d.rows) throw DataError(d.name + ": cannot take " + std::to_string(n_train) + " training rows");
  auto perm = permutation(rng, d.rows);
  std::vector<std::size_t> a(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> b(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  return {d.take_rows(a), d.take_rows(b)};
}

void standardize(Split& s, const std::vector<std::size_t>& cols) {
  for (std::size_t c : cols) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < s.train.rows; ++r) mean += s.train.at(r, c);
    mean /= static_cast<double>(s.train.rows);
    for (std::size_t r = 0; r < s.train.rows; ++r) sq += std::pow(s.train.at(r, c) - mean, 2);
    double sd = std::sqrt(sq / static_cast<double>(s.train.rows));
    if (sd == 0.0) sd = 1.0;
    for (Dataset* d : {&s.train, &s.test}) {
      for (std::size_t r = 0; r < d->rows; ++r) {
        double& v = d->values[r * d->width() + c];
        v = (v - mean) / sd;
      }
    }
  }
}

namespace {

std::string synthetic(std::uint64_t seed) { return "synthetic(seed=" + std::to_string(seed) + ")"; }

}  // namespace

Dataset synth_binary(std::uint64_t seed) {
  Rng rng(seed);
  Dataset d{"binary", synthetic(seed), {"x0", "x1", "label"}, 100, {}};
  for (std::size_t i = 0; i < d.rows; ++i) {
    double x0 = uniform(rng, 0.0, 1.0), x1 = uniform(rng, 0.0, 1.0);
    double dist = std::hypot(x0 - 0.5, x1 - 0.5);
    d.values.insert(d.values.end(), {x0, x1, dist < kBinaryRadius ? 1.0 : 0.0});
  }
  return d;
}

Dataset synth_clustering(std::uint64_t seed, Dataset* centers) {
  Rng rng(seed);
  const std::size_t k = 4, per = 50;
  // Centers drawn until pairwise far apart, so that blobs stay distinguishable.
  std::vector<std::pair<double, double>> c;
  while (c.size() < k) {
    std::pair<double, double> p{uniform(rng, -0.7, 0.7), uniform(rng, -0.7, 0.7)};
    bool ok = std::all_of(c.begin(), c.end(), [&](const auto& q) {
      return std::hypot(p.first - q.first, p.second - q.second) > 0.7;
    });
    if (ok) c.push_back(p);
  }
  Dataset d{"clustering", synthetic(seed), {"x0", "x1", "blob"}, k * per, {}};
  for (std::size_t b = 0; b < k; ++b) {
    for (std::size_t i = 0; i < per; ++i) {
      double x0 = std::clamp(normal(rng, c[b].first, 0.1), -1.0, 1.0);
      double x1 = std::clamp(normal(rng, c[b].second, 0.1), -1.0, 1.0);
      d.values.insert(d.values.end(), {x0, x1, static_cast<double>(b)});
    }
  }
  if (centers) {
    *centers = Dataset{"clustering_centers", synthetic(seed), {"x0", "x1"}, k, {}};
    for (const auto& p : c) centers->values.insert(centers->values.end(), {p.first, p.second});
  }
  return d;
}

std::vector<double> digit_features(int digit, Rng& rng, double sigma) {
  std::vector<double> v(10);
  for (int i = 0; i < 10; ++i) v[static_cast<std::size_t>(i)] = (i == digit ? 1.0 : 0.0) + normal(rng, 0.0, sigma);
  return v;
}

Dataset synth_addition(std::uint64_t seed, std::size_t rows, int operand_digits) {
  if (operand_digits != 1 && operand_digits != 2) throw DataError("operand_digits must be 1 or 2");
  Rng rng(seed);
  const int images = 2 * operand_digits;
  Dataset d{operand_digits == 1 ? "addition_single" : "addition_multi", synthetic(seed), {}, rows, {}};
  for (int i = 0; i < images; ++i) {
    for (int f = 0; f < 10; ++f) d.columns.push_back("img" + std::to_string(i) + "_" + std::to_string(f));
  }
  d.columns.push_back("n");
  for (int i = 0; i < images; ++i) d.columns.push_back("d" + std::to_string(i + 1));
  std::uniform_int_distribution<int> pick(0, 9);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<int> digits(static_cast<std::size_t>(images));
    for (auto& g : digits) g = pick(rng);
    for (int g : digits) {
      auto f = digit_features(g, rng);
      d.values.insert(d.values.end(), f.begin(), f.end());
    }
    double n = operand_digits == 1 ? digits[0] + digits[1]
                                   : 10 * digits[0] + digits[1] + 10 * digits[2] + digits[3];
    d.values.push_back(n);
    for (int g : digits) d.values.push_back(g);
  }
  return d;
}

SmokersFacts smokers_facts() {
  SmokersFacts f;
  for (char c = 'a'; c <= 'n'; ++c) f.people.emplace_back(1, c);
  f.friends = {{"a", "b"}, {"a", "e"}, {"a", "f"}, {"a", "g"}, {"b", "c"}, {"c", "d"},
               {"e", "f"}, {"g", "h"}, {"i", "j"}, {"j", "m"}, {"k", "l"}, {"m", "n"}};
  std::set<std::pair<std::string, std::string>> fr(f.friends.begin(), f.friends.end());
  for (std::size_t u = 0; u < f.people.size(); ++u) {
    for (std::size_t v = u + 1; v < f.people.size(); ++v) {
      std::pair<std::string, std::string> p{f.people[u], f.people[v]};
      if (!fr.count(p)) f.not_friends.push_back(p);
    }
  }
  f.smokers = {"a", "e", "f", "g", "j", "n"};
  for (const auto& p : f.people) {
    if (std::find(f.smokers.begin(), f.smokers.end(), p) == f.smokers.end()) f.non_smokers.push_back(p);
  }
  f.cancer = {"a", "e"};
  for (std::size_t i = 0; i < f.group_split; ++i) {
    const auto& p = f.people[i];
    if (std::find(f.cancer.begin(), f.cancer.end(), p) == f.cancer.end()) f.no_cancer.push_back(p);
  }
  return f;
}

}  // namespace rl
