#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rl/random.hpp"
#include "rl/tensor.hpp"

namespace rl {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rows of named float columns.
struct Dataset {
  std::string name;
  std::string provenance;  // "bundled-csv:<path>" or "synthetic(seed=N)"
  std::vector<std::string> columns;
  std::size_t rows = 0;
  std::vector<double> values;  // row-major, rows x columns

  std::size_t width() const { return columns.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * columns.size() + col]; }
  // Throws DataError naming the missing column.
  std::size_t column(const std::string& name) const;
  Dataset take_rows(const std::vector<std::size_t>& idx) const;
  // [rows, cols.size()]
  Tensor matrix(const std::vector<std::size_t>& cols) const;
  Tensor matrix(std::size_t first, std::size_t count) const;
  std::vector<double> column_values(std::size_t col) const;
};

struct CsvSchema {
  std::vector<std::string> required;  // columns that must be present
  std::size_t min_columns = 0;
};

// Header row plus numeric cells. Errors cite the 1-based data row and column.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
void write_csv(const std::string& path, const Dataset& d);

struct Split {
  Dataset train;
  Dataset test;
};

// Shuffles with rng and takes the first n_train rows for training.
Split split_rows(const Dataset& d, std::size_t n_train, Rng& rng);
// Per-column standardization with statistics from `fit`, applied to cols.
void standardize(Split& s, const std::vector<std::size_t>& cols);

// 100 points uniform in [0,1]^2; label is 1 when closer than 0.09 to (0.5, 0.5).
// Columns x0, x1, label.
Dataset synth_binary(std::uint64_t seed);
inline constexpr double kBinaryRadius = 0.09;

// 4 gaussian blobs of 50 points in [-1,1]^2. Columns x0, x1, blob.
// centers gets one row per blob (columns x0, x1).
Dataset synth_clustering(std::uint64_t seed, Dataset* centers = nullptr);

// Digit images as noisy one-hot vectors (sigma 0.2). operand_digits is 1
// (n = d1 + d2) or 2 (n = 10 d1 + d2 + 10 d3 + d4). Columns are the image
// features (10 per digit), then n, then the true digits.
Dataset synth_addition(std::uint64_t seed, std::size_t rows, int operand_digits);
std::vector<double> digit_features(int digit, Rng& rng, double sigma = 0.2);

struct SmokersFacts {
  std::vector<std::string> people;  // a..n
  std::vector<std::pair<std::string, std::string>> friends;
  std::vector<std::pair<std::string, std::string>> not_friends;  // every other pair u < v
  std::vector<std::string> smokers, non_smokers;
  std::vector<std::string> cancer, no_cancer;  // first group only
  std::size_t group_split = 8;                 // a..h, then i..n
};
SmokersFacts smokers_facts();

}  // namespace rl
