#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rl {

using Shape = std::vector<std::size_t>;

std::size_t num_elements(const Shape& shape);
std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {
struct TapeState;
}

// Dense row-major float64 array. Data is immutable and shared between
// copies; a tensor produced by an op on a tracked input carries a node on
// that input's tape.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double v);
  static Tensor vector(std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_->size(); }
  std::size_t dim(std::size_t axis) const;
  std::span<const double> values() const noexcept { return *data_; }
  double operator[](std::size_t flat) const { return (*data_)[flat]; }
  double item() const;
  std::vector<double> to_vector() const { return *data_; }

  bool tracked() const noexcept { return tape_ != nullptr; }
  int node() const noexcept { return node_; }
  Tensor detach() const;

  const std::shared_ptr<const std::vector<double>>& storage() const noexcept {
    return data_;
  }
  const std::shared_ptr<detail::TapeState>& tape_state() const noexcept {
    return tape_;
  }

 private:
  friend class Tape;
  friend Tensor record_op(Shape, std::shared_ptr<const std::vector<double>>,
                          std::span<const Tensor* const>,
                          std::function<void(std::span<const double>,
                                             std::span<double* const>)>);

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  std::shared_ptr<detail::TapeState> tape_;
  int node_ = -1;
};

// grad_in[i] is null when input i is not tracked.
using BackwardFn =
    std::function<void(std::span<const double> grad_out, std::span<double* const> grad_in)>;

// Builds the result of an op. When any input is tracked the result gets a
// node on their (common) tape; otherwise it is a plain constant.
Tensor record_op(Shape shape, std::shared_ptr<const std::vector<double>> values,
                 std::span<const Tensor* const> inputs, BackwardFn backward);

class Gradients {
 public:
  // Gradient of the backward root with respect to t. Zero when t was not
  // reached or is not tracked on the same tape.
  Tensor of(const Tensor& t) const;
  bool reached(const Tensor& t) const;

 private:
  friend class Tape;
  std::shared_ptr<detail::TapeState> tape_;
  std::vector<std::vector<double>> grads_;
};

class Tape {
 public:
  Tape();

  // Registers a leaf that gradients can be taken with respect to.
  Tensor watch(const Tensor& value);
  std::size_t num_nodes() const;

  // Reverse sweep from a scalar root. Each reachable node is visited once.
  Gradients backward(const Tensor& root) const;

 private:
  std::shared_ptr<detail::TapeState> state_;
};

}  // namespace rl
