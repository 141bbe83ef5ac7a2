#include "rl/tensor.hpp"

#include <cmath>
#include <sstream>

namespace rl {

namespace detail {

struct Node {
  std::vector<int> inputs;  // -1 for untracked inputs
  std::size_t size = 0;
  BackwardFn backward;      // empty for leaves
};

struct TapeState {
  std::vector<Node> nodes;
};

}  // namespace detail

std::size_t num_elements(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor() : data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
  if (num_elements(shape_) != values.size()) {
    throw ShapeError("tensor of shape " + to_string(shape_) + " needs " +
                     std::to_string(num_elements(shape_)) + " values, got " +
                     std::to_string(values.size()));
  }
  data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double v) {
  auto n = num_elements(shape);
  return Tensor(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::vector(std::vector<double> values) {
  Shape s{values.size()};
  return Tensor(std::move(s), std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     to_string(shape_));
  }
  return shape_[axis];
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() on tensor of shape " + to_string(shape_));
  }
  return (*data_)[0];
}

Tensor Tensor::detach() const {
  Tensor t = *this;
  t.tape_.reset();
  t.node_ = -1;
  return t;
}

Tensor record_op(Shape shape, std::shared_ptr<const std::vector<double>> values,
                 std::span<const Tensor* const> inputs, BackwardFn backward) {
  if (num_elements(shape) != values->size()) {
    throw ShapeError("op result of shape " + to_string(shape) + " has " +
                     std::to_string(values->size()) + " values");
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = std::move(values);
  std::shared_ptr<detail::TapeState> tape;
  for (const Tensor* in : inputs) {
    if (!in->tape_) continue;
    if (tape && tape != in->tape_) {
      throw std::logic_error("op mixes tensors from different tapes");
    }
    tape = in->tape_;
  }
  if (!tape) return out;
  detail::Node node;
  node.size = out.size();
  node.backward = std::move(backward);
  node.inputs.reserve(inputs.size());
  for (const Tensor* in : inputs) node.inputs.push_back(in->tape_ ? in->node_ : -1);
  tape->nodes.push_back(std::move(node));
  out.tape_ = std::move(tape);
  out.node_ = static_cast<int>(out.tape_->nodes.size()) - 1;
  return out;
}

Tape::Tape() : state_(std::make_shared<detail::TapeState>()) {}

Tensor Tape::watch(const Tensor& value) {
  Tensor t = value.detach();
  detail::Node node;
  node.size = t.size();
  state_->nodes.push_back(std::move(node));
  t.tape_ = state_;
  t.node_ = static_cast<int>(state_->nodes.size()) - 1;
  return t;
}

std::size_t Tape::num_nodes() const { return state_->nodes.size(); }

Gradients Tape::backward(const Tensor& root) const {
  if (root.size() != 1) {
    throw ShapeError("backward root must be a scalar, got shape " + to_string(root.shape()));
  }
  Gradients g;
  g.tape_ = state_;
  g.grads_.resize(state_->nodes.size());
  if (root.tape_ != state_) return g;
  g.grads_[root.node_].assign(1, 1.0);
  std::vector<double*> grad_in;
  for (int i = root.node_; i >= 0; --i) {
    auto& gout = g.grads_[i];
    if (gout.empty()) continue;
    const auto& node = state_->nodes[i];
    if (!node.backward) continue;
    grad_in.assign(node.inputs.size(), nullptr);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      int in = node.inputs[k];
      if (in < 0) continue;
      auto& buf = g.grads_[in];
      if (buf.empty()) buf.assign(state_->nodes[in].size, 0.0);
      grad_in[k] = buf.data();
    }
    node.backward(gout, grad_in);
  }
  return g;
}

bool Gradients::reached(const Tensor& t) const {
  return t.tape_state() == tape_ && t.node() >= 0 &&
         static_cast<std::size_t>(t.node()) < grads_.size() && !grads_[t.node()].empty();
}

Tensor Gradients::of(const Tensor& t) const {
  if (!reached(t)) return Tensor::zeros(t.shape());
  return Tensor(t.shape(), grads_[t.node()]);
}

}  // namespace rl
