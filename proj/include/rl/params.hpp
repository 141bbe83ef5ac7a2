#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rl/tensor.hpp"

namespace rl {

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

using GradientMap = std::map<std::string, Tensor>;

struct ParamSlot {
  std::string name;
  Tensor value;
  std::optional<Bounds> bounds;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
};

// Named trainable tensors plus their optimizer state, in insertion order.
class ParamStore {
 public:
  void add(const std::string& name, Tensor init, std::optional<Bounds> bounds = std::nullopt);
  // Replaces the value (clamped to the slot bounds). The shape must match.
  void set(const std::string& name, const Tensor& value);
  bool contains(const std::string& name) const;
  const Tensor& value(const std::string& name) const;
  const ParamSlot& slot(const std::string& name) const;
  const std::vector<ParamSlot>& slots() const { return slots_; }
  std::vector<std::string> names() const;
  std::size_t size() const { return slots_.size(); }
  std::size_t total_elements() const;

  std::size_t step() const { return step_; }
  void reset_optimizer();
  void clear();

 private:
  friend void adam_step(ParamStore&, const GradientMap&, const AdamConfig&);
  ParamSlot& mutable_slot(const std::string& name);

  std::vector<ParamSlot> slots_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t step_ = 0;
};

// Per-evaluation access to the store. With a tape, each slot becomes a
// watched leaf the first time it is requested.
class ParamView {
 public:
  explicit ParamView(const ParamStore& store);
  ParamView(const ParamStore& store, Tape& tape);

  Tensor get(const std::string& name);
  bool tracked() const { return tape_ != nullptr; }
  const ParamStore& store() const { return *store_; }

  // Gradient for every slot; slots the loss does not reach get zeros.
  GradientMap gradients(const Tensor& loss) const;

 private:
  const ParamStore* store_;
  Tape* tape_ = nullptr;
  std::unordered_map<std::string, Tensor> leaves_;
};

// One bias-corrected Adam update followed by clamping to slot bounds.
void adam_step(ParamStore& store, const GradientMap& grads, const AdamConfig& cfg);

// Header line of JSON, then row-major little-endian float64 data.
void save_params(const ParamStore& store, const std::string& path);
ParamStore read_params(const std::string& path);
// Loads values into an existing store; names and shapes must match exactly.
void load_params(ParamStore& store, const std::string& path);

}  // namespace rl
