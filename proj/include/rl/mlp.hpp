#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rl/params.hpp"
#include "rl/random.hpp"
#include "rl/tensor.hpp"

namespace rl {

enum class Activation { Linear, Elu, Sigmoid, Softmax };

Activation parse_activation(std::string_view name);
std::string to_string(Activation a);

struct DenseLayer {
  std::size_t units = 1;
  Activation activation = Activation::Elu;
  double dropout = 0.0;  // applied to this layer's output while training

  bool operator==(const DenseLayer&) const = default;
};

struct MlpSpec {
  std::vector<DenseLayer> layers;

  std::size_t output_width() const { return layers.empty() ? 0 : layers.back().units; }
  bool operator==(const MlpSpec&) const = default;
};

// x: [..., in] with W: [in, out], b: [out].
Tensor dense_forward(const Tensor& W, const Tensor& b, Activation act, const Tensor& x);

// Creates slots prefix.W<i> (Glorot uniform) and prefix.b<i> (zeros).
void init_mlp(ParamStore& store, const std::string& prefix, std::size_t input_width,
              const MlpSpec& spec, Rng& rng);

// x: [n, in] -> [n, out]. Dropout is active only when training with an rng.
Tensor mlp_forward(ParamView& params, const std::string& prefix, const MlpSpec& spec,
                   const Tensor& x, bool training, Rng* rng);

}  // namespace rl
