#include "rl/mlp.hpp"

#include <cmath>

#include "rl/ops.hpp"

namespace rl {

Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::Linear;
  if (name == "elu") return Activation::Elu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "softmax") return Activation::Softmax;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Elu: return "elu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
  }
  return "linear";
}

Tensor dense_forward(const Tensor& W, const Tensor& b, Activation act, const Tensor& x) {
  if (x.rank() == 0 || W.rank() != 2 || x.shape().back() != W.dim(0)) {
    throw ShapeError("dense layer expects [..., " + std::to_string(W.rank() == 2 ? W.dim(0) : 0) +
                     "], got " + to_string(x.shape()));
  }
  Shape lead(x.shape().begin(), x.shape().end() - 1);
  Tensor flat = reshape(x, {num_elements(lead), W.dim(0)});
  Tensor z = add(matmul(flat, W), b);
  switch (act) {
    case Activation::Linear: break;
    case Activation::Elu: z = elu(z); break;
    case Activation::Sigmoid: z = sigmoid(z); break;
    case Activation::Softmax: z = softmax(z); break;
  }
  lead.push_back(W.dim(1));
  return reshape(z, lead);
}

void init_mlp(ParamStore& store, const std::string& prefix, std::size_t input_width,
              const MlpSpec& spec, Rng& rng) {
  std::size_t in = input_width;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    std::size_t out = spec.layers[i].units;
    double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (auto& v : w) v = uniform(rng, -limit, limit);
    store.add(prefix + ".W" + std::to_string(i), Tensor({in, out}, std::move(w)));
    store.add(prefix + ".b" + std::to_string(i), Tensor::zeros({out}));
    in = out;
  }
}

Tensor mlp_forward(ParamView& params, const std::string& prefix, const MlpSpec& spec,
                   const Tensor& x, bool training, Rng* rng) {
  Tensor h = x;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    h = dense_forward(params.get(prefix + ".W" + std::to_string(i)),
                      params.get(prefix + ".b" + std::to_string(i)), layer.activation, h);
    if (training && rng && layer.dropout > 0.0) {
      const double keep = 1.0 - layer.dropout;
      std::vector<double> mask(h.size());
      std::bernoulli_distribution coin(keep);
      for (auto& m : mask) m = coin(*rng) ? 1.0 / keep : 0.0;
      h = mul(h, Tensor(h.shape(), std::move(mask)));
    }
  }
  return h;
}

}  // namespace rl
