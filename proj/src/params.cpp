#include "rl/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace rl {

namespace {

constexpr const char* kFormat = "reallogic-params";
constexpr int kVersion = 1;

Tensor clamp_to(const Tensor& t, const std::optional<Bounds>& b) {
  if (!b) return t.detach();
  auto v = t.to_vector();
  for (auto& x : v) x = std::clamp(x, b->lo, b->hi);
  return Tensor(t.shape(), std::move(v));
}

}  // namespace

void ParamStore::add(const std::string& name, Tensor init, std::optional<Bounds> bounds) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter slot '" + name + "'");
  if (bounds && bounds->lo > bounds->hi) {
    throw std::invalid_argument("parameter '" + name + "' has empty bounds");
  }
  ParamSlot s;
  s.name = name;
  s.value = clamp_to(init, bounds);
  s.bounds = bounds;
  s.adam_m.assign(s.value.size(), 0.0);
  s.adam_v.assign(s.value.size(), 0.0);
  index_[name] = slots_.size();
  slots_.push_back(std::move(s));
}

ParamSlot& ParamStore::mutable_slot(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return slots_[it->second];
}

const ParamSlot& ParamStore::slot(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return slots_[it->second];
}

void ParamStore::set(const std::string& name, const Tensor& value) {
  auto& s = mutable_slot(name);
  if (s.value.shape() != value.shape()) {
    throw ShapeError("parameter '" + name + "' has shape " + to_string(s.value.shape()) +
                     ", got " + to_string(value.shape()));
  }
  s.value = clamp_to(value, s.bounds);
}

bool ParamStore::contains(const std::string& name) const { return index_.count(name) > 0; }

const Tensor& ParamStore::value(const std::string& name) const { return slot(name).value; }

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto& s : slots_) out.push_back(s.name);
  return out;
}

std::size_t ParamStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& s : slots_) n += s.value.size();
  return n;
}

void ParamStore::reset_optimizer() {
  step_ = 0;
  for (auto& s : slots_) {
    std::fill(s.adam_m.begin(), s.adam_m.end(), 0.0);
    std::fill(s.adam_v.begin(), s.adam_v.end(), 0.0);
  }
}

void ParamStore::clear() {
  slots_.clear();
  index_.clear();
  step_ = 0;
}

ParamView::ParamView(const ParamStore& store) : store_(&store) {}

ParamView::ParamView(const ParamStore& store, Tape& tape) : store_(&store), tape_(&tape) {}

Tensor ParamView::get(const std::string& name) {
  auto it = leaves_.find(name);
  if (it != leaves_.end()) return it->second;
  const Tensor& v = store_->value(name);
  Tensor leaf = tape_ ? tape_->watch(v) : v;
  leaves_.emplace(name, leaf);
  return leaf;
}

GradientMap ParamView::gradients(const Tensor& loss) const {
  if (!tape_) throw std::logic_error("gradients requested from an untracked parameter view");
  Gradients g = tape_->backward(loss);
  GradientMap out;
  for (const auto& s : store_->slots()) {
    auto it = leaves_.find(s.name);
    out[s.name] = it == leaves_.end() ? Tensor::zeros(s.value.shape()) : g.of(it->second);
  }
  return out;
}

void adam_step(ParamStore& store, const GradientMap& grads, const AdamConfig& cfg) {
  ++store.step_;
  const double t = static_cast<double>(store.step_);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& s : store.slots_) {
    auto it = grads.find(s.name);
    if (it == grads.end()) continue;
    const auto& g = it->second;
    if (g.shape() != s.value.shape()) {
      throw ShapeError("gradient for '" + s.name + "' has shape " + to_string(g.shape()));
    }
    auto v = s.value.to_vector();
    for (std::size_t i = 0; i < v.size(); ++i) {
      double gi = g[i];
      s.adam_m[i] = cfg.beta1 * s.adam_m[i] + (1.0 - cfg.beta1) * gi;
      s.adam_v[i] = cfg.beta2 * s.adam_v[i] + (1.0 - cfg.beta2) * gi * gi;
      double mhat = s.adam_m[i] / c1;
      double vhat = s.adam_v[i] / c2;
      v[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      if (s.bounds) v[i] = std::clamp(v[i], s.bounds->lo, s.bounds->hi);
    }
    s.value = Tensor(s.value.shape(), std::move(v));
  }
}

void save_params(const ParamStore& store, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "params.bin assumes a little-endian host");
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["dtype"] = "float64";
  header["byte_order"] = "little";
  auto slots = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& s : store.slots()) {
    nlohmann::json j;
    j["name"] = s.name;
    j["shape"] = s.value.shape();
    j["offset"] = offset;
    j["count"] = s.value.size();
    if (s.bounds) {
      j["bounds"] = {s.bounds->lo, s.bounds->hi};
    } else {
      j["bounds"] = nullptr;
    }
    slots.push_back(j);
    offset += s.value.size();
  }
  header["slots"] = slots;
  header["total"] = offset;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << header.dump() << '\n';
  for (const auto& s : store.slots()) {
    auto v = s.value.values();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

ParamStore read_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": bad params header: " + e.what());
  }
  if (header.value("format", "") != kFormat || header.value("version", 0) != kVersion) {
    throw std::runtime_error(path + ": not a params file of a supported version");
  }
  std::size_t total = header.at("total").get<std::size_t>();
  std::vector<double> data(total);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(total * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != total * sizeof(double)) {
    throw std::runtime_error(path + ": truncated params data");
  }
  ParamStore store;
  for (const auto& j : header.at("slots")) {
    Shape shape = j.at("shape").get<Shape>();
    std::size_t off = j.at("offset").get<std::size_t>();
    std::size_t n = num_elements(shape);
    if (off + n > total) throw std::runtime_error(path + ": slot exceeds data");
    std::optional<Bounds> b;
    if (!j.at("bounds").is_null()) b = Bounds{j["bounds"][0].get<double>(), j["bounds"][1].get<double>()};
    store.add(j.at("name").get<std::string>(),
              Tensor(shape, std::vector<double>(data.begin() + off, data.begin() + off + n)), b);
  }
  return store;
}

void load_params(ParamStore& store, const std::string& path) {
  ParamStore loaded = read_params(path);
  if (loaded.size() != store.size()) {
    throw std::runtime_error(path + ": expected " + std::to_string(store.size()) + " slots, found " +
                             std::to_string(loaded.size()));
  }
  for (const auto& s : store.slots()) {
    if (!loaded.contains(s.name)) throw std::runtime_error(path + ": missing slot '" + s.name + "'");
    if (loaded.value(s.name).shape() != s.value.shape()) {
      throw std::runtime_error(path + ": slot '" + s.name + "' has shape " +
                               to_string(loaded.value(s.name).shape()) + ", expected " +
                               to_string(s.value.shape()));
    }
  }
  for (const auto& s : loaded.slots()) store.set(s.name, s.value);
}

}  // namespace rl
