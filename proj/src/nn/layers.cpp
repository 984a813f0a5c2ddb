#include "emoface/nn/layers.hpp"

#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/nn/ops.hpp"

namespace emoface::nn {

Var ParameterSet::add(std::string name, Tensor init) {
  for (const auto& e : entries_)
    if (e.name == name) throw ContractError("duplicate parameter name: " + name);
  Var v = parameter(std::move(init));
  entries_.push_back({std::move(name), v});
  return v;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.var.value().numel();
  return n;
}

std::vector<Var> ParameterSet::select(const std::vector<std::string>& prefixes) const {
  std::vector<Var> out;
  for (const auto& e : entries_)
    for (const auto& p : prefixes)
      if (e.name.starts_with(p)) {
        out.push_back(e.var);
        break;
      }
  return out;
}

std::vector<Var> ParameterSet::all() const {
  std::vector<Var> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.var);
  return out;
}

Var ParameterSet::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.var;
  throw ContractError("unknown parameter: " + std::string(name));
}

StateDict ParameterSet::state() const {
  StateDict s;
  s.reserve(entries_.size());
  for (const auto& e : entries_) s.emplace_back(e.name, e.var.value());
  return s;
}

void ParameterSet::load_state(const StateDict& state) {
  if (state.size() != entries_.size()) {
    throw ContractError("state has " + std::to_string(state.size()) + " tensors, model expects " +
                        std::to_string(entries_.size()));
  }
  for (const auto& [name, tensor] : state) {
    Var v = find(name);
    if (v.shape() != tensor.shape()) {
      throw ContractError("shape mismatch for " + name + ": " + shape_string(tensor.shape()) + " vs " +
                          shape_string(v.shape()));
    }
    v.mutable_value() = tensor;
  }
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.var.zero_grad();
}

std::map<std::string, std::uint64_t> ParameterSet::fingerprints() const {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : entries_) out[e.name] = tensor_hash(e.var.value());
  return out;
}

namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace

Linear::Linear(ParameterSet& params, const std::string& name, int in, int out, Rng& rng, Init init,
               bool zero_bias)
    : in_(in), out_(out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = params.add(name + ".weight", init == Init::kZero ? Tensor({in, out}) : uniform_tensor({in, out}, bound, rng));
  bias_ = params.add(name + ".bias", (init == Init::kZero || zero_bias) ? Tensor({out}) : uniform_tensor({out}, bound, rng));
}

Var Linear::operator()(const Var& x) const { return linear(x, weight_, bias_); }

Conv2d::Conv2d(ParameterSet& params, const std::string& name, int in, int out, int kernel, int stride, int padding,
               Rng& rng, Init init)
    : out_(out), stride_(stride), padding_(padding) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in) * kernel * kernel);
  Shape ws{out, in, kernel, kernel};
  weight_ = params.add(name + ".weight", init == Init::kZero ? Tensor(ws) : uniform_tensor(ws, bound, rng));
  bias_ = params.add(name + ".bias", init == Init::kZero ? Tensor({out}) : uniform_tensor({out}, bound, rng));
}

Var Conv2d::operator()(const Var& x) const { return conv2d(x, weight_, bias_, stride_, padding_); }

LstmStack::LstmStack(ParameterSet& params, const std::string& name, int input, int hidden, int layers, Rng& rng)
    : hidden_(hidden) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (int l = 0; l < layers; ++l) {
    const std::string p = name + ".layer" + std::to_string(l);
    const int in = l == 0 ? input : hidden;
    Layer layer;
    layer.w_ih = params.add(p + ".w_ih", uniform_tensor({in, 4 * hidden}, bound, rng));
    layer.w_hh = params.add(p + ".w_hh", uniform_tensor({hidden, 4 * hidden}, bound, rng));
    Tensor b({4 * hidden});
    for (int k = hidden; k < 2 * hidden; ++k) b[k] = 1.0f;  // forget gate
    layer.bias = params.add(p + ".bias", std::move(b));
    layers_.push_back(layer);
  }
}

Var LstmStack::operator()(const Var& x) const {
  Var h = x;
  for (const auto& l : layers_) h = lstm(h, l.w_ih, l.w_hh, l.bias);
  return h;
}

}  // namespace emoface::nn
