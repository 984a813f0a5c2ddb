#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emoface/nn/autograd.hpp"
#include "emoface/nn/rng.hpp"

namespace emoface::nn {

/// Ordered name -> tensor mapping, used for checkpoints and comparisons.
using StateDict = std::vector<std::pair<std::string, Tensor>>;

struct NamedParameter {
  std::string name;
  Var var;
};

/// Owns the trainable leaves of a model, in registration order.
class ParameterSet {
 public:
  Var add(std::string name, Tensor init);

  const std::vector<NamedParameter>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  /// Parameters whose names start with any of the prefixes.
  std::vector<Var> select(const std::vector<std::string>& prefixes) const;
  std::vector<Var> all() const;
  Var find(std::string_view name) const;

  StateDict state() const;
  /// Copies values in; every name must exist with a matching shape.
  void load_state(const StateDict& state);
  void zero_grad();

  /// Per-parameter FNV-1a fingerprints keyed by name.
  std::map<std::string, std::uint64_t> fingerprints() const;

 private:
  std::vector<NamedParameter> entries_;
};

enum class Init { kUniformFanIn, kZero };

/// Fully connected layer; weight stored as [in, out].
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, int in, int out, Rng& rng,
         Init init = Init::kUniformFanIn, bool zero_bias = false);

  Var operator()(const Var& x) const;
  int in_features() const { return in_; }
  int out_features() const { return out_; }

 private:
  Var weight_, bias_;
  int in_ = 0, out_ = 0;
};

/// Square-kernel convolution with symmetric padding.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterSet& params, const std::string& name, int in, int out, int kernel, int stride, int padding,
         Rng& rng, Init init = Init::kUniformFanIn);

  Var operator()(const Var& x) const;
  int out_channels() const { return out_; }

 private:
  Var weight_, bias_;
  int out_ = 0, stride_ = 1, padding_ = 0;
};

/// Stack of LSTM layers over [T, B, I] sequences.
class LstmStack {
 public:
  LstmStack() = default;
  LstmStack(ParameterSet& params, const std::string& name, int input, int hidden, int layers, Rng& rng);

  Var operator()(const Var& x) const;
  int hidden() const { return hidden_; }

 private:
  struct Layer {
    Var w_ih, w_hh, bias;
  };
  std::vector<Layer> layers_;
  int hidden_ = 0;
};

}  // namespace emoface::nn
