#pragma once

#include <random>
#include <string>
#include <vector>

#include "bcpo/autodiff.hpp"
#include "bcpo/tensor.hpp"

namespace bcpo::nd {

enum class Activation { ReLU, GeLU, Tanh, Identity };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

struct MlpSpec {
  std::vector<long> widths;  // at least [in, out]
  Activation activation = Activation::ReLU;
  bool layer_norm = false;  // hidden layers only

  void validate() const;
  long in_width() const { return widths.front(); }
  long out_width() const { return widths.back(); }
};

// Parameter handles for one MLP; the tensors live in a ParamStore.
struct MlpParams {
  MlpSpec spec;
  std::vector<Param*> w;  // [in, out] per layer
  std::vector<Param*> b;
  std::vector<Param*> ln_gain;  // per hidden layer when layer_norm is set
  std::vector<Param*> ln_bias;

  std::vector<Param*> all() const;
};

MlpParams make_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                   std::mt19937_64& rng);

// Records all intermediates on the tape. Input is [batch, in_width].
Var mlp_forward(Tape& tape, const MlpParams& p, Var input);

// Same forward pass but weights enter the tape as constants: gradients flow
// through the input only, never into the parameters.
Var mlp_forward_frozen(Tape& tape, const MlpParams& p, Var input);

// No-grad evaluation; bit-identical to the tape path.
Tensor mlp_eval(const MlpParams& p, const Tensor& input);

}  // namespace bcpo::nd
