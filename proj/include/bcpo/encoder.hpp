#pragma once

#include <random>

#include "bcpo/mlp.hpp"
#include "bcpo/window.hpp"

namespace bcpo::enc {

// Clamp range for the Gaussian log-scale outputs.
constexpr double kLogStdMin = -10.0;
constexpr double kLogStdMax = 2.0;

// Window encoder: MLP trunk emitting (mean, log_std), each of width d_z.
struct GaussianEncoder {
  nd::MlpParams trunk;  // out width = 2 * d_z
  long d_z = 0;

  long in_width() const { return trunk.spec.in_width(); }
};

GaussianEncoder make_encoder(nd::ParamStore& store, const std::string& prefix,
                             long in_width, const std::vector<long>& hidden, long d_z,
                             nd::Activation act, bool layer_norm, std::mt19937_64& rng);

struct EncodeResult {
  nd::Var z;
  nd::Var mean;
  nd::Var log_std;
};

// Tape version: z = mean + exp(log_std) * noise, differentiable through the
// trunk. Inputs are [batch, in_width] and [batch, d_z].
EncodeResult encode(nd::Tape& tape, const GaussianEncoder& e, nd::Var window_batch,
                    nd::Var noise);

// No-grad version for rollouts; one window row in, one code out.
struct EncodeValue {
  std::vector<double> z, mean, log_std;
};
EncodeValue encode_eval(const GaussianEncoder& e, const std::vector<double>& window_flat,
                        std::mt19937_64& noise_rng, bool sample = true);

// Closed-form KL(N(mean, diag exp(2 log_std)) || N(0, I)) summed over
// dimensions, averaged over the batch rows.
nd::Var kl_rate(nd::Tape& tape, nd::Var mean, nd::Var log_std);
double kl_rate_value(const std::vector<double>& mean, const std::vector<double>& log_std);

}  // namespace bcpo::enc
