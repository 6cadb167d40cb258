#include "bcpo/encoder.hpp"

#include <cmath>

#include "bcpo/rng.hpp"

namespace bcpo::enc {

GaussianEncoder make_encoder(nd::ParamStore& store, const std::string& prefix,
                             long in_width, const std::vector<long>& hidden, long d_z,
                             nd::Activation act, bool layer_norm, std::mt19937_64& rng) {
  nd::MlpSpec spec;
  spec.widths.push_back(in_width);
  for (long h : hidden) spec.widths.push_back(h);
  spec.widths.push_back(2 * d_z);
  spec.activation = act;
  spec.layer_norm = layer_norm;
  GaussianEncoder e;
  e.trunk = nd::make_mlp(store, prefix, spec, rng);
  e.d_z = d_z;
  return e;
}

EncodeResult encode(nd::Tape& tape, const GaussianEncoder& e, nd::Var window_batch,
                    nd::Var noise) {
  const nd::Var out = nd::mlp_forward(tape, e.trunk, window_batch);
  const nd::Var mean = tape.slice_cols(out, 0, e.d_z);
  const nd::Var log_std = tape.clamp(tape.slice_cols(out, e.d_z, 2 * e.d_z), kLogStdMin,
                                     kLogStdMax);
  if (!tape.value(noise).same_shape(tape.value(mean)))
    throw nd::ShapeError("encode: noise shape mismatch");
  return {tape.gaussian_reparam(mean, log_std, noise), mean, log_std};
}

EncodeValue encode_eval(const GaussianEncoder& e, const std::vector<double>& window_flat,
                        std::mt19937_64& noise_rng, bool sample) {
  if (static_cast<long>(window_flat.size()) != e.in_width())
    throw nd::ShapeError("encode_eval: window width mismatch");
  const nd::Tensor out =
      nd::mlp_eval(e.trunk, nd::Tensor({1, e.in_width()}, window_flat));
  EncodeValue r;
  r.mean.resize(static_cast<std::size_t>(e.d_z));
  r.log_std.resize(static_cast<std::size_t>(e.d_z));
  r.z.resize(static_cast<std::size_t>(e.d_z));
  for (long i = 0; i < e.d_z; ++i) {
    r.mean[static_cast<std::size_t>(i)] = out.at(0, i);
    double ls = out.at(0, e.d_z + i);
    ls = std::min(kLogStdMax, std::max(kLogStdMin, ls));
    r.log_std[static_cast<std::size_t>(i)] = ls;
    const double n = sample ? normal(noise_rng) : 0.0;
    r.z[static_cast<std::size_t>(i)] =
        r.mean[static_cast<std::size_t>(i)] + std::exp(ls) * n;
  }
  return r;
}

nd::Var kl_rate(nd::Tape& tape, nd::Var mean, nd::Var log_std) {
  // 1/2 sum_i (mean_i^2 + exp(2 log_std_i) - 1 - 2 log_std_i), batch-averaged.
  const nd::Var mu2 = tape.square(mean);
  const nd::Var var = tape.exp_op(tape.affine(log_std, 2.0, 0.0));
  const nd::Var inner =
      tape.add(tape.add(mu2, var), tape.affine(log_std, -2.0, -1.0));
  const long rows = tape.value(mean).rows();
  const nd::Var per_row = tape.sum_cols(tape.affine(inner, 0.5, 0.0));
  return tape.affine(tape.sum_all(per_row), 1.0 / static_cast<double>(rows), 0.0);
}

double kl_rate_value(const std::vector<double>& mean, const std::vector<double>& log_std) {
  if (mean.size() != log_std.size())
    throw nd::ShapeError("kl_rate_value: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i)
    s += 0.5 * (mean[i] * mean[i] + std::exp(2.0 * log_std[i]) - 1.0 - 2.0 * log_std[i]);
  return s;
}

}  // namespace bcpo::enc
