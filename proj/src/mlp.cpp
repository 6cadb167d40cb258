#include "bcpo/mlp.hpp"

#include <cmath>

#include "bcpo/kernels.hpp"

namespace bcpo::nd {

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "gelu") return Activation::GeLU;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw std::runtime_error("unknown activation: " + s);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::GeLU: return "gelu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "?";
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ShapeError("mlp spec needs at least [in, out] widths");
  for (long w : widths)
    if (w <= 0) throw ShapeError("mlp widths must be positive");
}

std::vector<Param*> MlpParams::all() const {
  std::vector<Param*> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.push_back(w[i]);
    out.push_back(b[i]);
  }
  for (std::size_t i = 0; i < ln_gain.size(); ++i) {
    out.push_back(ln_gain[i]);
    out.push_back(ln_bias[i]);
  }
  return out;
}

MlpParams make_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                   std::mt19937_64& rng) {
  spec.validate();
  MlpParams p;
  p.spec = spec;
  const std::size_t layers = spec.widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const long in = spec.widths[l], out = spec.widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Tensor w({in, out});
    for (long i = 0; i < w.numel(); ++i) w[i] = u(rng);
    Tensor b({out});
    for (long i = 0; i < b.numel(); ++i) b[i] = u(rng);
    p.w.push_back(&store.create(prefix + "/w" + std::to_string(l), std::move(w)));
    p.b.push_back(&store.create(prefix + "/b" + std::to_string(l), std::move(b)));
    const bool hidden = l + 1 < layers;
    if (hidden && spec.layer_norm) {
      p.ln_gain.push_back(
          &store.create(prefix + "/ln_g" + std::to_string(l), Tensor({out}, 1.0)));
      p.ln_bias.push_back(
          &store.create(prefix + "/ln_b" + std::to_string(l), Tensor({out}, 0.0)));
    }
  }
  return p;
}

namespace {

void check_input(const MlpParams& p, const Tensor& in) {
  if (in.rank() != 2 || in.cols() != p.spec.in_width())
    throw ShapeError("mlp layer 0: expected input width " +
                     std::to_string(p.spec.in_width()) + ", got " + in.shape_str());
  require_finite(in, "mlp input");
}

}  // namespace

namespace {

Var mlp_forward_impl(Tape& tape, const MlpParams& p, Var input, bool frozen) {
  check_input(p, tape.value(input));
  auto bind = [&](Param& prm) {
    return frozen ? tape.constant(prm.value) : tape.param(prm);
  };
  Var x = input;
  const std::size_t layers = p.w.size();
  for (std::size_t l = 0; l < layers; ++l) {
    if (tape.value(x).cols() != p.w[l]->value.rows())
      throw ShapeError("mlp layer " + std::to_string(l) + ": width mismatch");
    x = tape.add_rowvec(tape.matmul(x, bind(*p.w[l])), bind(*p.b[l]));
    const bool hidden = l + 1 < layers;
    if (!hidden) break;
    if (p.spec.layer_norm)
      x = tape.layer_norm(x, bind(*p.ln_gain[l]), bind(*p.ln_bias[l]));
    switch (p.spec.activation) {
      case Activation::ReLU: x = tape.relu(x); break;
      case Activation::GeLU: x = tape.gelu(x); break;
      case Activation::Tanh: x = tape.tanh_op(x); break;
      case Activation::Identity: break;
    }
  }
  return x;
}

}  // namespace

Var mlp_forward(Tape& tape, const MlpParams& p, Var input) {
  return mlp_forward_impl(tape, p, input, false);
}

Var mlp_forward_frozen(Tape& tape, const MlpParams& p, Var input) {
  return mlp_forward_impl(tape, p, input, true);
}

Tensor mlp_eval(const MlpParams& p, const Tensor& input) {
  check_input(p, input);
  Tensor x = input;
  const std::size_t layers = p.w.size();
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& W = p.w[l]->value;
    const Tensor& B = p.b[l]->value;
    const long m = x.rows(), k = x.cols(), n = W.cols();
    Tensor y({m, n});
    kern::matmul(x.data(), W.data(), y.data(), m, k, n);
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < n; ++j) y.at(i, j) += B[j];
    const bool hidden = l + 1 < layers;
    if (hidden && p.spec.layer_norm) {
      const Tensor& G = p.ln_gain[l]->value;
      const Tensor& Bn = p.ln_bias[l]->value;
      for (long i = 0; i < m; ++i) {
        double mu = 0.0;
        for (long j = 0; j < n; ++j) mu += y.at(i, j);
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (long j = 0; j < n; ++j) {
          const double d = y.at(i, j) - mu;
          var += d * d;
        }
        var /= static_cast<double>(n);
        const double is = 1.0 / std::sqrt(var + 1e-5);
        for (long j = 0; j < n; ++j)
          y.at(i, j) = (y.at(i, j) - mu) * is * G[j] + Bn[j];
      }
    }
    if (hidden) {
      switch (p.spec.activation) {
        case Activation::ReLU:
          for (long i = 0; i < y.numel(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
          break;
        case Activation::GeLU:
          for (long i = 0; i < y.numel(); ++i)
            y[i] = 0.5 * y[i] * (1.0 + std::erf(y[i] * kInvSqrt2));
          break;
        case Activation::Tanh:
          for (long i = 0; i < y.numel(); ++i) y[i] = std::tanh(y[i]);
          break;
        case Activation::Identity: break;
      }
    }
    x = std::move(y);
  }
  return x;
}

}  // namespace bcpo::nd
