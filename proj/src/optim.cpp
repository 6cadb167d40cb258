#include "bcpo/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace bcpo::nd {

Adam::Adam(std::vector<Param*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  if (cfg_.lr <= 0.0) throw std::invalid_argument("adam: lr must be > 0");
  slots_.reserve(params_.size());
  for (Param* p : params_)
    slots_.push_back({Tensor(p->value.shape(), 0.0), Tensor(p->value.shape(), 0.0)});
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    if (!p.grad.same_shape(p.value))
      throw ShapeError("adam: grad shape mismatch for " + p.name);
    Slot& s = slots_[i];
    double* m = s.m.data();
    double* v = s.v.data();
    double* x = p.value.data();
    const double* g = p.grad.data();
    const long n = p.value.numel();
    for (long j = 0; j < n; ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      x[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) p->zero_grad();
}

}  // namespace bcpo::nd
