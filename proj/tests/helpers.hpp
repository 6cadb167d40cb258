#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bcpo/autodiff.hpp"

namespace testutil {

// Central finite differences with h = 1e-5 against the analytic gradient
// accumulated in the param grads. `loss_fn` must rebuild the tape and return
// the loss value for the current parameter values.
struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;
};

inline GradCheckResult gradcheck(std::vector<bcpo::nd::Param*> params,
                                 const std::function<double()>& loss_fn,
                                 const std::function<void()>& backward_fn,
                                 double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  backward_fn();
  GradCheckResult res;
  for (auto* p : params) {
    for (long i = 0; i < p->value.numel(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss_fn();
      p->value[i] = saved - h;
      const double dn = loss_fn();
      p->value[i] = saved;
      const double numeric = (up - dn) / (2.0 * h);
      const double analytic = p->grad[i];
      const double mag = std::max(std::abs(numeric), std::abs(analytic));
      const double err = mag > 1e-6 ? std::abs(numeric - analytic) / mag
                                    : std::abs(numeric - analytic);
      if (err > res.max_rel_err) {
        res.max_rel_err = err;
        res.worst = p->name + "[" + std::to_string(i) + "] analytic=" +
                    std::to_string(analytic) + " numeric=" + std::to_string(numeric);
      }
    }
  }
  return res;
}

}  // namespace testutil
