#pragma once

#include <vector>

#include "bcpo/autodiff.hpp"

namespace bcpo::nd {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second-moment adaptive optimizer with bias correction.
class Adam {
 public:
  Adam(std::vector<Param*> params, AdamConfig cfg);

  // Consumes current grads; does not zero them.
  void step();
  void zero_grad();

  long steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Slot {
    Tensor m, v;
  };
  std::vector<Param*> params_;
  std::vector<Slot> slots_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace bcpo::nd
