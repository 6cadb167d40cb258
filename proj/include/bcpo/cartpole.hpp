#pragma once

#include <random>
#include <vector>

#include "bcpo/tensor.hpp"

namespace bcpo::env {

// Base physical constants; the context scalar kappa multiplies pole mass,
// pole length, and cart mass simultaneously.
struct CartPoleParams {
  double cart_mass = 1.0;    // kg
  double pole_mass = 0.1;    // kg
  double half_length = 0.5;  // m
  double gravity = 9.81;
  double force_max = 10.0;  // N
  double dt = 0.02;
  double angle_limit = 0.209;  // rad
  double track_limit = 2.4;    // m
  double cart_friction = 0.0;  // linear velocity damping on the cart
  double pole_damping = 0.0;   // joint damping on the pole
  long max_steps = 500;
  // Reset spread: uniform initial state in +/- these ranges. Wide enough that
  // the recovery gains depend on the context scale.
  double reset_position = 0.1;
  double reset_velocity = 0.5;
  double reset_angle = 0.1;
  double reset_angle_velocity = 0.4;
};

struct CartPoleContext {
  double kappa = 1.0;
};

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

// State layout: [x, x_dot, theta, theta_dot], theta measured from upright.
// Semi-implicit Euler on the standard cart-pole equations with the pole
// modeled as a uniform rod. Reward is +1 for every step taken, including the
// step that terminates the episode.
StepResult cartpole_step(const std::vector<double>& state, double force,
                         const CartPoleContext& ctx, const CartPoleParams& params,
                         double dt);

// Mechanical energy of the context-scaled system (kinetic + potential).
double cartpole_energy(const std::vector<double>& state, const CartPoleContext& ctx,
                       const CartPoleParams& params);

class CartPole {
 public:
  explicit CartPole(CartPoleParams params = {}) : params_(params) {}

  static constexpr long kStateDim = 4;
  static constexpr long kActionDim = 1;

  const CartPoleParams& params() const { return params_; }
  const std::vector<double>& state() const { return state_; }
  const CartPoleContext& context() const { return ctx_; }
  long steps() const { return steps_; }

  // Initial state drawn uniformly from the configured reset spread; context
  // fixed for the whole episode.
  const std::vector<double>& reset(const CartPoleContext& ctx, std::mt19937_64& rng);

  StepResult step(double force);

 private:
  CartPoleParams params_;
  CartPoleContext ctx_;
  std::vector<double> state_{0.0, 0.0, 0.0, 0.0};
  long steps_ = 0;
};

}  // namespace bcpo::env
