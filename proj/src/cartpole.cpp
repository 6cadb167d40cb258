#include "bcpo/cartpole.hpp"

#include <cmath>

namespace bcpo::env {

StepResult cartpole_step(const std::vector<double>& state, double force,
                         const CartPoleContext& ctx, const CartPoleParams& params,
                         double dt) {
  if (state.size() != 4) throw nd::ShapeError("cartpole_step: state must be 4-dim");
  for (double v : state)
    if (!std::isfinite(v)) throw nd::NumericError("cartpole_step: non-finite state");
  if (!(dt > 0.0)) throw nd::NumericError("cartpole_step: dt must be > 0");
  if (!(ctx.kappa > 0.0)) throw nd::NumericError("cartpole_step: kappa must be > 0");

  const double mc = params.cart_mass * ctx.kappa;
  const double mp = params.pole_mass * ctx.kappa;
  const double l = params.half_length * ctx.kappa;
  const double g = params.gravity;
  const double total = mc + mp;

  double x = state[0], xd = state[1], th = state[2], thd = state[3];
  const double f = std::min(params.force_max, std::max(-params.force_max, force)) -
                   params.cart_friction * xd;
  const double sin_th = std::sin(th), cos_th = std::cos(th);

  const double temp = (f + mp * l * thd * thd * sin_th) / total;
  const double th_acc =
      (g * sin_th - cos_th * temp - params.pole_damping * thd / (mp * l)) /
      (l * (4.0 / 3.0 - mp * cos_th * cos_th / total));
  const double x_acc = temp - mp * l * th_acc * cos_th / total;

  xd += x_acc * dt;
  thd += th_acc * dt;
  x += xd * dt;
  th += thd * dt;

  StepResult r;
  r.next_state = {x, xd, th, thd};
  r.reward = 1.0;
  r.terminated =
      std::abs(th) > params.angle_limit || std::abs(x) > params.track_limit;
  return r;
}

double cartpole_energy(const std::vector<double>& state, const CartPoleContext& ctx,
                       const CartPoleParams& params) {
  const double mc = params.cart_mass * ctx.kappa;
  const double mp = params.pole_mass * ctx.kappa;
  const double l = params.half_length * ctx.kappa;
  const double xd = state[1], th = state[2], thd = state[3];
  // Uniform rod: KE = 1/2 (mc+mp) xd^2 + mp l xd thd cos(th) + 2/3 mp l^2 thd^2
  return 0.5 * (mc + mp) * xd * xd + mp * l * xd * thd * std::cos(th) +
         (2.0 / 3.0) * mp * l * l * thd * thd +
         mp * params.gravity * l * std::cos(th);
}

const std::vector<double>& CartPole::reset(const CartPoleContext& ctx,
                                           std::mt19937_64& rng) {
  ctx_ = ctx;
  steps_ = 0;
  auto draw = [&rng](double r) {
    std::uniform_real_distribution<double> u(-r, r);
    return u(rng);
  };
  state_ = {draw(params_.reset_position), draw(params_.reset_velocity),
            draw(params_.reset_angle), draw(params_.reset_angle_velocity)};
  return state_;
}

StepResult CartPole::step(double force) {
  StepResult r = cartpole_step(state_, force, ctx_, params_, params_.dt);
  state_ = r.next_state;
  ++steps_;
  if (!r.terminated && steps_ >= params_.max_steps) r.truncated = true;
  return r;
}

}  // namespace bcpo::env
