#include "bcpo/sac_agent.hpp"

#include <cmath>

#include "bcpo/rng.hpp"

namespace bcpo::rl {

namespace {
constexpr double kHalfLn2Pi = 0.91893853320467274178;
constexpr double kLn2 = 0.69314718055994530942;
}  // namespace

SacAgent::SacAgent(nd::ParamStore& store, long obs_dim, long act_dim,
                   const SacConfig& cfg, std::mt19937_64& init_rng)
    : cfg_(cfg), obs_dim_(obs_dim), act_dim_(act_dim) {
  nd::MlpSpec actor_spec;
  actor_spec.widths.push_back(obs_dim);
  for (long h : cfg.hidden) actor_spec.widths.push_back(h);
  actor_spec.widths.push_back(2 * act_dim);
  actor_spec.activation = nd::Activation::ReLU;
  actor_ = nd::make_mlp(store, "actor", actor_spec, init_rng);

  nd::MlpSpec q_spec;
  q_spec.widths.push_back(obs_dim + act_dim);
  for (long h : cfg.hidden) q_spec.widths.push_back(h);
  q_spec.widths.push_back(1);
  q_spec.activation = nd::Activation::ReLU;
  q1_ = nd::make_mlp(store, "q1", q_spec, init_rng);
  q2_ = nd::make_mlp(store, "q2", q_spec, init_rng);
  q1_t_ = nd::make_mlp(store, "q1_target", q_spec, init_rng);
  q2_t_ = nd::make_mlp(store, "q2_target", q_spec, init_rng);
  // Targets start as exact copies of the online critics.
  polyak_update(q1_.all(), q1_t_.all(), 1.0);
  polyak_update(q2_.all(), q2_t_.all(), 1.0);

  actor_opt_ = std::make_unique<nd::Adam>(actor_.all(), nd::AdamConfig{cfg.lr});
  std::vector<nd::Param*> critic_params = q1_.all();
  for (nd::Param* p : q2_.all()) critic_params.push_back(p);
  critic_opt_ = std::make_unique<nd::Adam>(critic_params, nd::AdamConfig{cfg.lr});
}

ActorSample SacAgent::actor_sample(nd::Tape& tape, nd::Var obs, nd::Var noise) const {
  if (tape.value(obs).cols() != obs_dim_)
    throw nd::ShapeError("actor_sample: obs width mismatch");
  const nd::Var out = nd::mlp_forward(tape, actor_, obs);
  const nd::Var mean = tape.slice_cols(out, 0, act_dim_);
  const nd::Var log_std = tape.clamp(tape.slice_cols(out, act_dim_, 2 * act_dim_),
                                     kActorLogStdMin, kActorLogStdMax);
  const nd::Var u = tape.gaussian_reparam(mean, log_std, noise);
  const nd::Var action = tape.affine(tape.tanh_op(u), cfg_.action_scale, 0.0);

  // log pi(a|s) = sum_i [ -eps_i^2/2 - log_std_i - ln sqrt(2 pi)
  //                       - ln(scale) - 2 ln 2 + 2 u_i + 2 softplus(-2 u_i) ]
  // (tanh change of variables written in its numerically stable form; the
  //  -eps^2/2 term is constant under reparameterization).
  const double const_term = -kHalfLn2Pi - std::log(cfg_.action_scale) - 2.0 * kLn2;
  nd::Var terms = tape.affine(tape.square(noise), -0.5, const_term);
  terms = tape.add(terms, tape.affine(log_std, -1.0, 0.0));
  terms = tape.add(terms, tape.affine(u, 2.0, 0.0));
  terms = tape.add(terms, tape.affine(tape.softplus(tape.affine(u, -2.0, 0.0)), 2.0, 0.0));
  return {action, tape.sum_cols(terms)};
}

SacAgent::ActionValue SacAgent::actor_sample_eval(const nd::Tensor& obs,
                                                  std::mt19937_64& rng,
                                                  bool deterministic) const {
  const long B = obs.rows();
  const nd::Tensor out = nd::mlp_eval(actor_, obs);
  nd::Tensor action({B, act_dim_});
  nd::Tensor log_prob({B});
  for (long i = 0; i < B; ++i) {
    double lp = 0.0;
    for (long j = 0; j < act_dim_; ++j) {
      const double mean = out.at(i, j);
      double ls = out.at(i, act_dim_ + j);
      ls = std::min(kActorLogStdMax, std::max(kActorLogStdMin, ls));
      const double eps = deterministic ? 0.0 : normal(rng);
      const double u = mean + std::exp(ls) * eps;
      action.at(i, j) = cfg_.action_scale * std::tanh(u);
      const double sp = std::max(-2.0 * u, 0.0) + std::log1p(std::exp(-std::abs(2.0 * u)));
      lp += -0.5 * eps * eps - ls - kHalfLn2Pi - std::log(cfg_.action_scale) -
            2.0 * kLn2 + 2.0 * u + 2.0 * sp;
    }
    log_prob[i] = lp;
  }
  return {std::move(action), std::move(log_prob)};
}

double SacAgent::act_scalar(const std::vector<double>& obs, std::mt19937_64& rng,
                            bool deterministic) const {
  nd::Tensor o({1, obs_dim_}, obs);
  return actor_sample_eval(o, rng, deterministic).action.at(0, 0);
}

nd::Var SacAgent::critic_forward(nd::Tape& tape, const nd::MlpParams& q, nd::Var obs_act,
                                 bool frozen) const {
  return frozen ? nd::mlp_forward_frozen(tape, q, obs_act)
                : nd::mlp_forward(tape, q, obs_act);
}

nd::Tensor SacAgent::critic_targets(const SacBatch& batch, std::mt19937_64& rng,
                                    double alpha_override) const {
  const double alpha = alpha_override >= 0.0 ? alpha_override : cfg_.alpha;
  const long B = batch.obs.rows();
  const ActionValue next = actor_sample_eval(batch.obs_next, rng, false);
  nd::Tensor obs_act({B, obs_dim_ + act_dim_});
  for (long i = 0; i < B; ++i) {
    for (long j = 0; j < obs_dim_; ++j) obs_act.at(i, j) = batch.obs_next.at(i, j);
    for (long j = 0; j < act_dim_; ++j)
      obs_act.at(i, obs_dim_ + j) = next.action.at(i, j);
  }
  const nd::Tensor t1 = nd::mlp_eval(q1_t_, obs_act);
  const nd::Tensor t2 = nd::mlp_eval(q2_t_, obs_act);
  nd::Tensor y({B});
  for (long i = 0; i < B; ++i) {
    const double qmin = std::min(t1.at(i, 0), t2.at(i, 0));
    y[i] = batch.rew[i] + cfg_.discount * (1.0 - batch.done[i]) *
                              (qmin - alpha * next.log_prob[i]);
  }
  return y;
}

namespace {

nd::Tensor concat_obs_act(const nd::Tensor& obs, const nd::Tensor& act) {
  const long B = obs.rows(), no = obs.cols(), na = act.cols();
  nd::Tensor out({B, no + na});
  for (long i = 0; i < B; ++i) {
    for (long j = 0; j < no; ++j) out.at(i, j) = obs.at(i, j);
    for (long j = 0; j < na; ++j) out.at(i, no + j) = act.at(i, j);
  }
  return out;
}

}  // namespace

double SacAgent::critic_loss_value(const SacBatch& batch, std::mt19937_64& rng,
                                   double alpha_override) const {
  const nd::Tensor y = critic_targets(batch, rng, alpha_override);
  const nd::Tensor obs_act = concat_obs_act(batch.obs, batch.act);
  const nd::Tensor v1 = nd::mlp_eval(q1_, obs_act);
  const nd::Tensor v2 = nd::mlp_eval(q2_, obs_act);
  double loss = 0.0;
  const long B = batch.obs.rows();
  for (long i = 0; i < B; ++i) {
    const double d1 = v1.at(i, 0) - y[i];
    const double d2 = v2.at(i, 0) - y[i];
    loss += d1 * d1 + d2 * d2;
  }
  return loss / static_cast<double>(B);
}

double SacAgent::actor_loss_value(const SacBatch& batch, std::mt19937_64& rng,
                                  double alpha_override) const {
  const double alpha = alpha_override >= 0.0 ? alpha_override : cfg_.alpha;
  const ActionValue s = actor_sample_eval(batch.obs, rng, false);
  const nd::Tensor obs_act = concat_obs_act(batch.obs, s.action);
  const nd::Tensor v1 = nd::mlp_eval(q1_, obs_act);
  const nd::Tensor v2 = nd::mlp_eval(q2_, obs_act);
  double loss = 0.0;
  const long B = batch.obs.rows();
  for (long i = 0; i < B; ++i)
    loss += alpha * s.log_prob[i] - std::min(v1.at(i, 0), v2.at(i, 0));
  return loss / static_cast<double>(B);
}

double SacAgent::critic_step(const SacBatch& batch, std::mt19937_64& rng,
                             double alpha_override) {
  const long B = batch.obs.rows();
  const nd::Tensor y_val = critic_targets(batch, rng, alpha_override);
  nd::Tape tape;
  const nd::Var obs_act = tape.constant(concat_obs_act(batch.obs, batch.act));
  const nd::Var y = tape.reshape(tape.constant(y_val), {B, 1});
  const nd::Var v1 = critic_forward(tape, q1_, obs_act, false);
  const nd::Var v2 = critic_forward(tape, q2_, obs_act, false);
  const nd::Var loss = tape.add(tape.mean_all(tape.square(tape.sub(v1, y))),
                                tape.mean_all(tape.square(tape.sub(v2, y))));
  critic_opt_->zero_grad();
  tape.backward(loss);
  critic_opt_->step();
  return tape.value(loss)[0];
}

double SacAgent::actor_step(const SacBatch& batch, std::mt19937_64& rng,
                            UpdateStats* stats) {
  // Critics frozen; the z-part of obs is a constant by construction.
  const long B = batch.obs.rows();
  nd::Tape tape;
  const nd::Var obs = tape.constant(batch.obs);
  nd::Tensor noise({B, act_dim_});
  for (long i = 0; i < noise.numel(); ++i) noise[i] = normal(rng);
  const ActorSample s = actor_sample(tape, obs, tape.constant(std::move(noise)));
  const nd::Var obs_act = tape.concat_cols(obs, s.action);
  const nd::Var q1v = critic_forward(tape, q1_, obs_act, true);
  const nd::Var q2v = critic_forward(tape, q2_, obs_act, true);
  const nd::Var qmin = tape.reshape(tape.min_elem(q1v, q2v), {B});
  const nd::Var loss =
      tape.mean_all(tape.sub(tape.affine(s.log_prob, cfg_.alpha, 0.0), qmin));
  actor_opt_->zero_grad();
  tape.backward(loss);
  actor_opt_->step();
  if (stats) {
    double mq = 0.0, mlp = 0.0;
    for (long i = 0; i < B; ++i) {
      mq += tape.value(qmin)[i];
      mlp += tape.value(s.log_prob)[i];
    }
    stats->mean_q = mq / static_cast<double>(B);
    stats->mean_log_prob = mlp / static_cast<double>(B);
  }
  return tape.value(loss)[0];
}

SacAgent::UpdateStats SacAgent::update(const SacBatch& batch, std::mt19937_64& rng) {
  UpdateStats stats;
  stats.critic_loss = critic_step(batch, rng);
  stats.actor_loss = actor_step(batch, rng, &stats);
  polyak_step();
  return stats;
}

void SacAgent::polyak_step() {
  polyak_update(q1_.all(), q1_t_.all(), cfg_.tau);
  polyak_update(q2_.all(), q2_t_.all(), cfg_.tau);
}

void polyak_update(const std::vector<nd::Param*>& online,
                   const std::vector<nd::Param*>& target, double tau) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("polyak_update: tau must be in (0,1]");
  if (online.size() != target.size())
    throw nd::ShapeError("polyak_update: parameter list size mismatch");
  for (std::size_t i = 0; i < online.size(); ++i) {
    const nd::Tensor& src = online[i]->value;
    nd::Tensor& dst = target[i]->value;
    if (!src.same_shape(dst))
      throw nd::ShapeError("polyak_update: shape mismatch at " + online[i]->name);
    for (long j = 0; j < src.numel(); ++j)
      dst[j] = (1.0 - tau) * dst[j] + tau * src[j];
  }
}

}  // namespace bcpo::rl
