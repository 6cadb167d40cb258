#include "bcpo/bcpo_loop.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "bcpo/checkpoint.hpp"
#include "bcpo/rng.hpp"

namespace bcpo::loop {

using nlohmann::ordered_json;

Arm arm_from_string(const std::string& s) {
  if (s == "bcpo") return Arm::Bcpo;
  if (s == "blind") return Arm::Blind;
  if (s == "oracle") return Arm::Oracle;
  throw std::invalid_argument("unknown arm: " + s);
}

std::string to_string(Arm a) {
  switch (a) {
    case Arm::Bcpo: return "bcpo";
    case Arm::Blind: return "blind";
    case Arm::Oracle: return "oracle";
  }
  return "?";
}

void TrainConfig::validate() const {
  ctx.validate();
  beta.validate();
  if (n_enc <= n_rl)
    throw std::invalid_argument(
        "config: inner-first rule requires n_enc > n_rl (got n_enc=" +
        std::to_string(n_enc) + ", n_rl=" + std::to_string(n_rl) + ")");
  if (d_z <= 0) throw std::invalid_argument("config: d_z must be > 0");
  if (window_k <= 0) throw std::invalid_argument("config: window k must be > 0");
  if (warmup_episodes < 0) throw std::invalid_argument("config: warmup_episodes < 0");
  if (warmup_min_steps < 0) throw std::invalid_argument("config: warmup_min_steps < 0");
  if (epochs < 0) throw std::invalid_argument("config: epochs < 0");
  if (!(gamma_rec > 0.0 && gamma_rec <= 1.0))
    throw std::invalid_argument("config: gamma_rec must be in (0,1]");
  if (buffer_capacity <= 0) throw std::invalid_argument("config: buffer capacity <= 0");
  if (n_negatives < 1) throw std::invalid_argument("config: need at least 1 negative");
  if (enc_batch < 2) throw std::invalid_argument("config: encoder batch too small");
  if (sac.batch_size < 1) throw std::invalid_argument("config: sac batch too small");
  if (eval_rollouts < 1) throw std::invalid_argument("config: eval_rollouts < 1");
}

long TrainConfig::obs_dim() const {
  switch (arm) {
    case Arm::Bcpo: return env::CartPole::kStateDim + d_z;
    case Arm::Blind: return env::CartPole::kStateDim;
    case Arm::Oracle: return env::CartPole::kStateDim + 1;
  }
  return 0;
}

Trainer::Trainer(TrainConfig cfg)
    : cfg_(std::move(cfg)),
      env_(cfg_.physics),
      sampler_(cfg_.ctx, cfg_.ctx.bins),
      buffer_(cfg_.buffer_capacity),
      env_rng_(make_rng(cfg_.seed, 1)),
      policy_rng_(make_rng(cfg_.seed, 2)),
      enc_noise_rng_(make_rng(cfg_.seed, 3)),
      sampler_rng_(make_rng(cfg_.seed, 4)),
      init_rng_(make_rng(cfg_.seed, 5)),
      batch_rng_(make_rng(cfg_.seed, 6)) {
  cfg_.validate();
  rl::SacConfig sac_cfg = cfg_.sac;
  sac_cfg.action_scale = cfg_.physics.force_max;
  if (cfg_.arm == Arm::Bcpo) {
    const long in_width =
        cfg_.window_k * (env::CartPole::kStateDim + env::CartPole::kActionDim + 2);
    encoder_ = enc::make_encoder(store_, "encoder", in_width, cfg_.enc_hidden, cfg_.d_z,
                                 cfg_.enc_activation, cfg_.enc_layer_norm, init_rng_);
    nce_critic_ = enc::make_bilinear_critic(store_, "nce_critic", cfg_.d_z);
    std::vector<nd::Param*> enc_params = encoder_->trunk.all();
    enc_params.push_back(nce_critic_->W);
    enc_opt_ = std::make_unique<nd::Adam>(enc_params, nd::AdamConfig{cfg_.enc_lr});
  }
  agent_ = std::make_unique<rl::SacAgent>(store_, cfg_.obs_dim(),
                                          env::CartPole::kActionDim, sac_cfg, init_rng_);
  if (!cfg_.out_dir.empty()) {
    std::filesystem::create_directories(cfg_.out_dir);
    metrics_ = std::make_unique<std::ofstream>(cfg_.out_dir + "/metrics.jsonl");
    if (cfg_.arm == Arm::Bcpo) {
      embeddings_ = std::make_unique<std::ofstream>(cfg_.out_dir + "/embeddings.csv");
      *embeddings_ << "step,context,bin";
      for (long i = 0; i < cfg_.d_z; ++i) *embeddings_ << ",mean_" << i;
      for (long i = 0; i < cfg_.d_z; ++i) *embeddings_ << ",log_std_" << i;
      *embeddings_ << "\n";
    }
  }
  next_eval_at_ = cfg_.eval_period_steps;
}

double Trainer::beta_now() const {
  enc::BetaSchedule s = cfg_.beta;
  if (cfg_.max_env_steps > 0) {
    s.total_steps = cfg_.max_env_steps;
    return enc::beta_at(s, env_steps_);
  }
  s.total_steps = std::max(1L, cfg_.epochs);
  return enc::beta_at(s, epoch_);
}

std::vector<double> Trainer::augmented_obs(const std::vector<double>& s,
                                           const std::vector<double>& z,
                                           double context) const {
  std::vector<double> obs = s;
  switch (cfg_.arm) {
    case Arm::Bcpo: obs.insert(obs.end(), z.begin(), z.end()); break;
    case Arm::Blind: break;
    case Arm::Oracle: obs.push_back(context); break;
  }
  return obs;
}

enc::EncodeValue Trainer::encode_window(const std::vector<double>& flat_window,
                                        bool sample) {
  return enc::encode_eval(*encoder_, flat_window, enc_noise_rng_, sample);
}

void Trainer::collect_step_records(EpisodeStats& stats, bool random_policy) {
  // Warm-up spreads contexts uniformly over the bins; the curriculum takes
  // over once every bin has a return estimate.
  const ContextSampler::Draw draw = random_policy ? sampler_.sample_uniform(sampler_rng_)
                                                  : sampler_.sample(sampler_rng_);
  stats.bin = draw.bin;
  stats.context = draw.context;
  env::CartPoleContext ctx{draw.context};
  std::vector<double> s = env_.reset(ctx, env_rng_);
  env::ObservationWindow window(cfg_.window_k, env::CartPole::kStateDim,
                                env::CartPole::kActionDim);
  while (true) {
    std::vector<double> z;
    if (cfg_.arm == Arm::Bcpo) z = encode_window(window.flatten(), true).z;
    double a;
    if (random_policy) {
      a = uniform(policy_rng_, -cfg_.physics.force_max, cfg_.physics.force_max);
    } else {
      a = agent_->act_scalar(augmented_obs(s, z, draw.context), policy_rng_, false);
    }
    const env::StepResult res = env_.step(a);
    window.push({s, {a}, res.reward});
    ReplayRecord rec;
    rec.state = s;
    rec.action = {a};
    rec.reward = res.reward;
    rec.next_state = res.next_state;
    rec.next_window = window.flatten();
    rec.context = draw.context;
    rec.done = res.terminated;
    buffer_.push(std::move(rec));
    ++env_steps_;
    ++stats.steps;
    stats.episode_return += res.reward;
    s = res.next_state;
    if (res.terminated || res.truncated) break;
  }
  sampler_.update_return(draw.bin, stats.episode_return);
}

EpisodeStats Trainer::collect_episode() {
  phase_log_.push_back("collect");
  EpisodeStats stats;
  collect_step_records(stats, /*random_policy=*/false);
  return stats;
}

bool Trainer::encoder_minibatch_step(double beta, double gamma_rec, double* mi,
                                     double* kl, double* loss_out) {
  enc::ContrastiveBatch batch;
  if (!assemble_contrastive_batch(batch, gamma_rec)) return false;
  nd::Tape tape;
  enc::EncodeResult anchor;
  const enc::InfoNceResult nce =
      enc::infonce(tape, *encoder_, *nce_critic_, batch, enc_noise_rng_, &anchor);
  const nd::Var klv = enc::kl_rate(tape, anchor.mean, anchor.log_std);
  const nd::Var loss = tape.add(tape.affine(klv, beta, 0.0),
                                tape.affine(nce.mi_estimate, -1.0, 0.0));
  const double loss_val = tape.value(loss)[0];
  if (!std::isfinite(loss_val))
    throw std::runtime_error("encoder step: non-finite loss");
  enc_opt_->zero_grad();
  tape.backward(loss);
  enc_opt_->step();
  if (mi) *mi = nce.mi_value;
  if (kl) *kl = tape.value(klv)[0];
  if (loss_out) *loss_out = loss_val;
  return true;
}

void Trainer::warmup() {
  phase_log_.push_back("warmup");
  long episodes = 0;
  while (episodes < cfg_.warmup_episodes ||
         (cfg_.warmup_episodes > 0 && env_steps_ < cfg_.warmup_min_steps)) {
    EpisodeStats stats;
    collect_step_records(stats, /*random_policy=*/true);
    ++episodes;
  }
  if (cfg_.arm == Arm::Bcpo && cfg_.warmup_episodes > 0) {
    // Pre-train the encoder on all collected warm-up data.
    std::vector<double> mi_trace;
    for (long i = 0; i < cfg_.n_enc; ++i) {
      double mi = 0.0;
      if (!encoder_minibatch_step(beta_now(), 1.0, &mi, nullptr, nullptr)) break;
      mi_trace.push_back(mi);
    }
    if (!mi_trace.empty()) {
      // Quartile averages; single-batch estimates are too noisy to compare.
      const std::size_t q = std::max<std::size_t>(1, mi_trace.size() / 4);
      double first = 0.0, last = 0.0;
      for (std::size_t i = 0; i < q; ++i) {
        first += mi_trace[i];
        last += mi_trace[mi_trace.size() - 1 - i];
      }
      warmup_mi_first_ = first / static_cast<double>(q);
      warmup_mi_last_ = last / static_cast<double>(q);
    }
  }
  warmup_done_ = true;
}

bool Trainer::assemble_contrastive_batch(enc::ContrastiveBatch& out,
                                         double gamma_rec) {
  const long slice_begin = buffer_.recency_slice_begin(gamma_rec);
  const long slice_size = buffer_.size() - slice_begin;
  if (slice_size < 2) return false;
  // Group slice records by context bin.
  std::vector<std::vector<long>> by_bin(static_cast<std::size_t>(sampler_.n_bins()));
  for (long i = slice_begin; i < buffer_.size(); ++i)
    by_bin[static_cast<std::size_t>(sampler_.bin_of(buffer_.at(i).context))].push_back(i);
  std::vector<long> eligible, nonempty;
  for (long b = 0; b < sampler_.n_bins(); ++b) {
    if (!by_bin[static_cast<std::size_t>(b)].empty()) nonempty.push_back(b);
    if (by_bin[static_cast<std::size_t>(b)].size() >= 2) eligible.push_back(b);
  }
  if (nonempty.size() < 2 || eligible.empty()) return false;

  const long w = cfg_.window_k * (env::CartPole::kStateDim + env::CartPole::kActionDim + 2);
  const long B = cfg_.enc_batch;
  out = enc::ContrastiveBatch{};
  out.anchors = nd::Tensor({B, w});
  out.positives = nd::Tensor({B, w});
  out.anchor_bins.assign(static_cast<std::size_t>(B), 0);
  out.negative_index.assign(static_cast<std::size_t>(B), {});
  last_inner_indices_.clear();

  auto copy_row = [&](nd::Tensor& dst, long row, long logical) {
    const std::vector<double>& flat = buffer_.at(logical).next_window;
    for (long j = 0; j < w; ++j) dst.at(row, j) = flat[static_cast<std::size_t>(j)];
    last_inner_indices_.push_back(logical);
  };

  // Anchors round-robin over the eligible bins; positives are distinct
  // same-bin slice records.
  for (long row = 0; row < B; ++row) {
    const long bin = eligible[static_cast<std::size_t>(row) % eligible.size()];
    const auto& mates = by_bin[static_cast<std::size_t>(bin)];
    const long anchor_idx =
        mates[static_cast<std::size_t>(rand_index(batch_rng_, static_cast<long>(mates.size())))];
    long pos_idx = anchor_idx;
    while (pos_idx == anchor_idx)
      pos_idx = mates[static_cast<std::size_t>(
          rand_index(batch_rng_, static_cast<long>(mates.size())))];
    copy_row(out.anchors, row, anchor_idx);
    copy_row(out.positives, row, pos_idx);
    out.anchor_bins[static_cast<std::size_t>(row)] = bin;
  }
  out.pool_bins = out.anchor_bins;

  // In-batch negatives: other anchors' positives from different bins. When
  // the anchors span a single bin, fall back to an extras pool drawn from the
  // remaining slice bins.
  if (eligible.size() < 2) {
    std::vector<long> others;
    for (long b : nonempty)
      if (b != eligible[0]) others.push_back(b);
    const long E = std::min<long>(B, 32);
    out.extras = nd::Tensor({E, w});
    for (long e = 0; e < E; ++e) {
      const long b = others[static_cast<std::size_t>(rand_index(
          batch_rng_, static_cast<long>(others.size())))];
      const auto& pool = by_bin[static_cast<std::size_t>(b)];
      copy_row(out.extras, e,
               pool[static_cast<std::size_t>(rand_index(batch_rng_, static_cast<long>(pool.size())))]);
      out.pool_bins.push_back(b);
    }
  }
  const long pool_size = static_cast<long>(out.pool_bins.size());
  for (long row = 0; row < B; ++row) {
    const long bin = out.anchor_bins[static_cast<std::size_t>(row)];
    auto& negs = out.negative_index[static_cast<std::size_t>(row)];
    while (static_cast<long>(negs.size()) < cfg_.n_negatives) {
      const long cand = rand_index(batch_rng_, pool_size);
      if (out.pool_bins[static_cast<std::size_t>(cand)] != bin) negs.push_back(cand);
    }
  }
  return true;
}

PhaseStats Trainer::inner_encoder_phase() {
  phase_log_.push_back("inner");
  PhaseStats stats;
  if (cfg_.arm != Arm::Bcpo) {
    stats.skipped = true;
    return stats;
  }
  const double beta = beta_now();
  for (long i = 0; i < cfg_.n_enc; ++i) {
    double mi = 0.0, kl = 0.0, loss = 0.0;
    if (!encoder_minibatch_step(beta, cfg_.gamma_rec, &mi, &kl, &loss)) {
      if (stats.steps == 0) stats.skipped = true;
      break;
    }
    ++stats.steps;
    stats.mi_estimate += mi;
    stats.kl_rate += kl;
    stats.vib_loss += loss;
  }
  if (stats.steps > 0) {
    stats.mi_estimate /= static_cast<double>(stats.steps);
    stats.kl_rate /= static_cast<double>(stats.steps);
    stats.vib_loss /= static_cast<double>(stats.steps);
  }
  return stats;
}

rl::SacBatch Trainer::assemble_sac_batch(long batch_size) {
  const long B = std::min(batch_size, buffer_.size());
  const long obs_dim = cfg_.obs_dim();
  rl::SacBatch batch;
  batch.obs = nd::Tensor({B, obs_dim});
  batch.act = nd::Tensor({B, env::CartPole::kActionDim});
  batch.rew = nd::Tensor({B});
  batch.obs_next = nd::Tensor({B, obs_dim});
  batch.done = nd::Tensor({B});
  for (long i = 0; i < B; ++i) {
    const ReplayRecord& rec = buffer_.at(rand_index(batch_rng_, buffer_.size()));
    std::vector<double> z;
    if (cfg_.arm == Arm::Bcpo) z = encode_window(rec.next_window, true).z;
    const std::vector<double> obs = augmented_obs(rec.state, z, rec.context);
    const std::vector<double> obs_next = augmented_obs(rec.next_state, z, rec.context);
    for (long j = 0; j < obs_dim; ++j) {
      batch.obs.at(i, j) = obs[static_cast<std::size_t>(j)];
      batch.obs_next.at(i, j) = obs_next[static_cast<std::size_t>(j)];
    }
    batch.act.at(i, 0) = rec.action[0];
    batch.rew[i] = rec.reward;
    batch.done[i] = rec.done ? 1.0 : 0.0;
  }
  return batch;
}

PhaseStats Trainer::outer_rl_phase() {
  phase_log_.push_back("outer");
  PhaseStats stats;
  if (buffer_.size() < 2) {
    stats.skipped = true;
    return stats;
  }
  for (long j = 0; j < cfg_.n_rl; ++j) {
    const rl::SacBatch batch = assemble_sac_batch(cfg_.sac.batch_size);
    const rl::SacAgent::UpdateStats u = agent_->update(batch, policy_rng_);
    if (!std::isfinite(u.critic_loss) || !std::isfinite(u.actor_loss))
      throw std::runtime_error("outer phase: non-finite SAC loss");
    ++stats.steps;
    stats.actor_loss += u.actor_loss;
    stats.critic_loss += u.critic_loss;
  }
  if (stats.steps > 0) {
    stats.actor_loss /= static_cast<double>(stats.steps);
    stats.critic_loss /= static_cast<double>(stats.steps);
  }
  return stats;
}

double Trainer::rollout_return(double kappa, std::uint64_t rollout_seed,
                               bool deterministic) {
  env::CartPole env(cfg_.physics);
  std::mt19937_64 rng = make_rng(cfg_.seed, rollout_seed);
  std::vector<double> s = env.reset(env::CartPoleContext{kappa}, rng);
  env::ObservationWindow window(cfg_.window_k, env::CartPole::kStateDim,
                                env::CartPole::kActionDim);
  double ret = 0.0;
  while (true) {
    std::vector<double> z;
    if (cfg_.arm == Arm::Bcpo) {
      // Deterministic eval codes: the posterior mean of the current window.
      const nd::Tensor out = nd::mlp_eval(
          encoder_->trunk, nd::Tensor({1, encoder_->in_width()}, window.flatten()));
      z.resize(static_cast<std::size_t>(cfg_.d_z));
      for (long i = 0; i < cfg_.d_z; ++i) z[static_cast<std::size_t>(i)] = out.at(0, i);
    }
    const double a =
        agent_->act_scalar(augmented_obs(s, z, kappa), rng, deterministic);
    const env::StepResult res = env.step(a);
    window.push({s, {a}, res.reward});
    ret += res.reward;
    s = res.next_state;
    if (res.terminated || res.truncated) break;
  }
  return ret;
}

EvalResult Trainer::evaluate_range(double lo, double hi, long rollouts,
                                   std::uint64_t tag) {
  std::vector<double> returns(static_cast<std::size_t>(rollouts), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < rollouts; ++r) {
    std::mt19937_64 ctx_rng = make_rng(cfg_.seed, mix64(tag) + static_cast<std::uint64_t>(r));
    const double kappa = lo == hi ? lo : uniform(ctx_rng, lo, hi);
    returns[static_cast<std::size_t>(r)] =
        rollout_return(kappa, mix64(tag + 77) + static_cast<std::uint64_t>(r), true);
  }
  EvalResult res;
  res.rollouts = rollouts;
  double sum = 0.0;
  for (double v : returns) sum += v;
  res.mean_return = sum / static_cast<double>(rollouts);
  double var = 0.0;
  for (double v : returns) var += (v - res.mean_return) * (v - res.mean_return);
  res.std_return = rollouts > 1 ? std::sqrt(var / static_cast<double>(rollouts - 1)) : 0.0;
  return res;
}

void Trainer::write_metric(const std::string& line) {
  if (metrics_) {
    *metrics_ << line << "\n";
    metrics_->flush();
  }
}

void Trainer::log_epoch_record(const EpisodeStats& ep, const PhaseStats& inner,
                               const PhaseStats& outer) {
  ordered_json j;
  j["type"] = "epoch";
  j["epoch"] = epoch_;
  j["step"] = env_steps_;
  j["beta"] = beta_now();
  j["episode_return"] = ep.episode_return;
  j["episode_steps"] = ep.steps;
  j["context"] = ep.context;
  j["bin"] = ep.bin;
  j["train_mean_return"] = have_eval_ ? ordered_json(last_train_return_) : ordered_json();
  j["test_mean_return"] = have_eval_ ? ordered_json(last_test_return_) : ordered_json();
  j["mi_estimate"] = inner.skipped ? ordered_json() : ordered_json(inner.mi_estimate);
  j["kl_rate"] = inner.skipped ? ordered_json() : ordered_json(inner.kl_rate);
  j["actor_loss"] = outer.skipped ? ordered_json() : ordered_json(outer.actor_loss);
  j["critic_loss"] = outer.skipped ? ordered_json() : ordered_json(outer.critic_loss);
  j["bin_probs"] = sampler_.probabilities();
  write_metric(j.dump());
}

void Trainer::maybe_evaluate() {
  if (cfg_.eval_period_steps <= 0 || env_steps_ < next_eval_at_) return;
  next_eval_at_ += cfg_.eval_period_steps;
  ++eval_count_;
  const EvalResult train = evaluate_range(cfg_.ctx.train_lo, cfg_.ctx.train_hi,
                                          cfg_.eval_rollouts,
                                          1000 + static_cast<std::uint64_t>(eval_count_) * 2);
  const EvalResult test = evaluate_range(cfg_.ctx.test_lo, cfg_.ctx.test_hi,
                                         cfg_.eval_rollouts,
                                         1001 + static_cast<std::uint64_t>(eval_count_) * 2);
  last_train_return_ = train.mean_return;
  last_test_return_ = test.mean_return;
  have_eval_ = true;
  ordered_json j;
  j["type"] = "eval";
  j["epoch"] = epoch_;
  j["step"] = env_steps_;
  j["beta"] = beta_now();
  j["train_mean_return"] = train.mean_return;
  j["train_std_return"] = train.std_return;
  j["test_mean_return"] = test.mean_return;
  j["test_std_return"] = test.std_return;
  j["rollouts"] = test.rollouts;
  j["bin_probs"] = sampler_.probabilities();
  write_metric(j.dump());
  dump_embeddings(env_steps_);
}

void Trainer::dump_embeddings(long step) {
  if (!embeddings_ || cfg_.arm != Arm::Bcpo) return;
  const long n = std::min<long>(128, buffer_.size());
  for (long i = 0; i < n; ++i) {
    const ReplayRecord& rec = buffer_.at(buffer_.size() - 1 - i);
    const nd::Tensor out = nd::mlp_eval(
        encoder_->trunk, nd::Tensor({1, encoder_->in_width()}, rec.next_window));
    *embeddings_ << step << "," << rec.context << "," << sampler_.bin_of(rec.context);
    char buf[32];
    for (long d = 0; d < cfg_.d_z; ++d) {
      std::snprintf(buf, sizeof buf, "%.10g", out.at(0, d));
      *embeddings_ << "," << buf;
    }
    for (long d = 0; d < cfg_.d_z; ++d) {
      const double ls = std::min(enc::kLogStdMax, std::max(enc::kLogStdMin, out.at(0, cfg_.d_z + d)));
      std::snprintf(buf, sizeof buf, "%.10g", ls);
      *embeddings_ << "," << buf;
    }
    *embeddings_ << "\n";
  }
  embeddings_->flush();
}

void Trainer::run() {
  warmup();
  for (long t = 1; t <= cfg_.epochs; ++t) {
    epoch_ = t;
    const EpisodeStats ep = collect_episode();
    const PhaseStats inner = inner_encoder_phase();
    const PhaseStats outer = outer_rl_phase();
    log_epoch_record(ep, inner, outer);
    maybe_evaluate();
    if (cfg_.max_env_steps > 0 && env_steps_ >= cfg_.max_env_steps) break;
  }
  if (!cfg_.out_dir.empty()) save_checkpoint(cfg_.out_dir + "/checkpoint_final");
}

void Trainer::save_checkpoint(const std::string& stem) const {
  nd::save_checkpoint(store_, stem);
}

void Trainer::load_checkpoint(const std::string& stem) {
  // Restores every named tensor (actor, critics, targets, encoder, NCE
  // critic). Optimizer moments restart from zero.
  nd::load_checkpoint(store_, stem);
}

}  // namespace bcpo::loop
