#include "bcpo/config.hpp"

#include <fstream>

#include <omp.h>

#include "bcpo/sha256.hpp"

namespace bcpo::cli {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json default_config_json() {
  ordered_json j;
  j["environment"] = {{"kind", "scaled_cartpole"},
                      {"train_range", {0.75, 2.0}},
                      {"train_set", json::array()},
                      {"test_range", {0.5, 2.5}},
                      {"bins", 8},
                      {"physics",
                       {{"cart_mass", 1.0},
                        {"pole_mass", 0.1},
                        {"half_length", 0.5},
                        {"gravity", 9.81},
                        {"force_max", 10.0},
                        {"dt", 0.02},
                        {"angle_limit", 0.209},
                        {"track_limit", 2.4},
                        {"cart_friction", 0.0},
                        {"pole_damping", 0.0},
                        {"max_steps", 500},
                        {"reset_position", 0.1},
                        {"reset_velocity", 0.5},
                        {"reset_angle", 0.1},
                        {"reset_angle_velocity", 0.4}}}};
  j["encoder"] = {{"d_z", 2},
                  {"hidden", {256, 256, 64}},
                  {"activation", "gelu"},
                  {"layer_norm", true},
                  {"beta", {{"start", 1e-4}, {"end", 0.1}, {"shape", "linear"}}},
                  {"negatives", 7},
                  {"lr", 3e-4},
                  {"batch_size", 128}};
  j["sac"] = {{"lr", 3e-4},      {"discount", 0.99},   {"alpha", 0.1},
              {"tau", 0.005},    {"batch_size", 256},  {"hidden", {256, 256}}};
  j["bcpo"] = {{"warmup_episodes", 10},
               {"warmup_min_steps", 3000},
               {"epochs", 400},
               {"n_enc", 64},
               {"n_rl", 16},
               {"gamma_rec", 0.25},
               {"window_k", 10},
               {"max_env_steps", 0},
               {"eval_period_steps", 5000},
               {"eval_rollouts", 50},
               {"buffer_capacity", 500000},
               {"arm", "bcpo"}};
  j["seed"] = 1;
  j["out_dir"] = "";
  return j;
}

namespace {

void merge_strict(ordered_json& base, const json& user, const std::string& path) {
  if (!user.is_object())
    throw ConfigError("config: expected an object at '" + (path.empty() ? "." : path) + "'");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string here = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + here + "'");
    ordered_json& slot = base[it.key()];
    const json& val = it.value();
    if (slot.is_object()) {
      merge_strict(slot, val, here);
      continue;
    }
    // Scalars and arrays replace the default wholesale; basic type check.
    const bool num_ok = slot.is_number() && val.is_number();
    const bool same_kind = val.type() == slot.type() || num_ok ||
                           (slot.is_array() && val.is_array());
    if (!same_kind)
      throw ConfigError("config: type mismatch at '" + here + "' (expected " +
                        std::string(slot.type_name()) + ")");
    slot = val;
  }
}

}  // namespace

ordered_json resolve_config(const json& user) {
  ordered_json cfg = default_config_json();
  merge_strict(cfg, user, "");
  return cfg;
}

void apply_override(ordered_json& cfg, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key.path=value: " + spec);
  const std::string path = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    parts.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  ordered_json* slot = &cfg;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!slot->contains(parts[i]))
      throw ConfigError("override: unknown key '" + path + "'");
    slot = &(*slot)[parts[i]];
  }
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // bare strings allowed
  const bool num_ok = slot->is_number() && parsed.is_number();
  if (!(parsed.type() == slot->type() || num_ok ||
        (slot->is_array() && parsed.is_array())))
    throw ConfigError("override: type mismatch at '" + path + "'");
  *slot = parsed;
}

loop::TrainConfig train_config_from_json(const ordered_json& j) {
  loop::TrainConfig c;
  const auto& e = j.at("environment");
  c.ctx.kind = env::env_kind_from_string(e.at("kind").get<std::string>());
  c.ctx.train_lo = e.at("train_range").at(0).get<double>();
  c.ctx.train_hi = e.at("train_range").at(1).get<double>();
  c.ctx.train_set = e.at("train_set").get<std::vector<double>>();
  c.ctx.test_lo = e.at("test_range").at(0).get<double>();
  c.ctx.test_hi = e.at("test_range").at(1).get<double>();
  c.ctx.bins = e.at("bins").get<long>();
  const auto& p = e.at("physics");
  c.physics.cart_mass = p.at("cart_mass").get<double>();
  c.physics.pole_mass = p.at("pole_mass").get<double>();
  c.physics.half_length = p.at("half_length").get<double>();
  c.physics.gravity = p.at("gravity").get<double>();
  c.physics.force_max = p.at("force_max").get<double>();
  c.physics.dt = p.at("dt").get<double>();
  c.physics.angle_limit = p.at("angle_limit").get<double>();
  c.physics.track_limit = p.at("track_limit").get<double>();
  c.physics.cart_friction = p.at("cart_friction").get<double>();
  c.physics.pole_damping = p.at("pole_damping").get<double>();
  c.physics.max_steps = p.at("max_steps").get<long>();
  c.physics.reset_position = p.at("reset_position").get<double>();
  c.physics.reset_velocity = p.at("reset_velocity").get<double>();
  c.physics.reset_angle = p.at("reset_angle").get<double>();
  c.physics.reset_angle_velocity = p.at("reset_angle_velocity").get<double>();

  const auto& en = j.at("encoder");
  c.d_z = en.at("d_z").get<long>();
  c.enc_hidden = en.at("hidden").get<std::vector<long>>();
  c.enc_activation = nd::activation_from_string(en.at("activation").get<std::string>());
  c.enc_layer_norm = en.at("layer_norm").get<bool>();
  c.beta.start = en.at("beta").at("start").get<double>();
  c.beta.end = en.at("beta").at("end").get<double>();
  const std::string shape = en.at("beta").at("shape").get<std::string>();
  if (shape == "linear")
    c.beta.shape = enc::BetaSchedule::Shape::Linear;
  else if (shape == "fixed")
    c.beta.shape = enc::BetaSchedule::Shape::Fixed;
  else
    throw ConfigError("config: encoder.beta.shape must be 'linear' or 'fixed'");
  c.beta.total_steps = 1;  // rebound by the trainer to epochs or step budget
  c.n_negatives = en.at("negatives").get<long>();
  c.enc_lr = en.at("lr").get<double>();
  c.enc_batch = en.at("batch_size").get<long>();

  const auto& s = j.at("sac");
  c.sac.lr = s.at("lr").get<double>();
  c.sac.discount = s.at("discount").get<double>();
  c.sac.alpha = s.at("alpha").get<double>();
  c.sac.tau = s.at("tau").get<double>();
  c.sac.batch_size = s.at("batch_size").get<long>();
  c.sac.hidden = s.at("hidden").get<std::vector<long>>();

  const auto& b = j.at("bcpo");
  c.warmup_episodes = b.at("warmup_episodes").get<long>();
  c.warmup_min_steps = b.at("warmup_min_steps").get<long>();
  c.epochs = b.at("epochs").get<long>();
  c.n_enc = b.at("n_enc").get<long>();
  c.n_rl = b.at("n_rl").get<long>();
  c.gamma_rec = b.at("gamma_rec").get<double>();
  c.window_k = b.at("window_k").get<long>();
  c.max_env_steps = b.at("max_env_steps").get<long>();
  c.eval_period_steps = b.at("eval_period_steps").get<long>();
  c.eval_rollouts = b.at("eval_rollouts").get<long>();
  c.buffer_capacity = b.at("buffer_capacity").get<long>();
  c.arm = loop::arm_from_string(b.at("arm").get<std::string>());

  c.seed = j.at("seed").get<std::uint64_t>();
  c.out_dir = j.at("out_dir").get<std::string>();
  c.validate();
  return c;
}

ordered_json load_config_file(const std::string& path,
                              const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  json user = json::parse(in, nullptr, false);
  if (user.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
  ordered_json cfg = resolve_config(user);
  for (const std::string& ov : overrides) apply_override(cfg, ov);
  return cfg;
}

ordered_json make_manifest(const ordered_json& resolved_config) {
  ordered_json m;
  m["config"] = resolved_config;
  m["seed"] = resolved_config.at("seed");
  std::string self = "/proc/self/exe";
  try {
    m["binary_sha256"] = sha256_file_hex(self);
  } catch (const std::exception&) {
    m["binary_sha256"] = nullptr;
  }
  m["omp_max_threads"] = omp_get_max_threads();
  m["format"] = "bcpo-manifest-v1";
  return m;
}

}  // namespace bcpo::cli
