#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcpo/bcpo_loop.hpp"
#include "bcpo/config.hpp"
#include "bcpo/info_bounds.hpp"
#include "bcpo/info_measures.hpp"
#include "bcpo/instances.hpp"
#include "bcpo/rng.hpp"
#include "bcpo/sufficiency.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace bcpo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;

ordered_json load_resolved_or_die(const std::string& config_path,
                                  const std::vector<std::string>& overrides) {
  if (!fs::exists(config_path)) {
    std::cerr << "error: config file not found: " << config_path << "\n";
    std::exit(kExitConfig);
  }
  try {
    return cli::load_config_file(config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kExitConfig);
  }
}

loop::TrainConfig to_train_config_or_die(const ordered_json& resolved) {
  try {
    return cli::train_config_from_json(resolved);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kExitConfig);
  }
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

// Rebuild a trained policy from a run directory (manifest + checkpoint).
loop::Trainer load_run(const std::string& run_dir, std::uint64_t seed_override,
                       bool has_seed) {
  const std::string manifest_path = run_dir + "/manifest.json";
  if (!fs::exists(manifest_path)) {
    std::cerr << "error: no manifest at " << manifest_path << "\n";
    std::exit(kExitConfig);
  }
  std::ifstream in(manifest_path);
  ordered_json manifest = ordered_json::parse(in, nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("config")) {
    std::cerr << "error: malformed manifest: " << manifest_path << "\n";
    std::exit(kExitConfig);
  }
  ordered_json resolved = manifest["config"];
  resolved["out_dir"] = "";
  if (has_seed) resolved["seed"] = seed_override;
  loop::TrainConfig cfg = to_train_config_or_die(resolved);
  loop::Trainer t(cfg);
  try {
    t.load_checkpoint(run_dir + "/checkpoint_final");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kExitConfig);
  }
  return t;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              long seed, bool has_seed, const std::string& out_dir) {
  ordered_json resolved = load_resolved_or_die(config_path, overrides);
  if (has_seed) resolved["seed"] = seed;
  if (!out_dir.empty()) resolved["out_dir"] = out_dir;
  loop::TrainConfig cfg = to_train_config_or_die(resolved);
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_json(cfg.out_dir + "/manifest.json", cli::make_manifest(resolved));
  }
  loop::Trainer trainer(cfg);
  trainer.run();
  std::printf("trained %s arm for %ld epochs, %ld env steps\n",
              to_string(cfg.arm).c_str(), trainer.epochs_done(),
              trainer.total_env_steps());
  return kExitOk;
}

int cmd_evaluate(const std::string& run_dir, long rollouts, double lo, double hi,
                 long seed, bool has_seed) {
  loop::Trainer t = load_run(run_dir, static_cast<std::uint64_t>(seed), has_seed);
  if (lo == 0.0 && hi == 0.0) {
    lo = t.config().ctx.test_lo;
    hi = t.config().ctx.test_hi;
  }
  const loop::EvalResult r = t.evaluate_range(lo, hi, rollouts, 4242);
  ordered_json out{{"range", {lo, hi}},
                   {"rollouts", r.rollouts},
                   {"mean_return", r.mean_return},
                   {"std_return", r.std_return}};
  std::cout << out.dump(2) << "\n";
  write_json(run_dir + "/evaluate.json", out);
  return kExitOk;
}

int cmd_stress(const std::string& run_dir, double lo, double hi, long points,
               long rollouts, long seed, bool has_seed, std::string out_path) {
  loop::Trainer t = load_run(run_dir, static_cast<std::uint64_t>(seed), has_seed);
  if (out_path.empty()) out_path = run_dir + "/stress.csv";
  std::ofstream csv(out_path);
  csv << "kappa,mean_return,std_return,n\n";
  char buf[160];
  for (long i = 0; i < points; ++i) {
    const double kappa =
        points == 1 ? lo
                    : lo + (hi - lo) * static_cast<double>(i) /
                          static_cast<double>(points - 1);
    double sum = 0.0, sum2 = 0.0;
    for (long r = 0; r < rollouts; ++r) {
      const double ret = t.rollout_return(
          kappa,
          mix64(9000 + static_cast<std::uint64_t>(i)) + static_cast<std::uint64_t>(r),
          true);
      sum += ret;
      sum2 += ret * ret;
    }
    const double mean = sum / static_cast<double>(rollouts);
    const double var = std::max(0.0, sum2 / static_cast<double>(rollouts) - mean * mean);
    std::snprintf(buf, sizeof buf, "%.6g,%.10g,%.10g,%ld\n", kappa, mean,
                  std::sqrt(var), rollouts);
    csv << buf;
  }
  std::printf("stress sweep written to %s\n", out_path.c_str());
  return kExitOk;
}

oracle::DiscreteEncoder encoder_from_spec(const json& spec, long n_obs, long n_actions,
                                          long n_states) {
  const std::string kind = spec.is_string() ? spec.get<std::string>() : "custom";
  if (kind == "identity") return oracle::DiscreteEncoder::identity(n_obs);
  if (kind == "constant") return oracle::DiscreteEncoder::constant(n_obs);
  if (kind == "bandit_posterior") return oracle::bandit_posterior_encoder();
  if (kind == "merge_adjacent")
    return oracle::merge_adjacent_contexts_encoder(n_states, n_actions);
  if (spec.is_object() && spec.contains("codes")) {
    const std::vector<long> codes = spec.at("codes").get<std::vector<long>>();
    long n_out = 0;
    for (long z : codes) n_out = std::max(n_out, z + 1);
    return oracle::DiscreteEncoder::deterministic(codes, n_out);
  }
  throw std::invalid_argument("unknown encoder spec");
}

int cmd_certify(const std::string& instance_path, const std::string& out_path) {
  if (!fs::exists(instance_path)) {
    std::cerr << "error: instance file not found: " << instance_path << "\n";
    return kExitConfig;
  }
  std::ifstream in(instance_path);
  json spec = json::parse(in, nullptr, false);
  if (spec.is_discarded()) {
    std::cerr << "error: instance file is not valid JSON\n";
    return kExitConfig;
  }
  try {
    oracle::TabularCMDP m;
    const long k = spec.value("k", 1L);
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "bandit") {
      m = oracle::bandit_cmdp(spec.value("p", 0.8));
    } else if (kind == "chain") {
      m = oracle::chain_mdp(spec.value("contexts", 2L), spec.value("length", 3L),
                            spec.value("seed", 1UL), spec.value("slip", -1.0),
                            spec.value("discount", 0.9));
      m.horizon = spec.value("horizon", 3L);
    } else if (kind == "revealed") {
      std::mt19937_64 rng = make_rng(spec.value("seed", 1UL));
      m = oracle::revealed_context_cmdp(
          rng, spec.value("contexts", 3L), spec.value("states", 4L),
          spec.value("actions", 2L), spec.value("discount", 0.9));
    } else {
      std::cerr << "error: unknown instance kind '" << kind << "'\n";
      return kExitConfig;
    }
    long n_obs_alphabet = 1;
    for (long t = 0; t < k; ++t) n_obs_alphabet *= m.n_states * m.n_actions;
    const oracle::DiscreteEncoder enc =
        encoder_from_spec(spec.value("encoder", json("identity")), n_obs_alphabet,
                          m.n_actions, m.n_states);
    const oracle::BehaviorPolicy pol =
        oracle::BehaviorPolicy::uniform(m.n_states, m.n_actions);
    const oracle::SufficiencyReport report = oracle::certify_sufficiency(m, enc, pol, k);
    const oracle::InfoReport residual = oracle::information_residual(m, pol, enc, k);
    ordered_json out;
    out["sufficiency"] = ordered_json::parse(report.to_json());
    out["information_residual"] = ordered_json::parse(residual.to_json());
    std::cout << out.dump(2) << "\n";
    if (!out_path.empty()) write_json(out_path, out);
    return report.hierarchy_ok ? kExitOk : 1;
  } catch (const info::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_bounds(const std::string& kind, double delta, double eps, long n, long verify,
               const std::string& out_path) {
  try {
    info::BoundReport report{};
    if (kind == "fano")
      report = info::make_processing_upper(delta, n);
    else if (kind == "fano-floor")
      report = info::make_fano_lower(delta, n);
    else if (kind == "replay")
      report = info::make_replay_upper(eps, n);
    else {
      std::cerr << "error: kind must be fano, fano-floor, or replay\n";
      return kExitConfig;
    }
    ordered_json out = ordered_json::parse(report.to_json());
    if (verify > 0) {
      std::mt19937_64 rng = make_rng(1234);
      long violations = 0, checked = 0;
      for (long trial = 0; trial < verify; ++trial) {
        std::vector<double> qb(16);
        double s = 0.0;
        for (auto& v : qb) {
          v = uniform(rng, 0.01, 1.0);
          s += v;
        }
        for (auto& v : qb) v /= s;
        if (kind == "replay") {
          std::vector<double> qt(16);
          double s2 = 0.0;
          for (int i = 0; i < 16; ++i) {
            qt[static_cast<std::size_t>(i)] =
                qb[static_cast<std::size_t>(i)] * uniform(rng, 1.0 - eps, 1.0 + eps);
            s2 += qt[static_cast<std::size_t>(i)];
          }
          for (auto& v : qt) v /= s2;
          double eps_eff = 0.0;
          for (int i = 0; i < 16; ++i)
            eps_eff = std::max(eps_eff, std::abs(qt[static_cast<std::size_t>(i)] /
                                                     qb[static_cast<std::size_t>(i)] -
                                                 1.0));
          if (!(eps_eff > 0.0 && eps_eff < 1.0)) continue;
          ++checked;
          info::JointPMF jb({{"C", 4}, {"X", 4}}, qb);
          info::JointPMF jt({{"C", 4}, {"X", 4}}, qt);
          const double gap = std::abs(info::mutual_information(jt, "C", "X") -
                                      info::mutual_information(jb, "C", "X"));
          if (gap > info::replay_gap_bound(eps_eff, 4) + 1e-12) ++violations;
        } else {
          // Fano floor: every exactly computed I(C;O) respects it.
          ++checked;
          info::JointPMF j({{"C", 4}, {"O", 4}}, qb);
          const double pe = info::bayes_error(j, "C", "O");
          const double floor = info::fano_window_floor(pe, 4);
          if (info::mutual_information(j, "C", "O") < floor - 1e-12) ++violations;
        }
      }
      out["verify"] = {{"trials", checked}, {"violations", violations}};
      if (violations > 0) {
        std::cout << out.dump(2) << "\n";
        return 1;
      }
    }
    std::cout << out.dump(2) << "\n";
    if (!out_path.empty()) write_json(out_path, out);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_ib_sweep(const std::string& config_path,
                 const std::vector<std::string>& overrides,
                 const std::string& seeds_csv, const std::string& out_dir,
                 long max_steps) {
  ordered_json resolved = load_resolved_or_die(config_path, overrides);
  fs::create_directories(out_dir);
  std::vector<std::uint64_t> seeds;
  {
    std::stringstream ss(seeds_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
  }
  struct ArmSpec {
    std::string name;
    bool fixed;
    double value;
  };
  const std::vector<ArmSpec> arms{{"annealed", false, 0.0},
                                  {"fixed_0.1", true, 0.1},
                                  {"fixed_0.5", true, 0.5},
                                  {"fixed_1.0", true, 1.0}};
  std::ofstream csv(out_dir + "/sweep.csv");
  csv << "arm,seed,final_test_return,final_train_return,env_steps\n";
  ordered_json summary = ordered_json::array();
  for (const ArmSpec& arm : arms) {
    double acc = 0.0;
    for (std::uint64_t seed : seeds) {
      ordered_json cfg_json = resolved;
      cfg_json["seed"] = seed;
      cfg_json["out_dir"] = out_dir + "/" + arm.name + "_s" + std::to_string(seed);
      if (max_steps > 0) cfg_json["bcpo"]["max_env_steps"] = max_steps;
      if (arm.fixed) {
        cfg_json["encoder"]["beta"]["shape"] = "fixed";
        cfg_json["encoder"]["beta"]["start"] = arm.value;
        cfg_json["encoder"]["beta"]["end"] = arm.value;
      }
      loop::TrainConfig cfg = to_train_config_or_die(cfg_json);
      fs::create_directories(cfg.out_dir);
      write_json(cfg.out_dir + "/manifest.json", cli::make_manifest(cfg_json));
      loop::Trainer t(cfg);
      t.run();
      const loop::EvalResult test =
          t.evaluate_range(cfg.ctx.test_lo, cfg.ctx.test_hi, cfg.eval_rollouts, 31337);
      const loop::EvalResult train = t.evaluate_range(cfg.ctx.train_lo, cfg.ctx.train_hi,
                                                      cfg.eval_rollouts, 31338);
      char buf[200];
      std::snprintf(buf, sizeof buf, "%s,%llu,%.10g,%.10g,%ld\n", arm.name.c_str(),
                    static_cast<unsigned long long>(seed), test.mean_return,
                    train.mean_return, t.total_env_steps());
      csv << buf;
      csv.flush();
      acc += test.mean_return;
      std::printf("ib-sweep %s seed %llu: test return %.2f\n", arm.name.c_str(),
                  static_cast<unsigned long long>(seed), test.mean_return);
      std::fflush(stdout);
    }
    summary.push_back(
        {{"arm", arm.name},
         {"mean_final_test_return", acc / static_cast<double>(seeds.size())}});
  }
  write_json(out_dir + "/sweep_summary.json", summary);
  std::printf("ib-sweep table written to %s/sweep.csv\n", out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Contextual RL laboratory: bottlenecked policy optimization with exact "
      "information-theoretic certificates"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir, instance_path, out_path, kind;
  std::string seeds_csv = "1,2,3";
  std::vector<std::string> overrides;
  long seed = 0;
  bool has_seed = false;
  long rollouts = 50, points = 50, verify = 0, max_steps = 0;
  double lo = 0.0, hi = 0.0, delta = 0.0, eps = 0.1;
  long n_contexts = 4;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      has_seed = true;
    });
  };

  CLI::App* train = app.add_subcommand("train", "run the full training loop");
  train->add_option("--config", config_path, "experiment config (JSON)")->required();
  train->add_option("--override", overrides, "key.path=value config overrides");
  train->add_option("--out", out_dir, "output directory override");
  add_seed(train);

  CLI::App* evaluate = app.add_subcommand("evaluate", "roll out a trained checkpoint");
  evaluate->add_option("--run", run_dir, "training output directory")->required();
  evaluate->add_option("--rollouts", rollouts, "rollouts per evaluation");
  evaluate->add_option("--lo", lo, "context range low end");
  evaluate->add_option("--hi", hi, "context range high end");
  add_seed(evaluate);

  CLI::App* stress = app.add_subcommand("stress", "kappa sweep far beyond training");
  stress->add_option("--run", run_dir, "training output directory")->required();
  stress->add_option("--lo", lo, "grid low end")->default_val(0.1);
  stress->add_option("--hi", hi, "grid high end")->default_val(5.0);
  stress->add_option("--points", points, "grid points");
  stress->add_option("--rollouts", rollouts, "rollouts per grid point");
  stress->add_option("--out", out_path, "CSV path (default <run>/stress.csv)");
  add_seed(stress);

  CLI::App* certify = app.add_subcommand("certify", "exact sufficiency certificate");
  certify->add_option("--instance", instance_path, "instance spec (JSON)")->required();
  certify->add_option("--out", out_path, "report path (JSON)");

  CLI::App* bounds = app.add_subcommand("bounds", "evaluate information bounds");
  bounds->add_option("--kind", kind, "fano | fano-floor | replay")->required();
  bounds->add_option("--delta", delta, "Bayes error parameter");
  bounds->add_option("--eps", eps, "importance clip radius");
  bounds->add_option("--contexts", n_contexts, "context count N");
  bounds->add_option("--verify", verify, "brute-force trials on 4x4 alphabets");
  bounds->add_option("--out", out_path, "report path (JSON)");

  CLI::App* sweep = app.add_subcommand("ib-sweep", "beta-ablation comparison runner");
  sweep->add_option("--config", config_path, "base experiment config")->required();
  sweep->add_option("--override", overrides, "key.path=value config overrides");
  sweep->add_option("--seeds", seeds_csv, "comma-separated seeds");
  sweep->add_option("--out", out_dir, "sweep output directory")->required();
  sweep->add_option("--steps", max_steps, "env-step budget per arm");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, overrides, seed, has_seed, out_dir);
    if (evaluate->parsed()) return cmd_evaluate(run_dir, rollouts, lo, hi, seed, has_seed);
    if (stress->parsed())
      return cmd_stress(run_dir, lo, hi, points, rollouts, seed, has_seed, out_path);
    if (certify->parsed()) return cmd_certify(instance_path, out_path);
    if (bounds->parsed()) return cmd_bounds(kind, delta, eps, n_contexts, verify, out_path);
    if (sweep->parsed()) return cmd_ib_sweep(config_path, overrides, seeds_csv, out_dir, max_steps);
  } catch (const info::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
