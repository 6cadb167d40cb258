#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bcpo/cmdp.hpp"
#include "bcpo/info_bounds.hpp"
#include "bcpo/info_measures.hpp"
#include "bcpo/joint_pmf.hpp"
#include "bcpo/rng.hpp"
#include "mpfr_oracle.hpp"

using namespace bcpo;
using info::Axis;
using info::JointPMF;

namespace {

constexpr double kLn2 = 0.6931471805599453;

JointPMF random_joint(std::mt19937_64& rng, std::vector<Axis> axes) {
  JointPMF j = JointPMF::zeros(std::move(axes));
  double sum = 0.0;
  for (long i = 0; i < j.numel(); ++i) {
    j[i] = uniform(rng, 0.0, 1.0);
    sum += j[i];
  }
  for (long i = 0; i < j.numel(); ++i) j[i] /= sum;
  return j;
}

// Joint over (C, O, Z) for a Markov chain C -> O -> Z with random channels.
JointPMF random_chain(std::mt19937_64& rng, long nc, long no, long nz) {
  std::vector<double> pc(static_cast<std::size_t>(nc));
  double s = 0.0;
  for (auto& v : pc) {
    v = uniform(rng, 0.05, 1.0);
    s += v;
  }
  for (auto& v : pc) v /= s;
  auto random_rows = [&](long r, long c) {
    std::vector<double> m(static_cast<std::size_t>(r * c));
    for (long i = 0; i < r; ++i) {
      double rs = 0.0;
      for (long j = 0; j < c; ++j) {
        m[static_cast<std::size_t>(i * c + j)] = uniform(rng, 0.01, 1.0);
        rs += m[static_cast<std::size_t>(i * c + j)];
      }
      for (long j = 0; j < c; ++j) m[static_cast<std::size_t>(i * c + j)] /= rs;
    }
    return m;
  };
  const std::vector<double> p_o_c = random_rows(nc, no);
  const std::vector<double> p_z_o = random_rows(no, nz);
  JointPMF j = JointPMF::zeros({{"C", nc}, {"O", no}, {"Z", nz}});
  for (long c = 0; c < nc; ++c)
    for (long o = 0; o < no; ++o)
      for (long z = 0; z < nz; ++z)
        j[(c * no + o) * nz + z] = pc[static_cast<std::size_t>(c)] *
                                   p_o_c[static_cast<std::size_t>(c * no + o)] *
                                   p_z_o[static_cast<std::size_t>(o * nz + z)];
  return j;
}

JointPMF bandit_window_joint(double p) {
  // p(c, o) for the two-context bandit channel with uniform contexts.
  return JointPMF({{"C", 2}, {"O", 2}},
                  {0.5 * (1.0 - p), 0.5 * p,    // c0: o+, o-
                   0.5 * p, 0.5 * (1.0 - p)});  // c1
}

}  // namespace

TEST_CASE("mutual information: product, copy, bandit vs MPFR") {
  JointPMF indep({{"A", 2}, {"B", 3}},
                 {0.5 / 3, 0.5 / 3, 0.5 / 3, 0.5 / 3, 0.5 / 3, 0.5 / 3});
  CHECK(std::abs(info::mutual_information(indep, "A", "B")) < 1e-14);

  JointPMF copy({{"C", 2}, {"Z", 2}}, {0.5, 0.0, 0.0, 0.5});
  CHECK(info::mutual_information(copy, "C", "Z") == doctest::Approx(kLn2).epsilon(1e-12));

  const JointPMF bandit = bandit_window_joint(0.8);
  const double mine = info::mutual_information(bandit, "C", "O");
  const double oracle = testutil::mpfr_mutual_information(
      {bandit[0], bandit[1], bandit[2], bandit[3]}, 2, 2);
  CHECK(std::abs(mine - oracle) < 1e-12);
}

TEST_CASE("mutual information rejects unnormalized joints") {
  JointPMF half({{"A", 2}, {"B", 1}}, {0.3, 0.3});
  CHECK_THROWS_AS(info::mutual_information(half, "A", "B"), info::AxisError);
}

TEST_CASE("conditional MI: DPI, bijection sufficiency, chain rule") {
  std::mt19937_64 rng = make_rng(31);
  for (int i = 0; i < 30; ++i) {
    const JointPMF chain = random_chain(rng, 3, 4, 3);
    const double i_co = info::mutual_information(chain, "C", "O");
    const double i_cz = info::mutual_information(chain, "C", "Z");
    const double i_co_z = info::conditional_mi(chain, "C", "O", "Z");
    CHECK(i_cz <= i_co + 1e-12);   // data-processing inequality
    CHECK(i_co_z >= -1e-12);
  }

  // Z a bijective relabeling of O: I(C;O|Z) = 0.
  JointPMF bij = JointPMF::zeros({{"C", 2}, {"O", 3}, {"Z", 3}});
  const long relabel[3] = {2, 0, 1};
  std::mt19937_64 rng2 = make_rng(32);
  double sum = 0.0;
  for (long c = 0; c < 2; ++c)
    for (long o = 0; o < 3; ++o) {
      const double v = uniform(rng2, 0.01, 1.0);
      bij[(c * 3 + o) * 3 + relabel[o]] = v;
      sum += v;
    }
  for (long i = 0; i < bij.numel(); ++i) bij[i] /= sum;
  CHECK(std::abs(info::conditional_mi(bij, "C", "O", "Z")) < 1e-12);
  CHECK(std::abs(info::mutual_information(bij, std::vector<std::string>{"C"},
                                          std::vector<std::string>{"O"}) -
                 info::mutual_information(bij, std::vector<std::string>{"C"},
                                          std::vector<std::string>{"Z"})) < 1e-12);

  using Names = std::vector<std::string>;
  for (int i = 0; i < 20; ++i) {
    const JointPMF j = random_joint(rng, {{"A", 3}, {"B", 3}, {"G", 3}});
    const double lhs = info::mutual_information(j, Names{"A"}, Names{"B", "G"});
    const double rhs = info::mutual_information(j, Names{"A"}, Names{"G"}) +
                       info::conditional_mi(j, Names{"A"}, Names{"B"}, Names{"G"});
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("bayes error") {
  JointPMF det({{"C", 2}, {"O", 2}}, {0.5, 0.0, 0.0, 0.5});
  CHECK(info::bayes_error(det, "C", "O") == doctest::Approx(0.0).epsilon(1e-15));

  JointPMF indep({{"C", 2}, {"O", 2}}, {0.25, 0.25, 0.25, 0.25});
  CHECK(info::bayes_error(indep, "C", "O") == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(info::bayes_error(bandit_window_joint(0.8), "C", "O") ==
        doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("fano processing bound") {
  CHECK(info::fano_processing_bound(0.0, 4) == 0.0);
  CHECK(info::fano_processing_bound(0.5, 2) == doctest::Approx(kLn2).epsilon(1e-15));
  const double mine = info::fano_processing_bound(0.1, 4);
  CHECK(std::abs(mine - testutil::mpfr_fano_processing(0.1, 4)) < 1e-15);
  CHECK_THROWS(info::fano_processing_bound(-0.1, 4));
  CHECK_THROWS(info::fano_processing_bound(1.1, 4));
  CHECK_THROWS(info::fano_processing_bound(0.1, 1));
}

TEST_CASE("fano window floor") {
  CHECK(info::fano_window_floor(1.0, 4) == 0.0);
  CHECK(info::fano_window_floor(0.0, 2) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(info::fano_window_floor(0.0, 8) ==
        doctest::Approx(std::log(8.0) - kLn2).epsilon(1e-15));
  CHECK(info::fano_window_floor(0.0, 8) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("replay gap bound: formula and continuity") {
  CHECK(info::replay_gap_bound(1e-9, 4) < 1e-7);
  const double expect = 0.1 * std::log(3.0) + testutil::mpfr_binary_entropy(0.1);
  CHECK(info::replay_gap_bound(0.2, 4) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS(info::replay_gap_bound(0.0, 4));
  CHECK_THROWS(info::replay_gap_bound(1.0, 4));
  CHECK_THROWS(info::replay_gap_bound(0.2, 2));
}

TEST_CASE("replay gap bound: brute-force enumeration on 4x4 alphabets") {
  std::mt19937_64 rng = make_rng(77);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double eps_target = uniform(rng, 0.01, 0.3);
    JointPMF qb = random_joint(rng, {{"C", 4}, {"X", 4}});
    JointPMF qt = qb;
    double sum = 0.0;
    for (long i = 0; i < qt.numel(); ++i) {
      qt[i] = qb[i] * uniform(rng, 1.0 - eps_target, 1.0 + eps_target);
      sum += qt[i];
    }
    for (long i = 0; i < qt.numel(); ++i) qt[i] /= sum;
    double eps_eff = 0.0;
    for (long i = 0; i < qt.numel(); ++i)
      eps_eff = std::max(eps_eff, std::abs(qt[i] / qb[i] - 1.0));
    if (!(eps_eff > 0.0 && eps_eff < 1.0)) continue;
    ++checked;
    const double gap = std::abs(info::mutual_information(qt, "C", "X") -
                                info::mutual_information(qb, "C", "X"));
    CHECK(gap <= info::replay_gap_bound(eps_eff, 4) + 1e-12);
    CHECK(info::tv_distance(qt, qb) <= 0.5 * eps_eff + 1e-12);
  }
  CHECK(checked > 900);
}

TEST_CASE("tv distance") {
  JointPMF p({{"A", 2}}, {0.3, 0.7});
  CHECK(info::tv_distance(p, p) == 0.0);
  JointPMF a({{"A", 2}}, {1.0, 0.0});
  JointPMF b({{"A", 2}}, {0.0, 1.0});
  CHECK(info::tv_distance(a, b) == 1.0);
  JointPMF c({{"B", 2}}, {0.5, 0.5});
  CHECK_THROWS_AS(info::tv_distance(a, c), info::AxisError);
}

TEST_CASE("processing gap on an enumerated chain CMDP") {
  const oracle::TabularCMDP m = oracle::chain_mdp(2, 3, 13);
  const oracle::BehaviorPolicy pol = oracle::BehaviorPolicy::uniform(3, 2);
  const oracle::TrajectoryLaw law = oracle::enumerate_trajectories(m, pol, 3);

  const info::ProcessingGap g3 = info::processing_gap(law.joint, 3);
  CHECK(std::abs(g3.gap) < 1e-12);
  CHECK(g3.tail_terms.empty());

  for (long k = 1; k <= 2; ++k) {
    const info::ProcessingGap g = info::processing_gap(law.joint, k);
    std::vector<std::string> window_axes, all_axes;
    for (long t = 1; t <= 3; ++t) {
      all_axes.push_back("X" + std::to_string(t));
      if (t <= k) window_axes.push_back("X" + std::to_string(t));
    }
    const double direct = info::mutual_information(law.joint, {"C"}, all_axes) -
                          info::mutual_information(law.joint, {"C"}, window_axes);
    CHECK(std::abs(g.gap - direct) < 1e-12);
    CHECK(std::abs(g.gap - g.tail_sum) < 1e-10);
    CHECK(g.gap >= -1e-12);
  }

  // Identical kernels across contexts: no context information anywhere.
  const oracle::TabularCMDP same = oracle::chain_mdp(2, 3, 13, 0.2);
  oracle::TabularCMDP same_rewardless = same;
  for (auto& r : same_rewardless.reward) r = 0.0;  // rewards do not enter the law
  const oracle::TrajectoryLaw law2 = oracle::enumerate_trajectories(same, pol, 3);
  for (long k = 1; k <= 3; ++k)
    CHECK(std::abs(info::processing_gap(law2.joint, k).gap) < 1e-12);
}

TEST_CASE("entropy and MI non-negativity on random joints") {
  std::mt19937_64 rng = make_rng(55);
  for (int i = 0; i < 50; ++i) {
    const JointPMF j = random_joint(rng, {{"A", 3}, {"B", 4}});
    CHECK(info::entropy(j, {"A"}) >= -1e-12);
    CHECK(info::entropy(j, {"A", "B"}) >= -1e-12);
    CHECK(info::mutual_information(j, "A", "B") >= -1e-12);
  }
}

TEST_CASE("sufficient-statistic merges preserve Bayes error exactly") {
  // Observation symbols 1 and 2 carry identical posteriors by construction,
  // so merging them is a deterministic sufficient statistic of O.
  const double a = 0.2, b = 0.3;
  JointPMF j({{"C", 2}, {"O", 3}},
             {0.5 * (1 - a - a / 2), 0.5 * a, 0.5 * a / 2,
              0.5 * (1 - b - b / 2), 0.5 * b, 0.5 * b / 2});
  j.require_normalized("test");
  JointPMF merged = JointPMF::zeros({{"C", 2}, {"Z", 2}});
  for (long c = 0; c < 2; ++c) {
    merged[c * 2 + 0] = j[c * 3 + 0];
    merged[c * 2 + 1] = j[c * 3 + 1] + j[c * 3 + 2];
  }
  CHECK(info::bayes_error(j, "C", "O") ==
        doctest::Approx(info::bayes_error(merged, "C", "Z")).epsilon(1e-15));
  // And the merge loses no mutual information.
  CHECK(std::abs(info::mutual_information(j, "C", "O") -
                 info::mutual_information(merged, "C", "Z")) < 1e-12);
}

TEST_CASE("Fano error floor under discarded information (calibrated delta)") {
  // With delta_f := max(0, 1 - (I(C;O)+ln2)/ln N), discarding eps nats forces
  // P_e(Z) >= delta_f + eps/ln N. Enumerated over random channels and merges.
  std::mt19937_64 rng = make_rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    const long nc = 3 + rand_index(rng, 2);  // 3 or 4 contexts
    const long no = 4 + rand_index(rng, 3);
    JointPMF j = random_joint(rng, {{"C", nc}, {"O", no}});
    // Uniformize the context marginal (the floor assumes uniform C).
    std::vector<double> pc(static_cast<std::size_t>(nc), 0.0);
    for (long c = 0; c < nc; ++c)
      for (long o = 0; o < no; ++o) pc[static_cast<std::size_t>(c)] += j[c * no + o];
    for (long c = 0; c < nc; ++c)
      for (long o = 0; o < no; ++o)
        j[c * no + o] *= (1.0 / static_cast<double>(nc)) / pc[static_cast<std::size_t>(c)];
    const long nz = 2;
    std::vector<long> merge(static_cast<std::size_t>(no));
    for (auto& z : merge) z = rand_index(rng, nz);
    JointPMF m = JointPMF::zeros({{"C", nc}, {"Z", nz}});
    for (long c = 0; c < nc; ++c)
      for (long o = 0; o < no; ++o)
        m[c * nz + merge[static_cast<std::size_t>(o)]] += j[c * no + o];

    const double ln_n = std::log(static_cast<double>(nc));
    const double i_co = info::mutual_information(j, "C", "O");
    const double i_cz = info::mutual_information(m, "C", "Z");
    const double eps = i_co - i_cz;
    const double delta_f = std::max(0.0, 1.0 - (i_co + kLn2) / ln_n);
    const double pe_z = info::bayes_error(m, "C", "Z");
    CHECK(pe_z >= delta_f + eps / ln_n - 1e-9);
  }
}

TEST_CASE("joint pmf: csv roundtrip and capacity cap") {
  std::mt19937_64 rng = make_rng(8);
  const JointPMF j = random_joint(rng, {{"C", 2}, {"O", 3}});
  std::stringstream ss;
  j.to_csv(ss);
  const JointPMF back = JointPMF::from_csv(ss);
  REQUIRE(back.numel() == j.numel());
  for (long i = 0; i < j.numel(); ++i) CHECK(back[i] == j[i]);

  CHECK_THROWS_AS(JointPMF::zeros({{"A", 5000}, {"B", 5000}}), info::CapacityError);
}

TEST_CASE("bound reports carry kind, value, inputs") {
  const info::BoundReport r = info::make_replay_upper(0.2, 4);
  CHECK(r.kind == info::BoundReport::Kind::ReplayUpper);
  CHECK(r.value >= 0.0);
  CHECK(r.inputs.at("eps") == 0.2);
  CHECK(r.to_json().find("ReplayUpper") != std::string::npos);
  CHECK(info::make_fano_lower(0.0, 8).value ==
        doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(info::make_processing_upper(0.0, 8).value == 0.0);
}
