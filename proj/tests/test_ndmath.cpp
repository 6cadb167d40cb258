#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "bcpo/autodiff.hpp"
#include "bcpo/checkpoint.hpp"
#include "bcpo/kernels.hpp"
#include "bcpo/mlp.hpp"
#include "bcpo/optim.hpp"
#include "bcpo/rng.hpp"
#include "helpers.hpp"

using namespace bcpo;
using nd::Tensor;

TEST_CASE("tensor shape/data consistency") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), nd::ShapeError);
  CHECK_THROWS_AS(Tensor({1, 2, 3}), nd::ShapeError);
  Tensor t({2, 3}, 1.5);
  CHECK(t.numel() == 6);
  CHECK(t.at(1, 2) == 1.5);
}

TEST_CASE("kernels: parallel matmul matches serial bitwise") {
  std::mt19937_64 rng = make_rng(7);
  for (auto [m, k, n] : {std::tuple<long, long, long>{3, 4, 5},
                         {17, 31, 23},
                         {64, 70, 65},
                         {128, 96, 130}}) {
    std::vector<double> A(static_cast<std::size_t>(m * k)), B(static_cast<std::size_t>(k * n));
    for (auto& v : A) v = normal(rng);
    for (auto& v : B) v = normal(rng);
    std::vector<double> Cs(static_cast<std::size_t>(m * n)), Cp(Cs);
    nd::kern::serial::matmul(A.data(), B.data(), Cs.data(), m, k, n);
    nd::kern::par::matmul(A.data(), B.data(), Cp.data(), m, k, n);
    for (std::size_t i = 0; i < Cs.size(); ++i) CHECK(Cs[i] == Cp[i]);

    std::vector<double> Ds(static_cast<std::size_t>(k * n), 0.25), Dp(Ds);
    nd::kern::serial::matmul_tn_acc(A.data(), Cs.data(), Ds.data(), m, k, n);
    nd::kern::par::matmul_tn_acc(A.data(), Cp.data(), Dp.data(), m, k, n);
    for (std::size_t i = 0; i < Ds.size(); ++i) CHECK(Ds[i] == Dp[i]);
  }
}

TEST_CASE("kernels: blocked reductions agree with serial reference") {
  std::mt19937_64 rng = make_rng(11);
  std::vector<double> x(200000);
  for (auto& v : x) v = uniform(rng, 0.0, 1e-3);
  const long n = static_cast<long>(x.size());
  const double s_ref = nd::kern::serial::sum(x.data(), n);
  const double x_ref = nd::kern::serial::xlogx_sum(x.data(), n);
  CHECK(std::abs(nd::kern::par::sum(x.data(), n) - s_ref) < 1e-13 * std::abs(s_ref));
  CHECK(std::abs(nd::kern::par::xlogx_sum(x.data(), n) - x_ref) <
        1e-13 * std::abs(x_ref));
  // Dispatcher serial path uses the same block order as the parallel path.
  CHECK(nd::kern::sum(x.data(), n) == nd::kern::par::sum(x.data(), n));
}

TEST_CASE("mlp identity case") {
  nd::ParamStore store;
  std::mt19937_64 rng = make_rng(1);
  nd::MlpSpec spec{{2, 2}, nd::Activation::Identity, false};
  nd::MlpParams p = nd::make_mlp(store, "net", spec, rng);
  p.w[0]->value = Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0});
  p.b[0]->value = Tensor({2}, 0.0);
  nd::Tape tape;
  const nd::Var out = nd::mlp_forward(tape, p, tape.constant(Tensor({1, 2}, {3.0, -1.0})));
  CHECK(tape.value(out).at(0, 0) == 3.0);
  CHECK(tape.value(out).at(0, 1) == -1.0);
  // Same input through the no-grad path is bit-identical.
  const Tensor ev = nd::mlp_eval(p, Tensor({1, 2}, {3.0, -1.0}));
  CHECK(ev.at(0, 0) == 3.0);
  CHECK(ev.at(0, 1) == -1.0);
}

TEST_CASE("mlp scalar affine case: 2*(-0.5)+1 = 0") {
  nd::ParamStore store;
  std::mt19937_64 rng = make_rng(1);
  nd::MlpParams p = nd::make_mlp(store, "net", {{1, 1}, nd::Activation::Identity, false}, rng);
  p.w[0]->value = Tensor({1, 1}, {2.0});
  p.b[0]->value = Tensor({1}, {1.0});
  const Tensor out = nd::mlp_eval(p, Tensor({1, 1}, {-0.5}));
  CHECK(out.at(0, 0) == 0.0);
}

TEST_CASE("mlp rejects NaN input and mismatched widths") {
  nd::ParamStore store;
  std::mt19937_64 rng = make_rng(1);
  nd::MlpParams p = nd::make_mlp(store, "net", {{2, 3, 1}, nd::Activation::ReLU, false}, rng);
  CHECK_THROWS_AS(nd::mlp_eval(p, Tensor({1, 2}, {1.0, std::nan("")})), nd::NumericError);
  CHECK_THROWS_WITH_AS(nd::mlp_eval(p, Tensor({1, 3}, {1.0, 2.0, 3.0})),
                       doctest::Contains("layer 0"), nd::ShapeError);
}

TEST_CASE("backward: linear loss gives grad w = x") {
  nd::ParamStore store;
  nd::Param& w = store.create("w", Tensor({1, 3}, {0.3, -0.7, 2.0}));
  const Tensor x({1, 3}, {1.5, 2.5, -4.0});
  nd::Tape tape;
  const nd::Var loss = tape.sum_all(tape.mul(tape.param(w), tape.constant(x)));
  tape.backward(loss);
  for (long i = 0; i < 3; ++i) CHECK(w.grad[i] == doctest::Approx(x[i]).epsilon(1e-15));
}

TEST_CASE("backward: constant loss leaves all gradients zero") {
  nd::ParamStore store;
  nd::Param& w = store.create("w", Tensor({2, 2}, 1.0));
  nd::Tape tape;
  (void)tape.param(w);
  const nd::Var loss = tape.constant(Tensor::scalar(42.0));
  tape.backward(loss);
  for (long i = 0; i < 4; ++i) CHECK(w.grad[i] == 0.0);
}

TEST_CASE("backward: non-scalar loss is rejected; accumulation works") {
  nd::ParamStore store;
  nd::Param& w = store.create("w", Tensor({2}, 1.0));
  nd::Tape tape;
  const nd::Var v = tape.param(w);
  CHECK_THROWS_AS(tape.backward(v), nd::ShapeError);
  const nd::Var loss = tape.sum_all(v);
  tape.backward(loss);
  nd::Tape tape2;
  const nd::Var loss2 = tape2.sum_all(tape2.param(w));
  tape2.backward(loss2);
  CHECK(w.grad[0] == 2.0);  // two backward passes accumulate
}

namespace {

double mlp_loss_value(const nd::MlpParams& p, const Tensor& x) {
  nd::Tape tape;
  const nd::Var out = nd::mlp_forward(tape, p, tape.constant(x));
  const nd::Var loss = tape.mean_all(tape.square(out));
  return tape.value(loss)[0];
}

void mlp_loss_backward(const nd::MlpParams& p, const Tensor& x) {
  nd::Tape tape;
  const nd::Var out = nd::mlp_forward(tape, p, tape.constant(x));
  tape.backward(tape.mean_all(tape.square(out)));
}

}  // namespace

TEST_CASE("gradcheck: random 3-layer MLP matches finite differences") {
  std::mt19937_64 rng = make_rng(42);
  nd::ParamStore store;
  nd::MlpParams p =
      nd::make_mlp(store, "net", {{4, 6, 5, 3}, nd::Activation::Tanh, false}, rng);
  Tensor x({2, 4});
  for (long i = 0; i < x.numel(); ++i) x[i] = normal(rng);
  auto res = testutil::gradcheck(
      store.all(), [&] { return mlp_loss_value(p, x); },
      [&] { mlp_loss_backward(p, x); });
  CHECK_MESSAGE(res.max_rel_err < 1e-4, res.worst);
}

TEST_CASE("gradcheck: 100 random op-graph instances") {
  std::mt19937_64 rng = make_rng(123);
  const nd::Activation acts[] = {nd::Activation::ReLU, nd::Activation::GeLU,
                                 nd::Activation::Tanh, nd::Activation::Identity};
  for (int inst = 0; inst < 100; ++inst) {
    nd::ParamStore store;
    const long in = 2 + rand_index(rng, 3);
    const long hid = 2 + rand_index(rng, 4);
    const long out = 2 + rand_index(rng, 3);
    nd::MlpSpec spec{{in, hid, out}, acts[rand_index(rng, 4)], rand_index(rng, 2) == 0};
    nd::MlpParams p = nd::make_mlp(store, "net", spec, rng);
    Tensor x({3, in});
    for (long i = 0; i < x.numel(); ++i) x[i] = normal(rng);
    const int variant = inst % 5;
    std::vector<long> cols(3, 0);
    for (auto& c : cols) c = rand_index(rng, out);
    auto build = [&](nd::Tape& tape) {
      const nd::Var h = nd::mlp_forward(tape, p, tape.constant(x));
      switch (variant) {
        case 0: return tape.mean_all(tape.exp_op(tape.clamp(h, -2.0, 2.0)));
        case 1: return tape.mean_all(tape.logsumexp_cols(h));
        case 2: {
          const nd::Var a = tape.slice_cols(h, 0, 1);
          const nd::Var b = tape.slice_cols(h, out - 1, out);
          return tape.mean_all(tape.mul(tape.softplus(a), tape.tanh_op(b)));
        }
        case 3: {
          const nd::Var s = tape.sum_cols(tape.square(h));
          return tape.mean_all(tape.min_elem(s, tape.affine(s, 0.5, 0.1)));
        }
        default: return tape.mean_all(tape.pick(h, cols));
      }
    };
    auto loss_value = [&] {
      nd::Tape tape;
      return tape.value(build(tape))[0];
    };
    auto backward = [&] {
      nd::Tape tape;
      tape.backward(build(tape));
    };
    auto res = testutil::gradcheck(store.all(), loss_value, backward);
    CHECK_MESSAGE(res.max_rel_err < 1e-4,
                  "instance " << inst << " variant " << variant << ": " << res.worst);
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  nd::ParamStore store;
  nd::Param& w = store.create("w", Tensor({3}, {1.0, -2.0, 0.5}));
  nd::Adam opt(store.all(), {0.01});
  w.zero_grad();
  opt.step();
  CHECK(w.value[0] == 1.0);
  CHECK(w.value[1] == -2.0);
  CHECK(w.value[2] == 0.5);
}

TEST_CASE("adam: first step matches a scalar hand-rolled reference") {
  nd::ParamStore store;
  nd::Param& w = store.create("w", Tensor({1}, {0.7}));
  nd::Adam opt(store.all(), {0.05});
  w.grad[0] = 0.3;
  opt.step();
  // Scalar reference: m=0.1g, v=0.001g^2, mhat=g, vhat=g^2, step = lr*g/(|g|+eps)
  const double lr = 0.05, g = 0.3, eps = 1e-8;
  const double m = 0.1 * g, v = 0.001 * g * g;
  const double mhat = m / 0.1, vhat = v / 0.001;
  const double expect = 0.7 - lr * mhat / (std::sqrt(vhat) + eps);
  CHECK(w.value[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("adam: two steps on a quadratic reduce the loss") {
  nd::ParamStore store;
  nd::Param& w = store.create("w", Tensor({1}, {3.0}));
  nd::Adam opt(store.all(), {0.1});
  auto loss = [&] { return (w.value[0] - 1.0) * (w.value[0] - 1.0); };
  const double l0 = loss();
  for (int i = 0; i < 2; ++i) {
    w.zero_grad();
    w.grad[0] = 2.0 * (w.value[0] - 1.0);
    opt.step();
  }
  CHECK(loss() < l0);
}

TEST_CASE("adam rejects non-positive lr") {
  nd::ParamStore store;
  store.create("w", Tensor({1}, {0.0}));
  CHECK_THROWS(nd::Adam(store.all(), {0.0}));
}

TEST_CASE("gaussian_reparam") {
  nd::ParamStore store;
  nd::Param& mean = store.create("mean", Tensor({1, 2}, {0.4, -1.2}));
  nd::Param& ls = store.create("log_std", Tensor({1, 2}, {0.0, 0.3}));

  SUBCASE("zero noise returns mean") {
    nd::Tape tape;
    const nd::Var z = tape.gaussian_reparam(tape.param(mean), tape.param(ls),
                                            tape.constant(Tensor({1, 2}, 0.0)));
    CHECK(tape.value(z).at(0, 0) == 0.4);
    CHECK(tape.value(z).at(0, 1) == -1.2);
  }
  SUBCASE("unit scale adds the noise") {
    ls.value = Tensor({1, 2}, 0.0);
    nd::Tape tape;
    const nd::Var z = tape.gaussian_reparam(tape.param(mean), tape.param(ls),
                                            tape.constant(Tensor({1, 2}, {0.3, -0.1})));
    CHECK(tape.value(z).at(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(tape.value(z).at(0, 1) == doctest::Approx(-1.3).epsilon(1e-15));
  }
  SUBCASE("gradient w.r.t. log_std matches finite differences") {
    const Tensor noise({1, 2}, {0.7, -0.4});
    auto value = [&] {
      nd::Tape tape;
      const nd::Var z = tape.gaussian_reparam(tape.param(mean), tape.param(ls),
                                              tape.constant(noise));
      return tape.value(tape.mean_all(tape.square(z)))[0];
    };
    auto backward = [&] {
      nd::Tape tape;
      const nd::Var z = tape.gaussian_reparam(tape.param(mean), tape.param(ls),
                                              tape.constant(noise));
      tape.backward(tape.mean_all(tape.square(z)));
    };
    auto res = testutil::gradcheck({&mean, &ls}, value, backward);
    CHECK_MESSAGE(res.max_rel_err < 1e-4, res.worst);
  }
}

TEST_CASE("forward determinism: identical seeds give bit-identical outputs") {
  auto run = [] {
    std::mt19937_64 rng = make_rng(99);
    nd::ParamStore store;
    nd::MlpParams p =
        nd::make_mlp(store, "net", {{3, 8, 2}, nd::Activation::GeLU, true}, rng);
    Tensor x({4, 3});
    for (long i = 0; i < x.numel(); ++i) x[i] = normal(rng);
    return nd::mlp_eval(p, x);
  };
  const Tensor a = run();
  const Tensor b = run();
  for (long i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("checkpoint roundtrip preserves exact values") {
  std::mt19937_64 rng = make_rng(5);
  nd::ParamStore store;
  nd::MlpParams p = nd::make_mlp(store, "net", {{3, 4, 2}, nd::Activation::ReLU, true}, rng);
  const std::string stem = "/tmp/bcpo_test_ckpt";
  nd::save_checkpoint(store, stem);

  nd::ParamStore store2;
  std::mt19937_64 rng2 = make_rng(6);
  nd::MlpParams p2 = nd::make_mlp(store2, "net", {{3, 4, 2}, nd::Activation::ReLU, true}, rng2);
  nd::load_checkpoint(store2, stem);
  for (std::size_t i = 0; i < store.all().size(); ++i) {
    const nd::Param* a = store.all()[i];
    const nd::Param* b = store2.all()[i];
    REQUIRE(a->value.numel() == b->value.numel());
    for (long j = 0; j < a->value.numel(); ++j) CHECK(a->value[j] == b->value[j]);
  }
  std::remove((stem + ".bin").c_str());
  std::remove((stem + ".json").c_str());
}
