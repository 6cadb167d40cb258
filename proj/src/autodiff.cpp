#include "bcpo/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "bcpo/kernels.hpp"

namespace bcpo::nd {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Param& ParamStore::create(const std::string& name, Tensor init) {
  if (contains(name)) throw std::runtime_error("duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Param>(name, std::move(init)));
  return *params_.back();
}

Param& ParamStore::operator[](const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return *p;
  throw std::runtime_error("unknown parameter: " + name);
}

const Param& ParamStore::operator[](const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return *p;
  throw std::runtime_error("unknown parameter: " + name);
}

bool ParamStore::contains(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return true;
  return false;
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p->zero_grad();
}

Var Tape::push(Tensor value, bool needs_grad) {
  Node n;
  n.grad = Tensor(value.shape(), 0.0);
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::add_grad(Var v, const Tensor& g) {
  Node& n = node(v);
  if (!n.needs_grad) return;
  double* dst = n.grad.data();
  const double* src = g.data();
  const long m = n.grad.numel();
  for (long i = 0; i < m; ++i) dst[i] += src[i];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }
const Tensor& Tape::grad(Var v) const { return node(v).grad; }

Var Tape::constant(Tensor value) { return push(std::move(value), false); }

Var Tape::param(Param& p) {
  Var v = push(p.value, true);
  node(v).bound = &p;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows())
    throw ShapeError("matmul: incompatible shapes " + A.shape_str() + " x " + B.shape_str());
  const long m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C({m, n});
  kern::matmul(A.data(), B.data(), C.data(), m, k, n);
  Var out = push(std::move(C), node(a).needs_grad || node(b).needs_grad);
  node(out).backprop = [a, b, out, m, k, n](Tape& t) {
    const Tensor& g = t.grad(out);
    if (t.node(a).needs_grad) {
      // dA += g * B^T
      Tensor BT({n, k});
      kern::transpose(t.value(b).data(), BT.data(), k, n);
      kern::matmul_acc(g.data(), BT.data(), t.node(a).grad.data(), m, n, k);
    }
    if (t.node(b).needs_grad) {
      // dB += A^T * g
      kern::matmul_tn_acc(t.value(a).data(), g.data(), t.node(b).grad.data(), m, k, n);
    }
  };
  return out;
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_same_shape(A, B, "add");
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = A[i] + B[i];
  Var out = push(std::move(C), node(a).needs_grad || node(b).needs_grad);
  node(out).backprop = [a, b, out](Tape& t) {
    t.add_grad(a, t.grad(out));
    t.add_grad(b, t.grad(out));
  };
  return out;
}

Var Tape::sub(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_same_shape(A, B, "sub");
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = A[i] - B[i];
  Var out = push(std::move(C), node(a).needs_grad || node(b).needs_grad);
  node(out).backprop = [a, b, out](Tape& t) {
    t.add_grad(a, t.grad(out));
    if (t.node(b).needs_grad) {
      const Tensor& g = t.grad(out);
      Tensor neg(g.shape());
      for (long i = 0; i < g.numel(); ++i) neg[i] = -g[i];
      t.add_grad(b, neg);
    }
  };
  return out;
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_same_shape(A, B, "mul");
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = A[i] * B[i];
  Var out = push(std::move(C), node(a).needs_grad || node(b).needs_grad);
  node(out).backprop = [a, b, out](Tape& t) {
    const Tensor& g = t.grad(out);
    if (t.node(a).needs_grad) {
      Tensor ga(g.shape());
      const Tensor& B2 = t.value(b);
      for (long i = 0; i < g.numel(); ++i) ga[i] = g[i] * B2[i];
      t.add_grad(a, ga);
    }
    if (t.node(b).needs_grad) {
      Tensor gb(g.shape());
      const Tensor& A2 = t.value(a);
      for (long i = 0; i < g.numel(); ++i) gb[i] = g[i] * A2[i];
      t.add_grad(b, gb);
    }
  };
  return out;
}

Var Tape::add_rowvec(Var a, Var bias) {
  const Tensor& A = value(a);
  const Tensor& B = value(bias);
  if (A.rank() != 2 || B.rank() != 1 || B.cols() != A.cols())
    throw ShapeError("add_rowvec: " + A.shape_str() + " + " + B.shape_str());
  const long m = A.rows(), n = A.cols();
  Tensor C({m, n});
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < n; ++j) C.at(i, j) = A.at(i, j) + B[j];
  Var out = push(std::move(C), node(a).needs_grad || node(bias).needs_grad);
  node(out).backprop = [a, bias, out, m, n](Tape& t) {
    const Tensor& g = t.grad(out);
    t.add_grad(a, g);
    if (t.node(bias).needs_grad) {
      Tensor gb({n});
      for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j) gb[j] += g.at(i, j);
      t.add_grad(bias, gb);
    }
  };
  return out;
}

Var Tape::affine(Var a, double k, double c) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = k * A[i] + c;
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out, k](Tape& t) {
    const Tensor& g = t.grad(out);
    Tensor ga(g.shape());
    for (long i = 0; i < g.numel(); ++i) ga[i] = k * g[i];
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::relu(Var a) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = A[i] > 0.0 ? A[i] : 0.0;
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& A2 = t.value(a);
    Tensor ga(g.shape());
    for (long i = 0; i < g.numel(); ++i) ga[i] = A2[i] > 0.0 ? g[i] : 0.0;
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::gelu(Var a) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) {
    const double x = A[i];
    C[i] = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  }
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& A2 = t.value(a);
    Tensor ga(g.shape());
    for (long i = 0; i < g.numel(); ++i) {
      const double x = A2[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ga[i] = g[i] * (cdf + x * pdf);
    }
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::tanh_op(Var a) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = std::tanh(A[i]);
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& y = t.value(out);
    Tensor ga(g.shape());
    for (long i = 0; i < g.numel(); ++i) ga[i] = g[i] * (1.0 - y[i] * y[i]);
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::exp_op(Var a) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = std::exp(A[i]);
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& y = t.value(out);
    Tensor ga(g.shape());
    for (long i = 0; i < g.numel(); ++i) ga[i] = g[i] * y[i];
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::square(Var a) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = A[i] * A[i];
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& A2 = t.value(a);
    Tensor ga(g.shape());
    for (long i = 0; i < g.numel(); ++i) ga[i] = 2.0 * g[i] * A2[i];
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::softplus(Var a) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) {
    const double x = A[i];
    C[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& A2 = t.value(a);
    Tensor ga(g.shape());
    for (long i = 0; i < g.numel(); ++i) ga[i] = g[i] * sigmoid(A2[i]);
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::clamp(Var a, double lo, double hi) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = std::min(hi, std::max(lo, A[i]));
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out, lo, hi](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& A2 = t.value(a);
    Tensor ga(g.shape());
    for (long i = 0; i < g.numel(); ++i)
      ga[i] = (A2[i] >= lo && A2[i] <= hi) ? g[i] : 0.0;
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::layer_norm(Var a, Var gain, Var bias, double eps) {
  const Tensor& A = value(a);
  const Tensor& G = value(gain);
  const Tensor& B = value(bias);
  if (A.rank() != 2 || G.rank() != 1 || B.rank() != 1 || G.cols() != A.cols() ||
      B.cols() != A.cols())
    throw ShapeError("layer_norm: bad shapes");
  const long m = A.rows(), n = A.cols();
  Tensor C({m, n});
  Tensor xhat({m, n});
  Tensor inv_s({m});
  for (long i = 0; i < m; ++i) {
    double mu = 0.0;
    for (long j = 0; j < n; ++j) mu += A.at(i, j);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (long j = 0; j < n; ++j) {
      const double d = A.at(i, j) - mu;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_s[i] = is;
    for (long j = 0; j < n; ++j) {
      xhat.at(i, j) = (A.at(i, j) - mu) * is;
      C.at(i, j) = xhat.at(i, j) * G[j] + B[j];
    }
  }
  Var out = push(std::move(C),
                 node(a).needs_grad || node(gain).needs_grad || node(bias).needs_grad);
  auto xh = std::make_shared<Tensor>(std::move(xhat));
  auto is = std::make_shared<Tensor>(std::move(inv_s));
  node(out).backprop = [a, gain, bias, out, m, n, xh, is](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& G2 = t.value(gain);
    if (t.node(gain).needs_grad) {
      Tensor gg({n});
      for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j) gg[j] += g.at(i, j) * xh->at(i, j);
      t.add_grad(gain, gg);
    }
    if (t.node(bias).needs_grad) {
      Tensor gb({n});
      for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j) gb[j] += g.at(i, j);
      t.add_grad(bias, gb);
    }
    if (t.node(a).needs_grad) {
      Tensor ga({m, n});
      for (long i = 0; i < m; ++i) {
        double mean_gy = 0.0, mean_gyx = 0.0;
        for (long j = 0; j < n; ++j) {
          const double gy = g.at(i, j) * G2[j];
          mean_gy += gy;
          mean_gyx += gy * xh->at(i, j);
        }
        mean_gy /= static_cast<double>(n);
        mean_gyx /= static_cast<double>(n);
        for (long j = 0; j < n; ++j) {
          const double gy = g.at(i, j) * G2[j];
          ga.at(i, j) = ((*is)[i]) * (gy - mean_gy - xh->at(i, j) * mean_gyx);
        }
      }
      t.add_grad(a, ga);
    }
  };
  return out;
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.rows() != B.rows())
    throw ShapeError("concat_cols: " + A.shape_str() + " | " + B.shape_str());
  const long m = A.rows(), na = A.cols(), nb = B.cols();
  Tensor C({m, na + nb});
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < na; ++j) C.at(i, j) = A.at(i, j);
    for (long j = 0; j < nb; ++j) C.at(i, na + j) = B.at(i, j);
  }
  Var out = push(std::move(C), node(a).needs_grad || node(b).needs_grad);
  node(out).backprop = [a, b, out, m, na, nb](Tape& t) {
    const Tensor& g = t.grad(out);
    if (t.node(a).needs_grad) {
      Tensor ga({m, na});
      for (long i = 0; i < m; ++i)
        for (long j = 0; j < na; ++j) ga.at(i, j) = g.at(i, j);
      t.add_grad(a, ga);
    }
    if (t.node(b).needs_grad) {
      Tensor gb({m, nb});
      for (long i = 0; i < m; ++i)
        for (long j = 0; j < nb; ++j) gb.at(i, j) = g.at(i, na + j);
      t.add_grad(b, gb);
    }
  };
  return out;
}

Var Tape::concat_rows(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.cols())
    throw ShapeError("concat_rows: " + A.shape_str() + " / " + B.shape_str());
  const long ma = A.rows(), mb = B.rows(), n = A.cols();
  Tensor C({ma + mb, n});
  for (long i = 0; i < ma * n; ++i) C[i] = A[i];
  for (long i = 0; i < mb * n; ++i) C[ma * n + i] = B[i];
  Var out = push(std::move(C), node(a).needs_grad || node(b).needs_grad);
  node(out).backprop = [a, b, out, ma, mb, n](Tape& t) {
    const Tensor& g = t.grad(out);
    if (t.node(a).needs_grad) {
      Tensor ga({ma, n});
      for (long i = 0; i < ma * n; ++i) ga[i] = g[i];
      t.add_grad(a, ga);
    }
    if (t.node(b).needs_grad) {
      Tensor gb({mb, n});
      for (long i = 0; i < mb * n; ++i) gb[i] = g[ma * n + i];
      t.add_grad(b, gb);
    }
  };
  return out;
}

Var Tape::gather_rows(Var a, const std::vector<long>& rows) {
  const Tensor& A = value(a);
  if (A.rank() != 2) throw ShapeError("gather_rows: rank-2 required");
  const long m = static_cast<long>(rows.size()), n = A.cols();
  Tensor C({m, n});
  for (long r = 0; r < m; ++r) {
    const long src = rows[static_cast<std::size_t>(r)];
    if (src < 0 || src >= A.rows()) throw ShapeError("gather_rows: index out of range");
    for (long j = 0; j < n; ++j) C.at(r, j) = A.at(src, j);
  }
  Var out = push(std::move(C), node(a).needs_grad);
  auto idx = std::make_shared<std::vector<long>>(rows);
  node(out).backprop = [a, out, m, n, idx](Tape& t) {
    if (!t.node(a).needs_grad) return;
    const Tensor& g = t.grad(out);
    Tensor ga(t.value(a).shape(), 0.0);
    for (long r = 0; r < m; ++r) {
      const long src = (*idx)[static_cast<std::size_t>(r)];
      for (long j = 0; j < n; ++j) ga.at(src, j) += g.at(r, j);
    }
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::slice_cols(Var a, long lo, long hi) {
  const Tensor& A = value(a);
  if (A.rank() != 2 || lo < 0 || hi > A.cols() || lo >= hi)
    throw ShapeError("slice_cols: bad range");
  const long m = A.rows(), n = hi - lo;
  Tensor C({m, n});
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < n; ++j) C.at(i, j) = A.at(i, lo + j);
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out, m, n, lo](Tape& t) {
    if (!t.node(a).needs_grad) return;
    const Tensor& g = t.grad(out);
    Tensor ga(t.value(a).shape(), 0.0);
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < n; ++j) ga.at(i, lo + j) = g.at(i, j);
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::reshape(Var a, std::vector<long> shape) {
  const Tensor& A = value(a);
  if (Tensor::numel_of(shape) != A.numel()) throw ShapeError("reshape: numel mismatch");
  Tensor C(shape, std::vector<double>(A.data(), A.data() + A.numel()));
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out](Tape& t) {
    if (!t.node(a).needs_grad) return;
    const Tensor& g = t.grad(out);
    Tensor ga(t.value(a).shape(), std::vector<double>(g.data(), g.data() + g.numel()));
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::min_elem(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_same_shape(A, B, "min_elem");
  Tensor C(A.shape());
  for (long i = 0; i < A.numel(); ++i) C[i] = std::min(A[i], B[i]);
  Var out = push(std::move(C), node(a).needs_grad || node(b).needs_grad);
  node(out).backprop = [a, b, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& A2 = t.value(a);
    const Tensor& B2 = t.value(b);
    Tensor ga(g.shape()), gb(g.shape());
    for (long i = 0; i < g.numel(); ++i) {
      if (A2[i] <= B2[i])
        ga[i] = g[i];
      else
        gb[i] = g[i];
    }
    t.add_grad(a, ga);
    t.add_grad(b, gb);
  };
  return out;
}

Var Tape::sum_cols(Var a) {
  const Tensor& A = value(a);
  if (A.rank() != 2) throw ShapeError("sum_cols: rank-2 required");
  const long m = A.rows(), n = A.cols();
  Tensor C({m});
  for (long i = 0; i < m; ++i) {
    double s = 0.0;
    for (long j = 0; j < n; ++j) s += A.at(i, j);
    C[i] = s;
  }
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out, m, n](Tape& t) {
    if (!t.node(a).needs_grad) return;
    const Tensor& g = t.grad(out);
    Tensor ga({m, n});
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < n; ++j) ga.at(i, j) = g[i];
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::sum_all(Var a) {
  const Tensor& A = value(a);
  double s = 0.0;
  for (long i = 0; i < A.numel(); ++i) s += A[i];
  Var out = push(Tensor::scalar(s), node(a).needs_grad);
  node(out).backprop = [a, out](Tape& t) {
    if (!t.node(a).needs_grad) return;
    const double g = t.grad(out)[0];
    Tensor ga(t.value(a).shape(), g);
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::mean_all(Var a) {
  const Tensor& A = value(a);
  const double inv = 1.0 / static_cast<double>(A.numel());
  double s = 0.0;
  for (long i = 0; i < A.numel(); ++i) s += A[i];
  Var out = push(Tensor::scalar(s * inv), node(a).needs_grad);
  node(out).backprop = [a, out, inv](Tape& t) {
    if (!t.node(a).needs_grad) return;
    const double g = t.grad(out)[0] * inv;
    Tensor ga(t.value(a).shape(), g);
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::logsumexp_cols(Var a) {
  const Tensor& A = value(a);
  if (A.rank() != 2) throw ShapeError("logsumexp_cols: rank-2 required");
  const long m = A.rows(), n = A.cols();
  Tensor C({m});
  for (long i = 0; i < m; ++i) {
    double mx = A.at(i, 0);
    for (long j = 1; j < n; ++j) mx = std::max(mx, A.at(i, j));
    double s = 0.0;
    for (long j = 0; j < n; ++j) s += std::exp(A.at(i, j) - mx);
    C[i] = mx + std::log(s);
  }
  Var out = push(std::move(C), node(a).needs_grad);
  node(out).backprop = [a, out, m, n](Tape& t) {
    if (!t.node(a).needs_grad) return;
    const Tensor& g = t.grad(out);
    const Tensor& A2 = t.value(a);
    const Tensor& lse = t.value(out);
    Tensor ga({m, n});
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < n; ++j)
        ga.at(i, j) = g[i] * std::exp(A2.at(i, j) - lse[i]);
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::pick(Var a, const std::vector<long>& col) {
  const Tensor& A = value(a);
  if (A.rank() != 2 || static_cast<long>(col.size()) != A.rows())
    throw ShapeError("pick: need one column index per row");
  const long m = A.rows();
  Tensor C({m});
  for (long i = 0; i < m; ++i) {
    if (col[static_cast<std::size_t>(i)] < 0 || col[static_cast<std::size_t>(i)] >= A.cols())
      throw ShapeError("pick: column index out of range");
    C[i] = A.at(i, col[static_cast<std::size_t>(i)]);
  }
  Var out = push(std::move(C), node(a).needs_grad);
  auto cols = std::make_shared<std::vector<long>>(col);
  node(out).backprop = [a, out, m, cols](Tape& t) {
    if (!t.node(a).needs_grad) return;
    const Tensor& g = t.grad(out);
    Tensor ga(t.value(a).shape(), 0.0);
    for (long i = 0; i < m; ++i) ga.at(i, (*cols)[static_cast<std::size_t>(i)]) = g[i];
    t.add_grad(a, ga);
  };
  return out;
}

Var Tape::gaussian_reparam(Var mean, Var log_std, Var noise) {
  require_same_shape(value(mean), value(log_std), "gaussian_reparam");
  require_same_shape(value(mean), value(noise), "gaussian_reparam");
  return add(mean, mul(exp_op(log_std), noise));
}

void Tape::backward(Var scalar_loss) {
  if (value(scalar_loss).numel() != 1)
    throw ShapeError("backward: loss must be scalar, got " +
                     value(scalar_loss).shape_str());
  node(scalar_loss).grad[0] = 1.0;
  for (int i = scalar_loss.idx; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad) continue;
    if (n.backprop) n.backprop(*this);
    if (n.bound) {
      double* dst = n.bound->grad.data();
      const double* src = n.grad.data();
      for (long j = 0; j < n.grad.numel(); ++j) dst[j] += src[j];
    }
  }
}

}  // namespace bcpo::nd
