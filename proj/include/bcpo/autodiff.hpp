#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bcpo/tensor.hpp"

namespace bcpo::nd {

// Named leaf tensor with a persistent gradient slot. Lives outside any tape;
// tapes bind to it for the duration of one forward/backward pass.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  explicit Param(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape(), 0.0) {}

  void zero_grad() { std::fill(grad.data(), grad.data() + grad.numel(), 0.0); }
};

// Ordered registry of parameters. Iteration order is creation order, which
// keeps optimizer updates and checkpoints deterministic.
class ParamStore {
 public:
  Param& create(const std::string& name, Tensor init);
  Param& operator[](const std::string& name);
  const Param& operator[](const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Param*> all();
  std::vector<const Param*> all() const;
  std::size_t size() const { return params_.size(); }

  void zero_grads();

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

// Handle into a tape.
struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

// Define-by-run reverse-mode tape. Nodes are appended in evaluation order,
// so the reverse sweep visits them in exact reverse topological order.
class Tape {
 public:
  Var constant(Tensor value);
  Var param(Param& p);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var add_rowvec(Var a, Var bias);        // [m,n] + [n]
  Var affine(Var a, double k, double c);  // k*a + c elementwise
  Var relu(Var a);
  Var gelu(Var a);
  Var tanh_op(Var a);
  Var exp_op(Var a);
  Var square(Var a);
  Var softplus(Var a);
  Var clamp(Var a, double lo, double hi);  // zero gradient outside [lo, hi]
  Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);
  Var concat_cols(Var a, Var b);
  Var concat_rows(Var a, Var b);
  Var slice_cols(Var a, long lo, long hi);
  // out[r, :] = a[rows[r], :]; backward scatter-adds into the source rows.
  Var gather_rows(Var a, const std::vector<long>& rows);
  Var reshape(Var a, std::vector<long> shape);
  Var min_elem(Var a, Var b);
  Var sum_cols(Var a);     // [m,n] -> [m]
  Var mean_all(Var a);     // -> scalar
  Var sum_all(Var a);      // -> scalar
  Var logsumexp_cols(Var a);               // [m,n] -> [m]
  Var pick(Var a, const std::vector<long>& col);  // out[i] = a[i, col[i]]

  // mean + exp(log_std) .* noise, differentiable in mean and log_std
  Var gaussian_reparam(Var mean, Var log_std, Var noise);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse, accumulating
  // into bound Param grads. Throws if the loss is not a scalar.
  void backward(Var scalar_loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    Param* bound = nullptr;
    std::function<void(Tape&)> backprop;  // pushes this node's grad to parents
  };

  Var push(Tensor value, bool needs_grad);
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.idx)]; }
  const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)]; }
  void add_grad(Var v, const Tensor& g);

  std::vector<Node> nodes_;
};

}  // namespace bcpo::nd
