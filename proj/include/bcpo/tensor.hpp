#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcpo::nd {

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Dense row-major tensor of 64-bit reals, rank 0..2.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<long> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(numel_of(shape_), fill) {
    check_rank();
  }

  Tensor(std::vector<long> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_rank();
    if (static_cast<std::size_t>(numel_of(shape_)) != data_.size())
      throw ShapeError("tensor data length does not match shape");
  }

  static Tensor scalar(double v) { return Tensor({}, {v}); }

  static Tensor row(std::vector<double> v) {
    const long n = static_cast<long>(v.size());
    return Tensor({n}, std::move(v));
  }

  static Tensor matrix(long r, long c, std::vector<double> v) {
    return Tensor({r, c}, std::move(v));
  }

  const std::vector<long>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  long numel() const { return static_cast<long>(data_.size()); }

  long rows() const { return rank() == 2 ? shape_[0] : (rank() == 1 ? 1 : 1); }
  long cols() const {
    if (rank() == 2) return shape_[1];
    if (rank() == 1) return shape_[0];
    return 1;
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](long i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](long i) const { return data_[static_cast<std::size_t>(i)]; }

  double& at(long r, long c) { return data_[static_cast<std::size_t>(r * cols() + c)]; }
  double at(long r, long c) const { return data_[static_cast<std::size_t>(r * cols() + c)]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  static long numel_of(const std::vector<long>& shape) {
    long n = 1;
    for (long d : shape) {
      if (d < 0) throw ShapeError("negative extent");
      n *= d;
    }
    return n;
  }

 private:
  void check_rank() const {
    if (shape_.size() > 2) throw ShapeError("rank > 2 not supported");
  }

  std::vector<long> shape_;
  std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
}

inline void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite value");
}

}  // namespace bcpo::nd
