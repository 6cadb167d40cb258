#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcpo::info {

struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& w) : std::runtime_error(w) {}
};

struct AxisError : std::runtime_error {
  explicit AxisError(const std::string& w) : std::runtime_error(w) {}
};

struct Axis {
  std::string name;
  long size = 0;

  bool operator==(const Axis&) const = default;
};

// Dense probability mass function over a product of named finite alphabets.
// Cells are row-major in axis order. Exact methods only; the cell count is
// capped at 10^7.
class JointPMF {
 public:
  static constexpr long kMaxCells = 10'000'000;

  JointPMF(std::vector<Axis> axes, std::vector<double> probs);
  static JointPMF zeros(std::vector<Axis> axes);

  const std::vector<Axis>& axes() const { return axes_; }
  int n_axes() const { return static_cast<int>(axes_.size()); }
  long numel() const { return static_cast<long>(p_.size()); }
  int axis_index(const std::string& name) const;

  double* data() { return p_.data(); }
  const double* data() const { return p_.data(); }
  double operator[](long flat) const { return p_[static_cast<std::size_t>(flat)]; }
  double& operator[](long flat) { return p_[static_cast<std::size_t>(flat)]; }

  long flat_index(const std::vector<long>& idx) const;
  std::vector<long> unflat_index(long flat) const;

  double total() const;
  bool is_normalized(double tol = 1e-12) const;
  void require_normalized(const char* op) const;

  // Marginal over the given axes (kept in the listed order).
  JointPMF marginal(const std::vector<int>& keep) const;
  JointPMF marginal(const std::vector<std::string>& keep) const;

  // CSV: header "axis1,...,axisN,p", one row per cell.
  void to_csv(std::ostream& os) const;
  static JointPMF from_csv(std::istream& is);

 private:
  std::vector<Axis> axes_;
  std::vector<long> strides_;
  std::vector<double> p_;
};

}  // namespace bcpo::info
