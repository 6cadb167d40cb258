#include "bcpo/joint_pmf.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "bcpo/kernels.hpp"

namespace bcpo::info {

namespace {
long cells_of(const std::vector<Axis>& axes) {
  long n = 1;
  for (const Axis& a : axes) {
    if (a.size <= 0) throw AxisError("axis " + a.name + " has non-positive size");
    if (n > JointPMF::kMaxCells / a.size)
      throw CapacityError("joint pmf exceeds the 10^7 dense-cell cap");
    n *= a.size;
  }
  return n;
}
}  // namespace

JointPMF::JointPMF(std::vector<Axis> axes, std::vector<double> probs)
    : axes_(std::move(axes)), p_(std::move(probs)) {
  const long n = cells_of(axes_);
  if (n != static_cast<long>(p_.size()))
    throw AxisError("joint pmf: cell count mismatch");
  for (double v : p_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw AxisError("joint pmf: probabilities must be finite and >= 0");
  strides_.assign(axes_.size(), 1);
  for (int i = static_cast<int>(axes_.size()) - 2; i >= 0; --i)
    strides_[static_cast<std::size_t>(i)] =
        strides_[static_cast<std::size_t>(i) + 1] * axes_[static_cast<std::size_t>(i) + 1].size;
}

JointPMF JointPMF::zeros(std::vector<Axis> axes) {
  const long n = cells_of(axes);
  return JointPMF(std::move(axes), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

int JointPMF::axis_index(const std::string& name) const {
  for (int i = 0; i < n_axes(); ++i)
    if (axes_[static_cast<std::size_t>(i)].name == name) return i;
  throw AxisError("unknown axis: " + name);
}

long JointPMF::flat_index(const std::vector<long>& idx) const {
  if (idx.size() != axes_.size()) throw AxisError("flat_index: rank mismatch");
  long f = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= axes_[i].size) throw AxisError("flat_index: out of range");
    f += idx[i] * strides_[i];
  }
  return f;
}

std::vector<long> JointPMF::unflat_index(long flat) const {
  std::vector<long> idx(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    idx[i] = flat / strides_[i];
    flat -= idx[i] * strides_[i];
  }
  return idx;
}

double JointPMF::total() const { return nd::kern::sum(p_.data(), numel()); }

bool JointPMF::is_normalized(double tol) const { return std::abs(total() - 1.0) <= tol; }

void JointPMF::require_normalized(const char* op) const {
  if (!is_normalized())
    throw AxisError(std::string(op) + ": joint pmf is not normalized (sum = " +
                    std::to_string(total()) + ")");
}

JointPMF JointPMF::marginal(const std::vector<int>& keep) const {
  std::vector<Axis> out_axes;
  for (int k : keep) {
    if (k < 0 || k >= n_axes()) throw AxisError("marginal: bad axis index");
    out_axes.push_back(axes_[static_cast<std::size_t>(k)]);
  }
  JointPMF out = zeros(out_axes);
  const long n = numel();
  std::vector<long> idx(axes_.size());
  for (long f = 0; f < n; ++f) {
    long rem = f;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      idx[i] = rem / strides_[i];
      rem -= idx[i] * strides_[i];
    }
    long of = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      of = of * out_axes[i].size + idx[static_cast<std::size_t>(keep[i])];
    }
    out[of] += p_[static_cast<std::size_t>(f)];
  }
  return out;
}

JointPMF JointPMF::marginal(const std::vector<std::string>& keep) const {
  std::vector<int> idx;
  idx.reserve(keep.size());
  for (const std::string& n : keep) idx.push_back(axis_index(n));
  return marginal(idx);
}

void JointPMF::to_csv(std::ostream& os) const {
  for (int i = 0; i < n_axes(); ++i) os << axes_[static_cast<std::size_t>(i)].name << ",";
  os << "p\n";
  char buf[64];
  for (long f = 0; f < numel(); ++f) {
    const std::vector<long> idx = unflat_index(f);
    for (long v : idx) os << v << ",";
    std::snprintf(buf, sizeof buf, "%.17g", p_[static_cast<std::size_t>(f)]);
    os << buf << "\n";
  }
}

JointPMF JointPMF::from_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw AxisError("from_csv: empty input");
  std::vector<std::string> names;
  {
    std::stringstream ss(header);
    std::string tok;
    while (std::getline(ss, tok, ',')) names.push_back(tok);
  }
  if (names.empty() || names.back() != "p")
    throw AxisError("from_csv: header must end with 'p'");
  names.pop_back();
  std::vector<std::vector<long>> rows;
  std::vector<double> probs;
  std::vector<long> sizes(names.size(), 0);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<long> idx;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!std::getline(ss, tok, ',')) throw AxisError("from_csv: short row");
      idx.push_back(std::stol(tok));
      sizes[i] = std::max(sizes[i], idx.back() + 1);
    }
    if (!std::getline(ss, tok, ',')) throw AxisError("from_csv: missing probability");
    probs.push_back(std::stod(tok));
    rows.push_back(std::move(idx));
  }
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < names.size(); ++i) axes.push_back({names[i], sizes[i]});
  JointPMF out = zeros(axes);
  for (std::size_t r = 0; r < rows.size(); ++r) out[out.flat_index(rows[r])] = probs[r];
  return out;
}

}  // namespace bcpo::info
