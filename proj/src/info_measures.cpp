#include "bcpo/info_measures.hpp"

#include <algorithm>
#include <cmath>

#include "bcpo/kernels.hpp"

namespace bcpo::info {

double entropy(const JointPMF& joint, const std::vector<std::string>& axes) {
  joint.require_normalized("entropy");
  const JointPMF m = joint.marginal(axes);
  return -nd::kern::xlogx_sum(m.data(), m.numel());
}

double mutual_information(const JointPMF& joint, const std::vector<std::string>& a,
                          const std::vector<std::string>& b) {
  joint.require_normalized("mutual_information");
  std::vector<std::string> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const JointPMF pab = joint.marginal(ab);
  const JointPMF pa = pab.marginal(a);
  const JointPMF pb = pab.marginal(b);
  // I = sum p(a,b) ln( p(a,b) / (p(a) p(b)) ), iterated over the AB marginal.
  const long na = pa.numel();
  const long nb = pb.numel();
  double s = 0.0;
  for (long i = 0; i < na; ++i) {
    for (long j = 0; j < nb; ++j) {
      const double pxy = pab[i * nb + j];
      if (pxy <= 0.0) continue;
      s += pxy * std::log(pxy / (pa[i] * pb[j]));
    }
  }
  return s;
}

double mutual_information(const JointPMF& joint, const std::string& a,
                          const std::string& b) {
  return mutual_information(joint, std::vector<std::string>{a},
                            std::vector<std::string>{b});
}

double conditional_mi(const JointPMF& joint, const std::vector<std::string>& a,
                      const std::vector<std::string>& b,
                      const std::vector<std::string>& given) {
  joint.require_normalized("conditional_mi");
  auto join = [](std::vector<std::string> x, const std::vector<std::string>& y) {
    x.insert(x.end(), y.begin(), y.end());
    return x;
  };
  // I(A;B|G) = H(A,G) + H(B,G) - H(G) - H(A,B,G)
  return entropy(joint, join(a, given)) + entropy(joint, join(b, given)) -
         entropy(joint, given) - entropy(joint, join(join(a, b), given));
}

double conditional_mi(const JointPMF& joint, const std::string& a, const std::string& b,
                      const std::string& given) {
  return conditional_mi(joint, std::vector<std::string>{a}, std::vector<std::string>{b},
                        std::vector<std::string>{given});
}

double bayes_error(const JointPMF& joint, const std::string& label_axis,
                   const std::vector<std::string>& obs_axes) {
  joint.require_normalized("bayes_error");
  std::vector<std::string> keep{label_axis};
  keep.insert(keep.end(), obs_axes.begin(), obs_axes.end());
  const JointPMF m = joint.marginal(keep);
  const long nl = m.axes()[0].size;
  const long nobs = m.numel() / nl;
  double correct = 0.0;
  for (long o = 0; o < nobs; ++o) {
    double best = 0.0;
    for (long l = 0; l < nl; ++l) best = std::max(best, m[l * nobs + o]);
    correct += best;
  }
  return 1.0 - correct;
}

double bayes_error(const JointPMF& joint, const std::string& label_axis,
                   const std::string& obs_axis) {
  return bayes_error(joint, label_axis, std::vector<std::string>{obs_axis});
}

double tv_distance(const JointPMF& p, const JointPMF& q) {
  if (p.axes() != q.axes()) throw AxisError("tv_distance: axis mismatch");
  double s = 0.0;
  for (long i = 0; i < p.numel(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

ProcessingGap processing_gap(const JointPMF& traj_joint, long k) {
  traj_joint.require_normalized("processing_gap");
  const long T = traj_joint.n_axes() - 1;
  if (T < 1) throw AxisError("processing_gap: need [context, X1..XT] axes");
  if (k < 1 || k > T) throw AxisError("processing_gap: require 1 <= k <= T");
  const std::string c = traj_joint.axes()[0].name;
  auto x_axes = [&](long hi) {
    std::vector<std::string> v;
    for (long t = 1; t <= hi; ++t)
      v.push_back(traj_joint.axes()[static_cast<std::size_t>(t)].name);
    return v;
  };
  ProcessingGap out;
  const double i_full = mutual_information(traj_joint, {c}, x_axes(T));
  const double i_window = mutual_information(traj_joint, {c}, x_axes(k));
  out.gap = i_full - i_window;
  for (long t = k + 1; t <= T; ++t) {
    const std::vector<std::string> xt{
        traj_joint.axes()[static_cast<std::size_t>(t)].name};
    out.tail_terms.push_back(conditional_mi(traj_joint, {c}, xt, x_axes(t - 1)));
    out.tail_sum += out.tail_terms.back();
  }
  if (std::abs(out.gap - out.tail_sum) > 1e-10)
    throw AxisError("processing_gap: direct difference and tail sum disagree");
  return out;
}

}  // namespace bcpo::info
