#pragma once

#include <vector>

#include "bcpo/joint_pmf.hpp"

namespace bcpo::info {

// All quantities in nats; 0 log 0 := 0 throughout.

double entropy(const JointPMF& joint, const std::vector<std::string>& axes);

double mutual_information(const JointPMF& joint, const std::vector<std::string>& a,
                          const std::vector<std::string>& b);
double mutual_information(const JointPMF& joint, const std::string& a,
                          const std::string& b);

double conditional_mi(const JointPMF& joint, const std::vector<std::string>& a,
                      const std::vector<std::string>& b,
                      const std::vector<std::string>& given);
double conditional_mi(const JointPMF& joint, const std::string& a, const std::string& b,
                      const std::string& given);

// P_e = 1 - E_obs[max_label p(label|obs)]; zero-probability observations are
// excluded from the expectation.
double bayes_error(const JointPMF& joint, const std::string& label_axis,
                   const std::string& obs_axis);
double bayes_error(const JointPMF& joint, const std::string& label_axis,
                   const std::vector<std::string>& obs_axes);

// 1/2 * sum |p - q|; requires identical axes.
double tv_distance(const JointPMF& p, const JointPMF& q);

struct ProcessingGap {
  double gap = 0.0;                // I(C; X_{1:T}) - I(C; X_{1:k})
  std::vector<double> tail_terms;  // I(C; X_t | X_{1:t-1}) for t = k+1..T
  double tail_sum = 0.0;
};

// Joint axes must be [context, X1, ..., XT]. Verifies that the direct
// difference and the chain-rule tail sum agree to 1e-10.
ProcessingGap processing_gap(const JointPMF& traj_joint, long k);

}  // namespace bcpo::info
