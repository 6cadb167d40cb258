#pragma once

// Arbitrary-precision re-computation oracles (256-bit MPFR). Test-only; kept
// independent of the library's double-precision summation paths.

#include <mpfr.h>

#include <vector>

namespace testutil {

constexpr mpfr_prec_t kPrec = 256;

// I(A;B) in nats over a dense joint laid out joint[a * nb + b].
inline double mpfr_mutual_information(const std::vector<double>& joint, long na,
                                      long nb) {
  std::vector<double> pa(static_cast<std::size_t>(na), 0.0);
  std::vector<double> pb(static_cast<std::size_t>(nb), 0.0);
  for (long a = 0; a < na; ++a)
    for (long b = 0; b < nb; ++b) {
      pa[static_cast<std::size_t>(a)] += joint[static_cast<std::size_t>(a * nb + b)];
      pb[static_cast<std::size_t>(b)] += joint[static_cast<std::size_t>(a * nb + b)];
    }
  mpfr_t acc, term, ratio, tmp;
  mpfr_inits2(kPrec, acc, term, ratio, tmp, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_zero(acc, 1);
  for (long a = 0; a < na; ++a)
    for (long b = 0; b < nb; ++b) {
      const double p = joint[static_cast<std::size_t>(a * nb + b)];
      if (p <= 0.0) continue;
      mpfr_set_d(ratio, p, MPFR_RNDN);
      mpfr_set_d(tmp, pa[static_cast<std::size_t>(a)], MPFR_RNDN);
      mpfr_div(ratio, ratio, tmp, MPFR_RNDN);
      mpfr_set_d(tmp, pb[static_cast<std::size_t>(b)], MPFR_RNDN);
      mpfr_div(ratio, ratio, tmp, MPFR_RNDN);
      mpfr_log(term, ratio, MPFR_RNDN);
      mpfr_set_d(tmp, p, MPFR_RNDN);
      mpfr_mul(term, term, tmp, MPFR_RNDN);
      mpfr_add(acc, acc, term, MPFR_RNDN);
    }
  const double out = mpfr_get_d(acc, MPFR_RNDN);
  mpfr_clears(acc, term, ratio, tmp, static_cast<mpfr_ptr>(nullptr));
  return out;
}

inline double mpfr_binary_entropy(double d) {
  if (d <= 0.0 || d >= 1.0) return 0.0;
  mpfr_t x, one_minus, t1, t2;
  mpfr_inits2(kPrec, x, one_minus, t1, t2, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(x, d, MPFR_RNDN);
  mpfr_ui_sub(one_minus, 1, x, MPFR_RNDN);
  mpfr_log(t1, x, MPFR_RNDN);
  mpfr_mul(t1, t1, x, MPFR_RNDN);
  mpfr_log(t2, one_minus, MPFR_RNDN);
  mpfr_mul(t2, t2, one_minus, MPFR_RNDN);
  mpfr_add(t1, t1, t2, MPFR_RNDN);
  mpfr_neg(t1, t1, MPFR_RNDN);
  const double out = mpfr_get_d(t1, MPFR_RNDN);
  mpfr_clears(x, one_minus, t1, t2, static_cast<mpfr_ptr>(nullptr));
  return out;
}

// h2(delta) + delta * ln(N-1)
inline double mpfr_fano_processing(double delta, long n) {
  mpfr_t acc, t;
  mpfr_inits2(kPrec, acc, t, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(acc, mpfr_binary_entropy(delta), MPFR_RNDN);
  mpfr_set_ui(t, static_cast<unsigned long>(n - 1), MPFR_RNDN);
  mpfr_log(t, t, MPFR_RNDN);
  mpfr_mul_d(t, t, delta, MPFR_RNDN);
  mpfr_add(acc, acc, t, MPFR_RNDN);
  const double out = mpfr_get_d(acc, MPFR_RNDN);
  mpfr_clears(acc, t, static_cast<mpfr_ptr>(nullptr));
  return out;
}

}  // namespace testutil
