#include "bcpo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bcpo::nd::kern {

namespace {
constexpr long kMatmulParThreshold = 1L << 17;  // m*k*n above which we go parallel
constexpr long kReduceBlock = 8192;
constexpr long kReduceParThreshold = 1L << 16;
}  // namespace

namespace serial {

void matmul(const double* A, const double* B, double* C, long m, long k, long n) {
  for (long i = 0; i < m; ++i) {
    double* Ci = C + i * n;
    for (long j = 0; j < n; ++j) Ci[j] = 0.0;
    const double* Ai = A + i * k;
    for (long t = 0; t < k; ++t) {
      const double a = Ai[t];
      const double* Bt = B + t * n;
      for (long j = 0; j < n; ++j) Ci[j] += a * Bt[j];
    }
  }
}

void matmul_acc(const double* A, const double* B, double* C, long m, long k, long n) {
  for (long i = 0; i < m; ++i) {
    double* Ci = C + i * n;
    const double* Ai = A + i * k;
    for (long t = 0; t < k; ++t) {
      const double a = Ai[t];
      const double* Bt = B + t * n;
      for (long j = 0; j < n; ++j) Ci[j] += a * Bt[j];
    }
  }
}

void matmul_tn_acc(const double* A, const double* B, double* C, long m, long k, long n) {
  // C[k,n] += sum_t A[t,i] * B[t,j]; per output row i, t ascending.
  for (long i = 0; i < k; ++i) {
    double* Ci = C + i * n;
    for (long t = 0; t < m; ++t) {
      const double a = A[t * k + i];
      const double* Bt = B + t * n;
      for (long j = 0; j < n; ++j) Ci[j] += a * Bt[j];
    }
  }
}

void transpose(const double* A, double* AT, long r, long c) {
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) AT[j * r + i] = A[i * c + j];
}

double sum(const double* x, long n) {
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += x[i];
  return s;
}

double xlogx_sum(const double* x, long n) {
  double s = 0.0;
  for (long i = 0; i < n; ++i)
    if (x[i] > 0.0) s += x[i] * std::log(x[i]);
  return s;
}

}  // namespace serial

namespace par {

void matmul(const double* A, const double* B, double* C, long m, long k, long n) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i) {
    double* Ci = C + i * n;
    for (long j = 0; j < n; ++j) Ci[j] = 0.0;
    const double* Ai = A + i * k;
    for (long t = 0; t < k; ++t) {
      const double a = Ai[t];
      const double* Bt = B + t * n;
      for (long j = 0; j < n; ++j) Ci[j] += a * Bt[j];
    }
  }
}

void matmul_acc(const double* A, const double* B, double* C, long m, long k, long n) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i) {
    double* Ci = C + i * n;
    const double* Ai = A + i * k;
    for (long t = 0; t < k; ++t) {
      const double a = Ai[t];
      const double* Bt = B + t * n;
      for (long j = 0; j < n; ++j) Ci[j] += a * Bt[j];
    }
  }
}

void matmul_tn_acc(const double* A, const double* B, double* C, long m, long k, long n) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < k; ++i) {
    double* Ci = C + i * n;
    for (long t = 0; t < m; ++t) {
      const double a = A[t * k + i];
      const double* Bt = B + t * n;
      for (long j = 0; j < n; ++j) Ci[j] += a * Bt[j];
    }
  }
}

void transpose(const double* A, double* AT, long r, long c) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) AT[j * r + i] = A[i * c + j];
}

double sum(const double* x, long n) {
  const long nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nblocks; ++b) {
    const long lo = b * kReduceBlock;
    const long hi = std::min(n, lo + kReduceBlock);
    double s = 0.0;
    for (long i = lo; i < hi; ++i) s += x[i];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (long b = 0; b < nblocks; ++b) s += partial[static_cast<std::size_t>(b)];
  return s;
}

double xlogx_sum(const double* x, long n) {
  const long nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nblocks; ++b) {
    const long lo = b * kReduceBlock;
    const long hi = std::min(n, lo + kReduceBlock);
    double s = 0.0;
    for (long i = lo; i < hi; ++i)
      if (x[i] > 0.0) s += x[i] * std::log(x[i]);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (long b = 0; b < nblocks; ++b) s += partial[static_cast<std::size_t>(b)];
  return s;
}

}  // namespace par

void matmul(const double* A, const double* B, double* C, long m, long k, long n) {
  if (m * k * n >= kMatmulParThreshold)
    par::matmul(A, B, C, m, k, n);
  else
    serial::matmul(A, B, C, m, k, n);
}

void matmul_acc(const double* A, const double* B, double* C, long m, long k, long n) {
  if (m * k * n >= kMatmulParThreshold)
    par::matmul_acc(A, B, C, m, k, n);
  else
    serial::matmul_acc(A, B, C, m, k, n);
}

void matmul_tn_acc(const double* A, const double* B, double* C, long m, long k, long n) {
  if (m * k * n >= kMatmulParThreshold)
    par::matmul_tn_acc(A, B, C, m, k, n);
  else
    serial::matmul_tn_acc(A, B, C, m, k, n);
}

void transpose(const double* A, double* AT, long r, long c) {
  if (r * c >= kReduceParThreshold)
    par::transpose(A, AT, r, c);
  else
    serial::transpose(A, AT, r, c);
}

double sum(const double* x, long n) {
  if (n >= kReduceParThreshold) return par::sum(x, n);
  // Serial path uses the same blocked order so results match the parallel path.
  double s = 0.0;
  long i = 0;
  while (i < n) {
    const long hi = std::min(n, i + kReduceBlock);
    double b = 0.0;
    for (; i < hi; ++i) b += x[i];
    s += b;
  }
  return s;
}

double xlogx_sum(const double* x, long n) {
  if (n >= kReduceParThreshold) return par::xlogx_sum(x, n);
  double s = 0.0;
  long i = 0;
  while (i < n) {
    const long hi = std::min(n, i + kReduceBlock);
    double b = 0.0;
    for (; i < hi; ++i)
      if (x[i] > 0.0) b += x[i] * std::log(x[i]);
    s += b;
  }
  return s;
}

}  // namespace bcpo::nd::kern
