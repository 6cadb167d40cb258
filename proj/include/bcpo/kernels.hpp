#pragma once

#include <cstddef>

// Dense inner loops shared by the autodiff tape and the exact-PMF code.
//
// Every kernel has a serial reference implementation under kern::serial and
// an OpenMP implementation under kern::par. The two are bit-identical by
// construction: parallel loops split independent output elements (or fixed
// 8192-element reduction blocks combined in block order), so the per-element
// floating-point evaluation order never depends on the thread count. The
// dispatching wrappers pick the parallel path above a work threshold.

namespace bcpo::nd::kern {

namespace serial {

// C[m,n] = A[m,k] * B[k,n]
void matmul(const double* A, const double* B, double* C, long m, long k, long n);
// C[m,n] += A[m,k] * B[k,n]
void matmul_acc(const double* A, const double* B, double* C, long m, long k, long n);
// C[k,n] += A^T * B with A[m,k], B[m,n]
void matmul_tn_acc(const double* A, const double* B, double* C, long m, long k, long n);
void transpose(const double* A, double* AT, long r, long c);
double sum(const double* x, long n);
// sum of x*ln(x) over entries with x > 0
double xlogx_sum(const double* x, long n);

}  // namespace serial

namespace par {

void matmul(const double* A, const double* B, double* C, long m, long k, long n);
void matmul_acc(const double* A, const double* B, double* C, long m, long k, long n);
void matmul_tn_acc(const double* A, const double* B, double* C, long m, long k, long n);
void transpose(const double* A, double* AT, long r, long c);
double sum(const double* x, long n);
double xlogx_sum(const double* x, long n);

}  // namespace par

// Dispatching entry points used by the rest of the library.
void matmul(const double* A, const double* B, double* C, long m, long k, long n);
void matmul_acc(const double* A, const double* B, double* C, long m, long k, long n);
void matmul_tn_acc(const double* A, const double* B, double* C, long m, long k, long n);
void transpose(const double* A, double* AT, long r, long c);
double sum(const double* x, long n);
double xlogx_sum(const double* x, long n);

}  // namespace bcpo::nd::kern
