#pragma once

namespace evdb::blas {

// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C.
// op(A) is M x K, op(B) is K x N, C is M x N; lda/ldb/ldc are row strides of
// the stored (untransposed) matrices.
void dgemm(bool trans_a, bool trans_b, long m, long n, long k, double alpha,
           const double* a, long lda, const double* b, long ldb, double beta,
           double* c, long ldc);

// Active backend, e.g. "openblas:SkylakeX" or "builtin".
const char* backend();

} // namespace evdb::blas
