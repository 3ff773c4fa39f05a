#include "evdb/blas.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <string>

namespace evdb::blas {

namespace {

using dgemm_fn = void (*)(int order, int ta, int tb, int m, int n, int k, double alpha,
                          const double* a, int lda, const double* b, int ldb, double beta,
                          double* c, int ldc);

constexpr int kRowMajor = 101;
constexpr int kNoTrans = 111;
constexpr int kTrans = 112;

dgemm_fn g_dgemm = nullptr;
std::string g_backend = "builtin";
std::once_flag g_init;

// OpenBLAS picks its kernels from CPU model detection, which fails on some
// virtualized CPUs and falls back to generic code several times slower than
// the ISA allows. The core type can only be forced through the environment,
// and the library reads it when it is loaded, so we set the variable (never
// overriding a user-provided value) and only then dlopen the library.
void load_openblas() {
#if defined(__x86_64__)
    if (getenv("OPENBLAS_CORETYPE") == nullptr) {
        __builtin_cpu_init();
        if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512vl") &&
            __builtin_cpu_supports("avx512bw") && __builtin_cpu_supports("avx512dq")) {
            setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
        } else if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
            setenv("OPENBLAS_CORETYPE", "HASWELL", 0);
        }
    }
#endif
    void* lib = dlopen("libopenblas.so.0", RTLD_NOW | RTLD_LOCAL);
    if (lib == nullptr) lib = dlopen("libopenblas.so", RTLD_NOW | RTLD_LOCAL);
    if (lib == nullptr) return;

    auto* gemm = reinterpret_cast<dgemm_fn>(dlsym(lib, "cblas_dgemm"));
    if (gemm == nullptr) return;

    // One BLAS thread: the library parallelizes across batch items itself and
    // single-threaded GEMM keeps results schedule-independent.
    if (auto* set_threads = reinterpret_cast<void (*)(int)>(dlsym(lib, "openblas_set_num_threads")))
        set_threads(1);

    g_dgemm = gemm;
    g_backend = "openblas";
    if (auto* corename = reinterpret_cast<char* (*)()>(dlsym(lib, "openblas_get_corename")))
        g_backend += std::string(":") + corename();
}

// Cache-blocked fallback used only when OpenBLAS cannot be loaded.
void builtin_dgemm(bool trans_a, bool trans_b, long m, long n, long k, double alpha,
                   const double* a, long lda, const double* b, long ldb, double beta,
                   double* c, long ldc) {
    auto at = [&](long i, long j) { return trans_a ? a[j * lda + i] : a[i * lda + j]; };
    auto bt = [&](long i, long j) { return trans_b ? b[j * ldb + i] : b[i * ldb + j]; };
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j) c[i * ldc + j] *= beta;
    constexpr long kb = 64, jb = 128;
    for (long k0 = 0; k0 < k; k0 += kb) {
        const long k1 = std::min(k, k0 + kb);
        for (long j0 = 0; j0 < n; j0 += jb) {
            const long j1 = std::min(n, j0 + jb);
            for (long i = 0; i < m; ++i) {
                for (long kk = k0; kk < k1; ++kk) {
                    const double av = alpha * at(i, kk);
                    if (av == 0.0) continue;
                    double* crow = c + i * ldc;
                    for (long j = j0; j < j1; ++j) crow[j] += av * bt(kk, j);
                }
            }
        }
    }
}

} // namespace

void dgemm(bool trans_a, bool trans_b, long m, long n, long k, double alpha, const double* a,
           long lda, const double* b, long ldb, double beta, double* c, long ldc) {
    std::call_once(g_init, load_openblas);
    if (m == 0 || n == 0) return;
    if (g_dgemm != nullptr) {
        g_dgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
        return;
    }
    builtin_dgemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

const char* backend() {
    std::call_once(g_init, load_openblas);
    return g_backend.c_str();
}

} // namespace evdb::blas
