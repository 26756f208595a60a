#pragma once

#include <cstddef>

// Dense double-precision kernels behind the policy training loop. Each
// operation has a scalar reference implementation and, on x86-64 with AVX2,
// a vectorized variant. The active table is picked once at startup from CPU
// features; COTRAIN_KERNELS=scalar|avx2 forces a backend.
//
// Elementwise kernels (axpy, scale_diff, adam_step, sgd_step, gemm_nn,
// gemm_tn) perform the same IEEE operation sequence per element in both
// backends and so match bit-for-bit. Reduction kernels (dot, sq_diff_sum,
// gemm_nt) reassociate partial sums in the AVX2 variant and match to
// relative tolerance only.

namespace cotrain::kernels {

struct Ops {
    // c[m][n] = sum_k a[m][k] * b[n][k]   (row-major; b read as transpose)
    void (*gemm_nt)(const double* a, const double* b, double* c,
                    int m, int n, int k);
    // c[m][n] = sum_k a[m][k] * b[k][n]
    void (*gemm_nn)(const double* a, const double* b, double* c,
                    int m, int n, int k);
    // c[m][n] = sum_k a[k][m] * b[k][n]   (a read as transpose)
    void (*gemm_tn)(const double* a, const double* b, double* c,
                    int m, int n, int k);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, int n);
    // out[i] = alpha * (a[i] - b[i])
    void (*scale_diff)(double alpha, const double* a, const double* b,
                       double* out, int n);
    double (*dot)(const double* a, const double* b, int n);
    // sum_i (a[i] - b[i])^2
    double (*sq_diff_sum)(const double* a, const double* b, int n);
    // m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2;
    // p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
    void (*adam_step)(double* p, double* m, double* v, const double* g, int n,
                      double lr, double beta1, double beta2, double eps,
                      double bc1, double bc2);
    // p[i] -= lr * g[i]
    void (*sgd_step)(double* p, const double* g, int n, double lr);
    const char* name;
};

const Ops& scalar_ops();
const Ops& avx2_ops();       // falls back to scalar_ops() when unsupported
bool avx2_supported();

// Runtime-selected table (env override applied once on first call).
const Ops& active();
const char* backend_name();

}  // namespace cotrain::kernels
