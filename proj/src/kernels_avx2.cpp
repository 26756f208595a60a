// AVX2 variants. Compiled with -mavx2 -mfma on x86-64; on other targets this
// translation unit only provides the scalar fallback for avx2_ops().
//
// gemm_nn / gemm_tn / elementwise kernels keep the scalar per-element
// operation order (mul then add, no FMA) so they match the reference
// bit-for-bit; the dot-product style kernels use FMA with four lanes plus
// a horizontal reduction and match to relative tolerance.

#include "cotrain/kernels.hpp"

#include <cmath>

#if defined(__AVX2__) && defined(__FMA__)
#define COTRAIN_KERNELS_AVX2 1
#include <immintrin.h>
#else
#define COTRAIN_KERNELS_AVX2 0
#endif

namespace cotrain::kernels {

#if COTRAIN_KERNELS_AVX2

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

void gemm_nt_avx2(const double* a, const double* b, double* c,
                  int m, int n, int k) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<size_t>(i) * k;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<size_t>(j) * k;
            __m256d acc0 = _mm256_setzero_pd();
            __m256d acc1 = _mm256_setzero_pd();
            int t = 0;
            for (; t + 8 <= k; t += 8) {
                acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(ai + t),
                                       _mm256_loadu_pd(bj + t), acc0);
                acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(ai + t + 4),
                                       _mm256_loadu_pd(bj + t + 4), acc1);
            }
            for (; t + 4 <= k; t += 4) {
                acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(ai + t),
                                       _mm256_loadu_pd(bj + t), acc0);
            }
            double acc = hsum(_mm256_add_pd(acc0, acc1));
            for (; t < k; ++t) acc += ai[t] * bj[t];
            c[static_cast<size_t>(i) * n + j] = acc;
        }
    }
}

void gemm_nn_avx2(const double* a, const double* b, double* c,
                  int m, int n, int k) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<size_t>(i) * n;
        int j = 0;
        for (; j + 4 <= n; j += 4) _mm256_storeu_pd(ci + j, _mm256_setzero_pd());
        for (; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + static_cast<size_t>(i) * k;
        for (int t = 0; t < k; ++t) {
            const double av = ai[t];
            const __m256d avv = _mm256_set1_pd(av);
            const double* bt = b + static_cast<size_t>(t) * n;
            j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d cv = _mm256_loadu_pd(ci + j);
                cv = _mm256_add_pd(cv, _mm256_mul_pd(avv, _mm256_loadu_pd(bt + j)));
                _mm256_storeu_pd(ci + j, cv);
            }
            for (; j < n; ++j) ci[j] += av * bt[j];
        }
    }
}

void gemm_tn_avx2(const double* a, const double* b, double* c,
                  int m, int n, int k) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<size_t>(i) * n;
        int j = 0;
        for (; j + 4 <= n; j += 4) _mm256_storeu_pd(ci + j, _mm256_setzero_pd());
        for (; j < n; ++j) ci[j] = 0.0;
    }
    for (int t = 0; t < k; ++t) {
        const double* at = a + static_cast<size_t>(t) * m;
        const double* bt = b + static_cast<size_t>(t) * n;
        for (int i = 0; i < m; ++i) {
            const double av = at[i];
            const __m256d avv = _mm256_set1_pd(av);
            double* ci = c + static_cast<size_t>(i) * n;
            int j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d cv = _mm256_loadu_pd(ci + j);
                cv = _mm256_add_pd(cv, _mm256_mul_pd(avv, _mm256_loadu_pd(bt + j)));
                _mm256_storeu_pd(ci + j, cv);
            }
            for (; j < n; ++j) ci[j] += av * bt[j];
        }
    }
}

void axpy_avx2(double alpha, const double* x, double* y, int n) {
    const __m256d av = _mm256_set1_pd(alpha);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_diff_avx2(double alpha, const double* a, const double* b,
                     double* out, int n) {
    const __m256d av = _mm256_set1_pd(alpha);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                        _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(av, d));
    }
    for (; i < n; ++i) out[i] = alpha * (a[i] - b[i]);
}

double dot_avx2(const double* a, const double* b, int n) {
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i),
                              _mm256_loadu_pd(b + i), acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

double sq_diff_sum_avx2(const double* a, const double* b, int n) {
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                        _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        r += d * d;
    }
    return r;
}

void adam_step_avx2(double* p, double* m, double* v, const double* g, int n,
                    double lr, double beta1, double beta2, double eps,
                    double bc1, double bc2) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d bc1v = _mm256_set1_pd(bc1);
    const __m256d bc2v = _mm256_set1_pd(bc2);
    const __m256d epsv = _mm256_set1_pd(eps);
    const __m256d lrv = _mm256_set1_pd(lr);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_add_pd(_mm256_mul_pd(b1, mv), _mm256_mul_pd(omb1, gv));
        vv = _mm256_add_pd(_mm256_mul_pd(b2, vv),
                           _mm256_mul_pd(omb2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(mv, bc1v);
        const __m256d vhat = _mm256_div_pd(vv, bc2v);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        __m256d pv = _mm256_loadu_pd(p + i);
        pv = _mm256_sub_pd(pv, _mm256_mul_pd(lrv, _mm256_div_pd(mhat, denom)));
        _mm256_storeu_pd(p + i, pv);
    }
    for (; i < n; ++i) {
        const double gi = g[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

void sgd_step_avx2(double* p, const double* g, int n, double lr) {
    const __m256d lrv = _mm256_set1_pd(lr);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d pv = _mm256_loadu_pd(p + i);
        pv = _mm256_sub_pd(pv, _mm256_mul_pd(lrv, _mm256_loadu_pd(g + i)));
        _mm256_storeu_pd(p + i, pv);
    }
    for (; i < n; ++i) p[i] -= lr * g[i];
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{
        gemm_nt_avx2, gemm_nn_avx2, gemm_tn_avx2,
        axpy_avx2,    scale_diff_avx2,
        dot_avx2,     sq_diff_sum_avx2,
        adam_step_avx2, sgd_step_avx2,
        "avx2",
    };
    return ops;
}

#else  // !COTRAIN_KERNELS_AVX2

const Ops& avx2_ops() { return scalar_ops(); }

#endif

}  // namespace cotrain::kernels
