#include "cotrain/kernels.hpp"

#include <cmath>

namespace cotrain::kernels {
namespace {

void gemm_nt_scalar(const double* a, const double* b, double* c,
                    int m, int n, int k) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<size_t>(i) * k;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<size_t>(j) * k;
            double acc = 0.0;
            for (int t = 0; t < k; ++t) acc += ai[t] * bj[t];
            c[static_cast<size_t>(i) * n + j] = acc;
        }
    }
}

void gemm_nn_scalar(const double* a, const double* b, double* c,
                    int m, int n, int k) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + static_cast<size_t>(i) * k;
        for (int t = 0; t < k; ++t) {
            const double av = ai[t];
            const double* bt = b + static_cast<size_t>(t) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
        }
    }
}

void gemm_tn_scalar(const double* a, const double* b, double* c,
                    int m, int n, int k) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) ci[j] = 0.0;
    }
    for (int t = 0; t < k; ++t) {
        const double* at = a + static_cast<size_t>(t) * m;
        const double* bt = b + static_cast<size_t>(t) * n;
        for (int i = 0; i < m; ++i) {
            const double av = at[i];
            double* ci = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
        }
    }
}

void axpy_scalar(double alpha, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_diff_scalar(double alpha, const double* a, const double* b,
                       double* out, int n) {
    for (int i = 0; i < n; ++i) out[i] = alpha * (a[i] - b[i]);
}

double dot_scalar(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sq_diff_sum_scalar(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void adam_step_scalar(double* p, double* m, double* v, const double* g, int n,
                      double lr, double beta1, double beta2, double eps,
                      double bc1, double bc2) {
    for (int i = 0; i < n; ++i) {
        const double gi = g[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

void sgd_step_scalar(double* p, const double* g, int n, double lr) {
    for (int i = 0; i < n; ++i) p[i] -= lr * g[i];
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        gemm_nt_scalar, gemm_nn_scalar, gemm_tn_scalar,
        axpy_scalar,    scale_diff_scalar,
        dot_scalar,     sq_diff_sum_scalar,
        adam_step_scalar, sgd_step_scalar,
        "scalar",
    };
    return ops;
}

}  // namespace cotrain::kernels
