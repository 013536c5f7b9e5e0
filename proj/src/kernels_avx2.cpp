#include "mosqopt/kernels.hpp"

// AVX2 + FMA variants, 4 doubles per lane. Compiled only in this translation
// unit (see CMakeLists); callers reach it through the runtime-dispatched table
// so baseline builds and CPUs fall back to the scalar reference.
//
// Reductions accumulate in four partial lanes and fold at the end, so their
// rounding differs from the scalar left-to-right order by O(eps); the
// equivalence tests bound that.

#include <immintrin.h>

namespace mosqopt::kernels {
namespace {

void axpy_avx2(double* y, const double* x, const double* k, double h, std::size_t n) {
    const __m256d vh = _mm256_set1_pd(h);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vk = _mm256_loadu_pd(k + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vh, vk, vx));
    }
    for (; i < n; ++i) y[i] = x[i] + h * k[i];
}

void rk4_combine_avx2(double* y, const double* x, const double* k1, const double* k2,
                      const double* k3, const double* k4, double h, std::size_t n) {
    const double c = h / 6.0;
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(k1 + i);
        const __m256d b = _mm256_loadu_pd(k2 + i);
        const __m256d d = _mm256_loadu_pd(k3 + i);
        const __m256d e = _mm256_loadu_pd(k4 + i);
        // k1 + 2*k2 + 2*k3 + k4, matching the scalar association
        __m256d s = _mm256_add_pd(a, _mm256_mul_pd(two, b));
        s = _mm256_add_pd(s, _mm256_mul_pd(two, d));
        s = _mm256_add_pd(s, e);
        const __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vc, s, vx));
    }
    for (; i < n; ++i) y[i] = x[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void chain_rhs_avx2(double* out, const double* x, std::size_t n, double advance, double decay,
                    double injection) {
    out[0] = injection - decay * x[0];
    const __m256d va = _mm256_set1_pd(advance);
    const __m256d vd = _mm256_set1_pd(decay);
    std::size_t j = 1;
    for (; j + 4 <= n; j += 4) {
        const __m256d prev = _mm256_loadu_pd(x + j - 1);
        const __m256d cur = _mm256_loadu_pd(x + j);
        _mm256_storeu_pd(out + j, _mm256_fmsub_pd(va, prev, _mm256_mul_pd(vd, cur)));
    }
    for (; j < n; ++j) out[j] = advance * x[j - 1] - decay * x[j];
}

void adjoint_chain_rhs_avx2(double* out, const double* lam, std::size_t n, double advance,
                            double decay, double tail_coupling, double source) {
    const __m256d va = _mm256_set1_pd(advance);
    const __m256d vd = _mm256_set1_pd(decay);
    const __m256d vs = _mm256_set1_pd(source);
    std::size_t j = 0;
    while (j + 5 <= n) {  // needs lam[j+4] in range
        const __m256d cur = _mm256_loadu_pd(lam + j);
        const __m256d nxt = _mm256_loadu_pd(lam + j + 1);
        const __m256d v = _mm256_add_pd(_mm256_fmsub_pd(vd, cur, _mm256_mul_pd(va, nxt)), vs);
        _mm256_storeu_pd(out + j, v);
        j += 4;
    }
    for (; j + 1 < n; ++j) out[j] = decay * lam[j] - advance * lam[j + 1] + source;
    out[n - 1] = decay * lam[n - 1] - tail_coupling + source;
}

void hermite_midpoint_avx2(double* mid, const double* x0, const double* x1, const double* f0,
                           const double* f1, double h8, std::size_t n) {
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d vh8 = _mm256_set1_pd(h8);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(x0 + i);
        const __m256d b = _mm256_loadu_pd(x1 + i);
        const __m256d fa = _mm256_loadu_pd(f0 + i);
        const __m256d fb = _mm256_loadu_pd(f1 + i);
        const __m256d avg = _mm256_mul_pd(half, _mm256_add_pd(a, b));
        _mm256_storeu_pd(mid + i, _mm256_fmadd_pd(vh8, _mm256_sub_pd(fa, fb), avg));
    }
    for (; i < n; ++i) mid[i] = 0.5 * (x0[i] + x1[i]) + h8 * (f0[i] - f1[i]);
}

double fold(__m256d acc) {
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = fold(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = fold(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

const Ops* avx2_ops_impl() {
    static const Ops table{
        "avx2",
        axpy_avx2,
        rk4_combine_avx2,
        chain_rhs_avx2,
        adjoint_chain_rhs_avx2,
        hermite_midpoint_avx2,
        sum_avx2,
        dot_avx2,
    };
    return &table;
}

}  // namespace mosqopt::kernels
