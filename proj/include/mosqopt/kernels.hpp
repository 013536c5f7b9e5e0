#pragma once

#include <cstddef>
#include <string>

namespace mosqopt::kernels {

// Hot inner loops of the forward and adjoint integrators, factored out so they
// can be swapped between a scalar reference implementation and SIMD variants.
// The scalar versions define the semantics; vector variants are
// equivalence-tested against them and picked at runtime.
//
// Semantics:
//   axpy:              y[i] = x[i] + h * k[i]
//   rk4_combine:       y[i] = x[i] + h/6 * (k1[i] + 2 k2[i] + 2 k3[i] + k4[i])
//   chain_rhs:         out[0] = injection        - decay * x[0]
//                      out[j] = advance * x[j-1] - decay * x[j]      (j >= 1)
//   adjoint_chain_rhs: out[j]   = decay * lam[j] - advance * lam[j+1] + source
//                      out[n-1] = decay * lam[n-1] - tail_coupling   + source
//   hermite_midpoint:  mid[i] = (x0[i] + x1[i]) / 2 + h8 * (f0[i] - f1[i])
//                      (h8 = step/8 gives the cubic Hermite value at mid-step)
//   sum, dot:          the obvious reductions
struct Ops {
    const char* name;
    void (*axpy)(double* y, const double* x, const double* k, double h, std::size_t n);
    void (*rk4_combine)(double* y, const double* x, const double* k1, const double* k2,
                        const double* k3, const double* k4, double h, std::size_t n);
    void (*chain_rhs)(double* out, const double* x, std::size_t n, double advance, double decay,
                      double injection);
    void (*adjoint_chain_rhs)(double* out, const double* lam, std::size_t n, double advance,
                              double decay, double tail_coupling, double source);
    void (*hermite_midpoint)(double* mid, const double* x0, const double* x1, const double* f0,
                             const double* f1, double h8, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
};

const Ops& scalar_ops();

// Null when the build or the running CPU lacks AVX2.
const Ops* avx2_ops();

// The active table. Defaults to the widest supported variant; the environment
// variable MOSQOPT_KERNEL=scalar|avx2|auto or select_backend() override it.
const Ops& ops();

// Returns the name of the backend actually selected. Throws ConfigError for an
// unknown name or an unavailable backend.
std::string select_backend(const std::string& name);

}  // namespace mosqopt::kernels
