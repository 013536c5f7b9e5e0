#include "mosqopt/kernels.hpp"

// Reference implementations. Plain loops, no ISA assumptions; these define
// what the vector variants must reproduce.

namespace mosqopt::kernels {
namespace {

void axpy_scalar(double* y, const double* x, const double* k, double h, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * k[i];
}

void rk4_combine_scalar(double* y, const double* x, const double* k1, const double* k2,
                        const double* k3, const double* k4, double h, std::size_t n) {
    const double c = h / 6.0;
    for (std::size_t i = 0; i < n; ++i)
        y[i] = x[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void chain_rhs_scalar(double* out, const double* x, std::size_t n, double advance, double decay,
                      double injection) {
    out[0] = injection - decay * x[0];
    for (std::size_t j = 1; j < n; ++j) out[j] = advance * x[j - 1] - decay * x[j];
}

void adjoint_chain_rhs_scalar(double* out, const double* lam, std::size_t n, double advance,
                              double decay, double tail_coupling, double source) {
    for (std::size_t j = 0; j + 1 < n; ++j)
        out[j] = decay * lam[j] - advance * lam[j + 1] + source;
    out[n - 1] = decay * lam[n - 1] - tail_coupling + source;
}

void hermite_midpoint_scalar(double* mid, const double* x0, const double* x1, const double* f0,
                             const double* f1, double h8, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        mid[i] = 0.5 * (x0[i] + x1[i]) + h8 * (f0[i] - f1[i]);
}

double sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{
        "scalar",
        axpy_scalar,
        rk4_combine_scalar,
        chain_rhs_scalar,
        adjoint_chain_rhs_scalar,
        hermite_midpoint_scalar,
        sum_scalar,
        dot_scalar,
    };
    return table;
}

}  // namespace mosqopt::kernels
