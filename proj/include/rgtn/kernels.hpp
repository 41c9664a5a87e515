#pragma once
// Data-parallel inner loops used by the contraction engine, the Jacobi SVD
// and the Adam update. Every kernel has a scalar reference version and, on
// x86-64, an AVX2+FMA version; the active backend is chosen once at startup
// from CPUID and can be pinned for equivalence testing.

#include <cstddef>
#include <string_view>

namespace rgtn::kernels {

enum class Backend { Scalar, Avx2 };

/// Function table for one backend. All pointers are non-null.
struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*scale)(double alpha, double* x, std::size_t n);
    // x <- c*x - s*y ; y <- s*x + c*y  (plane rotation, as used by Jacobi sweeps)
    void (*rotate)(double* x, double* y, std::size_t n, double c, double s);
    // C(m x n) = A(m x k) * B(k x n), all row-major and densely packed.
    void (*gemm)(std::size_t m, std::size_t k, std::size_t n, const double* a,
                 const double* b, double* c);
    // One Adam step over n parameters. bc1/bc2 are the bias corrections
    // (1 - beta1^t) and (1 - beta2^t).
    void (*adam)(double* param, const double* grad, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2, double eps,
                 double bc1, double bc2);
};

const KernelTable& scalar_table();
/// Null when the build has no AVX2 variant.
const KernelTable* avx2_table();

bool cpu_has_avx2();

/// Currently active table. Selected on first use: AVX2 if the CPU supports it.
const KernelTable& active();
Backend active_backend();
/// Pins a backend; returns false (and leaves the selection alone) when it is
/// unavailable on this machine.
bool set_backend(Backend b);
std::string_view backend_name(Backend b);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sumsq(const double* x, std::size_t n) { return active().sumsq(x, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void scale(double alpha, double* x, std::size_t n) { active().scale(alpha, x, n); }
inline void rotate(double* x, double* y, std::size_t n, double c, double s) { active().rotate(x, y, n, c, s); }
inline void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    active().gemm(m, k, n, a, b, c);
}
inline void adam(double* param, const double* grad, double* m, double* v, std::size_t n, double lr,
                 double beta1, double beta2, double eps, double bc1, double bc2) {
    active().adam(param, grad, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
}

}  // namespace rgtn::kernels
