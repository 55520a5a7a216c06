#pragma once
#include <array>
#include <cstddef>

namespace cmllab {

inline constexpr std::size_t kMaxNodes = 8;

// Dense m x m matrix with compile-time capacity 8. Lattices never grow past
// that here, so everything stays on the stack.
struct SmallMat {
    std::size_t m = 0;
    std::array<double, kMaxNodes * kMaxNodes> a{};

    double& at(std::size_t i, std::size_t j) { return a[i * kMaxNodes + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * kMaxNodes + j]; }

    static SmallMat zero(std::size_t m);
    static SmallMat identity(std::size_t m);
};

SmallMat mat_add(const SmallMat& x, const SmallMat& y);
SmallMat mat_scale(const SmallMat& x, double s);
SmallMat mat_mul(const SmallMat& x, const SmallMat& y);
SmallMat mat_transpose(const SmallMat& x);
void mat_vec(const SmallMat& x, const double* v, double* out);

// determinant via partial-pivot LU; fine at these sizes
double mat_det(SmallMat x);

// eigenvalues of a symmetric matrix, cyclic Jacobi, ascending order
std::array<double, kMaxNodes> sym_eigenvalues(SmallMat x);

// largest |eigenvalue| of a symmetric matrix
double sym_spectral_norm(const SmallMat& x);

// extreme singular values of a general matrix (eigenvalues of X^T X)
struct SingularRange {
    double sigma_min = 0;
    double sigma_max = 0;
};
SingularRange singular_range(const SmallMat& x);

} // namespace cmllab
