#include "cmllab/smallmat.hpp"

#include <algorithm>
#include <cmath>

namespace cmllab {

SmallMat SmallMat::zero(std::size_t m) {
    SmallMat r;
    r.m = m;
    return r;
}

SmallMat SmallMat::identity(std::size_t m) {
    SmallMat r = zero(m);
    for (std::size_t i = 0; i < m; ++i) r.at(i, i) = 1.0;
    return r;
}

SmallMat mat_add(const SmallMat& x, const SmallMat& y) {
    SmallMat r = SmallMat::zero(x.m);
    for (std::size_t i = 0; i < x.m; ++i)
        for (std::size_t j = 0; j < x.m; ++j) r.at(i, j) = x.at(i, j) + y.at(i, j);
    return r;
}

SmallMat mat_scale(const SmallMat& x, double s) {
    SmallMat r = SmallMat::zero(x.m);
    for (std::size_t i = 0; i < x.m; ++i)
        for (std::size_t j = 0; j < x.m; ++j) r.at(i, j) = x.at(i, j) * s;
    return r;
}

SmallMat mat_mul(const SmallMat& x, const SmallMat& y) {
    SmallMat r = SmallMat::zero(x.m);
    for (std::size_t i = 0; i < x.m; ++i)
        for (std::size_t k = 0; k < x.m; ++k) {
            double xik = x.at(i, k);
            if (xik == 0.0) continue;
            for (std::size_t j = 0; j < x.m; ++j) r.at(i, j) += xik * y.at(k, j);
        }
    return r;
}

SmallMat mat_transpose(const SmallMat& x) {
    SmallMat r = SmallMat::zero(x.m);
    for (std::size_t i = 0; i < x.m; ++i)
        for (std::size_t j = 0; j < x.m; ++j) r.at(i, j) = x.at(j, i);
    return r;
}

void mat_vec(const SmallMat& x, const double* v, double* out) {
    for (std::size_t i = 0; i < x.m; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < x.m; ++j) s += x.at(i, j) * v[j];
        out[i] = s;
    }
}

double mat_det(SmallMat x) {
    double det = 1.0;
    for (std::size_t k = 0; k < x.m; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < x.m; ++i)
            if (std::fabs(x.at(i, k)) > std::fabs(x.at(piv, k))) piv = i;
        if (x.at(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < x.m; ++j) std::swap(x.at(piv, j), x.at(k, j));
            det = -det;
        }
        det *= x.at(k, k);
        for (std::size_t i = k + 1; i < x.m; ++i) {
            double f = x.at(i, k) / x.at(k, k);
            for (std::size_t j = k; j < x.m; ++j) x.at(i, j) -= f * x.at(k, j);
        }
    }
    return det;
}

std::array<double, kMaxNodes> sym_eigenvalues(SmallMat x) {
    const std::size_t m = x.m;
    // cyclic Jacobi rotations until off-diagonal mass is negligible
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) off += x.at(i, j) * x.at(i, j);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = p + 1; q < m; ++q) {
                double apq = x.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                double theta = (x.at(q, q) - x.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < m; ++k) {
                    double xkp = x.at(k, p), xkq = x.at(k, q);
                    x.at(k, p) = c * xkp - s * xkq;
                    x.at(k, q) = s * xkp + c * xkq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    double xpk = x.at(p, k), xqk = x.at(q, k);
                    x.at(p, k) = c * xpk - s * xqk;
                    x.at(q, k) = s * xpk + c * xqk;
                }
            }
    }
    std::array<double, kMaxNodes> ev{};
    for (std::size_t i = 0; i < m; ++i) ev[i] = x.at(i, i);
    std::sort(ev.begin(), ev.begin() + m);
    return ev;
}

double sym_spectral_norm(const SmallMat& x) {
    auto ev = sym_eigenvalues(x);
    double r = 0;
    for (std::size_t i = 0; i < x.m; ++i) r = std::max(r, std::fabs(ev[i]));
    return r;
}

SingularRange singular_range(const SmallMat& x) {
    SmallMat g = mat_mul(mat_transpose(x), x);
    auto ev = sym_eigenvalues(g);
    SingularRange r;
    r.sigma_min = std::sqrt(std::max(0.0, ev[0]));
    double top = 0;
    for (std::size_t i = 0; i < x.m; ++i) top = std::max(top, ev[i]);
    r.sigma_max = std::sqrt(top);
    return r;
}

} // namespace cmllab
