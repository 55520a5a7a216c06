#include "cmllab/lemma.hpp"

#include <cmath>
#include <limits>

namespace cmllab {

namespace {

// floor with a one-sided nudge so values that are mathematically integral do
// not drop a whole unit to last-ulp rounding
int robust_floor(double v) { return static_cast<int>(std::floor(v + 1e-9)); }

} // namespace

ExpansionBounds expansion_bounds(const LatticeSystem& sys, BoundsMode mode) {
    const std::size_t m = sys.m();
    const SmallMat b = sys.update_matrix();
    const double nu_min = sys.map.slope_min();
    const double nu_max = sys.map.slope_max();

    ExpansionBounds out;
    out.mode = mode;
    if (mode == BoundsMode::MeasurableSet) {
        double det = std::fabs(mat_det(b));
        out.e_plus = det * std::pow(nu_max, static_cast<double>(m));
        out.e_minus = det * std::pow(nu_min, static_cast<double>(m));
        return out;
    }

    // stretch extremes of (I + cA) diag(+-nu) over every sign pattern
    double hi = 0;
    double lo = std::numeric_limits<double>::infinity();
    for (std::uint32_t pat = 0; pat < (1u << m); ++pat) {
        SmallMat jp = b, jm = b;
        for (std::size_t col = 0; col < m; ++col) {
            double sign = (pat >> col) & 1u ? -1.0 : 1.0;
            for (std::size_t row = 0; row < m; ++row) {
                jp.at(row, col) *= sign * nu_max;
                jm.at(row, col) *= sign * nu_min;
            }
        }
        hi = std::max(hi, singular_range(jp).sigma_max);
        lo = std::min(lo, singular_range(jm).sigma_min);
    }
    out.e_plus = hi;
    out.e_minus = lo;
    return out;
}

IterationDerived derive_iteration_constants(const ExpansionBounds& bounds, double a, int m0,
                                            double delta1, double mu) {
    const double ep = bounds.e_plus;
    const double em = bounds.e_minus;
    if (!(ep > 1.0) || !(em > 0.0) || em > ep)
        throw ConfigError("iteration constants: need e_plus > 1 and 0 < e_minus <= e_plus");
    if (!(a >= 1.0)) throw ConfigError("iteration constants: a must be at least 1");
    if (m0 < 1) throw ConfigError("iteration constants: m0 must be at least 1");
    if (!(delta1 > 0.0 && delta1 < 1.0))
        throw ConfigError("iteration constants: delta1 must lie in (0,1)");
    if (!(a < std::pow(em, m0)))
        throw ConfigError("iteration constants: hypothesis a < e_minus^m0 fails");

    const double base = em / std::pow(a, 1.0 / m0); // > 1 by the hypothesis
    const double big_l = std::log(base) / std::log(ep);
    const double mu_upper =
        big_l < 1.0 ? 1.0 / (1.0 - big_l) : std::numeric_limits<double>::infinity();
    if (!(mu > 1.0) || !(mu < mu_upper))
        throw ConfigError("iteration constants: mu must lie in (1, mu_upper)");

    IterationDerived out;
    out.mu = mu;
    out.mu_upper = mu_upper;
    out.d = 1.0 - (1.0 - big_l) * mu;
    out.f_const = a * std::pow(base, 1.0 - std::log(delta1) / std::log(ep));
    const double target = std::log2(out.f_const) / out.d;
    out.n0 = robust_floor(std::log(target) / std::log(mu));

    // survivor product: the j = n0 factor is nonpositive by n0's definition
    // (F 2^(-d mu^n0) >= 1), so the product runs from n0 + 1, where every
    // factor is in (0,1). Terms decay super-geometrically; stop once the
    // remaining tail cannot move the product at double precision.
    double prod = 1.0;
    double power = std::pow(mu, static_cast<double>(out.n0 + 1));
    for (int j = 0; j < 512; ++j) {
        double term = out.f_const * std::pow(2.0, -out.d * power);
        if (term >= 1.0)
            throw ConfigError("iteration constants: survivor factor fell outside (0,1)");
        if (term < 1e-17) break;
        prod *= 1.0 - term;
        power *= mu;
    }
    out.c1_lower = prod;
    return out;
}

int k_of_measure(double measure_ratio, const ExpansionBounds& bounds, double delta1) {
    if (!(bounds.e_plus > 1.0)) throw ConfigError("k_of_measure: e_plus must exceed 1");
    if (!(measure_ratio > 0.0)) throw ConfigError("k_of_measure: ratio must be positive");
    if (measure_ratio > delta1)
        throw ConfigError("k_of_measure: ratio exceeds delta1");
    double v = -std::log(measure_ratio / delta1) / std::log(bounds.e_plus);
    int k = robust_floor(v);
    return k < 0 ? 0 : k;
}

} // namespace cmllab
