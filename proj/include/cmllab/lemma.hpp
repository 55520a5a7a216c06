#pragma once
#include "cmllab/maps.hpp"

namespace cmllab {

// Per-step expansion bounds of the lattice update. MeasurableSet mode bounds
// volume growth via |det JT|; Curve mode bounds length growth via the extreme
// stretch factors of JT (spectral norm up, minimal stretch down).
enum class BoundsMode { MeasurableSet, Curve };

struct ExpansionBounds {
    double e_plus = 0;
    double e_minus = 0;
    BoundsMode mode = BoundsMode::MeasurableSet;
};

// Closed forms over the finitely many branch-sign patterns:
//   MeasurableSet: E+- = |det(I + cA)| * nu_+-^m
//   Curve:         E+  = nu_+ * max_pattern sigma_max((I+cA) diag(signs)),
//                  E-  = nu_- * min_pattern sigma_min(...)
// For tent slopes the sign pattern is an orthogonal reflection and drops out.
ExpansionBounds expansion_bounds(const LatticeSystem& sys, BoundsMode mode);

// Derived constants of the survivor-mass iteration argument, all downstream
// of one base ratio L = log_{E+}(E- / a^(1/m0)):
//   mu_upper = 1 / (1 - L)                  (admissible mu sits in (1, mu_upper))
//   d        = 1 - (1 - L) mu               (> 0 inside the interval)
//   F        = a (E-/a^(1/m0))^(1 - log_{E+} delta1)
//   N0       = floor(log_mu(log2(F) / d))
//   c1_lower = prod_{j > N0} (1 - F 2^(-d mu^j))
struct IterationDerived {
    double mu = 0;
    double d = 0;
    double f_const = 0;
    int n0 = 0;
    double mu_upper = 0;
    double c1_lower = 0;
};

// Throws ConfigError when a >= e_minus^m0, mu falls outside (1, mu_upper),
// or the bounds cannot serve as log bases (e_plus <= 1, e_minus <= 0).
IterationDerived derive_iteration_constants(const ExpansionBounds& bounds, double a, int m0,
                                            double delta1, double mu);

// Iteration count floor(-log_{E+}(ratio / delta1)) for a measure ratio in
// (0, delta1]. ConfigError above delta1.
int k_of_measure(double measure_ratio, const ExpansionBounds& bounds, double delta1);

} // namespace cmllab
