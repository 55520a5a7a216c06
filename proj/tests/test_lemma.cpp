#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmllab/lemma.hpp"
#include "cmllab/orbit.hpp"
#include "cmllab/rng.hpp"

using namespace cmllab;

namespace {

LatticeSystem tent(std::size_t m, double c) {
    return LatticeSystem::make(InteriorMap1D::standard_tent(), CouplingSpec::all_to_all(m), c);
}

} // namespace

TEST_CASE("set-mode bounds collapse to the determinant line") {
    // 4(1-2c) at c = 0.1, matching the jacobian determinant on any cell
    auto b = expansion_bounds(tent(2, 0.1), BoundsMode::MeasurableSet);
    CHECK(b.e_plus == doctest::Approx(3.2).epsilon(1e-14));
    CHECK(b.e_minus == doctest::Approx(3.2).epsilon(1e-14));

    auto b3 = expansion_bounds(tent(3, 0.05), BoundsMode::MeasurableSet);
    double det = mat_det(tent(3, 0.05).update_matrix());
    CHECK(b3.e_plus == doctest::Approx(8.0 * det).epsilon(1e-12));
}

TEST_CASE("curve-mode bounds are the stretch extremes") {
    auto b0 = expansion_bounds(tent(2, 0.0), BoundsMode::Curve);
    CHECK(b0.e_plus == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(b0.e_minus == doctest::Approx(2.0).epsilon(1e-13));

    auto b = expansion_bounds(tent(2, 0.1), BoundsMode::Curve);
    CHECK(b.e_plus == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(b.e_minus == doctest::Approx(1.6).epsilon(1e-12));

    // perturbed slopes widen the pair by the certified derivative bound
    MapOptions opt;
    opt.eta = 0.05;
    PerturbationSpec g;
    g.coeffs = {-1e-3};
    auto sys = LatticeSystem::make(InteriorMap1D::perturbed_tent(0.1, g, opt),
                                   CouplingSpec::all_to_all(2), 0.1);
    double c1bar = 1e-3 * 3.14159265358979323846;
    auto bp = expansion_bounds(sys, BoundsMode::Curve);
    CHECK(bp.e_plus == doctest::Approx(1.9 + c1bar).epsilon(1e-12));
    CHECK(bp.e_minus == doctest::Approx(0.8 * (1.9 - c1bar)).epsilon(1e-12));
}

TEST_CASE("closed forms match jacobian sampling") {
    Rng rng(17);
    for (auto [m, c] : {std::pair<std::size_t, double>{2, 0.12}, {3, 0.05}}) {
        auto sys = tent(m, c);
        auto set = expansion_bounds(sys, BoundsMode::MeasurableSet);
        auto cur = expansion_bounds(sys, BoundsMode::Curve);
        double det_lo = 1e300, det_hi = 0, sig_lo = 1e300, sig_hi = 0;
        double x[kMaxNodes];
        for (int it = 0; it < 100000; ++it) {
            for (std::size_t i = 0; i < m; ++i) {
                x[i] = rng.uniform();
                if (x[i] == 0.5) x[i] = 0.25;
            }
            auto j = jacobian(sys, x);
            double d = std::fabs(mat_det(j));
            det_lo = std::min(det_lo, d);
            det_hi = std::max(det_hi, d);
            auto s = singular_range(j);
            sig_lo = std::min(sig_lo, s.sigma_min);
            sig_hi = std::max(sig_hi, s.sigma_max);
        }
        CHECK(det_hi <= set.e_plus + 1e-9);
        CHECK(det_lo >= set.e_minus - 1e-9);
        CHECK(det_hi == doctest::Approx(set.e_plus).epsilon(1e-9));
        CHECK(sig_hi <= cur.e_plus + 1e-9);
        CHECK(sig_lo >= cur.e_minus - 1e-9);
        CHECK(sig_hi == doctest::Approx(cur.e_plus).epsilon(1e-9));
        CHECK(sig_lo == doctest::Approx(cur.e_minus).epsilon(1e-9));
    }
}

TEST_CASE("iteration constants at the uncoupled point") {
    ExpansionBounds b{2.0, 2.0, BoundsMode::Curve};
    auto out = derive_iteration_constants(b, 4.0, 6, 0x1.0p-16, 2.0);

    CHECK(std::fabs(out.mu_upper - 3.0) < 1e-12);
    CHECK(std::fabs(out.d - 1.0 / 3.0) < 1e-12);
    // F = 4 (2^(2/3))^(1+16) = 2^(40/3)
    CHECK(out.f_const == doctest::Approx(std::pow(2.0, 40.0 / 3.0)).epsilon(1e-12));
    // floor(log2(log2(F)/d)) = floor(log2(40)) = 5
    CHECK(out.n0 == 5);

    // independent product oracle, a few terms past the stopping point
    double prod = 1.0;
    for (int j = 6; j <= 20; ++j)
        prod *= 1.0 - std::pow(2.0, 40.0 / 3.0 - std::pow(2.0, j) / 3.0);
    CHECK(out.c1_lower == doctest::Approx(prod).epsilon(1e-12));
    CHECK(out.c1_lower > 0.0);
    CHECK(out.c1_lower < 1.0);

    auto wide = derive_iteration_constants(b, 4.0, 6, 0x1.0p-16, 2.5);
    CHECK(std::fabs(wide.d - 1.0 / 6.0) < 1e-12);
}

TEST_CASE("iteration constants reject offside inputs") {
    ExpansionBounds b{2.0, 2.0, BoundsMode::Curve};
    CHECK_THROWS_AS(derive_iteration_constants(b, 4.0, 6, 0x1.0p-16, 3.0), ConfigError);
    CHECK_THROWS_AS(derive_iteration_constants(b, 4.0, 6, 0x1.0p-16, 1.0), ConfigError);
    CHECK_THROWS_AS(derive_iteration_constants(b, 64.0, 6, 0x1.0p-16, 2.0), ConfigError);
    CHECK_THROWS_AS(derive_iteration_constants(b, 0.5, 6, 0x1.0p-16, 2.0), ConfigError);
    CHECK_THROWS_AS(derive_iteration_constants(b, 4.0, 0, 0x1.0p-16, 2.0), ConfigError);
    CHECK_THROWS_AS(derive_iteration_constants(b, 4.0, 6, 1.5, 2.0), ConfigError);
    ExpansionBounds flat{1.0, 1.0, BoundsMode::Curve};
    CHECK_THROWS_AS(derive_iteration_constants(flat, 4.0, 6, 0x1.0p-16, 2.0), ConfigError);
}

TEST_CASE("measure-to-depth conversion") {
    ExpansionBounds b{2.0, 1.6, BoundsMode::Curve};
    double d1 = 0x1.0p-16;
    CHECK(k_of_measure(d1, b, d1) == 0);
    CHECK(k_of_measure(d1 / 2.0, b, d1) == 1);
    CHECK(k_of_measure(0x1.0p-30, b, d1) == 14);
    CHECK(k_of_measure(0x1.0p-40, b, d1) == 24);
    CHECK_THROWS_AS(k_of_measure(2.0 * d1, b, d1), ConfigError);
    CHECK_THROWS_AS(k_of_measure(0.0, b, d1), ConfigError);
}
