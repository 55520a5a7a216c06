#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmllab/maps.hpp"
#include "cmllab/orbit.hpp"
#include "cmllab/rng.hpp"

using namespace cmllab;

namespace {

LatticeSystem two_node(double c, InteriorMap1D f = InteriorMap1D::standard_tent()) {
    return LatticeSystem::make(std::move(f), CouplingSpec::all_to_all(2), c);
}

// independent oracle: literal two-node update x1' = (1-c) f(x1) + c f(x2)
void eq2_oracle(const InteriorMap1D& f, double c, double x1, double x2, double* out) {
    double f1 = f.eval(x1), f2 = f.eval(x2);
    out[0] = (1.0 - c) * f1 + c * f2;
    out[1] = c * f1 + (1.0 - c) * f2;
}

} // namespace

TEST_CASE("standard tent branch values") {
    auto f = InteriorMap1D::standard_tent();
    CHECK(f.eval(0.5) == 1.0);
    CHECK(f.eval(0.25) == 0.5);
    CHECK(f.eval(0.75) == 0.5);
    CHECK(f.eval(0.0) == 0.0);
    CHECK(f.eval(1.0) == 0.0);
    CHECK(f.eval_derivative(0.3) == 2.0);
    CHECK(f.eval_derivative(0.7) == -2.0);
    CHECK_THROWS_AS(f.eval_derivative(0.5), std::invalid_argument);
    CHECK_THROWS_AS(f.eval(1.5), std::invalid_argument);
    CHECK_THROWS_AS(f.eval(-0.1), std::invalid_argument);
}

TEST_CASE("flattened tent without perturbation") {
    auto f = InteriorMap1D::perturbed_tent(0.1, PerturbationSpec{});
    CHECK(f.eval(0.3) == doctest::Approx(0.62).epsilon(1e-15)); // 1 - 1.9*0.2
    CHECK(f.eval(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.eval(0.0) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(f.slope_min() == doctest::Approx(1.9));
    CHECK(f.slope_max() == doctest::Approx(1.9));
}

TEST_CASE("sine perturbation derivative matches the closed form") {
    // this parameter set sits outside the default caps (its certified C2
    // bound is ~0.014 and its peak tops 1), so opt out explicitly
    MapOptions opt;
    opt.eta = 0.05;
    opt.enforce_range = false;
    PerturbationSpec g;
    g.coeffs = {1e-3};
    auto f = InteriorMap1D::perturbed_tent(0.0, g, opt);
    CHECK_FALSE(f.range_certified());
    double pi = 3.14159265358979323846;
    double expect = 2.0 + 1e-3 * pi * std::cos(pi * 0.25);
    CHECK(f.eval_derivative(0.25) == doctest::Approx(expect).epsilon(1e-14));

    // derivative oracle: central difference on the same branch
    double h = 1e-7;
    double num = (f.eval(0.25 + h) - f.eval(0.25 - h)) / (2 * h);
    CHECK(num == doctest::Approx(f.eval_derivative(0.25)).epsilon(1e-7));

    // the mirrored coefficient keeps the peak below 1 and passes validation
    PerturbationSpec gneg;
    gneg.coeffs = {-1e-3};
    MapOptions opt2;
    opt2.eta = 0.05;
    auto fneg = InteriorMap1D::perturbed_tent(0.0, gneg, opt2);
    CHECK(fneg.range_certified());
    CHECK(fneg.eval_derivative(0.25) ==
          doctest::Approx(2.0 - 1e-3 * pi * std::cos(pi * 0.25)).epsilon(1e-14));
}

TEST_CASE("default caps reject out-of-family perturbations") {
    PerturbationSpec g;
    g.coeffs = {1e-3}; // C2 bound 1e-3 (1 + pi + pi^2) ≈ 0.014 > 1e-3
    CHECK_THROWS_AS(InteriorMap1D::perturbed_tent(0.0, g, MapOptions{}), ConfigError);
    CHECK_THROWS_AS(InteriorMap1D::perturbed_tent(0.2, PerturbationSpec{}, MapOptions{}),
                    ConfigError);

    // positive g at the peak pushes f(1/2) above 1: range check must fire
    PerturbationSpec gp;
    gp.coeffs = {5e-5}; // C2 bound ≈ 7e-4 < eta, but f(1/2) = 1 + 5e-5
    CHECK_THROWS_AS(InteriorMap1D::perturbed_tent(0.0, gp, MapOptions{}), ConfigError);
    MapOptions loose;
    loose.enforce_range = false;
    CHECK_FALSE(InteriorMap1D::perturbed_tent(0.0, gp, loose).range_certified());
}

TEST_CASE("general tent branches join continuously at the kink") {
    auto f = InteriorMap1D::general_tent(0.04, 0.03);
    double kink = 0.5 - 0.03;
    CHECK(f.kink() == doctest::Approx(kink));
    // slopes: left 2 - a1, right (1-2a2)/(1+2a2)(2-a1)
    CHECK(f.eval_derivative(0.2) == doctest::Approx(1.96).epsilon(1e-15));
    CHECK(f.eval_derivative(0.8) == doctest::Approx(-(0.94 / 1.06) * 1.96).epsilon(1e-14));
    double below = f.eval_on_branch(kink, 0);
    double above = f.eval_on_branch(kink, 1);
    CHECK(std::fabs(below - above) < 1e-12); // algebraically equal
    CHECK(f.eval(0.0) == 0.0);
    CHECK(f.eval(1.0) == 0.0);

    CHECK_THROWS_AS(InteriorMap1D::general_tent(0.2, 0.0), ConfigError);
    // negative alpha1 steepens the left branch; peak tops 1 and must be caught
    CHECK_THROWS_AS(InteriorMap1D::general_tent(-0.05, 0.0), ConfigError);
}

TEST_CASE("two-node step matches the literal update") {
    auto sys = two_node(0.1);
    std::vector<double> x{0.2, 0.6};
    auto y = step(sys, x);
    CHECK(y[0] == doctest::Approx(0.44).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(0.76).epsilon(1e-15));

    // against the literal formulas over random states and couplings
    Rng rng(42);
    for (int it = 0; it < 20000; ++it) {
        double c = rng.uniform(0.0, 0.5);
        auto s = two_node(c);
        std::vector<double> p{rng.uniform(), rng.uniform()};
        auto q = step(s, p);
        double lit[2];
        eq2_oracle(s.map, c, p[0], p[1], lit);
        CHECK(std::fabs(q[0] - lit[0]) <= 1e-15 * std::max(1.0, std::fabs(lit[0])));
        CHECK(std::fabs(q[1] - lit[1]) <= 1e-15 * std::max(1.0, std::fabs(lit[1])));
    }
}

TEST_CASE("uncoupled limit applies the map componentwise") {
    auto sys = LatticeSystem::make(InteriorMap1D::standard_tent(), CouplingSpec::path(4), 0.0);
    std::vector<double> x{0.1, 0.3, 0.6, 0.9};
    auto y = step(sys, x);
    for (int i = 0; i < 4; ++i) CHECK(y[i] == sys.map.eval(x[i]));
}

TEST_CASE("diagonal states stay diagonal bit-for-bit") {
    Rng rng(7);
    for (std::size_t m : {2u, 3u, 5u, 8u}) {
        auto sys = LatticeSystem::make(InteriorMap1D::standard_tent(),
                                       CouplingSpec::all_to_all(m), 0.3 / double(m));
        for (int it = 0; it < 5000; ++it) {
            double v = rng.uniform();
            std::vector<double> x(m, v);
            auto y = step(sys, x);
            double fv = sys.map.eval(v);
            for (std::size_t i = 0; i < m; ++i) CHECK(y[i] == fv);
        }
    }
}

TEST_CASE("step preserves the coordinate mean") {
    Rng rng(11);
    for (std::size_t m : {2u, 3u, 8u}) {
        auto sys = LatticeSystem::make(InteriorMap1D::standard_tent(), CouplingSpec::path(m),
                                       0.12);
        for (int it = 0; it < 5000; ++it) {
            std::vector<double> x(m), fx(m);
            for (auto& v : x) v = rng.uniform();
            for (std::size_t i = 0; i < m; ++i) fx[i] = sys.map.eval(x[i]);
            auto y = step(sys, x);
            double my = 0, mf = 0;
            for (std::size_t i = 0; i < m; ++i) {
                my += y[i];
                mf += fx[i];
            }
            CHECK(std::fabs(my - mf) / double(m) < 1e-12);
        }
    }
}

TEST_CASE("range preserved under nonnegative weights") {
    Rng rng(13);
    const int rounds = 250000; // x4 system shapes = 1e6 random steps
    for (std::size_t m : {2u, 3u, 5u, 8u}) {
        auto sys = LatticeSystem::make(InteriorMap1D::standard_tent(),
                                       CouplingSpec::all_to_all(m), 0.9 / double(m));
        REQUIRE(sys.nonneg_weights);
        std::vector<double> x(m), y(m);
        long violations = 0;
        for (int it = 0; it < rounds; ++it) {
            for (auto& v : x) v = rng.uniform();
            step(sys, x.data(), y.data());
            for (std::size_t i = 0; i < m; ++i)
                if (!(y[i] >= 0.0 && y[i] <= 1.0)) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("distinct coordinates never merge into one double") {
    // the tent folds x and 1-x onto the same value, so a pair straddling the
    // kink with x0 + x1 == 1 exactly would land both coordinates on the same
    // double; the step must displace such ties or long orbits get absorbed
    // into the diagonal far below the true synchronization threshold
    Rng rng(29);
    for (double c : {0.1, 0.2, 0.24, 0.245, 0.3}) {
        auto sys = two_node(c);
        std::vector<double> y(2);
        for (int it = 0; it < 20000; ++it) {
            double x0 = rng.uniform();
            std::vector<double> x{x0, 1.0 - x0}; // exact fold-line pair
            if (x[0] == x[1]) continue;
            step(sys, x.data(), y.data());
            CHECK(y[0] != y[1]);
        }
        // and generic near-diagonal pairs, where rounding alone could merge
        for (int it = 0; it < 20000; ++it) {
            double x0 = rng.uniform();
            double x1 = x0 + std::ldexp(rng.uniform(-1.0, 1.0), -(int)rng.below(50) - 2);
            if (x1 < 0 || x1 > 1 || x0 == x1) continue;
            std::vector<double> x{x0, x1};
            step(sys, x.data(), y.data());
            CHECK(y[0] != y[1]);
        }
    }
}

TEST_CASE("no spurious synchronization below the coupling threshold") {
    // c values whose bit patterns used to excite exact reflection rides; each
    // rode a fold line until the orbit was absorbed well within 1e6 steps
    for (double c : {0.24, 0.245}) {
        auto sys = two_node(c);
        for (std::uint64_t s : {0ull, 1ull, 2ull, 3ull}) {
            Rng rng = Rng::stream(2026, s);
            std::vector<double> x{rng.uniform(), rng.uniform()}, y(2);
            std::uint64_t run = 0, worst = 0;
            for (int n = 0; n < 1000000; ++n) {
                step(sys, x.data(), y.data());
                x.swap(y);
                if (std::fabs(x[0] - x[1]) <= 1e-9 * std::sqrt(2.0)) {
                    worst = std::max(worst, ++run);
                } else {
                    run = 0;
                }
            }
            CHECK(x[0] != x[1]);
            CHECK(worst < 1000); // never "synchronized" per the detector
        }
    }
}

TEST_CASE("escape raises on marked systems") {
    SmallMat a = SmallMat::zero(2);
    a.at(0, 0) = -2; a.at(0, 1) = 2;
    a.at(1, 0) = 2;  a.at(1, 1) = -2;
    auto sys = LatticeSystem::make(InteriorMap1D::standard_tent(),
                                   CouplingSpec::from_matrix(a), 0.75);
    CHECK_FALSE(sys.nonneg_weights);
    std::vector<double> x{0.1, 0.5};
    CHECK_THROWS_AS(step(sys, x), EscapeError);
}

TEST_CASE("branch signatures follow the half-open convention") {
    auto sys2 = two_node(0.1);
    std::vector<double> a{0.2, 0.7};
    CHECK(branch_signature(sys2, a) == 0b10u);
    std::vector<double> b{0.5, 0.5};
    CHECK(branch_signature(sys2, b) == 0b11u);
    auto sys3 = LatticeSystem::make(InteriorMap1D::standard_tent(),
                                    CouplingSpec::all_to_all(3), 0.05);
    std::vector<double> c{0.49, 0.49, 0.51};
    CHECK(branch_signature(sys3, c) == 0b100u);
}

TEST_CASE("jacobian determinant and entries") {
    auto sys = two_node(0.1);
    double x[2] = {0.3, 0.4};
    CHECK(jacobian_det(sys, x) == doctest::Approx(3.2).epsilon(1e-14)); // 4(1-2c)

    // numeric oracle: central differences of the public step
    auto j = jacobian(sys, x);
    double h = 1e-7;
    for (int col = 0; col < 2; ++col) {
        double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
        xp[col] += h;
        xm[col] -= h;
        double yp[2], ym[2];
        step(sys, xp, yp);
        step(sys, xm, ym);
        for (int row = 0; row < 2; ++row) {
            double num = (yp[row] - ym[row]) / (2 * h);
            CHECK(j.at(row, col) == doctest::Approx(num).epsilon(1e-6));
        }
    }

    // c = 0: diag(+/-2), |det| = 2^m
    auto syso = LatticeSystem::make(InteriorMap1D::standard_tent(),
                                    CouplingSpec::all_to_all(3), 0.0);
    double x3[3] = {0.2, 0.8, 0.3};
    CHECK(std::fabs(jacobian_det(syso, x3)) == doctest::Approx(8.0).epsilon(1e-14));

    // m = 3 with small coupling: det = 2^3 det(I + cA), numeric determinant oracle
    auto sys3 = LatticeSystem::make(InteriorMap1D::standard_tent(),
                                    CouplingSpec::all_to_all(3), 0.05);
    double xs[3] = {0.1, 0.2, 0.3};
    CHECK(jacobian_det(sys3, xs) ==
          doctest::Approx(8.0 * mat_det(sys3.update_matrix())).epsilon(1e-12));

    double bad[2] = {0.5, 0.3};
    CHECK_THROWS_WITH_AS(jacobian(sys, bad) /* kink hit */,
                         doctest::Contains("coordinate(s) 0"), std::invalid_argument);
}

TEST_CASE("coupling construction validates shape") {
    auto all = CouplingSpec::all_to_all(4);
    auto pth = CouplingSpec::path(5);
    for (auto* s : {&all, &pth})
        for (std::size_t i = 0; i < s->m; ++i) {
            double row = 0;
            for (std::size_t j = 0; j < s->m; ++j) {
                row += s->A.at(i, j);
                CHECK(s->A.at(i, j) == s->A.at(j, i));
            }
            CHECK(row == 0.0);
        }

    SmallMat bad = SmallMat::zero(2);
    bad.at(0, 0) = -1; bad.at(0, 1) = 1;
    bad.at(1, 0) = 0.5; bad.at(1, 1) = -1;
    CHECK_THROWS_AS(CouplingSpec::from_matrix(bad), ConfigError);

    SmallMat rowbad = SmallMat::zero(2);
    rowbad.at(0, 0) = -1; rowbad.at(0, 1) = 0.5;
    rowbad.at(1, 0) = 0.5; rowbad.at(1, 1) = -1;
    CHECK_THROWS_WITH_AS(CouplingSpec::from_matrix(rowbad), doctest::Contains("row 0"),
                         ConfigError);

    CHECK_THROWS_AS(LatticeSystem::make(InteriorMap1D::standard_tent(),
                                        CouplingSpec::all_to_all(2), 1.5),
                    ConfigError);
}

TEST_CASE("content hash separates systems and sticks") {
    auto a = two_node(0.1);
    auto b = two_node(0.1);
    auto c = two_node(0.2);
    CHECK(a.content_hash == b.content_hash);
    CHECK(a.content_hash != c.content_hash);
}
