// Release gate. Each numbered check prints exactly one [PASS]/[FAIL] line
// with the measured quantities; the process exits nonzero if any check
// fails. Runtime is dominated by the long-orbit ensembles (minutes on one
// core).
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cmllab/curve.hpp"
#include "cmllab/lemma.hpp"
#include "cmllab/maps.hpp"
#include "cmllab/orbit.hpp"
#include "cmllab/polytope.hpp"
#include "cmllab/rng.hpp"
#include "cmllab/sweep.hpp"

using namespace cmllab;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

void begin() { g_t0 = std::chrono::steady_clock::now(); }

void report(int idx, const char* name, bool pass, const std::string& detail) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - g_t0).count();
    std::printf("[%s] %2d. %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", idx, name,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v, int prec = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

LatticeSystem tent2(double c) {
    return LatticeSystem::make(InteriorMap1D::standard_tent(), CouplingSpec::all_to_all(2), c);
}

std::vector<double> draw_state(Rng& rng, std::size_t m) {
    std::vector<double> x(m);
    for (double& v : x) v = rng.uniform();
    return x;
}

// slope +-1 segment of the given length placed inside one quadrant cell
Polyline cell_segment(Rng& rng, double len) {
    const double h = len / std::sqrt(2.0);
    const double bx = rng.below(2) ? 0.5 : 0.0;
    const double by = rng.below(2) ? 0.5 : 0.0;
    const double x0 = bx + 0.01 + rng.uniform() * (0.48 - h - 0.01);
    const double s = rng.below(2) ? 1.0 : -1.0;
    double y0 = by + 0.01 + rng.uniform() * (0.48 - h - 0.01);
    if (s < 0) y0 += h;
    return Polyline::segment(x0, y0, x0 + h, y0 + s * h);
}

// ------------------------------------------------------------ criterion 1

void criterion_1() {
    begin();
    SweepSpec spec;
    spec.c_values = SweepSpec::grid(0.22, 0.28, 0.01);
    spec.seeds_per_c = 64;
    spec.orbit.n_steps = 1000000;
    spec.orbit.burn_in = 1000;
    spec.orbit.sync_tol = 1e-9;
    spec.orbit.sync_hold = 1000;
    spec.predicate = SweepPredicate::sync_within(1e-9, 1000000);
    spec.master_seed = 9001;
    spec.threads = 0;

    LatticeSystem tmpl = tent2(0.0);
    BifurcationResult res = bifurcation_scan(tmpl, spec);
    CStarRefinement ref = refine_cstar(tmpl, res.c_star_lo, res.c_star_hi, spec, 5);

    const bool pass = ref.c_star >= 0.24 && ref.c_star <= 0.26;
    report(1, "bifurcation localization", pass,
           "refined c* = " + fmt(ref.c_star) + " +- " + fmt(ref.width / 2, 3) +
               " (scan bracket [" + fmt(res.c_star_lo) + ", " + fmt(res.c_star_hi) +
               "]), required within [0.24, 0.26]");
}

// ------------------------------------------------------------ criterion 2

void criterion_2() {
    begin();
    SweepSpec spec;
    spec.c_values = {0.1};
    spec.seeds_per_c = 100;
    spec.orbit.n_steps = 10000000;
    spec.orbit.burn_in = 1000;
    spec.orbit.eps = 1e-6;
    spec.orbit.gamma = 1e-3;
    spec.predicate = SweepPredicate::intermittency(1e-4, 0x1.0p-20);
    spec.predicate.horizon = 10000000;
    spec.master_seed = 9002;
    spec.threads = 0;

    BifurcationResult res = bifurcation_scan(tent2(0.0), spec);
    std::size_t good = 0;
    for (const RunRow& r : res.runs)
        if (!r.escaped && r.min_dist < 1e-4 && r.max_dist > 0x1.0p-20 && r.alternations >= 1)
            ++good;

    report(2, "intermittent alternation at weak coupling", good >= 99,
           std::to_string(good) + "/100 seeds with min_dist < 1e-4, max_dist > 2^-20, and at "
                                  "least one order/disorder alternation; required >= 99");
}

// ------------------------------------------------------------ criterion 3

void criterion_3() {
    begin();
    LatticeSystem sys = tent2(0.3);
    std::size_t good = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng = Rng::stream(9003, s);
        double x[2] = {rng.uniform(), rng.uniform()}, y[2];
        bool reached = false, violated = false;
        for (std::uint64_t n = 0; n < 100000; ++n) {
            step(sys, x, y);
            x[0] = y[0];
            x[1] = y[1];
            const double d = dist_syn(x, 2);
            if (!reached && d < 1e-9) reached = true;
            else if (reached && d > 1e-8) violated = true;
        }
        if (reached && !violated) ++good;
    }
    report(3, "synchronization regime", good >= 99,
           std::to_string(good) +
               "/100 seeds at c = 0.3 reach dist < 1e-9 within 1e5 steps and never exceed 1e-8 "
               "afterwards; required >= 99");
}

// ------------------------------------------------------------ criterion 4

void criterion_4() {
    begin();
    // The factor is measured through the public update on caller states, so
    // the quotient carries the update's absolute output rounding (~1e-16)
    // divided by the input separation. Separations are kept >= 0.01; the
    // measurement conditioning is then ~1e-14, well inside the 1e-12 budget,
    // and the law itself is checked across the admissible range.
    double worst = 0;
    bool all_ok = true;
    for (double c : {0.0, 0.05, 0.1, 0.25}) {
        LatticeSystem sys = tent2(c);
        Rng rng = Rng::stream(9004, static_cast<std::uint64_t>(c * 1000));
        for (int k = 0; k < 1000000; ++k) {
            const double sep = rng.uniform(0.01, 0.2);
            const bool right = rng.below(2) != 0;
            const double lo = right ? 0.501 : 0.001;
            const double hi = right ? 0.999 : 0.499;
            const double u = rng.uniform(lo, hi - sep);
            TransverseCheck tc = transverse_factor_check(sys, {u, u + sep});
            const double rel = std::fabs(tc.observed / tc.predicted_low - 1.0);
            worst = std::max(worst, rel);
            if (rel >= 1e-12) all_ok = false;
        }
    }
    report(4, "exact transverse contraction law", all_ok,
           "worst |observed/2(1-2c) - 1| = " + fmt(worst, 3) +
               " over 4 x 1e6 same-branch pairs, c in {0, 0.05, 0.1, 0.25}; required < 1e-12");
}

// ------------------------------------------------------------ criterion 5

void criterion_5() {
    begin();
    Rng rng = Rng::stream(9005, 0);
    std::size_t worst = 0, over = 0;
    for (int k = 0; k < 1000; ++k) {
        const double c = rng.uniform(0.0, 0.05);
        const double len = std::exp2(rng.uniform(-18.0, -16.000001)); // < 2^-16
        const double h = len / std::sqrt(2.0);
        const double x0 = rng.uniform(0.02, 0.98 - h);
        const double s = rng.below(2) ? 1.0 : -1.0;
        const double y0 = rng.uniform(0.02 + (s < 0 ? h : 0.0), 0.98 - (s > 0 ? h : 0.0));
        ComponentForest f =
            iterate_curve(tent2(c), Polyline::segment(x0, y0, x0 + h, y0 + s * h), 6);
        const std::size_t n = f.levels.back().size();
        worst = std::max(worst, n);
        if (n > 4) ++over;
    }
    report(5, "component budget for short segments", over == 0,
           "1000 slope +-1 segments shorter than 2^-16, depth 6: max component count " +
               std::to_string(worst) + ", " + std::to_string(over) +
               " over the budget of 4; required none");
}

// ------------------------------------------------------------ criterion 6

void criterion_6() {
    begin();
    Rng rng = Rng::stream(9006, 0);
    std::size_t hits = 0, grown = 0, fails = 0, under = 0;
    double worst_margin = 1e300;
    for (int k = 0; k < 1000; ++k) {
        const double c = rng.uniform(0.0, 0.05);
        const double len = std::exp2(rng.uniform(-15.999999, -15.000001)); // in [2^-16, 2^-15]
        GrowthOutcome out = growth_step(tent2(c), cell_segment(rng, len));
        switch (out.kind) {
        case GrowthKind::DiagonalHit: ++hits; break;
        case GrowthKind::Grown: {
            ++grown;
            const double floor_f = 1.0 + growth_excess(c) - 1e-6;
            worst_margin = std::min(worst_margin, out.growth_factor - floor_f);
            if (out.growth_factor < floor_f) ++under;
            break;
        }
        case GrowthKind::Fail: ++fails; break;
        }
    }
    report(6, "grow-or-hit dichotomy", fails == 0 && under == 0,
           "1000 single-cell segments, c <= 0.05: " + std::to_string(hits) + " diagonal hits, " +
               std::to_string(grown) + " grown (min factor margin " + fmt(worst_margin, 3) +
               " above 1 + e - 1e-6), " + std::to_string(fails) + " fail; required zero fail");
}

// ------------------------------------------------------------ criterion 7

void criterion_7() {
    begin();
    // Stage audit of the survivor-mass iteration. The base scale and
    // exponent (delta1 = 2^-4, mu = 1.2) put the first nonvacuous stage at
    // segment lengths around 2^-18..2^-11, which binary64 coordinates
    // resolve comfortably; the canonical parameters push the nonvacuous
    // stages below the representable length scale and cannot be audited on
    // absolute coordinates.
    Rng rng = Rng::stream(9007, 0);
    const double root2 = std::sqrt(2.0);
    bool all_ok = true;
    double worst_gap = 1e300;
    for (int k = 0; k < 100; ++k) {
        const double c = rng.uniform(0.0, 0.05);
        LatticeSystem sys = tent2(c);
        ExpansionBounds bounds = expansion_bounds(sys, BoundsMode::Curve);
        IterationDerived der = derive_iteration_constants(bounds, 4.0, 6, 0x1.0p-4, 1.2);
        const int n_stage = der.n0 + 2;
        const double mu_n = std::pow(1.2, n_stage);
        const double lg = -mu_n * (1.0 + 0.2 * rng.uniform()); // log2 ratio in [-mu^{N+1}, -mu^N]
        const double ratio = std::exp2(lg);
        const int depth = k_of_measure(ratio, bounds, 0x1.0p-4);

        ComponentForest f = iterate_curve(sys, cell_segment(rng, ratio * root2), depth);
        const double threshold = std::exp2(-mu_n) * root2;
        double mass = 0;
        for (const CurveComponent& comp : f.levels.back())
            if (comp.curve.length() >= threshold) mass += comp.t1 - comp.t0;

        const double bound = 1.0 - der.f_const * std::exp2(-der.d * mu_n);
        worst_gap = std::min(worst_gap, mass - bound);
        if (mass < bound - 1e-3) all_ok = false;
    }

    // closed-form constants at the uncoupled point
    IterationDerived der0 = derive_iteration_constants(
        expansion_bounds(tent2(0.0), BoundsMode::Curve), 4.0, 6, 0x1.0p-16, 2.0);
    const bool consts_ok =
        std::fabs(der0.d - 1.0 / 3.0) < 1e-12 && std::fabs(der0.mu_upper - 3.0) < 1e-12;

    report(7, "survivor-mass iteration audit", all_ok && consts_ok,
           "100 staged forests: worst survivor mass sits " + fmt(worst_gap, 3) +
               " above the stage bound (slack 1e-3); constants at c = 0: d = " + fmt(der0.d, 12) +
               " (1/3), mu_upper = " + fmt(der0.mu_upper, 12) + " (3)");
}

// ------------------------------------------------------------ criterion 8

void criterion_8() {
    begin();
    Rng rng = Rng::stream(9008, 0);
    std::size_t hit2 = 0, hit3 = 0, bad = 0;

    for (int k = 0; k < 10000; ++k) { // planar hulls, exact geometry
        const double c = rng.uniform(0.0, 0.05);
        const double bx = rng.below(2) ? 0.5 : 0.0, by = rng.below(2) ? 0.5 : 0.0;
        ConvexRegion region = [&] {
            for (;;) {
                std::vector<std::pair<double, double>> pts(5);
                for (auto& p : pts)
                    p = {bx + rng.uniform(0.02, 0.48), by + rng.uniform(0.02, 0.48)};
                try {
                    return ConvexRegion::polygon(pts, 9100 + k);
                } catch (const std::exception&) { /* degenerate draw, retry */
                }
            }
        }();
        CenterPointOutcome out = center_point_check(tent2(c), region);
        if (out.all_cells_hit) {
            ++hit2;
            if (!out.center_inside) ++bad;
        }
    }

    LatticeSystem sys3 =
        LatticeSystem::make(InteriorMap1D::standard_tent(), CouplingSpec::all_to_all(3), 0.04);
    for (int k = 0; k < 1000; ++k) { // m = 3 boxes, exact vertex enumeration
        std::vector<double> lo(3), hi(3);
        for (int i = 0; i < 3; ++i) {
            const double base = rng.below(2) ? 0.5 : 0.0;
            const double side = rng.uniform(0.15, 0.45);
            const double off = rng.uniform(0.0, 0.5 - side);
            lo[i] = base + off;
            hi[i] = base + off + side;
        }
        CenterPointOutcome out =
            center_point_check(sys3, ConvexRegion::box(3, lo, hi, 9200 + k));
        if (out.all_cells_hit) {
            ++hit3;
            if (!out.center_inside) ++bad;
        }
    }

    // neighborhood-volume floor on regions holding the center (exact for
    // m = 2, 99% Monte Carlo band for m = 3)
    std::size_t er_bad = 0;
    for (int k = 0; k < 100; ++k) {
        const double h2 = rng.uniform(0.2, 0.5), h3 = rng.uniform(0.2, 0.5);
        const double eps = rng.uniform(0.01, 0.2);
        if (!eps_ratio_check(ConvexRegion::cube(2, 0.5 - h2, 0.5 + h2, 9300 + k), eps).satisfied)
            ++er_bad;
        if (!eps_ratio_check(ConvexRegion::cube(3, 0.5 - h3, 0.5 + h3, 9400 + k), eps, 200000)
                 .satisfied)
            ++er_bad;
    }

    report(8, "center-point and neighborhood-volume checks", bad == 0 && er_bad == 0,
           "polygons: " + std::to_string(hit2) + "/10000 hit all cells, boxes: " +
               std::to_string(hit3) + "/1000, counterexamples " + std::to_string(bad) +
               "; volume floor violations " + std::to_string(er_bad) + "/200; required zero");
}

// ------------------------------------------------------------ criterion 9

void criterion_9() {
    begin();
    const std::size_t ms[4] = {2, 3, 5, 8};
    double worst_forms = 0;
    Rng rng = Rng::stream(9009, 0);
    for (std::size_t m : ms) {
        for (int k = 0; k < 1000000; ++k) {
            std::vector<double> x = draw_state(rng, m);
            const double p = dist_syn_pairwise(x.data(), m);
            const double g = dist_syn_gram(x.data(), m);
            const double s = dist_syn(x.data(), m);
            worst_forms = std::max(worst_forms, std::fabs(p - g));
            worst_forms = std::max(worst_forms, std::fabs(s * s - p));
        }
    }

    // same-branch squared-distance expansion against the matrix-norm floor;
    // allow one part in 1e12 for the rounding of the two quadratics
    std::vector<LatticeSystem> systems;
    Rng crng = Rng::stream(9009, 1);
    for (std::size_t m : ms)
        for (int pathy = 0; pathy < 2; ++pathy)
            for (int j = 0; j < 8; ++j) {
                CouplingSpec cp = pathy ? CouplingSpec::path(m) : CouplingSpec::all_to_all(m);
                systems.push_back(LatticeSystem::make(InteriorMap1D::standard_tent(),
                                                      std::move(cp), crng.uniform(0.0, 0.05)));
            }
    std::size_t violations = 0;
    double out[kMaxNodes];
    for (int k = 0; k < 1000000; ++k) {
        const LatticeSystem& sys = systems[static_cast<std::size_t>(k) % systems.size()];
        const std::size_t m = sys.m();
        const bool rightward = rng.below(2) != 0;
        std::vector<double> x(m);
        for (double& v : x) v = rightward ? rng.uniform(0.5, 0.999) : rng.uniform(0.001, 0.499);
        const std::uint32_t cell = rightward ? (1u << m) - 1u : 0u;
        step_in_cell(sys, x.data(), cell, out);
        const double d2x = dist_syn_pairwise(x.data(), m);
        const double d2y = dist_syn_pairwise(out, m);
        const double na = sys.coupling_norm;
        const double floor_f = 4.0 * (1.0 - (2.0 * sys.c * na + sys.c * sys.c * na * na));
        if (d2y < floor_f * d2x * (1.0 - 1e-12)) ++violations;
    }

    report(9, "diagonal distance forms and same-branch expansion",
           worst_forms < 1e-12 && violations == 0,
           "pairwise vs quadratic forms differ by at most " + fmt(worst_forms, 3) +
               " on 4 x 1e6 states (required < 1e-12); expansion floor violations " +
               std::to_string(violations) + "/1e6; required zero");
}

// ----------------------------------------------------------- criterion 10

void criterion_10() {
    begin();
    LatticeSystem sys = tent2(0.05);
    Rng rng = Rng::stream(9010, 0);
    std::size_t unsatisfied = 0, weak_bound = 0;
    double min_bound = 1e300, worst_gap = 1e300;
    for (int k = 0; k < 100; ++k) {
        const double d0 = std::exp2(rng.uniform(-16.0, -12.0));
        const double delta = d0 * std::sqrt(2.0);
        const double len = std::exp2(rng.uniform(-8.0, -7.0));
        const double h = len / std::sqrt(2.0);
        const bool right = rng.below(2) != 0;
        const double lo = right ? 0.51 : 0.01;
        const double a = rng.uniform(lo, lo + 0.48 - h - delta - 0.02);
        Polyline seg = Polyline::segment(a, a + delta, a + h, a + h + delta);
        RegularPointReport rep = regular_point_ratio(sys, seg);
        min_bound = std::min(min_bound, rep.bound);
        worst_gap = std::min(worst_gap, rep.measured - (rep.bound - rep.slack));
        if (!rep.satisfied) ++unsatisfied;
        if (rep.bound <= 0.5) ++weak_bound;
    }
    report(10, "regular-point ratio bound", unsatisfied == 0 && weak_bound == 0,
           "100 offset segments at c = 0.05: measured ratio clears bound - 3/sqrt(M) by >= " +
               fmt(worst_gap, 3) + ", smallest bound " + fmt(min_bound, 6) +
               "; required all satisfied and bound > 1/2");
}

// ----------------------------------------------------------- criterion 11

int shell(const std::string& cmd) {
    int raw = std::system(cmd.c_str());
    return (raw != -1 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
}

void criterion_11(const char* argv0) {
    begin();
    namespace fs = std::filesystem;
    const fs::path cli = fs::path(argv0).parent_path() / "cmllab";
    if (!fs::exists(cli)) {
        report(11, "manifest replay determinism", false,
               "tool binary not found next to this test: " + cli.string());
        return;
    }
    const fs::path work = fs::temp_directory_path() / "cmllab_acceptance_replay";
    fs::remove_all(work);
    fs::create_directories(work);
    {
        std::ofstream cfgf(work / "scan.toml");
        cfgf << "[sweep]\nc_values = [0.2, 0.3]\nseeds_per_c = 4\nhorizon = 20000\n"
                "master_seed = 5\n[orbit]\nsteps = 20000\nburn_in = 500\n";
        std::ofstream simf(work / "sim.toml");
        simf << "[coupling]\nc = 0.1\n[orbit]\nsteps = 50000\nburn_in = 1000\n"
                "trace_stride = 100\nseed = 17\n";
    }
    const std::string q = "\"" + cli.string() + "\"";
    const std::string w = work.string();
    const int rc_scan =
        shell(q + " scan --config " + w + "/scan.toml --svg --out-dir " + w + "/scan >/dev/null");
    const int rc_scan_rep = shell(q + " replay " + w + "/scan/manifest.json >/dev/null");
    const int rc_sim = shell(q + " simulate --config " + w + "/sim.toml --out-dir " + w +
                             "/sim >/dev/null");
    const int rc_sim_rep = shell(q + " replay " + w + "/sim/manifest.json >/dev/null");

    const bool pass = rc_scan == 0 && rc_scan_rep == 0 && rc_sim == 0 && rc_sim_rep == 0;
    report(11, "manifest replay determinism", pass,
           "scan run/replay exit " + std::to_string(rc_scan) + "/" + std::to_string(rc_scan_rep) +
               ", simulate run/replay exit " + std::to_string(rc_sim) + "/" +
               std::to_string(rc_sim_rep) + "; required all zero (replay hash-compares outputs)");
}

} // namespace

int main(int, char** argv) {
    std::printf("acceptance gate: 11 criteria\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11(argv[0]);
    std::printf("acceptance: %d/11 passed\n", 11 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
