#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmllab/maps.hpp"
#include "cmllab/orbit.hpp"

namespace cmllab {

// Pass/fail rule applied to each run of an ensemble.
//   SyncWithin: the orbit reaches dist <= tol sustained for the configured
//     hold count within `horizon` steps. The scan stamps tol and horizon
//     onto the per-run orbit config.
//   IntermittencyScore: min_dist < eps, max_dist > gamma, and at least one
//     order/disorder alternation, all over the template's horizon. eps and
//     gamma here are the score thresholds, independent of the two detector
//     thresholds in the orbit config.
struct SweepPredicate {
    enum class Kind { SyncWithin, IntermittencyScore };
    Kind kind = Kind::SyncWithin;
    double tol = 1e-9;
    std::uint64_t horizon = 1000000;
    double eps = 1e-4;
    double gamma = 0x1.0p-20;

    static SweepPredicate sync_within(double tol, std::uint64_t horizon);
    static SweepPredicate intermittency(double eps, double gamma);
};

struct SweepSpec {
    std::vector<double> c_values; // the scan sorts its copy ascending
    std::size_t seeds_per_c = 1;
    OrbitConfig orbit; // template; seed and predicate stamps applied per run
    SweepPredicate predicate;
    std::uint64_t master_seed = 1;
    std::size_t threads = 1;   // 0 = one worker per hardware thread
    bool stop_on_sync = true;  // halt sync-predicate runs once decided

    // inclusive lo..hi with the given spacing
    static std::vector<double> grid(double lo, double hi, double step);
    void validate() const; // ConfigError on empty/out-of-range grid or zero seeds
};

// One orbit of the ensemble. The seed is the stream index under the master
// seed; the initial state is drawn uniformly from that stream. Escaped runs
// keep their row but carry no statistics.
struct RunRow {
    double c = 0;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> sync_time;
    double min_dist = 0;
    double max_dist = 0;
    std::uint64_t alternations = 0;
    bool predicate_pass = false;
    bool escaped = false;
};

// Per-c aggregate. sync_fraction always means the SyncWithin count over all
// seeds (escapes count as failures); the means skip escaped runs.
struct BifurcationRow {
    double c = 0;
    double sync_fraction = 0;
    double mean_alternations = 0;
    double mean_min_dist = 0;
    double mean_max_dist = 0;
    std::size_t escapes = 0;
};

struct BifurcationResult {
    std::vector<RunRow> runs; // (c, seed) lexicographic, regardless of scheduling
    std::vector<BifurcationRow> rows;
    // midpoint of the steepest sync_fraction rise and its grid bracket
    double c_star = 0;
    double c_star_lo = 0;
    double c_star_hi = 0;
    // monotonicity violations beyond 3 sigma, reported not asserted
    std::vector<std::string> findings;
};

// Runs seeds_per_c independent orbits at every grid value on a worker pool.
// Only EscapeError is absorbed into the rows; config errors abort the sweep.
BifurcationResult bifurcation_scan(const LatticeSystem& tmpl, const SweepSpec& spec);

struct CStarRefinement {
    double c_star = 0;
    double width = 0; // remaining bracket hi - lo
    std::size_t iterations = 0;
};

// Bisection on the majority vote of spec.predicate over seeds_per_c runs.
// Requires the endpoint votes to disagree; ConfigError otherwise. The width
// halves per iteration; c_star is the final bracket midpoint.
CStarRefinement refine_cstar(const LatticeSystem& tmpl, double lo, double hi,
                             const SweepSpec& spec, std::size_t iterations);

// c,seed,sync_time,min_dist,max_dist,alternations (stats blank on escape)
std::string runs_to_csv(const BifurcationResult& res);
std::string scan_summary_json(const BifurcationResult& res);

} // namespace cmllab
