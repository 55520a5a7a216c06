#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cmllab/maps.hpp"

namespace cmllab {

// Euclidean distance from x to the synchronized diagonal {x_1 = ... = x_m}.
// Primary form is the shifted centered sum (stable near the diagonal, exact
// zero for equal coordinates); the pairwise form is an independent stable
// evaluation order. The gram form expands the quadratic and cancels
// catastrophically near the diagonal, so cross-checks against it compare
// squared distances, not distances.
double dist_syn(const double* x, std::size_t m);
double dist_syn(const std::vector<double>& x);
double dist_syn_pairwise(const double* x, std::size_t m); // (2m)^-1 sum_{i!=j} (x_i-x_j)^2
double dist_syn_gram(const double* x, std::size_t m);     // sum x^2 - (sum x)^2 / m

struct OrbitConfig {
    std::uint64_t n_steps = 0;
    std::uint64_t burn_in = 0;
    double eps = 1e-7;              // order threshold (dist <= eps)
    double gamma = 0x1.0p-20;       // disorder threshold (dist >= gamma)
    std::uint64_t trace_stride = 0; // 0 = no trace rows
    std::uint64_t seed = 0;         // recorded only; the caller draws x0
    double sync_tol = 1e-9;         // dist level for sync_time
    std::uint64_t sync_hold = 1000; // consecutive steps below sync_tol required
    bool stop_on_sync = false;      // halt once sync_time is decided; stats
                                    // then cover [burn_in, stop step]
};

// Counters are over post-burn-in steps; sync_time is an absolute step index.
struct OrbitStats {
    std::size_t m = 0;
    double min_dist = 0;
    double max_dist = 0;
    // maximal runs of dist <= eps (resp. dist >= gamma), raw thresholds
    std::uint64_t order_entries = 0;
    std::uint64_t disorder_entries = 0;
    // two-threshold (hysteresis) label switches order<->disorder
    std::uint64_t alternations = 0;
    double occupation_order = 0; // fraction of steps labeled order
    std::optional<std::uint64_t> sync_time;
    std::vector<double> final_state;
};

// Row sink for traces; called at steps n % trace_stride == 0 (including 0).
using TraceSink = std::function<void(std::uint64_t n, const double* x, double dist)>;

// Runs n_steps updates from x0. Statistics use the state at step n for
// n in [burn_in, n_steps]. Throws ConfigError if eps >= gamma, EscapeError
// if a coordinate leaves [0,1] on a system without nonnegative weights.
OrbitStats run_orbit(const LatticeSystem& sys, const std::vector<double>& x0,
                     const OrbitConfig& cfg, const TraceSink& sink = nullptr);

enum class Phase { Unknown, Order, Disorder };

struct TransitionEvent {
    std::uint64_t step;
    Phase to;
};

// Two-threshold detector over a stored dist sequence: label switches to
// Order at dist <= eps, to Disorder at dist >= gamma, starting Unknown.
// ConfigError if eps >= gamma.
std::vector<TransitionEvent> detect_transitions(const std::vector<double>& dist,
                                                double eps, double gamma);

// First absolute step n <= horizon with dist_syn(x(n)) <= tol; nullopt if none.
std::optional<std::uint64_t> sync_time(const LatticeSystem& sys, const std::vector<double>& x0,
                                       double tol, std::uint64_t horizon);

// One-step transverse contraction/expansion through the public step(), m = 2
// only. Predicted band is exact for tents (both coordinates share a branch,
// so the factor is branch-slope * (1 - 2c)); for perturbed maps it is the
// certified interval. Errors if the coordinates straddle the kink, coincide,
// or m != 2.
struct TransverseCheck {
    double predicted_low = 0;
    double predicted_high = 0;
    double observed = 0;
    bool exact = false; // tent variants: predicted_low == predicted_high
};
TransverseCheck transverse_factor_check(const LatticeSystem& sys, const std::vector<double>& x);

// Absorbing-box check for the perturbed family. Reported constants:
//   tau1 = s0/2 - eta,  tau2 = (1-c)(s - eta)(s0/2 - eta),  s = 2 - s0,
// with eta the certified C2 bound of the perturbation. The monitored box is
// [tau1, 1]: tau1 is a certified floor of the map image (the flattened tent
// bottoms out at the endpoints), while the peak still maps to 1, so no upper
// edge below 1 is invariant. entry_step is the start of the first window of
// `hold` consecutive states inside the box (nullopt if the horizon ends
// first).
struct TrappingReport {
    double tau1 = 0;
    double tau2 = 0;
    double lo = 0, hi = 0; // the monitored box [tau1, 1]
    std::optional<std::uint64_t> entry_step;
};
TrappingReport trapping_check(const LatticeSystem& sys, const std::vector<double>& x0,
                              std::uint64_t horizon, std::uint64_t hold = 100);

} // namespace cmllab
