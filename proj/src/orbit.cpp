#include "cmllab/orbit.hpp"

#include <cmath>
#include <limits>

namespace cmllab {

double dist_syn(const double* x, std::size_t m) {
    // centered form, shifted by x[0]: shifting leaves the variance unchanged
    // but makes equal-coordinate states come out exactly zero (the raw mean
    // of m equal doubles rounds for m = 3, 5, ...), and near the diagonal the
    // shifted differences are exact by Sterbenz
    double y[kMaxNodes];
    double mean = 0;
    for (std::size_t i = 0; i < m; ++i) {
        y[i] = x[i] - x[0];
        mean += y[i];
    }
    mean /= static_cast<double>(m);
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double d = y[i] - mean;
        s += d * d;
    }
    return std::sqrt(s);
}

double dist_syn(const std::vector<double>& x) { return dist_syn(x.data(), x.size()); }

double dist_syn_pairwise(const double* x, std::size_t m) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double d = x[i] - x[j];
            s += d * d;
        }
    return std::sqrt(s / (2.0 * static_cast<double>(m)));
}

double dist_syn_gram(const double* x, std::size_t m) {
    double sq = 0, sum = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sq += x[i] * x[i];
        sum += x[i];
    }
    double v = sq - sum * sum / static_cast<double>(m);
    return std::sqrt(std::max(0.0, v));
}

namespace {

// shared streaming state for the two-threshold detector and run counters
struct DetectorState {
    Phase label = Phase::Unknown;
    bool in_eps_run = false;
    bool in_gamma_run = false;

    // returns true when the hysteresis label switched
    bool feed(double d, double eps, double gamma, OrbitStats& st) {
        if (d <= eps) {
            if (!in_eps_run) ++st.order_entries;
            in_eps_run = true;
        } else {
            in_eps_run = false;
        }
        if (d >= gamma) {
            if (!in_gamma_run) ++st.disorder_entries;
            in_gamma_run = true;
        } else {
            in_gamma_run = false;
        }
        Phase next = label;
        if (d <= eps) next = Phase::Order;
        else if (d >= gamma) next = Phase::Disorder;
        bool switched = next != label &&
                        (label == Phase::Order || label == Phase::Disorder) &&
                        (next == Phase::Order || next == Phase::Disorder);
        label = next;
        return switched;
    }
};

} // namespace

OrbitStats run_orbit(const LatticeSystem& sys, const std::vector<double>& x0,
                     const OrbitConfig& cfg, const TraceSink& sink) {
    if (cfg.eps <= 0 || cfg.gamma <= 0) throw ConfigError("orbit: thresholds must be positive");
    if (cfg.eps >= cfg.gamma)
        throw ConfigError("orbit: eps must be below gamma");
    if (cfg.burn_in >= cfg.n_steps) throw ConfigError("orbit: burn_in must be below n_steps");
    if (x0.size() != sys.m()) throw std::invalid_argument("orbit: state size != m");
    const std::size_t m = sys.m();

    OrbitStats st;
    st.m = m;
    st.min_dist = std::numeric_limits<double>::infinity();
    st.max_dist = 0;

    double state[kMaxNodes];
    double next[kMaxNodes];
    for (std::size_t i = 0; i < m; ++i) state[i] = x0[i];

    DetectorState det;
    std::uint64_t order_steps = 0, counted_steps = 0;
    std::uint64_t sync_run = 0;
    bool have_sync = false;
    std::uint64_t sync_at = 0;

    for (std::uint64_t n = 0;; ++n) {
        double d = dist_syn(state, m);
        if (sink && cfg.trace_stride > 0 && n % cfg.trace_stride == 0) sink(n, state, d);
        if (n >= cfg.burn_in) {
            if (d < st.min_dist) st.min_dist = d;
            if (d > st.max_dist) st.max_dist = d;
            if (det.feed(d, cfg.eps, cfg.gamma, st)) ++st.alternations;
            if (det.label == Phase::Order) ++order_steps;
            ++counted_steps;
        }
        if (!have_sync) {
            if (d <= cfg.sync_tol) {
                ++sync_run;
                if (sync_run >= cfg.sync_hold) {
                    have_sync = true;
                    sync_at = n + 1 - cfg.sync_hold;
                }
            } else {
                sync_run = 0;
            }
        }
        if (n == cfg.n_steps || (have_sync && cfg.stop_on_sync)) break;
        try {
            step(sys, state, next);
        } catch (const EscapeError& e) {
            throw EscapeError(std::string(e.what()) + " at step " + std::to_string(n + 1));
        }
        for (std::size_t i = 0; i < m; ++i) state[i] = next[i];
    }

    if (have_sync) st.sync_time = sync_at;
    st.occupation_order =
        counted_steps ? static_cast<double>(order_steps) / static_cast<double>(counted_steps) : 0.0;
    st.final_state.assign(state, state + m);
    return st;
}

std::vector<TransitionEvent> detect_transitions(const std::vector<double>& dist,
                                                double eps, double gamma) {
    if (eps >= gamma) throw ConfigError("detector: eps must be below gamma");
    std::vector<TransitionEvent> events;
    Phase label = Phase::Unknown;
    for (std::size_t n = 0; n < dist.size(); ++n) {
        Phase next = label;
        if (dist[n] <= eps) next = Phase::Order;
        else if (dist[n] >= gamma) next = Phase::Disorder;
        // the first classification out of Unknown is not a switch
        if (next != label && label != Phase::Unknown)
            events.push_back({static_cast<std::uint64_t>(n), next});
        label = next;
    }
    return events;
}

std::optional<std::uint64_t> sync_time(const LatticeSystem& sys, const std::vector<double>& x0,
                                       double tol, std::uint64_t horizon) {
    if (x0.size() != sys.m()) throw std::invalid_argument("sync_time: state size != m");
    const std::size_t m = sys.m();
    double state[kMaxNodes], next[kMaxNodes];
    for (std::size_t i = 0; i < m; ++i) state[i] = x0[i];
    for (std::uint64_t n = 0; n <= horizon; ++n) {
        if (dist_syn(state, m) <= tol) return n;
        if (n == horizon) break;
        step(sys, state, next);
        for (std::size_t i = 0; i < m; ++i) state[i] = next[i];
    }
    return std::nullopt;
}

TransverseCheck transverse_factor_check(const LatticeSystem& sys, const std::vector<double>& x) {
    if (sys.m() != 2) throw std::invalid_argument("transverse check: m must be 2");
    if (x.size() != 2) throw std::invalid_argument("transverse check: state size != 2");
    double k = sys.map.kink();
    int b0 = x[0] >= k ? 1 : 0;
    int b1 = x[1] >= k ? 1 : 0;
    if (b0 != b1)
        throw std::invalid_argument("transverse check: coordinates straddle the kink");
    if (x[0] == x[1])
        throw std::invalid_argument("transverse check: coordinates coincide");

    // the two-node graph form gives x1' - x2' = (1 - 2c A_12... ) exactly when
    // A = [[-1,1],[1,-1]]; general two-node couplings scale by (1 - 2 c a12)
    double a12 = sys.coupling.A.at(0, 1);
    double lam = std::fabs(1.0 - 2.0 * sys.c * a12);

    TransverseCheck r;
    if (sys.map.kind() == MapKind::PerturbedTent) {
        double s0 = sys.map.s0();
        double eta1 = sys.map.c1_perturbation();
        r.predicted_low = lam * (2.0 - s0 - eta1);
        r.predicted_high = lam * (2.0 + eta1);
        r.exact = false;
    } else {
        double slope = std::fabs(sys.map.derivative_on_branch(x[0], b0));
        r.predicted_low = r.predicted_high = lam * slope;
        r.exact = true;
    }

    std::vector<double> y = step(sys, x);
    r.observed = std::fabs(y[0] - y[1]) / std::fabs(x[0] - x[1]);
    return r;
}

TrappingReport trapping_check(const LatticeSystem& sys, const std::vector<double>& x0,
                              std::uint64_t horizon, std::uint64_t hold) {
    if (sys.map.kind() != MapKind::PerturbedTent)
        throw std::invalid_argument("trapping check: perturbed-tent systems only");
    if (x0.size() != sys.m()) throw std::invalid_argument("trapping: state size != m");
    const std::size_t m = sys.m();

    TrappingReport rep;
    double s0 = sys.map.s0();
    double s = 2.0 - s0;
    double eta = sys.map.c2_perturbation();
    rep.tau1 = 0.5 * s0 - eta;
    rep.tau2 = (1.0 - sys.c) * (s - eta) * (0.5 * s0 - eta);
    // The flattened tent bottoms out at the endpoints: min f >= s0/2 - eta,
    // and each update is a convex mix of map values, so one step pushes every
    // coordinate to tau1 or above and keeps it there. The peak still reaches
    // f(1/2) = 1, so there is no upper edge below 1 to trap against; tau2
    // (the image of the tau1 corner under one rising-branch update) is
    // reported but only the tau1 floor is an invariant of the dynamics.
    rep.lo = rep.tau1;
    rep.hi = 1.0;
    if (rep.tau1 <= 0)
        throw ConfigError("trapping: s0/2 - eta must be positive");

    double state[kMaxNodes], next[kMaxNodes];
    for (std::size_t i = 0; i < m; ++i) state[i] = x0[i];
    std::uint64_t run = 0;
    for (std::uint64_t n = 0; n <= horizon; ++n) {
        bool inside = true;
        for (std::size_t i = 0; i < m; ++i)
            if (state[i] < rep.lo || state[i] > rep.hi) inside = false;
        run = inside ? run + 1 : 0;
        if (run >= hold) {
            rep.entry_step = n + 1 - hold;
            return rep;
        }
        if (n == horizon) break;
        step(sys, state, next);
        for (std::size_t i = 0; i < m; ++i) state[i] = next[i];
    }
    return rep;
}

} // namespace cmllab
