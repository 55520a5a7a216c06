#include "cmllab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "cmllab/rng.hpp"

namespace cmllab {

namespace {

// shortest round-trip decimal; keeps result files byte-stable across replays
std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

OrbitConfig stamped_config(const SweepSpec& spec, std::uint64_t run_index) {
    OrbitConfig cfg = spec.orbit;
    cfg.seed = run_index;
    if (spec.predicate.kind == SweepPredicate::Kind::SyncWithin) {
        cfg.sync_tol = spec.predicate.tol;
        cfg.n_steps = spec.predicate.horizon;
        cfg.stop_on_sync = spec.stop_on_sync;
    } else {
        // the score needs min/max over the whole horizon
        cfg.stop_on_sync = false;
    }
    return cfg;
}

bool evaluate(const SweepPredicate& p, const RunRow& row) {
    if (row.escaped) return false;
    if (p.kind == SweepPredicate::Kind::SyncWithin) return row.sync_time.has_value();
    return row.min_dist < p.eps && row.max_dist > p.gamma && row.alternations >= 1;
}

RunRow execute_run(const LatticeSystem& sys, const SweepSpec& spec, double c, std::uint64_t k) {
    Rng rng = Rng::stream(spec.master_seed, k);
    std::vector<double> x0(sys.m());
    for (auto& v : x0) v = rng.uniform();

    RunRow row;
    row.c = c;
    row.seed = k;
    try {
        OrbitStats st = run_orbit(sys, x0, stamped_config(spec, k));
        row.sync_time = st.sync_time;
        row.min_dist = st.min_dist;
        row.max_dist = st.max_dist;
        row.alternations = st.alternations;
    } catch (const EscapeError&) {
        row.escaped = true;
    }
    row.predicate_pass = evaluate(spec.predicate, row);
    return row;
}

// fixed-size pool pulling indices off a shared counter; rows land by index,
// so the output does not depend on scheduling
void for_each_index(std::size_t n, std::size_t threads,
                    const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mx;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mx);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

SweepPredicate SweepPredicate::sync_within(double tol, std::uint64_t horizon) {
    SweepPredicate p;
    p.kind = Kind::SyncWithin;
    p.tol = tol;
    p.horizon = horizon;
    return p;
}

SweepPredicate SweepPredicate::intermittency(double eps, double gamma) {
    SweepPredicate p;
    p.kind = Kind::IntermittencyScore;
    p.eps = eps;
    p.gamma = gamma;
    return p;
}

std::vector<double> SweepSpec::grid(double lo, double hi, double step) {
    if (!(step > 0)) throw ConfigError("sweep grid: step must be positive");
    if (hi < lo) throw ConfigError("sweep grid: hi below lo");
    std::vector<double> out;
    std::size_t n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
}

void SweepSpec::validate() const {
    if (c_values.empty()) throw ConfigError("sweep: empty coupling grid");
    for (double c : c_values)
        if (!(c >= 0.0) || !(c <= 1.0))
            throw ConfigError("sweep: coupling value outside [0,1]");
    if (seeds_per_c == 0) throw ConfigError("sweep: seeds_per_c must be at least 1");
}

BifurcationResult bifurcation_scan(const LatticeSystem& tmpl, const SweepSpec& spec_in) {
    SweepSpec spec = spec_in;
    spec.validate();
    std::sort(spec.c_values.begin(), spec.c_values.end());

    const std::size_t seeds = spec.seeds_per_c;
    const std::size_t cs = spec.c_values.size();
    std::vector<LatticeSystem> systems;
    systems.reserve(cs);
    for (double c : spec.c_values)
        systems.push_back(LatticeSystem::make(tmpl.map, tmpl.coupling, c));

    BifurcationResult res;
    res.runs.resize(cs * seeds);
    for_each_index(cs * seeds, spec.threads, [&](std::size_t k) {
        std::size_t ci = k / seeds;
        res.runs[k] = execute_run(systems[ci], spec, spec.c_values[ci], k);
    });

    for (std::size_t ci = 0; ci < cs; ++ci) {
        BifurcationRow row;
        row.c = spec.c_values[ci];
        std::size_t synced = 0, kept = 0;
        double alt = 0, mn = 0, mx = 0;
        for (std::size_t s = 0; s < seeds; ++s) {
            const RunRow& run = res.runs[ci * seeds + s];
            if (run.escaped) {
                ++row.escapes;
                continue;
            }
            ++kept;
            if (run.sync_time) ++synced;
            alt += static_cast<double>(run.alternations);
            mn += run.min_dist;
            mx += run.max_dist;
        }
        row.sync_fraction = static_cast<double>(synced) / static_cast<double>(seeds);
        if (kept) {
            row.mean_alternations = alt / static_cast<double>(kept);
            row.mean_min_dist = mn / static_cast<double>(kept);
            row.mean_max_dist = mx / static_cast<double>(kept);
        }
        res.rows.push_back(row);
    }

    // steepest rise localizes the onset; ties keep the first bracket
    if (cs == 1) {
        res.c_star = res.c_star_lo = res.c_star_hi = spec.c_values[0];
    } else {
        std::size_t best = 0;
        double best_rise = res.rows[1].sync_fraction - res.rows[0].sync_fraction;
        for (std::size_t i = 1; i + 1 < cs; ++i) {
            double rise = res.rows[i + 1].sync_fraction - res.rows[i].sync_fraction;
            if (rise > best_rise) {
                best_rise = rise;
                best = i;
            }
        }
        res.c_star_lo = res.rows[best].c;
        res.c_star_hi = res.rows[best + 1].c;
        res.c_star = (res.c_star_lo + res.c_star_hi) / 2;
    }

    for (std::size_t i = 0; i + 1 < cs; ++i) {
        double p0 = res.rows[i].sync_fraction;
        double p1 = res.rows[i + 1].sync_fraction;
        double drop = p0 - p1;
        if (drop <= 0) continue;
        double sigma = std::sqrt((p0 * (1 - p0) + p1 * (1 - p1)) / static_cast<double>(seeds));
        if (drop > 3 * sigma) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "sync_fraction falls %.6g -> %.6g between c=%.6g and c=%.6g",
                          p0, p1, res.rows[i].c, res.rows[i + 1].c);
            res.findings.emplace_back(buf);
        }
    }
    return res;
}

CStarRefinement refine_cstar(const LatticeSystem& tmpl, double lo, double hi,
                             const SweepSpec& spec, std::size_t iterations) {
    spec.validate();
    if (!(lo < hi)) throw ConfigError("refine_cstar: bracket needs lo < hi");
    if (lo < 0 || hi > 1) throw ConfigError("refine_cstar: bracket outside [0,1]");

    const std::size_t seeds = spec.seeds_per_c;
    auto majority = [&](double c, std::uint64_t eval_id) {
        LatticeSystem sys = LatticeSystem::make(tmpl.map, tmpl.coupling, c);
        std::atomic<std::size_t> passes{0};
        for_each_index(seeds, spec.threads, [&](std::size_t s) {
            if (execute_run(sys, spec, c, eval_id * seeds + s).predicate_pass) ++passes;
        });
        return 2 * passes.load() > seeds;
    };

    bool at_lo = majority(lo, 0);
    bool at_hi = majority(hi, 1);
    if (at_lo == at_hi)
        throw ConfigError("refine_cstar: predicate majority agrees at both endpoints");

    for (std::size_t it = 0; it < iterations; ++it) {
        double mid = (lo + hi) / 2;
        if (majority(mid, 2 + it) == at_hi) hi = mid;
        else lo = mid;
    }
    return {(lo + hi) / 2, hi - lo, iterations};
}

std::string runs_to_csv(const BifurcationResult& res) {
    std::string out = "c,seed,sync_time,min_dist,max_dist,alternations\n";
    for (const RunRow& run : res.runs) {
        out += fmt(run.c);
        out += ',';
        out += std::to_string(run.seed);
        out += ',';
        if (run.escaped) {
            out += ",,,\n";
            continue;
        }
        if (run.sync_time) out += std::to_string(*run.sync_time);
        out += ',';
        out += fmt(run.min_dist);
        out += ',';
        out += fmt(run.max_dist);
        out += ',';
        out += std::to_string(run.alternations);
        out += '\n';
    }
    return out;
}

std::string scan_summary_json(const BifurcationResult& res) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["c_star"] = res.c_star;
    doc["c_star_lo"] = res.c_star_lo;
    doc["c_star_hi"] = res.c_star_hi;
    ordered_json rows = ordered_json::array();
    for (const BifurcationRow& row : res.rows) {
        ordered_json r;
        r["c"] = row.c;
        r["sync_fraction"] = row.sync_fraction;
        r["mean_alternations"] = row.mean_alternations;
        r["mean_min_dist"] = row.mean_min_dist;
        r["mean_max_dist"] = row.mean_max_dist;
        r["escapes"] = row.escapes;
        rows.push_back(r);
    }
    doc["rows"] = rows;
    doc["findings"] = res.findings;
    return doc.dump(2);
}

} // namespace cmllab
