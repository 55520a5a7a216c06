// cmllab: command-line front end for the coupled-lattice library.
//
// Every run that produces files also writes a manifest recording the fully
// resolved configuration, the master seed, and content hashes of all
// outputs; `cmllab replay <manifest>` re-executes that record and verifies
// the new outputs hash-identically. Settings resolve file < environment <
// flags, realized by layering each source into one Config before any module
// reads it.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmllab/config.hpp"
#include "cmllab/curve.hpp"
#include "cmllab/hash.hpp"
#include "cmllab/lemma.hpp"
#include "cmllab/manifest.hpp"
#include "cmllab/maps.hpp"
#include "cmllab/orbit.hpp"
#include "cmllab/polytope.hpp"
#include "cmllab/rng.hpp"
#include "cmllab/svg.hpp"
#include "cmllab/sweep.hpp"

using namespace cmllab;
using nlohmann::ordered_json;

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// collects outputs for the manifest while writing them
struct Writer {
    std::string dir;
    RunManifest man;

    void emit(const std::string& name, const std::string& body) {
        std::filesystem::create_directories(dir);
        const std::string path = dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write \"" + path + "\"");
        out << body;
        man.outputs.push_back({name, hash_hex(fnv1a64(body))});
    }
};

// [coupling] c is mandatory for orbits but meaningless for sweeps (the grid
// supplies it) and optional for the demos; default it before building
LatticeSystem template_system(const Config& cfg, const char* fallback_c = "0") {
    if (cfg.has("coupling", "c")) return system_from_config(cfg);
    Config tmp = cfg;
    tmp.set("coupling", "c", fallback_c);
    return system_from_config(tmp);
}

std::string chosen_format(const Config& cfg) {
    std::string f = cfg.text_or("output", "format", "csv");
    if (f != "csv" && f != "json") throw ConfigError("[output] format: expected csv or json");
    return f;
}

// ---------------------------------------------------------------- simulate

std::uint64_t run_simulate(const Config& cfg, Writer& w) {
    LatticeSystem sys = system_from_config(cfg);
    OrbitConfig oc = orbit_from_config(cfg);

    Rng rng = Rng::stream(oc.seed, 0);
    std::vector<double> x0(sys.m());
    for (double& v : x0) v = rng.uniform();

    std::string trace;
    TraceSink sink;
    if (oc.trace_stride > 0) {
        trace = "n";
        for (std::size_t i = 1; i <= sys.m(); ++i) trace += ",x" + std::to_string(i);
        trace += ",dist\n";
        sink = [&](std::uint64_t n, const double* x, double dist) {
            trace += std::to_string(n);
            for (std::size_t i = 0; i < sys.m(); ++i) trace += "," + fmt17(x[i]);
            trace += "," + fmt17(dist) + "\n";
        };
    }

    OrbitStats st = run_orbit(sys, x0, oc, sink);

    ordered_json line;
    line["command"] = "simulate";
    line["seed"] = oc.seed;
    line["system_hash"] = hash_hex(sys.content_hash);
    line["m"] = st.m;
    line["steps"] = oc.n_steps;
    line["burn_in"] = oc.burn_in;
    line["min_dist"] = st.min_dist;
    line["max_dist"] = st.max_dist;
    line["order_entries"] = st.order_entries;
    line["disorder_entries"] = st.disorder_entries;
    line["alternations"] = st.alternations;
    line["occupation_order"] = st.occupation_order;
    if (st.sync_time) line["sync_time"] = *st.sync_time;
    else line["sync_time"] = nullptr;
    line["final_state"] = st.final_state;
    w.emit("stats.jsonl", line.dump() + "\n");
    if (oc.trace_stride > 0) w.emit("trace.csv", trace);

    std::cout << "simulate: m = " << st.m << ", dist in [" << fmt17(st.min_dist) << ", "
              << fmt17(st.max_dist) << "], alternations = " << st.alternations;
    if (st.sync_time) std::cout << ", sync at step " << *st.sync_time;
    std::cout << "\n";
    return oc.n_steps;
}

// -------------------------------------------------------------------- scan

std::uint64_t run_scan(const Config& cfg, Writer& w) {
    LatticeSystem tmpl = template_system(cfg);
    SweepSpec spec = sweep_from_config(cfg);
    BifurcationResult res = bifurcation_scan(tmpl, spec);

    w.emit("runs.csv", runs_to_csv(res));
    w.emit("summary.json", scan_summary_json(res));

    if (cfg.flag_or("output", "svg", false)) {
        // scatter feed: a few short traced orbits per grid value; the scan
        // itself keeps no per-step distances
        std::vector<BifurcationCloud> clouds;
        const std::uint64_t horizon = std::min<std::uint64_t>(spec.predicate.horizon, 20000);
        OrbitConfig oc = spec.orbit;
        oc.n_steps = horizon;
        oc.burn_in = std::min(oc.burn_in, horizon / 2);
        oc.trace_stride = std::max<std::uint64_t>(1, (horizon - oc.burn_in) / 50);
        oc.stop_on_sync = false;
        for (const BifurcationRow& row : res.rows) {
            BifurcationCloud cloud;
            cloud.c = row.c;
            LatticeSystem sys = LatticeSystem::make(tmpl.map, tmpl.coupling, row.c);
            const std::size_t n_trace = std::min<std::size_t>(spec.seeds_per_c, 4);
            for (std::size_t s = 0; s < n_trace; ++s) {
                Rng rng = Rng::stream(spec.master_seed, s);
                std::vector<double> x0(sys.m());
                for (double& v : x0) v = rng.uniform();
                run_orbit(sys, x0, oc, [&](std::uint64_t n, const double*, double dist) {
                    if (n >= oc.burn_in && cloud.dists.size() < 200) cloud.dists.push_back(dist);
                });
            }
            clouds.push_back(std::move(cloud));
        }
        w.emit("scan.svg", svg_bifurcation(clouds, res.c_star));
    }

    std::uint64_t steps = 0;
    for (const RunRow& r : res.runs)
        steps += r.sync_time ? std::min<std::uint64_t>(*r.sync_time + spec.orbit.sync_hold,
                                                       spec.predicate.horizon)
                             : spec.predicate.horizon;
    std::cout << "scan: " << res.rows.size() << " grid values, " << res.runs.size()
              << " runs, c* = " << fmt17(res.c_star) << " in [" << fmt17(res.c_star_lo) << ", "
              << fmt17(res.c_star_hi) << "]\n";
    for (const std::string& f : res.findings) std::cout << "finding: " << f << "\n";
    return steps;
}

// ------------------------------------------------------------------- curve

// random slope +-1 segment of the given length inside one quadrant cell
Polyline random_cell_segment(Rng& rng, double len) {
    const double half = len / std::sqrt(2.0) + 1e-6;
    const bool right = rng.below(2) != 0, upper = rng.below(2) != 0;
    const double x_lo = (right ? 0.5 : 0.0) + 0.01;
    const double y_lo = (upper ? 0.5 : 0.0) + 0.01;
    double x0 = x_lo + rng.uniform() * (0.48 - half - 0.01);
    double y0 = y_lo + rng.uniform() * (0.48 - half - 0.01);
    double s = rng.below(2) != 0 ? 1.0 : -1.0;
    if (s < 0) y0 += half; // keep the downward segment inside the cell
    return Polyline::segment(x0, y0, x0 + half, y0 + s * half);
}

std::uint64_t run_curve(const Config& cfg, Writer& w) {
    LatticeSystem sys = template_system(cfg);
    if (sys.m() != 2) throw ConfigError("curve: the forest machinery is two-node only");

    const std::string demo = cfg.text_or("curve", "demo", "");
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer_or("curve", "seed", 1));

    if (demo == "prop32") {
        // grow-or-hit dichotomy on random admissible segments
        const std::int64_t segments = cfg.integer_or("curve", "segments", 100);
        const double len = cfg.number_or("curve", "length", kGrowthLength);
        if (segments <= 0) throw ConfigError("[curve] segments: must be positive");
        const double e = growth_excess(sys.c);

        Rng rng = Rng::stream(seed, 0);
        std::size_t hits = 0, grown = 0, fails = 0;
        double min_factor = 0, max_factor = 0;
        for (std::int64_t k = 0; k < segments; ++k) {
            GrowthOutcome out = growth_step(sys, random_cell_segment(rng, len));
            switch (out.kind) {
            case GrowthKind::DiagonalHit: ++hits; break;
            case GrowthKind::Grown:
                if (grown == 0 || out.growth_factor < min_factor) min_factor = out.growth_factor;
                if (grown == 0 || out.growth_factor > max_factor) max_factor = out.growth_factor;
                ++grown;
                break;
            case GrowthKind::Fail: ++fails; break;
            }
        }

        std::string report;
        report += "grow-or-hit dichotomy\n";
        report += "c = " + fmt17(sys.c) + "\n";
        report += "growth excess e = " + fmt17(e) + "\n";
        report += "segments = " + std::to_string(segments) + ", length = " + fmt17(len) + "\n";
        report += "diagonal hits = " + std::to_string(hits) + "\n";
        report += "grown = " + std::to_string(grown);
        if (grown > 0)
            report += " (factor range [" + fmt17(min_factor) + ", " + fmt17(max_factor) + "])";
        report += "\nfail = " + std::to_string(fails) + "\n";
        std::cout << report;
        w.emit("growth_report.txt", report);

        ordered_json doc;
        doc["c"] = sys.c;
        doc["growth_excess"] = e;
        doc["segments"] = segments;
        doc["length"] = len;
        doc["diagonal_hits"] = hits;
        doc["grown"] = grown;
        doc["fail"] = fails;
        if (grown > 0) {
            doc["min_factor"] = min_factor;
            doc["max_factor"] = max_factor;
        }
        w.emit("growth_report.json", doc.dump(2) + "\n");
        return static_cast<std::uint64_t>(segments);
    }
    if (!demo.empty()) throw ConfigError("[curve] demo: unknown demo \"" + demo + "\"");

    // forest snapshot of one iterated segment
    const int depth = static_cast<int>(cfg.integer_or("curve", "depth", 6));
    if (depth < 0 || depth > 24) throw ConfigError("[curve] depth: expected 0..24");
    const double len = cfg.number_or("curve", "length", 0x1.0p-6);
    Rng rng = Rng::stream(seed, 0);
    Polyline root = random_cell_segment(rng, len);
    ComponentForest forest = iterate_curve(sys, root, depth);

    const std::string fmt = chosen_format(cfg);
    if (fmt == "csv") w.emit("forest.csv", forest_to_csv(forest));
    else w.emit("forest.json", forest_to_json(forest));
    if (cfg.flag_or("output", "svg", false))
        w.emit("forest.svg", svg_forest(forest, forest.levels.size() - 1));

    std::cout << "curve: depth " << depth << ", components";
    for (const auto& level : forest.levels) std::cout << " " << level.size();
    if (forest.dropped_slivers > 0)
        std::cout << " (dropped " << forest.dropped_slivers << " slivers)";
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------- polytope

std::uint64_t run_polytope(const Config& cfg, Writer& w) {
    const std::int64_t m_in = cfg.integer_or("polytope", "m", 2);
    if (m_in < 2 || static_cast<std::size_t>(m_in) > kMaxNodes)
        throw ConfigError("[polytope] m: expected 2.." + std::to_string(kMaxNodes));
    const std::size_t m = static_cast<std::size_t>(m_in);
    const std::int64_t count = cfg.integer_or("polytope", "count", 100);
    if (count <= 0) throw ConfigError("[polytope] count: must be positive");
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer_or("polytope", "seed", 1));
    const double eps = cfg.number_or("polytope", "eps", 0.1);

    Config tmp = cfg;
    tmp.set("coupling", "m", std::to_string(m));
    if (!tmp.has("coupling", "c")) tmp.set("coupling", "c", "0.05");
    LatticeSystem sys = system_from_config(tmp);

    // random boxes inside one cell: does hitting every image cell force the
    // center into the image?
    Rng rng = Rng::stream(seed, 0);
    std::size_t all_hit = 0, center_in = 0, counterexamples = 0;
    for (std::int64_t k = 0; k < count; ++k) {
        std::vector<double> lo(m), hi(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double base = rng.below(2) != 0 ? 0.5 : 0.0;
            double side = rng.uniform(0.15, 0.45);
            double off = rng.uniform(0.0, 0.5 - side);
            lo[i] = base + off;
            hi[i] = base + off + side;
        }
        CenterPointOutcome out =
            center_point_check(sys, ConvexRegion::box(m, lo, hi, seed + 100 + k));
        if (out.all_cells_hit) {
            ++all_hit;
            if (out.center_inside) ++center_in;
            else ++counterexamples;
        }
    }

    // diagonal-neighborhood mass of a centered cube against the closed-form
    // floor
    const double half_side = 0.5;
    EpsRatioResult er =
        eps_ratio_check(ConvexRegion::cube(m, 0.5 - half_side, 0.5 + half_side, seed + 7), eps);

    ordered_json doc;
    doc["m"] = m;
    doc["count"] = count;
    doc["all_cells_hit"] = all_hit;
    doc["center_inside"] = center_in;
    doc["counterexamples"] = counterexamples;
    doc["eps_ratio"] = {{"eps", eps},
                        {"measured", er.measured},
                        {"bound", er.bound},
                        {"slack", er.slack},
                        {"exact", er.exact},
                        {"satisfied", er.satisfied}};
    w.emit("polytope_report.json", doc.dump(2) + "\n");

    std::cout << "polytope: m = " << m << ", " << all_hit << "/" << count
              << " regions hit all cells, " << counterexamples << " counterexamples, eps ratio "
              << (er.satisfied ? "holds" : "VIOLATED") << " (measured " << fmt17(er.measured)
              << " vs bound " << fmt17(er.bound) << ")\n";
    return 0;
}

// ------------------------------------------------------------------- lemma

std::uint64_t run_lemma(const Config& cfg, Writer& w) {
    const double a = cfg.number_or("lemma", "a", 4.0);
    const std::int64_t m0 = cfg.integer_or("lemma", "m0", 6);
    const double delta1 = cfg.number_or("lemma", "delta1", 0x1.0p-16);
    const double mu = cfg.number_or("lemma", "mu", 2.0);
    const std::string mode_name = cfg.text_or("lemma", "mode", "curve");
    BoundsMode mode;
    if (mode_name == "curve") mode = BoundsMode::Curve;
    else if (mode_name == "set") mode = BoundsMode::MeasurableSet;
    else throw ConfigError("[lemma] mode: expected curve or set");

    LatticeSystem sys = template_system(cfg);
    ExpansionBounds bounds = expansion_bounds(sys, mode);
    IterationDerived der =
        derive_iteration_constants(bounds, a, static_cast<int>(m0), delta1, mu);

    std::string table;
    table += "survivor-mass iteration constants (" + mode_name + " bounds, c = " +
             fmt17(sys.c) + ")\n";
    table += "a = " + fmt17(a) + ", m0 = " + std::to_string(m0) +
             ", delta1 = " + fmt17(delta1) + ", mu = " + fmt17(mu) + "\n";
    table += "E+ = " + fmt17(bounds.e_plus) + ", E- = " + fmt17(bounds.e_minus) + "\n";
    table += "mu_upper = " + fmt17(der.mu_upper) + "\n";
    table += "d = " + fmt17(der.d) + "\n";
    table += "F = " + fmt17(der.f_const) + "\n";
    table += "N0 = " + std::to_string(der.n0) + "\n";
    table += "c1_lower = " + fmt17(der.c1_lower) + "\n";
    std::cout << table;
    w.emit("lemma.txt", table);

    ordered_json doc;
    doc["mode"] = mode_name;
    doc["c"] = sys.c;
    doc["a"] = a;
    doc["m0"] = m0;
    doc["delta1"] = delta1;
    doc["mu"] = mu;
    doc["e_plus"] = bounds.e_plus;
    doc["e_minus"] = bounds.e_minus;
    doc["mu_upper"] = der.mu_upper;
    doc["d"] = der.d;
    doc["f_const"] = der.f_const;
    doc["n0"] = der.n0;
    doc["c1_lower"] = der.c1_lower;
    w.emit("lemma.json", doc.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- validate

int run_validate(const Config& cfg) {
    LatticeSystem sys = system_from_config(cfg);
    orbit_from_config(cfg);
    if (cfg.has("sweep", "c_values") || cfg.has("sweep", "c_lo")) sweep_from_config(cfg);
    std::cout << "ok: m = " << sys.m() << ", c = " << fmt17(sys.c) << ", system hash "
              << hash_hex(sys.content_hash) << "\n";
    return 0;
}

// ------------------------------------------------------------------ replay

std::uint64_t dispatch(const std::string& command, const Config& cfg, Writer& w);

int run_replay(const std::string& manifest_path, std::string out_dir) {
    RunManifest man = RunManifest::load(manifest_path);
    Config cfg = Config::parse(man.resolved_config);
    if (out_dir.empty()) {
        std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
        out_dir = (base / "replay").string();
    }

    Writer w;
    w.dir = out_dir;
    dispatch(man.command, cfg, w);

    std::size_t checked = 0;
    for (const FileRecord& want : man.outputs) {
        const FileRecord* got = nullptr;
        for (const FileRecord& f : w.man.outputs)
            if (f.path == want.path) got = &f;
        if (!got) {
            std::cerr << "replay mismatch: \"" << want.path << "\" was not produced\n";
            return 3;
        }
        if (got->hash_hex != want.hash_hex) {
            std::cerr << "replay mismatch: \"" << want.path << "\" hashed " << got->hash_hex
                      << ", manifest says " << want.hash_hex << "\n";
            return 3;
        }
        ++checked;
    }
    std::cout << "replay ok: " << checked << " outputs bit-identical\n";
    return 0;
}

std::uint64_t dispatch(const std::string& command, const Config& cfg, Writer& w) {
    if (command == "simulate") return run_simulate(cfg, w);
    if (command == "scan") return run_scan(cfg, w);
    if (command == "curve") return run_curve(cfg, w);
    if (command == "polytope") return run_polytope(cfg, w);
    if (command == "lemma") return run_lemma(cfg, w);
    throw ConfigError("manifest names unknown command \"" + command + "\"");
}

std::uint64_t manifest_seed(const std::string& command, const Config& cfg) {
    if (command == "simulate") return orbit_from_config(cfg).seed;
    if (command == "scan") return static_cast<std::uint64_t>(cfg.integer_or("sweep", "master_seed", 1));
    if (command == "curve") return static_cast<std::uint64_t>(cfg.integer_or("curve", "seed", 1));
    if (command == "polytope")
        return static_cast<std::uint64_t>(cfg.integer_or("polytope", "seed", 1));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled interior-map lattice laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, format, seed, threads;
    std::string c_val, steps, demo, depth, segments, length;
    std::string a_val, m0_val, delta1, mu_val, mode;
    std::string m_val, count, eps, manifest_path;
    bool svg = false;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", config_path, "configuration file");
        s->add_option("--seed", seed, "seed override");
        s->add_option("--out-dir", out_dir, "output directory (default CMLLAB_OUT_DIR or .)");
        s->add_option("--format", format, "csv or json");
        s->add_option("--threads", threads, "worker threads, 0 = one per hardware thread");
        return s;
    };

    CLI::App* sim = add_common(app.add_subcommand("simulate", "run one orbit"));
    sim->add_option("--c", c_val, "coupling strength");
    sim->add_option("--steps", steps, "orbit length");

    CLI::App* scan = add_common(app.add_subcommand("scan", "sweep the coupling grid"));
    scan->add_option("--c", c_val, "template coupling strength");
    scan->add_flag("--svg", svg, "write a scatter of the scan");

    CLI::App* curve = add_common(app.add_subcommand("curve", "iterate a segment, or run a demo"));
    curve->add_option("--demo", demo, "named demo (prop32)");
    curve->add_option("--c", c_val, "coupling strength");
    curve->add_option("--depth", depth, "forest depth");
    curve->add_option("--segments", segments, "demo segment count");
    curve->add_option("--length", length, "segment length");
    curve->add_flag("--svg", svg, "write a forest snapshot");

    CLI::App* poly = add_common(app.add_subcommand("polytope", "region image checks"));
    poly->add_option("--m", m_val, "lattice size");
    poly->add_option("--count", count, "region count");
    poly->add_option("--eps", eps, "diagonal neighborhood width");
    poly->add_option("--c", c_val, "coupling strength");

    CLI::App* lemma = add_common(app.add_subcommand("lemma", "derive iteration constants"));
    lemma->add_option("--a", a_val, "mass ratio a");
    lemma->add_option("--m0", m0_val, "block length m0");
    lemma->add_option("--delta1", delta1, "base scale, accepts 2^-k literals");
    lemma->add_option("--mu", mu_val, "iteration exponent");
    lemma->add_option("--mode", mode, "curve or set bounds");
    lemma->add_option("--c", c_val, "coupling strength");

    CLI::App* val = add_common(app.add_subcommand("validate", "check a configuration"));

    CLI::App* rep = app.add_subcommand("replay", "re-run a manifest and verify hashes");
    rep->add_option("manifest", manifest_path, "manifest file")->required();
    rep->add_option("--out-dir", out_dir, "where replay outputs go");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (rep->parsed()) return run_replay(manifest_path, out_dir);

        Config cfg;
        std::vector<FileRecord> inputs;
        if (!config_path.empty()) {
            cfg = Config::load(config_path);
            inputs.push_back({config_path, hash_file(config_path)});
        } else if (val->parsed()) {
            throw ConfigError("validate requires --config");
        }
        apply_env(cfg);

        // flag layer; every output-shaping flag lands in the config so the
        // manifest alone can reproduce the run
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (!threads.empty()) cfg.set("sweep", "threads", threads);
        if (!format.empty()) cfg.set("output", "format", format);
        if (svg) cfg.set("output", "svg", "true");
        if (!c_val.empty()) cfg.set("coupling", "c", c_val);
        if (!steps.empty()) cfg.set("orbit", "steps", steps);
        if (!demo.empty()) cfg.set("curve", "demo", demo);
        if (!depth.empty()) cfg.set("curve", "depth", depth);
        if (!segments.empty()) cfg.set("curve", "segments", segments);
        if (!length.empty()) cfg.set("curve", "length", length);
        if (!a_val.empty()) cfg.set("lemma", "a", a_val);
        if (!m0_val.empty()) cfg.set("lemma", "m0", m0_val);
        if (!delta1.empty()) cfg.set("lemma", "delta1", delta1);
        if (!mu_val.empty()) cfg.set("lemma", "mu", mu_val);
        if (!mode.empty()) cfg.set("lemma", "mode", mode);
        if (!m_val.empty()) cfg.set("polytope", "m", m_val);
        if (!count.empty()) cfg.set("polytope", "count", count);
        if (!eps.empty()) cfg.set("polytope", "eps", eps);
        if (!seed.empty()) {
            if (sim->parsed()) cfg.set("orbit", "seed", seed);
            else if (scan->parsed()) cfg.set("sweep", "master_seed", seed);
            else if (curve->parsed()) cfg.set("curve", "seed", seed);
            else if (poly->parsed()) cfg.set("polytope", "seed", seed);
        }

        if (val->parsed()) return run_validate(cfg);

        if (out_dir.empty()) {
            const char* env = std::getenv("CMLLAB_OUT_DIR");
            out_dir = env && *env ? env : ".";
        }

        Writer w;
        w.dir = out_dir;
        const auto t0 = std::chrono::steady_clock::now();
        std::uint64_t stepped = dispatch(cmd, cfg, w);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();

        w.man.command = cmd;
        w.man.resolved_config = cfg.dump();
        w.man.master_seed = manifest_seed(cmd, cfg);
        w.man.inputs = std::move(inputs);
        w.man.wall_seconds = wall;
        w.man.steps_per_second = wall > 0 ? static_cast<double>(stepped) / wall : 0;
        w.man.save(out_dir + "/manifest.json");
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const EscapeError& e) {
        std::cerr << "escape: " << e.what() << "\n";
        return 3;
    }
}
