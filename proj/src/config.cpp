#include "cmllab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cmllab {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// strtod with a full-consumption check; returns false instead of throwing so
// dump() can use it to classify values
bool try_plain_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + text.size()) return false;
    out = v;
    return true;
}

bool try_number(const std::string& text, double& out) {
    std::string t = trim(text);
    std::size_t caret = t.find('^');
    if (caret == std::string::npos) {
        double v;
        if (!try_plain_number(t, v) || !std::isfinite(v)) return false;
        out = v;
        return true;
    }
    // base^exp with an integer exponent; base 2 goes through ldexp so the
    // dyadic thresholds come out exact
    double base;
    if (!try_plain_number(t.substr(0, caret), base)) return false;
    const std::string etext = t.substr(caret + 1);
    if (etext.empty()) return false;
    char* end = nullptr;
    long ex = std::strtol(etext.c_str(), &end, 10);
    if (end != etext.c_str() + etext.size()) return false;
    double mag = (std::fabs(base) == 2.0) ? std::ldexp(1.0, static_cast<int>(ex))
                                          : std::pow(std::fabs(base), static_cast<double>(ex));
    if (!std::isfinite(mag)) return false;
    out = std::copysign(mag, base);
    return true;
}

bool looks_bare(const std::string& v) {
    double ignored;
    return v == "true" || v == "false" || (!v.empty() && v.front() == '[') ||
           try_number(v, ignored);
}

} // namespace

double parse_number(const std::string& text) {
    double v;
    if (!try_number(text, v)) fail("not a number: \"" + trim(text) + "\"");
    return v;
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    auto err = [&](const std::string& msg) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "config line %zu: ", lineno);
        fail(buf + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        // comments start at an unquoted #
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            else if (line[i] == '#' && !in_string) { line.erase(i); break; }
        }
        if (in_string) err("unterminated string");
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') err("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) err("empty section name");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) err("expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) err("empty key");
        if (value.empty()) err("empty value for \"" + key + "\"");
        if (section.empty()) err("\"" + key + "\" appears before any [section]");
        if (value.front() == '"') {
            if (value.size() < 2 || value.back() != '"') err("unterminated string");
            value = value.substr(1, value.size() - 2);
            if (value.find('"') != std::string::npos) err("embedded quote in string");
        } else if (value.front() == '[' && value.back() != ']') {
            err("unterminated array");
        }
        cfg.set(section, key, value);
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot read config file \"" + path + "\"");
    std::ostringstream body;
    body << in.rdbuf();
    return parse(body.str());
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    for (Entry& e : entries_) {
        if (e.section == section && e.key == key) {
            e.value = value;
            return;
        }
    }
    entries_.push_back({section, key, value});
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
    for (const Entry& e : entries_)
        if (e.section == section && e.key == key) return &e;
    return nullptr;
}

bool Config::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

namespace {
[[noreturn]] void missing(const std::string& section, const std::string& key) {
    fail("missing [" + section + "] " + key);
}
[[noreturn]] void bad_value(const std::string& section, const std::string& key,
                            const std::string& what) {
    fail("[" + section + "] " + key + ": " + what);
}
} // namespace

double Config::number(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) missing(section, key);
    double v;
    if (!try_number(e->value, v)) bad_value(section, key, "not a number: \"" + e->value + "\"");
    return v;
}

double Config::number_or(const std::string& section, const std::string& key, double def) const {
    return has(section, key) ? number(section, key) : def;
}

std::int64_t Config::integer(const std::string& section, const std::string& key) const {
    double v = number(section, key);
    // counts arrive as "100000" or "1e6"; both must denote an exact integer
    if (v != std::rint(v) || std::fabs(v) > 0x1p53)
        bad_value(section, key, "not an integer: \"" + find(section, key)->value + "\"");
    return static_cast<std::int64_t>(v);
}

std::int64_t Config::integer_or(const std::string& section, const std::string& key,
                                std::int64_t def) const {
    return has(section, key) ? integer(section, key) : def;
}

bool Config::flag_or(const std::string& section, const std::string& key, bool def) const {
    const Entry* e = find(section, key);
    if (!e) return def;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    bad_value(section, key, "expected true or false, got \"" + e->value + "\"");
}

std::string Config::text(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) missing(section, key);
    return e->value;
}

std::string Config::text_or(const std::string& section, const std::string& key,
                            const std::string& def) const {
    const Entry* e = find(section, key);
    return e ? e->value : def;
}

std::vector<double> Config::number_list(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) missing(section, key);
    const std::string& v = e->value;
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        bad_value(section, key, "expected an array like [1, 2, 3]");
    std::vector<double> out;
    std::string body = trim(v.substr(1, v.size() - 2));
    if (body.empty()) return out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = body.find(',', pos);
        std::string item = body.substr(pos, comma == std::string::npos ? comma : comma - pos);
        double x;
        if (!try_number(item, x))
            bad_value(section, key, "array element " + std::to_string(out.size()) +
                                        " is not a number: \"" + trim(item) + "\"");
        out.push_back(x);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string Config::dump() const {
    std::vector<const Entry*> sorted;
    sorted.reserve(entries_.size());
    for (const Entry& e : entries_) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const Entry* a, const Entry* b) {
        if (a->section != b->section) return a->section < b->section;
        return a->key < b->key;
    });
    std::string out, current;
    for (const Entry* e : sorted) {
        if (e->section != current) {
            if (!out.empty()) out += '\n';
            current = e->section;
            out += '[' + current + "]\n";
        }
        out += e->key;
        out += " = ";
        // values are kept as written; only strings need their quotes back
        out += looks_bare(e->value) ? e->value : '"' + e->value + '"';
        out += '\n';
    }
    return out;
}

void apply_env(Config& cfg) {
    if (const char* t = std::getenv("CMLLAB_THREADS")) {
        std::string v = trim(t);
        if (!v.empty()) cfg.set("sweep", "threads", v);
    }
}

namespace {

std::uint64_t count_of(const Config& cfg, const std::string& section, const std::string& key,
                       std::int64_t def) {
    std::int64_t v = cfg.integer_or(section, key, def);
    if (v < 0) bad_value(section, key, "must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

} // namespace

LatticeSystem system_from_config(const Config& cfg) {
    const std::string kind = cfg.text_or("map", "kind", "standard");
    InteriorMap1D map = InteriorMap1D::standard_tent();
    if (kind == "standard") {
        // already built
    } else if (kind == "general") {
        map = InteriorMap1D::general_tent(cfg.number_or("map", "alpha1", 0.0),
                                          cfg.number_or("map", "alpha2", 0.0));
    } else if (kind == "perturbed") {
        PerturbationSpec g;
        if (cfg.has("map", "coeffs")) g.coeffs = cfg.number_list("map", "coeffs");
        map = InteriorMap1D::perturbed_tent(cfg.number_or("map", "s0", 0.1), g);
    } else {
        bad_value("map", "kind", "unknown kind \"" + kind + "\"");
    }

    std::int64_t m = cfg.integer_or("coupling", "m", 2);
    if (m < 2 || static_cast<std::size_t>(m) > kMaxNodes)
        bad_value("coupling", "m", "must be between 2 and " + std::to_string(kMaxNodes));
    const std::string ckind = cfg.text_or("coupling", "kind", "all-to-all");
    CouplingSpec coupling;
    if (ckind == "all-to-all") {
        coupling = CouplingSpec::all_to_all(static_cast<std::size_t>(m));
    } else if (ckind == "path") {
        coupling = CouplingSpec::path(static_cast<std::size_t>(m));
    } else if (ckind == "matrix") {
        std::vector<double> a = cfg.number_list("coupling", "a");
        if (a.size() != static_cast<std::size_t>(m * m))
            bad_value("coupling", "a",
                      "expected " + std::to_string(m * m) + " row-major entries, got " +
                          std::to_string(a.size()));
        SmallMat mat = SmallMat::zero(static_cast<std::size_t>(m));
        for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i)
            for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j)
                mat.at(i, j) = a[i * static_cast<std::size_t>(m) + j];
        coupling = CouplingSpec::from_matrix(mat);
    } else {
        bad_value("coupling", "kind", "unknown kind \"" + ckind + "\"");
    }

    return LatticeSystem::make(map, coupling, cfg.number("coupling", "c"));
}

OrbitConfig orbit_from_config(const Config& cfg) {
    OrbitConfig oc;
    oc.n_steps = count_of(cfg, "orbit", "steps", 100000);
    oc.burn_in = count_of(cfg, "orbit", "burn_in", 1000);
    oc.eps = cfg.number_or("orbit", "eps", 1e-7);
    oc.gamma = cfg.number_or("orbit", "gamma", 0x1.0p-20);
    oc.trace_stride = count_of(cfg, "orbit", "trace_stride", 0);
    oc.seed = count_of(cfg, "orbit", "seed", 1);
    oc.sync_tol = cfg.number_or("orbit", "sync_tol", 1e-9);
    oc.sync_hold = count_of(cfg, "orbit", "sync_hold", 1000);
    oc.stop_on_sync = cfg.flag_or("orbit", "stop_on_sync", false);
    return oc;
}

SweepSpec sweep_from_config(const Config& cfg) {
    SweepSpec spec;
    spec.orbit = orbit_from_config(cfg);
    if (cfg.has("sweep", "c_values")) {
        spec.c_values = cfg.number_list("sweep", "c_values");
    } else {
        spec.c_values = SweepSpec::grid(cfg.number("sweep", "c_lo"), cfg.number("sweep", "c_hi"),
                                        cfg.number("sweep", "c_step"));
    }
    spec.seeds_per_c = count_of(cfg, "sweep", "seeds_per_c", 64);
    spec.master_seed = count_of(cfg, "sweep", "master_seed", 1);
    spec.threads = count_of(cfg, "sweep", "threads", 0);
    const std::string pred = cfg.text_or("sweep", "predicate", "sync");
    const std::uint64_t horizon =
        count_of(cfg, "sweep", "horizon", static_cast<std::int64_t>(spec.orbit.n_steps));
    if (pred == "sync") {
        spec.predicate = SweepPredicate::sync_within(cfg.number_or("sweep", "tol", 1e-9), horizon);
    } else if (pred == "intermittency") {
        spec.predicate = SweepPredicate::intermittency(cfg.number_or("sweep", "eps", 1e-4),
                                                       cfg.number_or("sweep", "gamma", 0x1.0p-20));
        spec.predicate.horizon = horizon;
    } else {
        bad_value("sweep", "predicate", "unknown predicate \"" + pred + "\"");
    }
    spec.validate();
    return spec;
}

} // namespace cmllab
