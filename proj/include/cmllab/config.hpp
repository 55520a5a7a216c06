#pragma once
#include <string>
#include <vector>

#include "cmllab/maps.hpp"
#include "cmllab/orbit.hpp"
#include "cmllab/sweep.hpp"

namespace cmllab {

// Number parser shared by config values and CLI flags. Accepts the usual
// decimal forms plus binary-exponent literals like "2^-16" (optionally
// signed), which the dyadic thresholds need: parsing them through decimal
// text would round. Throws ConfigError on anything else.
double parse_number(const std::string& text);

// Configuration text in TOML syntax, cut down to what the lab uses:
// [section] headers, key = value lines, # comments to end of line. Values
// are quoted strings, true/false, numbers (see parse_number), or flat
// arrays of numbers. Entries are stored as raw text and parsed on typed
// access, so later layers (environment, then command-line flags) can
// override anything with set() before interpretation; that ordering is the
// whole precedence story.
class Config {
public:
    Config() = default;

    static Config parse(const std::string& text);     // ConfigError with line number
    static Config load(const std::string& path);      // ConfigError if unreadable

    void set(const std::string& section, const std::string& key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;

    // required accessors throw ConfigError naming [section] key; _or forms
    // fall back to the default when the entry is absent
    double number(const std::string& section, const std::string& key) const;
    double number_or(const std::string& section, const std::string& key, double def) const;
    std::int64_t integer(const std::string& section, const std::string& key) const;
    std::int64_t integer_or(const std::string& section, const std::string& key,
                            std::int64_t def) const;
    bool flag_or(const std::string& section, const std::string& key, bool def) const;
    std::string text(const std::string& section, const std::string& key) const;
    std::string text_or(const std::string& section, const std::string& key,
                        const std::string& def) const;
    std::vector<double> number_list(const std::string& section, const std::string& key) const;

    // canonical text: sections and keys sorted, one entry per line; feeding
    // the dump back through parse() reproduces the same config, and manifests
    // store exactly this form
    std::string dump() const;

private:
    struct Entry {
        std::string section, key, value;
    };
    std::vector<Entry> entries_; // insertion order; set() replaces in place
    const Entry* find(const std::string& section, const std::string& key) const;
};

// CMLLAB_THREADS -> [sweep] threads; CMLLAB_OUT_DIR is consumed by the CLI
// directly (output placement never lives in the file). Applied between file
// load and flag overrides.
void apply_env(Config& cfg);

// Builders from the standard sections. Keys and defaults:
//   [map]      kind = "standard" | "general" | "perturbed" (standard),
//              alpha1/alpha2 (0), s0 (0.1), coeffs ([])
//   [coupling] m (2), kind = "all-to-all" | "path" | "matrix" (all-to-all),
//              a = row-major m*m array (matrix only), c (required)
//   [orbit]    steps (1e5), burn_in (1e3), eps (1e-7), gamma (2^-20),
//              sync_tol (1e-9), sync_hold (1e3), trace_stride (0), seed (1),
//              stop_on_sync (false)
//   [sweep]    c_values array, or c_lo/c_hi/c_step grid; seeds_per_c (64),
//              master_seed (1), threads (0 = hardware), predicate = "sync" |
//              "intermittency" (sync), tol (1e-9), horizon (orbit steps),
//              eps (1e-4), gamma (2^-20)
// Anything malformed throws ConfigError with the offending key.
LatticeSystem system_from_config(const Config& cfg);
OrbitConfig orbit_from_config(const Config& cfg);
SweepSpec sweep_from_config(const Config& cfg);

} // namespace cmllab
