#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace cmllab {

inline constexpr const char* kToolVersion = "0.1.0";

// One file the run read or wrote, with the FNV-1a hash of its bytes.
struct FileRecord {
    std::string path; // relative to the manifest's directory
    std::string hash_hex;
};

// Record of one CLI invocation, written next to its outputs. Everything a
// replay needs is inside: the fully resolved configuration (after file,
// environment, and flag layering) and the master seed. Outputs are listed
// with content hashes so a replay can be checked without keeping the
// original bytes around. The timing fields are informational and excluded
// from replay comparison.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;         // subcommand name, e.g. "scan"
    std::string resolved_config; // Config::dump() text
    std::uint64_t master_seed = 0;
    std::vector<FileRecord> inputs;
    std::vector<FileRecord> outputs;
    double wall_seconds = 0;
    double steps_per_second = 0;

    std::string to_json() const;
    static RunManifest from_json(const std::string& text); // ConfigError on malformed

    void save(const std::string& path) const;      // ConfigError if unwritable
    static RunManifest load(const std::string& path);
};

// Hash of a file's bytes as a fixed-width hex string; ConfigError if the
// file cannot be read.
std::string hash_file(const std::string& path);

} // namespace cmllab
