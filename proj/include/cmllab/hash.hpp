#pragma once
#include <cstdint>
#include <cstring>
#include <string>

namespace cmllab {

// FNV-1a 64-bit. Used for content hashes in manifests and for tagging
// system definitions; replay compares these, so the only requirement is
// determinism, not collision resistance.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

std::string hash_hex(std::uint64_t h);

} // namespace cmllab
