#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facetemb {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

/// Order-sensitive hash of a string list; items are length-prefixed so
/// ("ab","c") and ("a","bc") hash differently.
std::uint64_t hash_string_list(const std::vector<std::string>& items);

/// FNV-1a over the raw bytes of a file. Throws IoError if unreadable.
std::uint64_t file_digest(const std::string& path);

std::string to_hex(std::uint64_t value);

}  // namespace facetemb
