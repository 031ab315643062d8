#include "facetemb/hash.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "facetemb/errors.hpp"

namespace facetemb {

std::uint64_t hash_string_list(const std::vector<std::string>& items) {
    std::uint64_t h = kFnvOffset;
    for (const std::string& s : items) {
        std::uint64_t len = s.size();
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<unsigned char>(len >> (8 * i));
            h *= kFnvPrime;
        }
        h = fnv1a64(s, h);
    }
    return h;
}

std::uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::uint64_t h = kFnvOffset;
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64({buf.data(), static_cast<std::size_t>(in.gcount())}, h);
    }
    return h;
}

std::string to_hex(std::uint64_t value) {
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(value));
    return out;
}

}  // namespace facetemb
