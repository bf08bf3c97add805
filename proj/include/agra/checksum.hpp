#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace agra {

// FNV-1a 64-bit. Guards artifacts against truncation and accidental edits.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x00000100000001B3ull;
    }
    return h;
}

inline std::string checksum_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace agra
