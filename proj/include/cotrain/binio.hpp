#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace cotrain::binio {

// Little-endian scalar IO regardless of host byte order.

inline uint64_t byteswap64(uint64_t v) {
    return __builtin_bswap64(v);
}
inline uint32_t byteswap32(uint32_t v) {
    return __builtin_bswap32(v);
}

inline void write_u32(std::ostream& os, uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) v = byteswap32(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void write_u64(std::ostream& os, uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) v = byteswap64(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline void write_f64(std::ostream& os, double d) {
    write_u64(os, std::bit_cast<uint64_t>(d));
}

inline bool read_u32(std::istream& is, uint32_t& v) {
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(v))) return false;
    if constexpr (std::endian::native == std::endian::big) v = byteswap32(v);
    return true;
}

inline bool read_u64(std::istream& is, uint64_t& v) {
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(v))) return false;
    if constexpr (std::endian::native == std::endian::big) v = byteswap64(v);
    return true;
}

inline bool read_f64(std::istream& is, double& d) {
    uint64_t bits;
    if (!read_u64(is, bits)) return false;
    d = std::bit_cast<double>(bits);
    return true;
}

}  // namespace cotrain::binio
