#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace mvskit::detail {

inline void put_u32_le(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t u32_from_le(const unsigned char* b) {
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

inline std::uint32_t u32_from_be(const unsigned char* b) {
  return std::uint32_t(b[3]) | (std::uint32_t(b[2]) << 8) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[0]) << 24);
}

inline void put_f32_le(std::ostream& os, float f) { put_u32_le(os, std::bit_cast<std::uint32_t>(f)); }

inline float f32_from_le(const unsigned char* b) { return std::bit_cast<float>(u32_from_le(b)); }
inline float f32_from_be(const unsigned char* b) { return std::bit_cast<float>(u32_from_be(b)); }

}  // namespace mvskit::detail
