#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

#include "legendrian/errors.hpp"

namespace legendrian::io {

template <typename U>
void put_le_bits(std::ostream& out, U bits) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename U>
U get_le_bits(std::istream& in) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) throw FormatError("binary data truncated");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(static_cast<U>(b[i]) << (8 * i));
  return bits;
}

inline void put_le(std::ostream& out, double v) { put_le_bits(out, std::bit_cast<std::uint64_t>(v)); }
inline double get_le(std::istream& in) { return std::bit_cast<double>(get_le_bits<std::uint64_t>(in)); }

}  // namespace legendrian::io
