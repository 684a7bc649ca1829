#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <type_traits>

#include "dflow/errors.hpp"

namespace dflow::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <class T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <class T>
T read_le(std::istream& in, const std::string& source) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) throw InvalidInput(source + ": unexpected end of file");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace dflow::detail
