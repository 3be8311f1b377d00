#pragma once

// Private little-endian stream helpers shared by the dataset and checkpoint
// readers/writers. All reads throw DataError on truncation so corrupt files
// surface as data errors, not UB.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "rotascore/errors.hpp"

namespace rotascore::binio {

static_assert(std::endian::native == std::endian::little,
              "serialized containers assume a little-endian host");

inline void write_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& in, void* p, std::size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw DataError(std::string("truncated file while reading ") + what);
  }
}

template <typename T>
void write_pod(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  write_bytes(out, &v, sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  static_assert(std::is_trivially_copyable_v<T>);
  T v{};
  read_bytes(in, &v, sizeof(T), what);
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}

inline std::string read_string(std::istream& in, const char* what, std::uint32_t max_len = 1u << 20) {
  const auto len = read_pod<std::uint32_t>(in, what);
  if (len > max_len) throw DataError(std::string("implausible string length while reading ") + what);
  std::string s(len, '\0');
  if (len > 0) read_bytes(in, s.data(), len, what);
  return s;
}

}  // namespace rotascore::binio
