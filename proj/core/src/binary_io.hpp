#ifndef BIMODAL_SRC_BINARY_IO_HPP_
#define BIMODAL_SRC_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>

#include "bimodal/io_errors.hpp"

namespace bimodal::detail {

template <typename T>
T to_little_endian(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    value = to_little_endian(value);
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  template <typename T>
  void put_array(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(values.data()),
                 static_cast<std::streamsize>(values.size_bytes()));
    } else {
      for (const T& v : values) put(v);
    }
  }

  void put_bytes(const char* data, std::size_t n) {
    out_.write(data, static_cast<std::streamsize>(n));
  }

 private:
  std::ostream& out_;
};

/// Reads little-endian values and tracks the byte offset for error messages.
class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in, std::uint64_t offset = 0) : in_(in), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

  template <typename T>
  T get(const char* what) {
    T value;
    read_raw(reinterpret_cast<char*>(&value), sizeof(T), what);
    return to_little_endian(value);
  }

  template <typename T>
  void get_array(std::span<T> out, const char* what) {
    read_raw(reinterpret_cast<char*>(out.data()), out.size_bytes(), what);
    if constexpr (std::endian::native == std::endian::big) {
      for (T& v : out) v = to_little_endian(v);
    }
  }

  void get_bytes(char* out, std::size_t n, const char* what) { read_raw(out, n, what); }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw ParseError("trailing bytes after payload", offset_);
    }
  }

 private:
  void read_raw(char* out, std::size_t n, const char* what) {
    in_.read(out, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::uint64_t>(in_.gcount());
    if (got != n) {
      throw ParseError(std::string("unexpected end of file reading ") + what, offset_ + got);
    }
    offset_ += n;
  }

  std::istream& in_;
  std::uint64_t offset_;
};

}  // namespace bimodal::detail

#endif  // BIMODAL_SRC_BINARY_IO_HPP_
