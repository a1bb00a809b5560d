#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gdv/error.hpp"

namespace gdv::detail {

std::vector<unsigned char> read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::vector<unsigned char> &bytes);

/// Appends fixed-width little-endian values.
class ByteWriter {
 public:
  void bytes(std::string_view raw) { buffer_.insert(buffer_.end(), raw.begin(), raw.end()); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void string(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  const std::vector<unsigned char> &buffer() const noexcept { return buffer_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buffer_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  std::vector<unsigned char> buffer_;
};

/// Bounds-checked cursor; every read first verifies the remaining length and
/// throws TruncatedFile otherwise.
class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char> &data, std::string source) : data_(data), source_(std::move(source)) {}

  std::size_t remaining() const noexcept { return data_.size() - offset_; }
  std::size_t offset() const noexcept { return offset_; }

  void require(std::uint64_t count, std::string_view what) const {
    if (count > remaining()) {
      throw Error(ErrorKind::TruncatedFile, source_ + ": need " + std::to_string(count) + " bytes for " +
                                                std::string(what) + ", " + std::to_string(remaining()) + " left");
    }
  }
  std::string raw(std::size_t count, std::string_view what) {
    require(count, what);
    std::string out(reinterpret_cast<const char *>(data_.data() + offset_), count);
    offset_ += count;
    return out;
  }
  std::uint32_t u32(std::string_view what = "u32") { return static_cast<std::uint32_t>(get(4, what, false)); }
  std::uint64_t u64(std::string_view what = "u64") { return get(8, what, false); }
  std::uint32_t u32_be(std::string_view what = "u32") { return static_cast<std::uint32_t>(get(4, what, true)); }
  float f32(std::string_view what = "f32") { return std::bit_cast<float>(u32(what)); }
  double f64(std::string_view what = "f64") { return std::bit_cast<double>(u64(what)); }
  std::uint8_t u8(std::string_view what = "u8") { return static_cast<std::uint8_t>(get(1, what, false)); }
  std::string string(std::string_view what) {
    const std::uint32_t length = u32(what);
    return raw(length, what);
  }
  const std::string &source() const noexcept { return source_; }

 private:
  std::uint64_t get(int width, std::string_view what, bool big_endian) {
    require(static_cast<std::uint64_t>(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      const std::uint64_t byte = data_[offset_ + static_cast<std::size_t>(i)];
      v |= big_endian ? byte << (8 * (width - 1 - i)) : byte << (8 * i);
    }
    offset_ += static_cast<std::size_t>(width);
    return v;
  }

  const std::vector<unsigned char> &data_;
  std::string source_;
  std::size_t offset_ = 0;
};

}  // namespace gdv::detail
