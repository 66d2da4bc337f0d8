// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "aeroop/error.hpp"

// Little-endian byte packing shared by the binary formats.
namespace aeroop::binio {

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void text(std::string_view s) { bytes(s.data(), s.size()); }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { uint_le(v, 4); }
  void u64(std::uint64_t v) { uint_le(v, 8); }
  void i64(std::int64_t v) { uint_le(static_cast<std::uint64_t>(v), 8); }
  void f32(float v) { uint_le(std::bit_cast<std::uint32_t>(v), 4); }
  void f64(double v) { uint_le(std::bit_cast<std::uint64_t>(v), 8); }

  const std::vector<unsigned char>& buffer() const { return buf_; }
  std::vector<unsigned char> take() { return std::move(buf_); }

 private:
  void uint_le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  Reader(const std::vector<unsigned char>& buf, std::string format)
      : buf_(buf), format_(std::move(format)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }

  void need(std::size_t n, std::string_view what) const {
    if (remaining() < n) {
      throw FormatError(format_ + ": truncated file at byte offset " + std::to_string(pos_) +
                        " reading " + std::string(what) + " (needed " + std::to_string(n) +
                        " bytes, " + std::to_string(remaining()) + " left)");
    }
  }
  std::string text(std::size_t n, std::string_view what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8(std::string_view what) { return static_cast<std::uint8_t>(uint_le(1, what)); }
  std::uint32_t u32(std::string_view what) {
    return static_cast<std::uint32_t>(uint_le(4, what));
  }
  std::uint64_t u64(std::string_view what) { return uint_le(8, what); }
  std::int64_t i64(std::string_view what) { return static_cast<std::int64_t>(uint_le(8, what)); }
  float f32(std::string_view what) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(uint_le(4, what)));
  }
  double f64(std::string_view what) { return std::bit_cast<double>(uint_le(8, what)); }

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    throw FormatError(format_ + ": " + msg + " at byte offset " + std::to_string(at));
  }

 private:
  std::uint64_t uint_le(int n, std::string_view what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  const std::vector<unsigned char>& buf_;
  std::string format_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<unsigned char>& bytes);

}  // namespace aeroop::binio
