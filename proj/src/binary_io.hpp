#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pccl/errors.hpp"

namespace pccl::detail {

// Little-endian encoder into an in-memory buffer.
class ByteWriter {
public:
  template <typename T>
    requires std::is_integral_v<T>
  void put(T v) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(u & 0xFF));
      if constexpr (sizeof(T) > 1) u >>= 8;
    }
  }

  void put_f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }

  void put_f32s(std::span<const float> vs) {
    if constexpr (std::endian::native == std::endian::little) {
      const auto* p = reinterpret_cast<const std::uint8_t*>(vs.data());
      buf_.insert(buf_.end(), p, p + vs.size_bytes());
    } else {
      for (float v : vs) put_f32(v);
    }
  }

  void put_bytes(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  }

  const std::vector<std::uint8_t>& bytes() const noexcept { return buf_; }

private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked little-endian decoder; overruns raise FormatError(truncated).
class ByteReader {
public:
  ByteReader(std::span<const std::uint8_t> data, std::string context)
      : data_(data), context_(std::move(context)) {}

  template <typename T>
    requires std::is_integral_v<T>
  T get() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(data_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  void get_f32s(std::span<float> out) {
    need(out.size_bytes());
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), data_.data() + pos_, out.size_bytes());
      pos_ += out.size_bytes();
    } else {
      for (float& v : out) v = std::bit_cast<float>(get<std::uint32_t>());
    }
  }

  void get_bytes(std::span<std::uint8_t> out) {
    need(out.size());
    std::memcpy(out.data(), data_.data() + pos_, out.size());
    pos_ += out.size();
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void need(std::size_t n) const {
    if (n > remaining())
      throw FormatError(FormatError::Kind::truncated,
                        context_ + ": truncated payload at byte " + std::to_string(pos_));
  }

private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string context_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace pccl::detail
