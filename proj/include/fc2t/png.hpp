#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "errors.hpp"

namespace fc2t::png {

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4], std::span<const std::uint8_t> data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

// 8-bit RGB, no interlace, filter 0 on every scanline, fixed zlib level:
// identical pixels always produce identical bytes.
inline std::vector<std::uint8_t> encode_rgb(std::span<const std::uint8_t> rgb, int width, int height) {
  if (width <= 0 || height <= 0 || rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw DomainError("png::encode_rgb: pixel buffer does not match dimensions");
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(height) * (width * 3 + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const auto* row = rgb.data() + static_cast<std::size_t>(y) * width * 3;
    raw.insert(raw.end(), row, row + width * 3);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("png::encode_rgb: zlib compression failed");
  packed.resize(packed_size);

  std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  detail::put_u32(ihdr, static_cast<std::uint32_t>(width));
  detail::put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // depth 8, colour type RGB
  detail::put_chunk(out, "IHDR", ihdr);
  detail::put_chunk(out, "IDAT", packed);
  detail::put_chunk(out, "IEND", {});
  return out;
}

struct Dimensions {
  int width = 0;
  int height = 0;
};

// Reads width/height from the IHDR chunk.
inline Dimensions read_dimensions(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 24 || !std::equal(kSig, kSig + 8, bytes.begin()) ||
      std::string(bytes.begin() + 12, bytes.begin() + 16) != "IHDR")
    throw DomainError("png::read_dimensions: not a PNG stream");
  auto u32 = [&](std::size_t at) {
    return static_cast<int>((std::uint32_t(bytes[at]) << 24) | (std::uint32_t(bytes[at + 1]) << 16) |
                            (std::uint32_t(bytes[at + 2]) << 8) | std::uint32_t(bytes[at + 3]));
  };
  return {u32(16), u32(20)};
}

// Inverse of encode_rgb for images it produced (filter 0 only); used by tests.
inline std::vector<std::uint8_t> decode_rgb(std::span<const std::uint8_t> bytes, Dimensions& dims) {
  dims = read_dimensions(bytes);
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 12 <= bytes.size()) {
    const std::size_t len = (std::size_t(bytes[pos]) << 24) | (std::size_t(bytes[pos + 1]) << 16) |
                            (std::size_t(bytes[pos + 2]) << 8) | std::size_t(bytes[pos + 3]);
    const std::string type(bytes.begin() + pos + 4, bytes.begin() + pos + 8);
    if (type == "IDAT") idat.insert(idat.end(), bytes.begin() + pos + 8, bytes.begin() + pos + 8 + len);
    pos += 12 + len;
  }
  const std::size_t stride = static_cast<std::size_t>(dims.width) * 3 + 1;
  std::vector<std::uint8_t> raw(stride * dims.height);
  uLongf raw_size = raw.size();
  if (uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK || raw_size != raw.size())
    throw DomainError("png::decode_rgb: corrupt image data");
  std::vector<std::uint8_t> rgb;
  rgb.reserve(static_cast<std::size_t>(dims.width) * dims.height * 3);
  for (int y = 0; y < dims.height; ++y) {
    if (raw[y * stride] != 0) throw DomainError("png::decode_rgb: unsupported filter");
    rgb.insert(rgb.end(), raw.begin() + y * stride + 1, raw.begin() + (y + 1) * stride);
  }
  return rgb;
}

}  // namespace fc2t::png
