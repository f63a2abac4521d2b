#include "stackres/blob.hpp"

#include <openssl/sha.h>

#include "stackres/error.hpp"

namespace stackres {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BlobId BlobId::from_hex(std::string_view hex) {
  if (hex.size() != 2 * kSize) {
    throw Error(ErrorCode::Deserialize, "blob id must be 64 hex digits, got '" + std::string(hex) + "'");
  }
  std::array<std::uint8_t, kSize> out{};
  for (std::size_t i = 0; i < kSize; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::Deserialize, "bad hex digit in blob id");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return BlobId(out);
}

std::string BlobId::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * kSize);
  for (auto byte : digest_) {
    out.push_back(kDigits[byte >> 4]);
    out.push_back(kDigits[byte & 0xf]);
  }
  return out;
}

BlobId blob_id(std::span<const std::uint8_t> content) {
  std::array<std::uint8_t, BlobId::kSize> digest{};
  SHA256(content.data(), content.size(), digest.data());
  return BlobId(digest);
}

BlobId blob_id(std::string_view content) {
  return blob_id(std::span(reinterpret_cast<const std::uint8_t*>(content.data()), content.size()));
}

}  // namespace stackres
