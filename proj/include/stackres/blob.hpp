#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

namespace stackres {

/// Content digest naming one file version. Depends only on the bytes.
class BlobId {
 public:
  static constexpr std::size_t kSize = 32;

  BlobId() = default;
  explicit BlobId(const std::array<std::uint8_t, kSize>& digest) : digest_(digest) {}

  /// Throws Error{Deserialize} unless `hex` is 64 lowercase/uppercase hex digits.
  static BlobId from_hex(std::string_view hex);

  [[nodiscard]] std::string hex() const;
  [[nodiscard]] const std::array<std::uint8_t, kSize>& bytes() const noexcept { return digest_; }

  friend auto operator<=>(const BlobId&, const BlobId&) = default;

 private:
  std::array<std::uint8_t, kSize> digest_{};
};

/// SHA-256 over the raw bytes, no normalization.
BlobId blob_id(std::span<const std::uint8_t> content);
BlobId blob_id(std::string_view content);

}  // namespace stackres

template <>
struct std::hash<stackres::BlobId> {
  std::size_t operator()(const stackres::BlobId& b) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | b.bytes()[i];
    return h;
  }
};
