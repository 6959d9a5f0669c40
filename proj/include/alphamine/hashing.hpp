#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace alphamine {

// 256-bit SHA-256 digest.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  static Digest of(std::string_view text);
  // Throws InputError on anything but 64 hex characters.
  static Digest from_hex(std::string_view hex);
  std::string hex() const;

  auto operator<=>(const Digest&) const = default;
};

struct DigestHash {
  std::size_t operator()(const Digest& d) const noexcept;
};

}  // namespace alphamine
