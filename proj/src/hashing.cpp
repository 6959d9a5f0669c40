#include "alphamine/hashing.hpp"

#include <cstring>

#include <openssl/evp.h>

#include "alphamine/errors.hpp"

namespace alphamine {

Digest Digest::of(std::string_view text) {
  Digest d;
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), d.bytes.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != d.bytes.size()) {
    throw Error(ErrorKind::io, "sha256 failed");
  }
  return d;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Digest Digest::from_hex(std::string_view hex) {
  Digest d;
  if (hex.size() != 2 * d.bytes.size()) {
    throw InputError("digest must be 64 hex characters, got " + std::to_string(hex.size()));
  }
  for (std::size_t i = 0; i < d.bytes.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw InputError("invalid hex digit in digest");
    d.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return d;
}

std::string Digest::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(2 * bytes.size(), '0');
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    out[2 * i] = kDigits[bytes[i] >> 4];
    out[2 * i + 1] = kDigits[bytes[i] & 0xF];
  }
  return out;
}

std::size_t DigestHash::operator()(const Digest& d) const noexcept {
  std::size_t h = 0;
  std::memcpy(&h, d.bytes.data(), sizeof h);
  return h;
}

}  // namespace alphamine
