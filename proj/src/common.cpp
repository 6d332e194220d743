#include "bla/common.hpp"

#include <sodium.h>

#include <mutex>

namespace bla {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw Error("libsodium initialisation failed");
  });
}

}  // namespace

std::string_view to_string(Variant v) {
  return v == Variant::signed_relays ? "signed" : "interactive";
}

Variant parse_variant(std::string_view s) {
  if (s == "signed") return Variant::signed_relays;
  if (s == "interactive") return Variant::interactive;
  throw ConfigError("unknown variant: " + std::string(s));
}

Digest hash(std::string_view domain, std::initializer_list<BytesView> parts) {
  ensure_sodium();
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, kDigestSize);
  std::uint8_t len[4] = {static_cast<std::uint8_t>(domain.size() >> 24),
                         static_cast<std::uint8_t>(domain.size() >> 16),
                         static_cast<std::uint8_t>(domain.size() >> 8),
                         static_cast<std::uint8_t>(domain.size())};
  crypto_generichash_update(&st, len, 4);
  crypto_generichash_update(&st, reinterpret_cast<const std::uint8_t*>(domain.data()),
                            domain.size());
  for (BytesView p : parts) crypto_generichash_update(&st, p.data(), p.size());
  Digest out{};
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

Digest hash(BytesView data) {
  ensure_sodium();
  Digest out{};
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

std::string to_hex(BytesView data) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xf]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw DecodeError("odd hex length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DecodeError("bad hex digit");
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return out;
}

void ByteWriter::u32(std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
  out_.insert(out_.end(), b, b + 4);
}

void ByteWriter::u64(std::uint64_t v) {
  u32(static_cast<std::uint32_t>(v >> 32));
  u32(static_cast<std::uint32_t>(v));
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
  auto b = raw(4);
  return std::uint32_t{b[0]} << 24 | std::uint32_t{b[1]} << 16 | std::uint32_t{b[2]} << 8 |
         std::uint32_t{b[3]};
}

std::uint64_t ByteReader::u64() {
  auto b = raw(8);
  std::uint64_t v = 0;
  for (auto x : b) v = v << 8 | x;
  return v;
}

BytesView ByteReader::raw(std::size_t n) {
  if (n > in_.size() - pos_) throw DecodeError("truncated input");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

Digest ByteReader::digest() {
  auto b = raw(kDigestSize);
  Digest d{};
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

std::string ByteReader::str() {
  auto b = bytes();
  return {b.begin(), b.end()};
}

std::uint32_t ByteReader::count(std::size_t min_item_size) {
  auto c = u32();
  if (min_item_size > 0 && c > (in_.size() - pos_) / min_item_size)
    throw DecodeError("count exceeds remaining input");
  return c;
}

void ByteReader::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes");
}

}  // namespace bla
