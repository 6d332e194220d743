#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bla {

using ProcessId = std::uint32_t;
using Round = std::uint64_t;
using Epoch = std::uint32_t;
using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;
using Digest = std::array<std::uint8_t, kDigestSize>;

enum class Variant { signed_relays, interactive };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

// Error taxonomy shared by all modules.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct AccessViolation : Error {
  using Error::Error;
};
struct MalformedProof : Error {
  using Error::Error;
};
struct ProofUnavailable : Error {
  using Error::Error;
};
struct IncompleteTranscript : Error {
  using Error::Error;
};
struct Overflow : Error {
  using Error::Error;
};
struct BudgetExceeded : Error {
  using Error::Error;
};
struct DecodeError : Error {
  using Error::Error;
};

// BLAKE2b-256 over the concatenation of the given parts, with a domain string.
Digest hash(std::string_view domain, std::initializer_list<BytesView> parts);
Digest hash(BytesView data);

std::string to_hex(BytesView data);
inline std::string to_hex(const Digest& d) { return to_hex(BytesView(d.data(), d.size())); }
Bytes from_hex(std::string_view hex);

inline BytesView view(const Digest& d) { return {d.data(), d.size()}; }
inline BytesView view(const Bytes& b) { return {b.data(), b.size()}; }
inline BytesView view(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Big-endian, length-prefixed canonical writer.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void raw(BytesView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void digest(const Digest& d) { raw(view(d)); }
  void bytes(BytesView b) {
    u32(static_cast<std::uint32_t>(b.size()));
    raw(b);
  }
  void str(std::string_view s) { bytes(view(s)); }

  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(BytesView in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  BytesView raw(std::size_t n);
  Digest digest();
  BytesView bytes() { return raw(u32()); }
  std::string str();
  // Bounded count prefix; guards allocation against hostile lengths.
  std::uint32_t count(std::size_t min_item_size);

  bool done() const { return pos_ == in_.size(); }
  void expect_done() const;

 private:
  BytesView in_;
  std::size_t pos_ = 0;
};

}  // namespace bla
