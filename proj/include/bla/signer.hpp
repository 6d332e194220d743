#pragma once

#include <map>
#include <memory>
#include <vector>

#include "bla/common.hpp"

namespace bla {

enum class SignerBackend { mock, ed25519 };

struct KeyPair {
  ProcessId pid = 0;
  Bytes secret;
  Bytes public_key;
};

struct Signature {
  ProcessId signer = 0;
  Bytes binding;

  void encode(ByteWriter& w) const;
  static Signature decode(ByteReader& r);
  friend bool operator==(const Signature&, const Signature&) = default;
};

class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual KeyPair generate(ProcessId pid, std::uint64_t seed) = 0;
  virtual Signature sign(const KeyPair& key, BytesView msg) const = 0;
  virtual bool verify(BytesView public_key, BytesView msg, const Signature& sig) const = 0;
};

// Keyed BLAKE2b. Verification is mediated by the scheme, which remembers the
// secret behind every public key it generated.
class MockScheme final : public SignatureScheme {
 public:
  KeyPair generate(ProcessId pid, std::uint64_t seed) override;
  Signature sign(const KeyPair& key, BytesView msg) const override;
  bool verify(BytesView public_key, BytesView msg, const Signature& sig) const override;

 private:
  std::map<Bytes, Bytes> secret_of_;
};

class Ed25519Scheme final : public SignatureScheme {
 public:
  KeyPair generate(ProcessId pid, std::uint64_t seed) override;
  Signature sign(const KeyPair& key, BytesView msg) const override;
  bool verify(BytesView public_key, BytesView msg, const Signature& sig) const override;
};

Signature sign(const SignatureScheme& scheme, const KeyPair& key, BytesView msg);

// Read-only view: public keys and verification, no secrets.
class PublicDirectory {
 public:
  virtual ~PublicDirectory() = default;
  virtual std::uint32_t size() const = 0;
  virtual const Bytes& public_key(ProcessId pid) const = 0;
  // True iff sig was produced by sig.signer's secret over msg.
  virtual bool verify(BytesView msg, const Signature& sig) const = 0;
  virtual Signature sign(const KeyPair& key, BytesView msg) const = 0;
};

// Keys for ids 1..n derived from the run seed. Only the engine and test
// harnesses call issue(); processes receive their own pair; the adversary
// receives Byzantine pairs only.
class KeyRegistry final : public PublicDirectory {
 public:
  KeyRegistry(std::uint32_t n, std::uint64_t seed, SignerBackend backend = SignerBackend::mock);

  std::uint32_t size() const override { return static_cast<std::uint32_t>(keys_.size()); }
  const Bytes& public_key(ProcessId pid) const override;
  bool verify(BytesView msg, const Signature& sig) const override;
  Signature sign(const KeyPair& key, BytesView msg) const override;

  const KeyPair& issue(ProcessId pid) const;
  SignerBackend backend() const { return backend_; }

 private:
  SignerBackend backend_;
  std::unique_ptr<SignatureScheme> scheme_;
  std::vector<KeyPair> keys_;
};

}  // namespace bla
