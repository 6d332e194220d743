#include "bla/signer.hpp"

#include <sodium.h>

namespace bla {

void Signature::encode(ByteWriter& w) const {
  w.u32(signer);
  w.bytes(view(binding));
}

Signature Signature::decode(ByteReader& r) {
  Signature s;
  s.signer = r.u32();
  auto b = r.bytes();
  s.binding.assign(b.begin(), b.end());
  return s;
}

namespace {

Bytes seed_material(std::string_view domain, ProcessId pid, std::uint64_t seed) {
  ByteWriter w;
  w.u64(seed);
  w.u32(pid);
  auto d = hash(domain, {view(w.data())});
  return Bytes(d.begin(), d.end());
}

}  // namespace

KeyPair MockScheme::generate(ProcessId pid, std::uint64_t seed) {
  KeyPair k;
  k.pid = pid;
  k.secret = seed_material("mock-secret", pid, seed);
  auto pub = hash("mock-public", {view(k.secret)});
  k.public_key.assign(pub.begin(), pub.end());
  secret_of_[k.public_key] = k.secret;
  return k;
}

Signature MockScheme::sign(const KeyPair& key, BytesView msg) const {
  Signature s;
  s.signer = key.pid;
  s.binding.resize(crypto_generichash_BYTES);
  crypto_generichash(s.binding.data(), s.binding.size(), msg.data(), msg.size(),
                     key.secret.data(), key.secret.size());
  return s;
}

bool MockScheme::verify(BytesView public_key, BytesView msg, const Signature& sig) const {
  auto it = secret_of_.find(Bytes(public_key.begin(), public_key.end()));
  if (it == secret_of_.end() || sig.binding.size() != crypto_generichash_BYTES) return false;
  Bytes expect(crypto_generichash_BYTES);
  crypto_generichash(expect.data(), expect.size(), msg.data(), msg.size(), it->second.data(),
                     it->second.size());
  return sodium_memcmp(expect.data(), sig.binding.data(), expect.size()) == 0;
}

KeyPair Ed25519Scheme::generate(ProcessId pid, std::uint64_t seed) {
  auto s = seed_material("ed25519-seed", pid, seed);
  KeyPair k;
  k.pid = pid;
  k.public_key.resize(crypto_sign_PUBLICKEYBYTES);
  k.secret.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(k.public_key.data(), k.secret.data(), s.data());
  return k;
}

Signature Ed25519Scheme::sign(const KeyPair& key, BytesView msg) const {
  Signature s;
  s.signer = key.pid;
  s.binding.resize(crypto_sign_BYTES);
  crypto_sign_detached(s.binding.data(), nullptr, msg.data(), msg.size(), key.secret.data());
  return s;
}

bool Ed25519Scheme::verify(BytesView public_key, BytesView msg, const Signature& sig) const {
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES || sig.binding.size() != crypto_sign_BYTES)
    return false;
  return crypto_sign_verify_detached(sig.binding.data(), msg.data(), msg.size(),
                                     public_key.data()) == 0;
}

Signature sign(const SignatureScheme& scheme, const KeyPair& key, BytesView msg) {
  return scheme.sign(key, msg);
}

KeyRegistry::KeyRegistry(std::uint32_t n, std::uint64_t seed, SignerBackend backend)
    : backend_(backend) {
  hash(BytesView{});  // initialises libsodium
  if (backend == SignerBackend::mock)
    scheme_ = std::make_unique<MockScheme>();
  else
    scheme_ = std::make_unique<Ed25519Scheme>();
  keys_.reserve(n);
  for (ProcessId pid = 1; pid <= n; ++pid) keys_.push_back(scheme_->generate(pid, seed));
}

const Bytes& KeyRegistry::public_key(ProcessId pid) const {
  if (pid < 1 || pid > keys_.size()) throw ConfigError("no key for process " + std::to_string(pid));
  return keys_[pid - 1].public_key;
}

bool KeyRegistry::verify(BytesView msg, const Signature& sig) const {
  if (sig.signer < 1 || sig.signer > keys_.size()) return false;
  return scheme_->verify(view(keys_[sig.signer - 1].public_key), msg, sig);
}

Signature KeyRegistry::sign(const KeyPair& key, BytesView msg) const {
  return scheme_->sign(key, msg);
}

const KeyPair& KeyRegistry::issue(ProcessId pid) const {
  if (pid < 1 || pid > keys_.size()) throw ConfigError("no key for process " + std::to_string(pid));
  return keys_[pid - 1];
}

}  // namespace bla
