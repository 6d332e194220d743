#include "bla/gradecast.hpp"

#include <algorithm>

namespace bla {

GradecastParams GradecastParams::make(std::uint32_t n, std::uint32_t f, Variant mode, bool enforce) {
  if (enforce) {
    if (mode == Variant::signed_relays && n < 3 * f + 1)
      throw ConfigError("signed gradecast requires n >= 3f+1");
    if (mode == Variant::interactive && n < 4 * f + 1)
      throw ConfigError("interactive gradecast requires n >= 4f+1");
  }
  if (n < 3 * f + 1) throw ConfigError("gradecast requires n >= 3f+1");
  GradecastParams p;
  p.n = n;
  p.f = f;
  p.mode = mode;
  p.rank2_threshold = n - f;
  p.relay_threshold = n - f;
  p.rank1_threshold = f + 1;
  p.confirm_quorum = 2 * f + 1;
  return p;
}

void SeenAllProof::encode(ByteWriter& w) const {
  w.u8(mode == Variant::signed_relays ? 0 : 1);
  if (mode == Variant::signed_relays) {
    w.u32(static_cast<std::uint32_t>(signatures.size()));
    for (const auto& s : signatures) s.encode(w);
  } else {
    w.u32(static_cast<std::uint32_t>(ids.size()));
    for (auto id : ids) w.u32(id);
  }
}

SeenAllProof SeenAllProof::decode(ByteReader& r) {
  SeenAllProof p;
  auto m = r.u8();
  if (m > 1) throw DecodeError("bad proof mode");
  p.mode = m == 0 ? Variant::signed_relays : Variant::interactive;
  if (p.mode == Variant::signed_relays) {
    auto c = r.count(8);
    for (std::uint32_t i = 0; i < c; ++i) p.signatures.push_back(Signature::decode(r));
  } else {
    auto c = r.count(4);
    for (std::uint32_t i = 0; i < c; ++i) p.ids.push_back(r.u32());
  }
  return p;
}

Bytes relay_payload(std::uint64_t tag, Epoch epoch, ProcessId sender, const Digest& digest) {
  ByteWriter w;
  w.u64(tag);
  w.u32(epoch);
  w.u32(sender);
  w.digest(digest);
  return w.take();
}

std::string_view to_string(ProofCheck c) {
  switch (c) {
    case ProofCheck::valid: return "valid";
    case ProofCheck::wrong_mode: return "wrong_mode";
    case ProofCheck::duplicate_ids: return "duplicate_ids";
    case ProofCheck::below_threshold: return "below_threshold";
    case ProofCheck::unknown_id: return "unknown_id";
    case ProofCheck::bad_signature: return "bad_signature";
  }
  return "?";
}

ProofCheck check_structure(const SeenAllProof& proof, const GradecastParams& params) {
  if (proof.mode != params.mode) return ProofCheck::wrong_mode;
  std::vector<ProcessId> ids;
  if (proof.mode == Variant::signed_relays) {
    if (!proof.ids.empty()) return ProofCheck::wrong_mode;
    for (const auto& s : proof.signatures) ids.push_back(s.signer);
  } else {
    if (!proof.signatures.empty()) return ProofCheck::wrong_mode;
    ids = proof.ids;
  }
  for (auto id : ids)
    if (id < 1 || id > params.n) return ProofCheck::unknown_id;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) return ProofCheck::duplicate_ids;
  if (ids.size() < params.rank2_threshold) return ProofCheck::below_threshold;
  return ProofCheck::valid;
}

ProofCheck check_signed(const SeenAllProof& proof, std::uint64_t tag, Epoch epoch, ProcessId sender,
                        const Digest& digest, const GradecastParams& params,
                        const PublicDirectory& keys) {
  if (auto c = check_structure(proof, params); c != ProofCheck::valid) return c;
  if (proof.mode != Variant::signed_relays) return ProofCheck::wrong_mode;
  auto payload = relay_payload(tag, epoch, sender, digest);
  for (const auto& s : proof.signatures)
    if (!keys.verify(view(payload), s)) return ProofCheck::bad_signature;
  return ProofCheck::valid;
}

bool verify_seen_all(const SeenAllProof& proof, std::uint64_t tag, Epoch epoch, ProcessId sender,
                     const Digest& digest, const GradecastParams& params, const PublicDirectory& keys) {
  auto c = check_signed(proof, tag, epoch, sender, digest, params, keys);
  switch (c) {
    case ProofCheck::valid: return true;
    case ProofCheck::below_threshold:
    case ProofCheck::bad_signature: return false;
    default: throw MalformedProof(std::string(to_string(c)));
  }
}

bool verify_seen_all(const SeenAllProof& proof, const std::set<ProcessId>& confirmed,
                     const GradecastParams& params) {
  auto c = check_structure(proof, params);
  if (c == ProofCheck::below_threshold) return false;
  if (c != ProofCheck::valid) throw MalformedProof(std::string(to_string(c)));
  std::size_t yes = 0;
  for (auto id : proof.ids) yes += confirmed.count(id);
  return yes >= params.confirm_quorum;
}

MessageDigester plain_digester() {
  return [](BytesView m) -> std::optional<Digest> { return hash("gradecast-message", {m}); };
}

Bytes Frame::encode() const {
  ByteWriter w;
  w.u64(tag);
  w.u32(epoch);
  w.u8(step);
  w.bytes(view(body));
  return w.take();
}

std::optional<Frame> Frame::decode(BytesView b) {
  try {
    ByteReader r(b);
    Frame f;
    f.tag = r.u64();
    f.epoch = r.u32();
    f.step = r.u8();
    auto body = r.bytes();
    f.body.assign(body.begin(), body.end());
    r.expect_done();
    return f;
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}

GradecastEpoch::GradecastEpoch(GradecastContext ctx, std::optional<Bytes> own_message)
    : ctx_(std::move(ctx)), own_(std::move(own_message)) {}

std::optional<Digest> GradecastEpoch::digest_of(BytesView message) const {
  Bytes key(message.begin(), message.end());
  auto it = digest_cache_.find(key);
  if (it != digest_cache_.end()) return it->second;
  std::optional<Digest> d;
  try {
    d = ctx_.digester(message);
  } catch (const DecodeError&) {
    d.reset();
  }
  digest_cache_.emplace(std::move(key), d);
  return d;
}

Bytes GradecastEpoch::body1() const {
  ByteWriter w;
  w.u32(own_ ? 1 : 0);
  if (own_) w.bytes(view(*own_));
  return w.take();
}

void GradecastEpoch::receive1(ProcessId from, BytesView body) {
  if (from_sender_.count(from)) return;
  try {
    ByteReader r(body);
    auto c = r.count(4);
    for (std::uint32_t i = 0; i < c; ++i) {
      auto m = r.bytes();
      if (digest_of(m)) {
        from_sender_.emplace(from, Bytes(m.begin(), m.end()));
        return;
      }
    }
  } catch (const DecodeError&) {
  }
}

Bytes GradecastEpoch::body2() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(from_sender_.size()));
  for (const auto& [s, m] : from_sender_) {
    w.u32(s);
    w.bytes(view(m));
  }
  return w.take();
}

void GradecastEpoch::receive2(ProcessId from, BytesView body) {
  try {
    ByteReader r(body);
    auto c = r.count(8);
    std::set<ProcessId> seen;
    for (std::uint32_t i = 0; i < c; ++i) {
      auto s = r.u32();
      auto m = r.bytes();
      if (s < 1 || s > ctx_.params.n || !seen.insert(s).second) continue;
      if (!digest_of(m)) continue;
      round2_[s].sources[Bytes(m.begin(), m.end())].insert(from);
    }
  } catch (const DecodeError&) {
  }
}

std::optional<Bytes> GradecastEpoch::most_frequent(const Tally& t, std::size_t& count) {
  std::optional<Bytes> best;
  count = 0;
  for (const auto& [m, src] : t.sources)
    if (src.size() > count) {
      count = src.size();
      best = m;
    }
  return best;
}

Bytes GradecastEpoch::body3() {
  ByteWriter items;
  std::uint32_t n_items = 0;
  for (const auto& [s, tally] : round2_) {
    std::size_t count = 0;
    auto m = most_frequent(tally, count);
    if (!m || count < ctx_.params.relay_threshold) continue;
    auto d = *digest_of(*m);
    items.u32(s);
    items.bytes(view(*m));
    if (ctx_.params.mode == Variant::signed_relays) {
      items.u8(1);
      ctx_.keys->sign(*ctx_.key, view(relay_payload(ctx_.tag, ctx_.epoch, s, d))).encode(items);
    } else {
      items.u8(0);
    }
    if (ctx_.relay_log) ctx_.relay_log->record(RelayKey{ctx_.tag, ctx_.epoch, s, d});
    ++n_items;
  }
  ByteWriter w;
  w.u32(n_items);
  w.raw(view(items.data()));
  return w.take();
}

void GradecastEpoch::receive3(ProcessId from, BytesView body) {
  try {
    ByteReader r(body);
    auto c = r.count(9);
    std::set<ProcessId> seen;
    for (std::uint32_t i = 0; i < c; ++i) {
      auto s = r.u32();
      auto m = r.bytes();
      std::optional<Signature> sig;
      if (r.u8() == 1) sig = Signature::decode(r);
      if (s < 1 || s > ctx_.params.n || !seen.insert(s).second) continue;
      auto d = digest_of(m);
      if (!d) continue;
      Bytes msg(m.begin(), m.end());
      if (ctx_.params.mode == Variant::signed_relays) {
        if (!sig || sig->signer != from) continue;
        if (!ctx_.keys->verify(view(relay_payload(ctx_.tag, ctx_.epoch, s, *d)), *sig)) continue;
        round3_[s].signatures[msg].emplace(from, *sig);
      }
      round3_[s].sources[msg].insert(from);
    }
  } catch (const DecodeError&) {
  }
}

std::vector<GradecastOutput> GradecastEpoch::outputs() const {
  std::vector<GradecastOutput> out(ctx_.params.n);
  for (ProcessId s = 1; s <= ctx_.params.n; ++s) {
    auto& o = out[s - 1];
    o.sender = s;
    auto it = round3_.find(s);
    if (it == round3_.end()) continue;
    std::size_t count = 0;
    auto m = most_frequent(it->second, count);
    if (!m || count < ctx_.params.rank1_threshold) continue;
    o.message = *m;
    o.digest = digest_of(*m);
    o.rank = count >= ctx_.params.rank2_threshold ? 2 : 1;
    if (o.rank == 2) {
      SeenAllProof p;
      p.mode = ctx_.params.mode;
      if (p.mode == Variant::signed_relays) {
        const auto& sigs = it->second.signatures.at(*m);
        for (const auto& [relayer, sig] : sigs) {
          if (p.signatures.size() == ctx_.params.rank2_threshold) break;
          p.signatures.push_back(sig);
        }
      } else {
        const auto& src = it->second.sources.at(*m);
        p.ids.assign(src.begin(), src.end());
      }
      o.proof = std::move(p);
    }
  }
  return out;
}

namespace wire {

std::vector<Bytes> decode_sends(BytesView body) {
  ByteReader r(body);
  auto c = r.count(4);
  std::vector<Bytes> out;
  for (std::uint32_t i = 0; i < c; ++i) {
    auto m = r.bytes();
    out.emplace_back(m.begin(), m.end());
  }
  r.expect_done();
  return out;
}

Bytes encode_sends(const std::vector<Bytes>& messages) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(messages.size()));
  for (const auto& m : messages) w.bytes(view(m));
  return w.take();
}

std::vector<Relay> decode_relays(BytesView body, bool step3) {
  ByteReader r(body);
  auto c = r.count(step3 ? 9 : 8);
  std::vector<Relay> out;
  for (std::uint32_t i = 0; i < c; ++i) {
    Relay x;
    x.sender = r.u32();
    auto m = r.bytes();
    x.message.assign(m.begin(), m.end());
    if (step3 && r.u8() == 1) x.signature = Signature::decode(r);
    out.push_back(std::move(x));
  }
  r.expect_done();
  return out;
}

Bytes encode_relays(const std::vector<Relay>& relays, bool step3) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(relays.size()));
  for (const auto& x : relays) {
    w.u32(x.sender);
    w.bytes(view(x.message));
    if (step3) {
      w.u8(x.signature ? 1 : 0);
      if (x.signature) x.signature->encode(w);
    }
  }
  return w.take();
}

}  // namespace wire

void ConfirmExchange::add(const RelayKey& key, const SeenAllProof& proof) {
  if (check_structure(proof, params_) != ProofCheck::valid) return;
  for (auto id : proof.ids)
    if (id != self_) outgoing_[id].insert(key);
}

Bytes ConfirmExchange::encode_queries(const std::vector<RelayKey>& keys) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(keys.size()));
  for (const auto& k : keys) {
    w.u64(k.tag);
    w.u32(k.epoch);
    w.u32(k.sender);
    w.digest(k.digest);
  }
  return w.take();
}

std::vector<RelayKey> ConfirmExchange::decode_queries(BytesView body) {
  ByteReader r(body);
  auto c = r.count(48);
  std::vector<RelayKey> out;
  for (std::uint32_t i = 0; i < c; ++i) {
    RelayKey k;
    k.tag = r.u64();
    k.epoch = r.u32();
    k.sender = r.u32();
    k.digest = r.digest();
    out.push_back(k);
  }
  r.expect_done();
  return out;
}

Bytes ConfirmExchange::encode_answers(const std::vector<std::pair<RelayKey, bool>>& answers) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(answers.size()));
  for (const auto& [k, yes] : answers) {
    w.u64(k.tag);
    w.u32(k.epoch);
    w.u32(k.sender);
    w.digest(k.digest);
    w.u8(yes ? 1 : 0);
  }
  return w.take();
}

std::vector<std::pair<RelayKey, bool>> ConfirmExchange::decode_answers(BytesView body) {
  ByteReader r(body);
  auto c = r.count(49);
  std::vector<std::pair<RelayKey, bool>> out;
  for (std::uint32_t i = 0; i < c; ++i) {
    RelayKey k;
    k.tag = r.u64();
    k.epoch = r.u32();
    k.sender = r.u32();
    k.digest = r.digest();
    out.emplace_back(k, r.u8() == 1);
  }
  r.expect_done();
  return out;
}

std::map<ProcessId, Bytes> ConfirmExchange::query_bodies() const {
  std::map<ProcessId, Bytes> out;
  for (ProcessId p = 1; p <= params_.n; ++p) {
    if (p == self_) continue;
    auto it = outgoing_.find(p);
    std::vector<RelayKey> keys;
    if (it != outgoing_.end()) keys.assign(it->second.begin(), it->second.end());
    out[p] = encode_queries(keys);
  }
  return out;
}

void ConfirmExchange::receive_queries(ProcessId from, BytesView body) {
  try {
    auto q = decode_queries(body);
    if (q.size() > 4096) q.resize(4096);
    incoming_[from] = std::move(q);
  } catch (const DecodeError&) {
  }
}

std::map<ProcessId, Bytes> ConfirmExchange::confirm_bodies() const {
  std::map<ProcessId, Bytes> out;
  for (ProcessId p = 1; p <= params_.n; ++p) {
    if (p == self_) continue;
    std::vector<std::pair<RelayKey, bool>> answers;
    if (auto it = incoming_.find(p); it != incoming_.end())
      for (const auto& k : it->second) answers.emplace_back(k, log_ && log_->relayed(k));
    out[p] = encode_answers(answers);
  }
  return out;
}

void ConfirmExchange::receive_confirms(ProcessId from, BytesView body) {
  auto asked = outgoing_.find(from);
  if (asked == outgoing_.end()) return;
  try {
    auto& dst = answers_[from];
    for (const auto& [k, yes] : decode_answers(body))
      if (asked->second.count(k) && !dst.count(k)) dst[k] = yes;
  } catch (const DecodeError&) {
  }
}

bool ConfirmExchange::verdict(const RelayKey& key, const SeenAllProof& proof) const {
  if (check_structure(proof, params_) != ProofCheck::valid) return false;
  std::set<ProcessId> confirmed;
  for (auto id : proof.ids) {
    if (id == self_) {
      if (log_ && log_->relayed(key)) confirmed.insert(id);
      continue;
    }
    auto it = answers_.find(id);
    if (it == answers_.end()) continue;
    auto a = it->second.find(key);
    if (a != it->second.end() && a->second) confirmed.insert(id);
  }
  return verify_seen_all(proof, confirmed, params_);
}

}  // namespace bla
