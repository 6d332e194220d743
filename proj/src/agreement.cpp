#include "bla/agreement.hpp"

#include <algorithm>
#include <map>

namespace bla {

GroupLabel::GroupLabel(std::string chars) : chars_(std::move(chars)) {
  for (char c : chars_)
    if (c != 's' && c != 'm') throw DecodeError("group label must be over {s,m}");
}

std::vector<Epoch> GroupLabel::slave_positions() const {
  std::vector<Epoch> out;
  for (std::size_t t = 0; t < chars_.size(); ++t)
    if (chars_[t] == 's') out.push_back(static_cast<Epoch>(t));
  return out;
}

std::vector<GroupLabel> GroupLabel::prefixes() const {
  std::vector<GroupLabel> out;
  for (std::size_t len = 1; len <= chars_.size(); ++len) out.push_back(prefix(len));
  return out;
}

GroupLabel GroupLabel::decode(ByteReader& r) { return GroupLabel(r.str()); }

std::vector<GroupLabel> slv(const std::vector<GroupLabel>& prefixes) {
  std::vector<GroupLabel> out;
  for (const auto& g : prefixes)
    if (!g.empty() && g[g.size() - 1] == 's') out.push_back(g);
  return out;
}

Role classify(std::size_t v_size, std::uint32_t t_m) {
  return v_size <= t_m ? Role::slave : Role::master;
}

Role classify(const LatticeElement& v, std::uint32_t t_m) { return classify(v.size(), t_m); }

Thresholds update_thresholds(Role role, const Thresholds& th) {
  if (role == Role::slave) return {th.down, th.down + (th.mid - th.down) / 2, th.mid};
  return {th.mid, th.mid + (th.up - th.mid) / 2, th.up};
}

std::string_view to_string(LaProtocol p) { return p == LaProtocol::gac ? "gac" : "gac_fast"; }

Thresholds initial_thresholds(LaProtocol p, std::uint32_t n, std::uint32_t f) {
  if (p == LaProtocol::gac) return {0, n / 2, n};
  return {n - f, n - f + f / 2, n};
}

Thresholds thresholds_for(const GroupLabel& g, LaProtocol p, std::uint32_t n, std::uint32_t f) {
  auto th = initial_thresholds(p, n, f);
  for (std::size_t i = 1; i < g.size(); ++i)
    th = update_thresholds(static_cast<Role>(g[i]), th);
  return th;
}

std::uint32_t ceil_log2(std::uint64_t x) {
  std::uint32_t k = 0;
  while ((std::uint64_t{1} << k) < x) ++k;
  return k;
}

std::uint32_t post_commit_epochs(LaProtocol p, std::uint32_t n, std::uint32_t f) {
  if (p == LaProtocol::gac) return ceil_log2(n) + 1;
  return f == 0 ? 1 : ceil_log2(f) + 1;
}

Digest message_digest(const GroupLabel& g, const std::vector<Atom>& values,
                      const std::vector<Digest>& commitments) {
  ByteWriter w;
  g.encode(w);
  w.u32(static_cast<std::uint32_t>(values.size()));
  for (const auto& v : values) v.encode(w);
  w.u32(static_cast<std::uint32_t>(commitments.size()));
  for (const auto& c : commitments) w.digest(c);
  return hash("value-message", {view(w.data())});
}

Digest ProofEntry::message_digest() const { return bla::message_digest(group, values, commitments); }

void ProofEntry::encode(ByteWriter& w) const {
  w.u32(epoch);
  w.u32(sender);
  group.encode(w);
  w.u32(static_cast<std::uint32_t>(values.size()));
  for (const auto& v : values) v.encode(w);
  w.u32(static_cast<std::uint32_t>(commitments.size()));
  for (const auto& c : commitments) w.digest(c);
  proof.encode(w);
}

ProofEntry ProofEntry::decode(ByteReader& r) {
  ProofEntry e;
  e.epoch = r.u32();
  e.sender = r.u32();
  e.group = GroupLabel::decode(r);
  auto nv = r.count(4);
  for (std::uint32_t i = 0; i < nv; ++i) e.values.push_back(Atom::decode(r));
  auto nc = r.count(kDigestSize);
  for (std::uint32_t i = 0; i < nc; ++i) e.commitments.push_back(r.digest());
  e.proof = SeenAllProof::decode(r);
  return e;
}

Digest ProofEntry::hash() const {
  ByteWriter w;
  encode(w);
  return bla::hash("proof-entry", {view(w.data())});
}

std::optional<std::size_t> ProofEntry::index_of(const Atom& v) const {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] == v) return i;
  return std::nullopt;
}

Digest chain_commitment(const Atom& v, const ProofChain& chain, std::size_t len) {
  ByteWriter w;
  v.encode(w);
  w.u32(static_cast<std::uint32_t>(len));
  for (std::size_t i = 0; i < len; ++i) w.digest(chain[i].hash());
  return hash("chain-commitment", {view(w.data())});
}

std::vector<Digest> ValueMessage::commitments() const {
  std::vector<Digest> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.push_back(chain_commitment(values[i], chains[i]));
  return out;
}

Digest ValueMessage::digest() const { return message_digest(group, values, commitments()); }

Bytes ValueMessage::encode() const {
  ByteWriter w;
  group.encode(w);
  w.u32(static_cast<std::uint32_t>(values.size()));
  for (const auto& v : values) v.encode(w);
  std::vector<const ProofEntry*> pool;
  std::map<Digest, std::uint32_t> index;
  std::vector<std::vector<std::uint32_t>> refs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    for (const auto& e : chains[i]) {
      auto h = e.hash();
      auto [it, fresh] = index.emplace(h, static_cast<std::uint32_t>(pool.size()));
      if (fresh) pool.push_back(&e);
      refs[i].push_back(it->second);
    }
  w.u32(static_cast<std::uint32_t>(pool.size()));
  for (const auto* e : pool) e->encode(w);
  for (const auto& r : refs) {
    w.u32(static_cast<std::uint32_t>(r.size()));
    for (auto x : r) w.u32(x);
  }
  return w.take();
}

ValueMessage ValueMessage::decode(BytesView b) {
  ByteReader r(b);
  ValueMessage m;
  m.group = GroupLabel::decode(r);
  auto nv = r.count(4);
  for (std::uint32_t i = 0; i < nv; ++i) {
    m.values.push_back(Atom::decode(r));
    if (i > 0 && !(m.values[i - 1] < m.values[i])) throw DecodeError("values not canonical");
  }
  auto np = r.count(10);
  std::vector<ProofEntry> pool;
  pool.reserve(np);
  for (std::uint32_t i = 0; i < np; ++i) pool.push_back(ProofEntry::decode(r));
  m.chains.resize(nv);
  for (std::uint32_t i = 0; i < nv; ++i) {
    auto len = r.count(4);
    for (std::uint32_t k = 0; k < len; ++k) {
      auto x = r.u32();
      if (x >= pool.size()) throw DecodeError("chain reference out of range");
      m.chains[i].push_back(pool[x]);
    }
  }
  r.expect_done();
  return m;
}

std::optional<std::size_t> ValueMessage::index_of(const Atom& v) const {
  auto it = std::lower_bound(values.begin(), values.end(), v);
  if (it == values.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

ProofEntry ValueMessage::as_entry(Epoch epoch, ProcessId sender, SeenAllProof proof) const {
  ProofEntry e;
  e.epoch = epoch;
  e.sender = sender;
  e.group = group;
  e.values = values;
  e.commitments = commitments();
  e.proof = std::move(proof);
  return e;
}

std::optional<ValueMessage> parse_for_epoch(BytesView b, Epoch epoch) {
  ValueMessage m;
  try {
    m = ValueMessage::decode(b);
  } catch (const DecodeError&) {
    return std::nullopt;
  }
  if (m.group.size() != epoch) return std::nullopt;
  if (epoch == 0) {
    if (m.values.size() != 1 || !m.chains[0].empty()) return std::nullopt;
  } else if (m.group[0] != 's') {
    return std::nullopt;
  }
  return m;
}

std::shared_ptr<const ValueMessage> parse_shared(BytesView b, Epoch epoch) {
  thread_local std::map<std::pair<Epoch, Bytes>, std::shared_ptr<const ValueMessage>> memo;
  auto key = std::make_pair(epoch, Bytes(b.begin(), b.end()));
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  if (memo.size() > 8192) memo.clear();
  std::shared_ptr<const ValueMessage> out;
  if (auto m = parse_for_epoch(b, epoch)) out = std::make_shared<const ValueMessage>(std::move(*m));
  memo.emplace(std::move(key), out);
  return out;
}

MessageDigester epoch_digester(Epoch epoch) {
  return [epoch](BytesView b) -> std::optional<Digest> {
    // Pure in (epoch, bytes); shared by every process on this thread.
    thread_local std::map<std::pair<Epoch, Bytes>, std::optional<Digest>> memo;
    auto key = std::make_pair(epoch, Bytes(b.begin(), b.end()));
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (memo.size() > 8192) memo.clear();
    std::optional<Digest> d;
    if (auto m = parse_shared(b, epoch)) d = m->digest();
    memo.emplace(std::move(key), d);
    return d;
  };
}

bool SignedVerifier::verify(std::uint64_t tag, const ProofEntry& e) const {
  auto key = std::make_pair(tag, e.hash());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  bool ok = check_signed(e.proof, tag, e.epoch, e.sender, e.message_digest(), params_, keys_) ==
            ProofCheck::valid;
  cache_.emplace(key, ok);
  return ok;
}

bool InteractiveVerifier::verify(std::uint64_t tag, const ProofEntry& e) const {
  return ex_.verdict(RelayKey{tag, e.epoch, e.sender, e.message_digest()}, e.proof);
}

bool chain_well_formed(const Atom& v, const ProofChain& chain, const GroupLabel& g) {
  auto pos = g.slave_positions();
  if (chain.size() != pos.size()) return false;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const auto& e = chain[k];
    if (e.epoch != pos[k] || e.group != g.prefix(pos[k])) return false;
    if (e.commitments.size() != e.values.size()) return false;
    auto idx = e.index_of(v);
    if (!idx) return false;
    if (e.epoch == 0 && e.values.size() != 1) return false;
    if (e.commitments[*idx] != chain_commitment(v, chain, k)) return false;
  }
  return true;
}

bool chain_valid(const Atom& v, const ProofChain& chain, const GroupLabel& g, std::uint64_t tag,
                 const ProofVerifier& verifier) {
  if (!chain_well_formed(v, chain, g)) return false;
  return std::all_of(chain.begin(), chain.end(),
                     [&](const ProofEntry& e) { return verifier.verify(tag, e); });
}

bool admissible(const Atom& v, const ValueMessage& m, const GroupLabel& g, std::uint64_t tag,
                const ProofVerifier& verifier) {
  auto idx = m.index_of(v);
  return idx && chain_valid(v, m.chains[*idx], g, tag, verifier);
}

ProvenValues filter(const std::vector<GradecastOutput>& outputs, const GroupLabel& g, Epoch epoch,
                    const AllowedProposals& allowed, std::uint64_t tag, const ProofVerifier& verifier) {
  ProvenValues out;
  for (const auto& o : outputs) {
    if (o.rank == 0 || !o.message) continue;
    auto m = parse_shared(view(*o.message), epoch);
    if (!m || m->group != g) continue;
    for (std::size_t i = 0; i < m->values.size(); ++i) {
      const auto& v = m->values[i];
      if (out.count(v) || !allowed.admits_atom(v)) continue;
      if (chain_valid(v, m->chains[i], g, tag, verifier)) out.emplace(v, m->chains[i]);
    }
  }
  return out;
}

LatticeElement LaState::proposal_element() const {
  std::vector<Atom> atoms;
  for (const auto& [v, c] : proposal) atoms.push_back(v);
  return LatticeElement(std::move(atoms));
}

namespace {

// Entry for v at this epoch from a rank-2 output whose message committed to chain.
std::optional<ProofEntry> entry_for(const Atom& v, const Digest& commitment, const GroupLabel& g,
                                    Epoch epoch, const GradecastOutput& o) {
  if (o.rank != 2 || !o.proof || !o.message) return std::nullopt;
  auto m = parse_shared(view(*o.message), epoch);
  if (!m || m->group != g) return std::nullopt;
  auto idx = m->index_of(v);
  if (!idx || chain_commitment(v, m->chains[*idx]) != commitment) return std::nullopt;
  return m->as_entry(epoch, o.sender, *o.proof);
}

ProvenValues extend_chains(const LaState& state, const std::vector<GradecastOutput>& outputs,
                           Epoch epoch, bool strict) {
  ProvenValues out;
  for (const auto& [v, chain] : state.proposal) {
    std::optional<ProofEntry> e;
    const Digest c = chain_commitment(v, chain);
    if (state.pid >= 1 && state.pid <= outputs.size())
      e = entry_for(v, c, state.group, epoch, outputs[state.pid - 1]);
    for (std::size_t i = 0; !e && i < outputs.size(); ++i)
      e = entry_for(v, c, state.group, epoch, outputs[i]);
    if (!e) {
      if (strict)
        throw ProofUnavailable("process " + std::to_string(state.pid) +
                               " cannot document value " + v.display() + " at epoch " +
                               std::to_string(epoch));
      continue;
    }
    auto next = chain;
    next.push_back(std::move(*e));
    out.emplace(v, std::move(next));
  }
  return out;
}

}  // namespace

ProvenValues update_proofs(const LaState& state, const std::vector<GradecastOutput>& outputs,
                           Epoch epoch) {
  return extend_chains(state, outputs, epoch, true);
}

GradecastParams LaParams::gradecast() const { return GradecastParams::make(n, f, variant, strict); }

nlohmann::json atoms_hex(const std::vector<Atom>& atoms) {
  auto arr = nlohmann::json::array();
  for (const auto& a : atoms) arr.push_back(to_hex(view(a.payload())));
  return arr;
}

std::vector<Atom> atoms_from_hex(const nlohmann::json& j) {
  std::vector<Atom> out;
  for (const auto& s : j) out.emplace_back(from_hex(s.get<std::string>()));
  return out;
}

LaMachine::LaMachine(LaParams params, ProcessId self, const PublicDirectory& keys, KeyPair key,
                     std::optional<Atom> proposal)
    : params_(std::move(params)), self_(self), keys_(keys), key_(std::move(key)),
      own_value_(std::move(proposal)) {
  state_.pid = self;
  if (params_.variant == Variant::signed_relays)
    signed_verifier_ = std::make_unique<SignedVerifier>(params_.gradecast(), keys_);
}

ValueMessage LaMachine::epoch_message() const {
  ValueMessage m;
  if (state_.epoch == 0) {
    if (own_value_) {
      m.values = {*own_value_};
      m.chains = {ProofChain{}};
    }
    return m;
  }
  m.group = state_.group;
  for (const auto& [v, c] : state_.proposal) {
    m.values.push_back(v);
    m.chains.push_back(c);
  }
  return m;
}

Outbox LaMachine::broadcast(std::uint8_t step, const Bytes& body) const {
  Frame fr{params_.tag, state_.epoch, step, body};
  auto payload = fr.encode();
  Outbox out;
  for (ProcessId p = 1; p <= params_.n; ++p)
    if (p != self_) out.emplace_back(p, payload);
  return out;
}

Outbox LaMachine::send(std::uint32_t local_round) {
  if (decided() || local_round < 1 || local_round > params_.total_rounds()) return {};
  auto step = static_cast<std::uint8_t>((local_round - 1) % params_.rounds_per_epoch() + 1);
  switch (step) {
    case 1: {
      GradecastContext ctx;
      ctx.params = params_.gradecast();
      ctx.tag = params_.tag;
      ctx.epoch = state_.epoch;
      ctx.self = self_;
      ctx.keys = &keys_;
      ctx.key = &key_;
      ctx.digester = epoch_digester(state_.epoch);
      ctx.relay_log = &relay_log_;
      auto m = epoch_message();
      std::optional<Bytes> own;
      if (!m.values.empty() || state_.epoch > 0) own = m.encode();
      if (state_.epoch == 0 && !own_value_) own.reset();
      gc_ = std::make_unique<GradecastEpoch>(std::move(ctx), std::move(own));
      outputs_.clear();
      auto body = gc_->body1();
      gc_->receive1(self_, view(body));
      return broadcast(1, body);
    }
    case 2: {
      auto body = gc_->body2();
      gc_->receive2(self_, view(body));
      return broadcast(2, body);
    }
    case 3: {
      auto body = gc_->body3();
      gc_->receive3(self_, view(body));
      return broadcast(3, body);
    }
    case 4: {
      confirm_ = std::make_unique<ConfirmExchange>(params_.gradecast(), self_, &relay_log_);
      register_queries();
      Outbox out;
      for (auto& [p, body] : confirm_->query_bodies())
        out.emplace_back(p, Frame{params_.tag, state_.epoch, 4, std::move(body)}.encode());
      return out;
    }
    case 5: {
      Outbox out;
      for (auto& [p, body] : confirm_->confirm_bodies())
        out.emplace_back(p, Frame{params_.tag, state_.epoch, 5, std::move(body)}.encode());
      return out;
    }
  }
  return {};
}

void LaMachine::register_queries() {
  for (const auto& o : outputs_) {
    if (o.rank == 0 || !o.message) continue;
    auto m = parse_shared(view(*o.message), state_.epoch);
    if (!m || m->group != state_.group) continue;
    for (std::size_t i = 0; i < m->values.size(); ++i) {
      if (!params_.allowed.admits_atom(m->values[i])) continue;
      if (!chain_well_formed(m->values[i], m->chains[i], state_.group)) continue;
      for (const auto& e : m->chains[i])
        confirm_->add(RelayKey{params_.tag, e.epoch, e.sender, e.message_digest()}, e.proof);
    }
  }
}

void LaMachine::receive(std::uint32_t local_round, std::span<const Envelope> inbox) {
  if (decided() || local_round < 1 || local_round > params_.total_rounds()) return;
  auto step = static_cast<std::uint8_t>((local_round - 1) % params_.rounds_per_epoch() + 1);
  for (const auto& env : inbox) {
    auto fr = Frame::decode(view(env.payload));
    if (!fr || fr->tag != params_.tag || fr->epoch != state_.epoch || fr->step != step) continue;
    switch (step) {
      case 1: gc_->receive1(env.from, view(fr->body)); break;
      case 2: gc_->receive2(env.from, view(fr->body)); break;
      case 3: gc_->receive3(env.from, view(fr->body)); break;
      case 4: confirm_->receive_queries(env.from, view(fr->body)); break;
      case 5: confirm_->receive_confirms(env.from, view(fr->body)); break;
    }
  }
  if (step == 3) outputs_ = gc_->outputs();
  if (step == params_.rounds_per_epoch()) finish_epoch();
}

void LaMachine::finish_epoch() {
  const Epoch e = state_.epoch;
  const auto before = state_.group;
  ProvenValues admitted;
  std::string role;

  if (e == 0) {
    if (params_.protocol == LaProtocol::gac) {
      if (own_value_) {
        const auto& o = outputs_[self_ - 1];
        std::shared_ptr<const ValueMessage> m;
        if (o.rank == 2 && o.proof && o.message) m = parse_shared(view(*o.message), 0);
        if (m && m->values.front() == *own_value_)
          admitted.emplace(*own_value_, ProofChain{m->as_entry(0, self_, *o.proof)});
        else if (params_.strict)
          throw ProofUnavailable("own epoch-0 gradecast did not reach rank 2");
      }
    } else {
      for (const auto& o : outputs_) {
        if (o.rank != 2 || !o.proof || !o.message) continue;
        auto m = parse_shared(view(*o.message), 0);
        if (!m || !params_.allowed.admits_atom(m->values.front())) continue;
        admitted.emplace(m->values.front(), ProofChain{m->as_entry(0, o.sender, *o.proof)});
      }
    }
    state_.proposal = admitted;
    state_.group = GroupLabel("s");
    state_.thresholds = initial_thresholds(params_.protocol, params_.n, params_.f);
  } else {
    std::unique_ptr<InteractiveVerifier> iv;
    const ProofVerifier* verifier = signed_verifier_.get();
    if (params_.variant == Variant::interactive) {
      iv = std::make_unique<InteractiveVerifier>(*confirm_);
      verifier = iv.get();
    }
    admitted = filter(outputs_, state_.group, e, params_.allowed, params_.tag, *verifier);
    auto r = classify(admitted.size(), state_.thresholds.mid);
    role = std::string(1, static_cast<char>(r));
    if (r == Role::slave)
      state_.proposal = extend_chains(state_, outputs_, e, params_.strict);
    else
      state_.proposal = admitted;
    state_.thresholds = update_thresholds(r, state_.thresholds);
    state_.group = state_.group.extended(r);
  }

  std::vector<Atom> v_atoms, pro_atoms;
  for (const auto& [v, c] : admitted) v_atoms.push_back(v);
  for (const auto& [v, c] : state_.proposal) pro_atoms.push_back(v);
  traces_.push_back({{"kind", "epoch"},
                     {"tag", params_.tag},
                     {"epoch", e},
                     {"group_before", before.str()},
                     {"role", role},
                     {"group", state_.group.str()},
                     {"thresholds", {state_.thresholds.down, state_.thresholds.mid, state_.thresholds.up}},
                     {"V", atoms_hex(v_atoms)},
                     {"pro", atoms_hex(pro_atoms)}});

  if (e + 1 == params_.epochs()) {
    if (params_.strict && state_.thresholds.up - state_.thresholds.down > 1)
      throw Error("final interval wider than one: [" + std::to_string(state_.thresholds.down) +
                  ", " + std::to_string(state_.thresholds.up) + "]");
    decision_ = state_.proposal_element();
    gc_.reset();
    confirm_.reset();
    return;
  }
  state_.epoch = e + 1;
}

Digest LaMachine::state_digest() const {
  ByteWriter w;
  w.u32(state_.epoch);
  state_.group.encode(w);
  w.u32(state_.thresholds.down);
  w.u32(state_.thresholds.mid);
  w.u32(state_.thresholds.up);
  state_.proposal_element().encode(w);
  w.u8(decided() ? 1 : 0);
  return hash("la-state", {view(w.data())});
}

LatticeElement unwrap_decision(const LatticeElement& inner, const AllowedProposals& outer) {
  LatticeElement out;
  for (const auto& a : inner) {
    auto w = WrappedAtom::from_atom(a);
    if (w && outer.admits(w->value)) out = join(out, w->value);
  }
  return out;
}

LaProcess::LaProcess(LaParams params, const ProcessContext& ctx, Atom proposal)
    : self_(ctx.self), machine_(std::move(params), ctx.self, *ctx.keys, ctx.key, std::move(proposal)) {}

Outbox LaProcess::send(Round round) { return machine_.send(static_cast<std::uint32_t>(round)); }

void LaProcess::receive(Round round, std::span<const Envelope> inbox) {
  machine_.receive(static_cast<std::uint32_t>(round), inbox);
}

bool LaProcess::terminated() const { return machine_.decided(); }

void LaProcess::drain(Round round, ProcessEvents& out) {
  for (auto& t : machine_.take_traces()) out.traces.push_back(TraceRecord{self_, round, std::move(t)});
  if (machine_.decided() && !reported_) {
    out.decisions.push_back(DecisionRecord{self_, round, 0, machine_.decision()});
    reported_ = true;
  }
}

WrappedProcess::WrappedProcess(LaParams inner, AllowedProposals outer, const ProcessContext& ctx,
                               LatticeElement proposal)
    : self_(ctx.self), outer_(std::move(outer)),
      machine_(std::move(inner), ctx.self, *ctx.keys, ctx.key,
               WrappedAtom{ctx.self, std::move(proposal)}.to_atom()) {}

Outbox WrappedProcess::send(Round round) { return machine_.send(static_cast<std::uint32_t>(round)); }

void WrappedProcess::receive(Round round, std::span<const Envelope> inbox) {
  machine_.receive(static_cast<std::uint32_t>(round), inbox);
}

bool WrappedProcess::terminated() const { return machine_.decided(); }

void WrappedProcess::drain(Round round, ProcessEvents& out) {
  for (auto& t : machine_.take_traces()) out.traces.push_back(TraceRecord{self_, round, std::move(t)});
  if (machine_.decided() && !reported_) {
    out.traces.push_back(TraceRecord{
        self_, round, {{"kind", "inner_decision"}, {"atoms", atoms_hex(machine_.decision().atoms())}}});
    out.decisions.push_back(DecisionRecord{self_, round, 0, unwrap_decision(machine_.decision(), outer_)});
    reported_ = true;
  }
}

}  // namespace bla
