#include "bla/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace bla {

bool Verdicts::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const auto& v) { return v.pass; });
}

const PropertyVerdict* Verdicts::find(std::string_view property) const {
  for (const auto& v : items)
    if (v.property == property) return &v;
  return nullptr;
}

void Verdicts::merge(const Verdicts& other, const std::string& prefix) {
  for (auto v : other.items) {
    v.property = prefix + v.property;
    items.push_back(std::move(v));
  }
}

nlohmann::json Verdicts::to_json() const {
  auto out = nlohmann::json::object();
  for (const auto& v : items) out[v.property] = {{"pass", v.pass}, {"witness", v.witness}};
  return out;
}

namespace {

nlohmann::json atoms_json(const std::set<Atom>& s) {
  auto a = nlohmann::json::array();
  for (const auto& x : s) a.push_back(x.display());
  return a;
}

nlohmann::json element_json(const LatticeElement& e) {
  auto a = nlohmann::json::array();
  for (const auto& x : e) a.push_back(x.display());
  return a;
}

// Decode a step-3 body the way a receiver does: first item per sender,
// items before a decoding failure kept.
struct RawRelay {
  ProcessId sender;
  Bytes message;
  std::optional<Signature> sig;
};

std::vector<RawRelay> raw_relays(BytesView body, std::uint32_t n) {
  std::vector<RawRelay> out;
  std::set<ProcessId> seen;
  try {
    ByteReader r(body);
    auto c = r.count(9);
    for (std::uint32_t i = 0; i < c; ++i) {
      RawRelay x;
      x.sender = r.u32();
      auto m = r.bytes();
      x.message.assign(m.begin(), m.end());
      if (r.u8() == 1) x.sig = Signature::decode(r);
      if (x.sender < 1 || x.sender > n || !seen.insert(x.sender).second) continue;
      out.push_back(std::move(x));
    }
  } catch (const DecodeError&) {
  }
  return out;
}

std::vector<Bytes> raw_sends(BytesView body) {
  try {
    return wire::decode_sends(body);
  } catch (const DecodeError&) {
    return {};
  }
}

std::uint32_t instance_epochs(LaProtocol p, std::uint32_t n, std::uint32_t f) {
  return post_commit_epochs(p, n, f) + 1;
}

}  // namespace

InstanceOracle::InstanceOracle(const Transcript& t, const PublicDirectory& keys, std::uint64_t tag,
                               AllowedProposals allowed, std::uint32_t epochs)
    : config_(t.config), keys_(keys), tag_(tag), allowed_(std::move(allowed)), epochs_(epochs),
      correct_(t.config.correct_ids()) {
  index(t);
}

const std::optional<InstanceOracle::Parsed>& InstanceOracle::parse(Epoch e, const Bytes& m) const {
  auto key = std::make_pair(e, m);
  if (auto it = parse_cache_.find(key); it != parse_cache_.end()) return it->second;
  std::optional<Parsed> out;
  if (auto vm = parse_for_epoch(view(m), e)) {
    const Digest d = vm->digest();
    out = Parsed{std::move(*vm), d};
  }
  return parse_cache_.emplace(std::move(key), std::move(out)).first->second;
}

bool InstanceOracle::verify(BytesView payload, const Signature& sig) const {
  auto key = std::make_tuple(hash(payload), sig.signer, sig.binding);
  if (auto it = verify_cache_.find(key); it != verify_cache_.end()) return it->second;
  bool ok = keys_.verify(payload, sig);
  verify_cache_.emplace(std::move(key), ok);
  return ok;
}

void InstanceOracle::index(const Transcript& t) {
  const std::uint32_t n = config_.n;
  for (const auto& env : t.envelopes) {
    auto fr = Frame::decode(view(env.payload));
    if (!fr || fr->tag != tag_ || fr->epoch >= epochs_) continue;
    auto& d = data_[fr->epoch];
    const bool from_correct = !config_.is_byzantine(env.from);
    if (fr->step == 1) {
      auto msgs = raw_sends(view(fr->body));
      for (const auto& m : msgs) d.epoch_messages.insert(m);
      if (from_correct && !msgs.empty()) d.correct_sends.emplace(env.from, msgs.front());
    } else if (fr->step == 2) {
      try {
        for (const auto& x : wire::decode_relays(view(fr->body), false)) d.epoch_messages.insert(x.message);
      } catch (const DecodeError&) {
      }
    } else if (fr->step == 3) {
      for (auto& x : raw_relays(view(fr->body), n)) {
        d.epoch_messages.insert(x.message);
        const auto& m = parse(fr->epoch, x.message);
        if (!m) continue;
        if (config_.variant == Variant::signed_relays) {
          if (!x.sig || x.sig->signer != env.from) continue;
          if (!verify(view(relay_payload(tag_, fr->epoch, x.sender, m->digest)), *x.sig)) continue;
        }
        if (!config_.is_byzantine(env.to)) d.delivered[env.to][x.sender][env.from] = x.message;
        if (from_correct) {
          d.correct_relays[env.from][x.sender] = x.message;
          d.delivered[env.from][x.sender][env.from] = x.message;
        }
      }
    }
  }
}

InstanceOracle::Output InstanceOracle::output(Epoch e, ProcessId p, ProcessId s) const {
  auto key = std::make_tuple(e, p, s);
  if (auto it = output_cache_.find(key); it != output_cache_.end()) return it->second;
  return output_cache_.emplace(key, compute_output(e, p, s)).first->second;
}

InstanceOracle::Output InstanceOracle::compute_output(Epoch e, ProcessId p, ProcessId s) const {
  Output out;
  auto it = data_.find(e);
  if (it == data_.end()) return out;
  auto pit = it->second.delivered.find(p);
  if (pit == it->second.delivered.end()) return out;
  auto sit = pit->second.find(s);
  if (sit == pit->second.end()) return out;
  std::map<Bytes, std::size_t> counts;
  for (const auto& [relayer, m] : sit->second) ++counts[m];
  const Bytes* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [m, c] : counts)
    if (c > best_count) {
      best = &m;
      best_count = c;
    }
  if (!best || best_count < config_.f + 1) return out;
  out.message = *best;
  out.rank = best_count >= config_.n - config_.f ? 2 : 1;
  return out;
}

std::optional<Bytes> InstanceOracle::sent(Epoch e, ProcessId s) const {
  auto it = data_.find(e);
  if (it == data_.end()) return std::nullopt;
  auto sit = it->second.correct_sends.find(s);
  if (sit == it->second.correct_sends.end()) return std::nullopt;
  return sit->second;
}

std::set<ProcessId> InstanceOracle::correct_relayers(Epoch e, ProcessId s, const Bytes& m) const {
  std::set<ProcessId> out;
  auto it = data_.find(e);
  if (it == data_.end()) return out;
  for (const auto& [relayer, by_sender] : it->second.correct_relays) {
    auto sit = by_sender.find(s);
    if (sit != by_sender.end() && sit->second == m) out.insert(relayer);
  }
  return out;
}

bool InstanceOracle::seen_all_able(Epoch e, ProcessId s, const Bytes& m) const {
  const std::size_t c = correct_relayers(e, s, m).size();
  const std::size_t f = config_.f;
  if (c == 0) return false;
  if (config_.variant == Variant::signed_relays) return c + f >= config_.n - f;
  return c + f >= 2 * f + 1;
}

bool InstanceOracle::in_w(Epoch e, ProcessId s, const Bytes& m) const {
  for (auto p : correct_) {
    auto o = output(e, p, s);
    if (o.rank == 0 || *o.message != m) return false;
  }
  return true;
}

std::set<std::pair<ProcessId, Bytes>> InstanceOracle::w(Epoch e, const std::optional<GroupLabel>& g) const {
  std::set<std::pair<ProcessId, Bytes>> out;
  for (const auto& [s, m] : relayed_messages(e)) {
    if (!in_w(e, s, m)) continue;
    if (g) {
      const auto& vm = parse(e, m);
      if (!vm || vm->message.group != *g) continue;
    }
    out.emplace(s, m);
  }
  return out;
}

std::vector<std::pair<ProcessId, Bytes>> InstanceOracle::relayed_messages(Epoch e) const {
  std::set<std::pair<ProcessId, Bytes>> out;
  auto it = data_.find(e);
  if (it != data_.end())
    for (const auto& [relayer, by_sender] : it->second.correct_relays)
      for (const auto& [s, m] : by_sender) out.emplace(s, m);
  return {out.begin(), out.end()};
}

bool InstanceOracle::proof_passes(const ProofEntry& e) const {
  const Digest key = e.hash();
  if (auto it = proof_cache_.find(key); it != proof_cache_.end()) return it->second;
  bool ok = check_proof(e);
  proof_cache_.emplace(key, ok);
  return ok;
}

bool InstanceOracle::check_proof(const ProofEntry& e) const {
  const auto& p = e.proof;
  const std::uint32_t n = config_.n, f = config_.f;
  if (e.sender < 1 || e.sender > n || p.mode != config_.variant) return false;
  std::vector<ProcessId> ids;
  if (p.mode == Variant::signed_relays) {
    if (!p.ids.empty()) return false;
    for (const auto& s : p.signatures) ids.push_back(s.signer);
  } else {
    if (!p.signatures.empty()) return false;
    ids = p.ids;
  }
  std::set<ProcessId> distinct(ids.begin(), ids.end());
  if (distinct.size() != ids.size() || distinct.size() < n - f) return false;
  if (*distinct.begin() < 1 || *distinct.rbegin() > n) return false;
  const Digest d = e.message_digest();
  if (p.mode == Variant::signed_relays) {
    auto payload = relay_payload(tag_, e.epoch, e.sender, d);
    for (const auto& s : p.signatures)
      if (!verify(view(payload), s)) return false;
    return true;
  }
  // Listed Byzantine ids may confirm anything; listed correct ids confirm
  // what they relayed.
  std::size_t yes = 0;
  auto it = data_.find(e.epoch);
  for (auto id : distinct) {
    if (config_.is_byzantine(id)) {
      ++yes;
      continue;
    }
    if (it == data_.end()) continue;
    auto rit = it->second.correct_relays.find(id);
    if (rit == it->second.correct_relays.end()) continue;
    auto sit = rit->second.find(e.sender);
    if (sit == rit->second.end()) continue;
    const auto& m = parse(e.epoch, sit->second);
    if (m && m->digest == d) ++yes;
  }
  return yes >= 2 * f + 1;
}

bool InstanceOracle::chain_ok(const Atom& v, const ProofChain& chain, const GroupLabel& g) const {
  auto pos = g.slave_positions();
  if (chain.size() != pos.size()) return false;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const auto& e = chain[k];
    if (e.epoch != pos[k] || e.group != g.prefix(pos[k])) return false;
    if (e.values.size() != e.commitments.size()) return false;
    if (e.epoch == 0 && e.values.size() != 1) return false;
    auto it = std::find(e.values.begin(), e.values.end(), v);
    if (it == e.values.end()) return false;
    if (e.commitments[it - e.values.begin()] != chain_commitment(v, chain, k)) return false;
    if (!proof_passes(e)) return false;
  }
  return true;
}

const std::set<Atom>& InstanceOracle::admissible(const GroupLabel& g) const {
  if (auto it = admissible_cache_.find(g); it != admissible_cache_.end()) return it->second;
  std::set<Atom> out;
  auto pos = g.slave_positions();
  if (!g.empty() && g[0] == 's') {
    const Epoch last = pos.back();
    const GroupLabel sender_group = g.prefix(last);
    for (const auto& [s, m] : relayed_messages(last)) {
      if (!seen_all_able(last, s, m)) continue;
      const auto& parsed = parse(last, m);
      if (!parsed || parsed->message.group != sender_group) continue;
      const auto& vm = parsed->message;
      for (std::size_t i = 0; i < vm.values.size(); ++i) {
        const auto& v = vm.values[i];
        if (allowed_.admits_atom(v) && chain_ok(v, vm.chains[i], sender_group)) out.insert(v);
      }
    }
  }
  return admissible_cache_.emplace(g, std::move(out)).first->second;
}

bool InstanceOracle::committed_in_epoch0(const Atom& v) const {
  for (const auto& [s, m] : relayed_messages(0)) {
    if (!seen_all_able(0, s, m)) continue;
    const auto& vm = parse(0, m);
    if (vm && vm->message.values.front() == v) return true;
  }
  return false;
}

std::set<Atom> InstanceOracle::epoch0_atoms() const {
  std::set<Atom> out;
  auto it = data_.find(0);
  if (it == data_.end()) return out;
  for (const auto& m : it->second.epoch_messages) {
    try {
      auto vm = ValueMessage::decode(view(m));
      out.insert(vm.values.begin(), vm.values.end());
    } catch (const DecodeError&) {
    }
  }
  return out;
}

Verdicts check_gradecast(const InstanceOracle& o, const SimulationConfig& config) {
  PropertyVerdict agreement{"gc_agreement", true, nullptr};
  PropertyVerdict gap{"gc_rank_gap", true, nullptr};
  PropertyVerdict validity{"gc_correct_sender", true, nullptr};
  PropertyVerdict soundness{"seen_all_soundness", true, nullptr};
  const auto correct = config.correct_ids();
  for (Epoch e = 0; e < o.epochs(); ++e) {
    for (ProcessId s = 1; s <= config.n; ++s) {
      std::optional<Bytes> common;
      int lo = 3, hi = -1;
      for (auto p : correct) {
        auto out = o.output(e, p, s);
        lo = std::min<int>(lo, out.rank);
        hi = std::max<int>(hi, out.rank);
        if (out.rank > 0) {
          if (common && *common != *out.message && agreement.pass) {
            agreement.pass = false;
            agreement.witness = {{"epoch", e}, {"sender", s}, {"process", p}};
          }
          common = out.message;
        }
      }
      if (!correct.empty() && hi - lo > 1 && gap.pass) {
        gap.pass = false;
        gap.witness = {{"epoch", e}, {"sender", s}, {"min", lo}, {"max", hi}};
      }
      if (!config.is_byzantine(s)) {
        if (auto m = o.sent(e, s)) {
          for (auto p : correct) {
            auto out = o.output(e, p, s);
            if ((out.rank != 2 || *out.message != *m) && validity.pass) {
              validity.pass = false;
              validity.witness = {{"epoch", e}, {"sender", s}, {"process", p}, {"rank", out.rank}};
            }
          }
        }
      }
    }
    for (const auto& [s, m] : o.relayed_messages(e))
      if (o.seen_all_able(e, s, m) && !o.in_w(e, s, m) && soundness.pass) {
        soundness.pass = false;
        soundness.witness = {{"epoch", e}, {"sender", s}, {"message", to_hex(view(m))}};
      }
  }
  Verdicts v;
  v.add(agreement);
  v.add(gap);
  v.add(validity);
  v.add(soundness);
  return v;
}

namespace {

struct EpochTrace {
  Epoch epoch = 0;
  GroupLabel before, group;
  Thresholds th;
  std::set<Atom> v, pro;
};

std::map<ProcessId, std::vector<EpochTrace>> epoch_traces(const Transcript& t, std::uint64_t tag) {
  std::map<ProcessId, std::vector<EpochTrace>> out;
  for (const auto& r : t.traces) {
    if (t.config.is_byzantine(r.pid)) continue;
    const auto& j = r.data;
    if (j.value("kind", "") != "epoch" || j.value("tag", std::uint64_t{0}) != tag) continue;
    EpochTrace e;
    e.epoch = j.at("epoch").get<Epoch>();
    e.before = GroupLabel(j.at("group_before").get<std::string>());
    e.group = GroupLabel(j.at("group").get<std::string>());
    const auto& th = j.at("thresholds");
    e.th = {th[0].get<std::uint32_t>(), th[1].get<std::uint32_t>(), th[2].get<std::uint32_t>()};
    for (const auto& a : atoms_from_hex(j.at("V"))) e.v.insert(a);
    for (const auto& a : atoms_from_hex(j.at("pro"))) e.pro.insert(a);
    out[r.pid].push_back(std::move(e));
  }
  for (auto& [p, v] : out)
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.epoch < b.epoch; });
  return out;
}

std::optional<LatticeElement> inner_decision(const Transcript& t, const LaAudit& a, ProcessId p) {
  if (a.shape == LaShape::atoms) {
    for (const auto& d : t.decisions)
      if (d.pid == p && d.index == 0) return d.value;
    return std::nullopt;
  }
  for (const auto& r : t.traces) {
    if (r.pid != p) continue;
    const auto& j = r.data;
    if (a.shape == LaShape::wrapped && j.value("kind", "") == "inner_decision")
      return LatticeElement(atoms_from_hex(j.at("atoms")));
    if (a.shape == LaShape::gla_term && j.value("kind", "") == "term" &&
        j.value("term", std::uint64_t{0}) == a.tag)
      return LatticeElement(atoms_from_hex(j.at("inner")));
  }
  return std::nullopt;
}

Atom wrap(ProcessId p, const LatticeElement& y) { return WrappedAtom{p, y}.to_atom(); }

void fail(PropertyVerdict& v, nlohmann::json w) {
  if (!v.pass) return;
  v.pass = false;
  v.witness = std::move(w);
}

}  // namespace

Verdicts check_la(const Transcript& t, const LaAudit& audit) {
  if (!t.completed) throw IncompleteTranscript("transcript did not complete");
  const auto& cfg = t.config;
  const auto correct = cfg.correct_ids();
  std::map<ProcessId, std::vector<const DecisionRecord*>> decs;
  for (const auto& d : t.decisions)
    if (!cfg.is_byzantine(d.pid)) decs[d.pid].push_back(&d);

  PropertyVerdict liveness{"liveness", true, nullptr};
  PropertyVerdict stability{"stability", true, nullptr};
  PropertyVerdict comparability{"comparability", true, nullptr};
  PropertyVerdict inclusivity{"inclusivity", true, nullptr};
  PropertyVerdict nontriv{"non_triviality", true, nullptr};

  std::map<ProcessId, LatticeElement> dec;
  for (auto p : correct) {
    auto it = decs.find(p);
    if (it == decs.end() || it->second.empty()) {
      fail(liveness, {{"undecided", p}});
      continue;
    }
    if (it->second.size() != 1) fail(stability, {{"process", p}, {"decisions", it->second.size()}});
    dec[p] = it->second.front()->value;
  }
  for (auto a = dec.begin(); a != dec.end(); ++a)
    for (auto b = std::next(a); b != dec.end(); ++b)
      if (!comparable(a->second, b->second))
        fail(comparability, {{"p", a->first}, {"q", b->first}, {"dec_p", element_json(a->second)},
                             {"dec_q", element_json(b->second)}});
  for (const auto& [p, d] : dec) {
    auto pit = audit.proposals.find(p);
    if (pit != audit.proposals.end() && !leq(pit->second, d))
      fail(inclusivity, {{"process", p}, {"proposal", element_json(pit->second)}, {"decision", element_json(d)}});
  }

  // Non-Triviality with the constructive witness B.
  KeyRegistry keys(cfg.n, cfg.seed, cfg.signer);
  const std::uint32_t epochs = instance_epochs(audit.protocol, cfg.n, cfg.f);
  InstanceOracle o(t, keys, audit.tag, audit.inner_allowed, epochs);
  LatticeElement x;
  for (const auto& [p, v] : audit.proposals) x = join(x, v);
  std::set<Atom> b;
  if (audit.shape == LaShape::atoms) {
    for (const auto& [p, d] : dec)
      for (const auto& a : d)
        if (!x.contains(a)) b.insert(a);
  } else {
    std::set<Atom> inner_x;
    for (const auto& [p, v] : audit.proposals) inner_x.insert(wrap(p, v));
    for (auto p : correct) {
      auto d = inner_decision(t, audit, p);
      if (!d) continue;
      for (const auto& a : *d)
        if (!inner_x.count(a)) b.insert(a);
    }
  }
  std::set<Atom> uncommitted;
  for (const auto& a : b)
    if (!o.committed_in_epoch0(a)) uncommitted.insert(a);
  nlohmann::json bw = {{"B", atoms_json(b)}, {"size", b.size()}, {"f", cfg.f}};
  if (b.size() > cfg.f) fail(nontriv, bw);
  if (!uncommitted.empty()) fail(nontriv, {{"B", atoms_json(b)}, {"uncommitted", atoms_json(uncommitted)}});
  LatticeElement bound = x;
  if (audit.shape == LaShape::atoms) {
    for (const auto& a : b) bound.insert(a);
  } else {
    for (const auto& a : b)
      if (auto w = WrappedAtom::from_atom(a); w && audit.outer_allowed.admits(w->value))
        bound = join(bound, w->value);
  }
  for (const auto& [p, d] : dec)
    if (!leq(d, bound)) fail(nontriv, {{"process", p}, {"decision", element_json(d)}, {"bound", element_json(bound)}});
  if (nontriv.pass) nontriv.witness = bw;

  Verdicts v;
  v.add(liveness);
  v.add(stability);
  v.add(comparability);
  v.add(inclusivity);
  v.add(nontriv);
  return v;
}

Verdicts check_lemmas(const Transcript& t, const LaAudit& audit) {
  if (!t.completed) throw IncompleteTranscript("transcript did not complete");
  const auto& cfg = t.config;
  const auto correct = cfg.correct_ids();
  KeyRegistry keys(cfg.n, cfg.seed, cfg.signer);
  const std::uint32_t epochs = instance_epochs(audit.protocol, cfg.n, cfg.f);
  InstanceOracle o(t, keys, audit.tag, audit.inner_allowed, epochs);
  auto traces = epoch_traces(t, audit.tag);

  PropertyVerdict monotonic{"monotonicity", true, nullptr};
  PropertyVerdict halving{"halving", true, nullptr};
  PropertyVerdict dominates{"master_dominates", true, nullptr};
  PropertyVerdict forever{"once_forever", true, nullptr};
  PropertyVerdict agreement{"v_in_admissible", true, nullptr};
  PropertyVerdict decision_epoch{"decision_epoch", true, nullptr};

  auto subset = [](const std::set<Atom>& a, const std::set<Atom>& b, std::set<Atom>& missing) {
    for (const auto& x : a)
      if (!b.count(x)) missing.insert(x);
    return missing.empty();
  };

  std::set<GroupLabel> labels;
  std::map<ProcessId, GroupLabel> final_group;
  for (auto p : correct) {
    auto it = traces.find(p);
    if (it == traces.end() || it->second.size() != epochs || it->second.back().epoch + 1 != epochs) {
      fail(decision_epoch, {{"process", p}, {"epochs_seen", it == traces.end() ? 0 : it->second.size()},
                            {"expected", epochs}});
      continue;
    }
    const auto& last = it->second.back();
    if (last.th.up - last.th.down > 1)
      fail(decision_epoch, {{"process", p}, {"width", last.th.up - last.th.down}});
    final_group[p] = last.group;
    for (const auto& g : last.group.prefixes()) labels.insert(g);
  }

  for (const auto& g : labels) {
    if (g.size() < 2) continue;
    const auto parent = g.prefix(g.size() - 1);
    std::set<Atom> missing;
    if (!subset(o.admissible(g), o.admissible(parent), missing))
      fail(monotonic, {{"group", g.str()}, {"parent", parent.str()}, {"extra", atoms_json(missing)}});
  }

  const double width0 = audit.protocol == LaProtocol::gac ? cfg.n : cfg.f;
  for (const auto& [p, ts] : traces) {
    for (const auto& e : ts) {
      const auto& a = o.admissible(e.group);
      const std::uint64_t cap = static_cast<std::uint64_t>(
          std::ceil(width0 / static_cast<double>(std::uint64_t{1} << (e.group.size() - 1))));
      if (a.size() > e.th.up || e.pro.size() < e.th.down || e.th.up - e.th.down > cap)
        fail(halving, {{"process", p}, {"epoch", e.epoch}, {"group", e.group.str()}, {"A", a.size()},
                       {"pro", e.pro.size()}, {"t_d", e.th.down}, {"t_u", e.th.up}, {"cap", cap}});
      if (e.epoch >= 1) {
        std::set<Atom> missing;
        if (!subset(e.v, o.admissible(e.before), missing))
          fail(agreement, {{"process", p}, {"epoch", e.epoch}, {"group", e.before.str()},
                           {"outside", atoms_json(missing)}});
      }
    }
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (std::size_t j = i; j < ts.size(); ++j) {
        std::set<Atom> missing;
        if (!subset(ts[i].pro, o.admissible(ts[j].group), missing))
          fail(forever, {{"process", p}, {"added_by_epoch", ts[i].epoch}, {"group", ts[j].group.str()},
                         {"not_admissible", atoms_json(missing)}});
      }
  }

  // Chains carried by correct senders must verify against the wire.
  for (auto p : correct)
    for (Epoch e = 1; e < epochs; ++e) {
      auto m = o.sent(e, p);
      if (!m) continue;
      auto vm = parse_for_epoch(view(*m), e);
      if (!vm) {
        fail(forever, {{"process", p}, {"epoch", e}, {"reason", "unparseable message"}});
        continue;
      }
      for (std::size_t i = 0; i < vm->values.size(); ++i)
        if (!o.chain_ok(vm->values[i], vm->chains[i], vm->group))
          fail(forever, {{"process", p}, {"epoch", e}, {"value", vm->values[i].display()},
                         {"reason", "carried chain does not verify"}});
    }

  std::map<ProcessId, LatticeElement> decs;
  for (auto p : correct)
    if (auto d = inner_decision(t, audit, p)) decs[p] = *d;
  for (const auto& [p, gp] : final_group)
    for (const auto& [q, gq] : final_group) {
      if (p == q) continue;
      std::size_t j = 0;
      while (j < gp.size() && j < gq.size() && gp[j] == gq[j]) ++j;
      if (j >= gp.size() || j >= gq.size() || gp[j] != 'm') continue;
      auto dit = decs.find(p);
      if (dit == decs.end()) continue;
      std::set<Atom> dec(dit->second.begin(), dit->second.end()), missing;
      const auto slave = gp.prefix(j).extended(Role::slave);
      if (!subset(o.admissible(slave), dec, missing))
        fail(dominates, {{"master", p}, {"slave", q}, {"slave_group", slave.str()},
                         {"missing", atoms_json(missing)}});
    }

  Verdicts v;
  v.add(monotonic);
  v.add(halving);
  v.add(dominates);
  v.add(forever);
  v.add(agreement);
  v.add(decision_epoch);
  v.merge(check_gradecast(o, cfg));
  return v;
}

std::set<Atom> late_decided_atoms(const Transcript& t, const LaAudit& audit) {
  const auto& cfg = t.config;
  KeyRegistry keys(cfg.n, cfg.seed, cfg.signer);
  InstanceOracle o(t, keys, audit.tag, audit.inner_allowed, instance_epochs(audit.protocol, cfg.n, cfg.f));
  const auto early = o.epoch0_atoms();
  std::set<Atom> early_outer;
  for (const auto& a : early)
    if (auto w = WrappedAtom::from_atom(a)) early_outer.insert(w->value.begin(), w->value.end());
  std::set<Atom> out;
  for (const auto& d : t.decisions) {
    if (cfg.is_byzantine(d.pid)) continue;
    for (const auto& a : d.value)
      if (audit.shape == LaShape::atoms ? !early.count(a) : !early_outer.count(a)) out.insert(a);
  }
  if (audit.shape != LaShape::atoms)
    for (auto p : cfg.correct_ids())
      if (auto d = inner_decision(t, audit, p))
        for (const auto& a : *d)
          if (!early.count(a)) out.insert(a);
  return out;
}

Verdicts check_gla(const Transcript& t, const GlaAudit& audit, std::vector<TermStats>* stats) {
  if (!t.completed) throw IncompleteTranscript("transcript did not complete");
  const auto& cfg = t.config;
  const auto correct = cfg.correct_ids();
  const std::uint32_t terms = audit.params.terms;
  const Round delta = audit.params.delta();

  PropertyVerdict liveness{"liveness", true, nullptr};
  PropertyVerdict stability{"local_stability", true, nullptr};
  PropertyVerdict comparability{"comparability", true, nullptr};
  PropertyVerdict inclusivity{"inclusivity", true, nullptr};
  PropertyVerdict nontriv{"non_triviality", true, nullptr};
  PropertyVerdict bound{"t_bound", true, nullptr};

  std::map<ProcessId, std::map<std::uint64_t, std::vector<const DecisionRecord*>>> log;
  for (const auto& d : t.decisions)
    if (!cfg.is_byzantine(d.pid)) log[d.pid][d.index].push_back(&d);

  std::vector<std::pair<ProcessId, const LatticeElement*>> all;
  for (auto p : correct) {
    const LatticeElement* prev = nullptr;
    for (std::uint32_t k = 0; k < terms; ++k) {
      auto& ds = log[p][k];
      if (ds.empty()) {
        fail(liveness, {{"process", p}, {"term", k}, {"reason", "no decision"}});
        prev = nullptr;
        continue;
      }
      if (ds.size() != 1) fail(stability, {{"process", p}, {"term", k}, {"decisions", ds.size()}});
      const auto& d = *ds.front();
      if (d.round != (k + 1) * delta)
        fail(liveness, {{"process", p}, {"term", k}, {"round", d.round}, {"expected", (k + 1) * delta}});
      if (prev && !leq(*prev, d.value))
        fail(stability, {{"process", p}, {"term", k}, {"previous", element_json(*prev)},
                         {"decision", element_json(d.value)}});
      prev = &d.value;
      all.emplace_back(p, &d.value);
    }
    if (log[p].size() > terms) fail(stability, {{"process", p}, {"extra_terms", log[p].size() - terms}});
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (!comparable(*all[i].second, *all[j].second))
        fail(comparability, {{"p", all[i].first}, {"q", all[j].first}, {"a", element_json(*all[i].second)},
                             {"b", element_json(*all[j].second)}});

  std::set<Atom> byz_committed;
  for (std::uint32_t k = 0; k < terms; ++k) {
    const auto inner = audit.params.inner(k);
    KeyRegistry keys(cfg.n, cfg.seed, cfg.signer);
    InstanceOracle o(t, keys, k, inner.allowed, inner.epochs());
    for (const auto& a : o.epoch0_atoms())
      if (auto w = WrappedAtom::from_atom(a)) byz_committed.insert(w->value.begin(), w->value.end());

    const Round start = static_cast<Round>(k) * delta;
    std::set<Atom> correct_inputs;
    for (const auto& [p, sched] : audit.inputs)
      if (!cfg.is_byzantine(p))
        for (const auto& [r, a] : sched)
          if (r <= start) correct_inputs.insert(a);

    TermStats st;
    st.term = k;
    st.ceiling = t_bound(k, cfg.n, cfg.f, delta);
    st.ceiling_closed = t_bound_closed(k, cfg.n, cfg.f, delta);
    if (st.ceiling != st.ceiling_closed)
      fail(bound, {{"term", k}, {"recurrence", st.ceiling}, {"closed", st.ceiling_closed}});
    std::set<Atom> excess;
    for (auto p : correct) {
      auto& ds = log[p][k];
      if (ds.empty()) continue;
      const auto& d = ds.front()->value;
      st.max_size = std::max<std::uint64_t>(st.max_size, d.size());
      if (d.size() > st.ceiling) fail(bound, {{"term", k}, {"process", p}, {"size", d.size()}, {"ceiling", st.ceiling}});
      auto sit = audit.inputs.find(p);
      if (sit != audit.inputs.end())
        for (const auto& [r, a] : sit->second)
          if (r <= start && !d.contains(a))
            fail(inclusivity, {{"process", p}, {"term", k}, {"input_round", r}, {"value", a.display()}});
      for (const auto& a : d)
        if (!correct_inputs.count(a)) {
          excess.insert(a);
          if (!byz_committed.count(a))
            fail(nontriv, {{"process", p}, {"term", k}, {"value", a.display()}, {"reason", "never committed"}});
        }
    }
    st.byzantine_excess = excess.size();
    if (stats) stats->push_back(st);
  }

  Verdicts v;
  v.add(liveness);
  v.add(stability);
  v.add(comparability);
  v.add(inclusivity);
  v.add(nontriv);
  v.add(bound);
  return v;
}

}  // namespace bla
