#include "bla/adversary.hpp"

#include <algorithm>
#include <random>

namespace bla {

namespace {

std::uint64_t mix(std::uint64_t seed, std::string_view name, std::initializer_list<std::uint64_t> xs) {
  ByteWriter w;
  w.u64(seed);
  w.str(name);
  for (auto x : xs) w.u64(x);
  auto d = hash("adversary-coin", {view(w.data())});
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | d[i];
  return v;
}

std::vector<Envelope> copy_inbox(const AdversaryView& view, ProcessId b, Round r) {
  std::vector<Envelope> out;
  for (const auto* e : view.inbox(b, r)) out.push_back(*e);
  return out;
}

class SilentAdversary final : public Adversary {
 public:
  void act(const AdversaryView&, AdversaryOutbox&) override {}
  std::string name() const override { return "silent"; }
};

// Runs an honest machine per Byzantine id and rewrites its frames.
class ShadowAdversary : public Adversary {
 public:
  ShadowAdversary(const AdversaryContext& ctx, AttackSurface surface, std::uint64_t seed, std::string name)
      : ctx_(ctx), surface_(std::move(surface)), seed_(seed), name_(std::move(name)) {
    for (auto b : ctx.config().byzantine_ids) shadows_.push_back({b, surface_.shadow(ctx.process_context(b)), true});
  }

  std::string name() const override { return name_; }

  void act(const AdversaryView& view, AdversaryOutbox& out) override {
    const Round r = view.current_round();
    for (auto& s : shadows_) {
      if (!s.alive) continue;
      Outbox sent;
      try {
        if (r > 1) s.proc->receive(r - 1, copy_inbox(view, s.id, r - 1));
        sent = s.proc->send(r);
      } catch (const std::exception&) {
        s.alive = false;
        continue;
      }
      for (auto& [to, payload] : sent) {
        auto fr = Frame::decode(view_of(payload));
        if (!fr) {
          out.send(s.id, to, std::move(payload));
          continue;
        }
        if (auto rewritten = rewrite(s.id, to, std::move(*fr), view)) out.send(s.id, to, rewritten->encode());
      }
    }
  }

 protected:
  static BytesView view_of(const Bytes& b) { return {b.data(), b.size()}; }

  virtual std::optional<Frame> rewrite(ProcessId b, ProcessId to, Frame fr, const AdversaryView& view) = 0;

  bool coin(std::initializer_list<std::uint64_t> xs) const { return mix(seed_, name_, xs) & 1; }

  // Applies fn to the step-1 message; drops the message when fn returns false.
  template <typename F>
  static Frame edit_message(Frame fr, F&& fn) {
    if (fr.step != 1) return fr;
    std::vector<Bytes> msgs;
    try {
      msgs = wire::decode_sends(view_of(fr.body));
    } catch (const DecodeError&) {
      return fr;
    }
    std::vector<Bytes> out;
    for (auto& raw : msgs) {
      ValueMessage m;
      try {
        m = ValueMessage::decode(view_of(raw));
      } catch (const DecodeError&) {
        continue;
      }
      if (fn(m)) out.push_back(m.encode());
    }
    fr.body = wire::encode_sends(out);
    return fr;
  }

  static void add_value(ValueMessage& m, const Atom& v, ProofChain chain) {
    if (m.index_of(v)) return;
    auto it = std::lower_bound(m.values.begin(), m.values.end(), v);
    auto pos = it - m.values.begin();
    m.values.insert(it, v);
    m.chains.insert(m.chains.begin() + pos, std::move(chain));
  }

  AdversaryContext ctx_;
  AttackSurface surface_;
  std::uint64_t seed_;
  std::string name_;

 private:
  struct Shadow {
    ProcessId id;
    std::unique_ptr<Process> proc;
    bool alive;
  };
  std::vector<Shadow> shadows_;
};

class Equivocator final : public ShadowAdversary {
 public:
  Equivocator(const AdversaryContext& ctx, AttackSurface s, std::uint64_t seed)
      : ShadowAdversary(ctx, std::move(s), seed, "equivocator") {}

 protected:
  std::optional<Frame> rewrite(ProcessId b, ProcessId to, Frame fr, const AdversaryView&) override {
    if (fr.step != 1 || !coin({b, fr.tag, fr.epoch, to})) return fr;
    const Epoch e = fr.epoch;
    return edit_message(std::move(fr), [&](ValueMessage& m) {
      if (e == 0) {
        m.values = {surface_.fresh(b, 1 + fr.tag)};
        m.chains = {ProofChain{}};
      } else if (!m.values.empty()) {
        m.values.erase(m.values.begin());
        m.chains.erase(m.chains.begin());
      } else {
        add_value(m, surface_.fresh(b, 0), {});
      }
      return true;
    });
  }
};

class LateValueInjector final : public ShadowAdversary {
 public:
  LateValueInjector(const AdversaryContext& ctx, AttackSurface s, std::uint64_t seed)
      : ShadowAdversary(ctx, std::move(s), seed, "late_value_injector") {}

 protected:
  std::optional<Frame> rewrite(ProcessId b, ProcessId, Frame fr, const AdversaryView&) override {
    if (fr.step != 1) return fr;
    const Epoch e = fr.epoch;
    return edit_message(std::move(fr), [&](ValueMessage& m) {
      if (e == 0) return false;
      ProofChain borrowed = m.chains.empty() ? ProofChain{} : m.chains.front();
      add_value(m, surface_.fresh(b, 0), borrowed);
      add_value(m, surface_.fresh(b, 1000 + e), {});
      return true;
    });
  }
};

class FakeGroupClaimer final : public ShadowAdversary {
 public:
  FakeGroupClaimer(const AdversaryContext& ctx, AttackSurface s, std::uint64_t seed)
      : ShadowAdversary(ctx, std::move(s), seed, "fake_group_claimer") {}

 protected:
  std::optional<Frame> rewrite(ProcessId b, ProcessId, Frame fr, const AdversaryView& view) override {
    if (fr.step != 1 || fr.epoch == 0) return fr;
    // Groups announced by correct processes this round, when rushing.
    std::set<GroupLabel> seen;
    for (const auto* env : view.inbox(b, view.current_round())) {
      auto other = Frame::decode(view_of(env->payload));
      if (!other || other->step != 1 || other->tag != fr.tag || other->epoch != fr.epoch) continue;
      try {
        for (const auto& raw : wire::decode_sends(view_of(other->body)))
          seen.insert(ValueMessage::decode(view_of(raw)).group);
      } catch (const DecodeError&) {
      }
    }
    return edit_message(std::move(fr), [&](ValueMessage& m) {
      std::optional<GroupLabel> pick;
      for (const auto& g : seen)
        if (g != m.group) {
          pick = g;
          break;
        }
      if (!pick) {
        auto s = m.group.str();
        s.back() = s.back() == 's' ? 'm' : 's';
        if (s.size() == 1) s = "s";
        pick = GroupLabel(s);
      }
      m.group = *pick;
      return true;
    });
  }
};

class ProofWithholder final : public ShadowAdversary {
 public:
  ProofWithholder(const AdversaryContext& ctx, AttackSurface s, std::uint64_t seed)
      : ShadowAdversary(ctx, std::move(s), seed, "proof_withholder") {}

 protected:
  std::optional<Frame> rewrite(ProcessId b, ProcessId to, Frame fr, const AdversaryView&) override {
    if (fr.step == 3 && !coin({b, fr.tag, fr.epoch, to})) {
      fr.body = wire::encode_relays({}, true);
      return fr;
    }
    if (fr.step != 1 || fr.epoch == 0) return fr;
    return edit_message(std::move(fr), [](ValueMessage& m) {
      for (auto& c : m.chains) c.clear();
      return true;
    });
  }
};

class ProofForger final : public ShadowAdversary {
 public:
  ProofForger(const AdversaryContext& ctx, AttackSurface s, std::uint64_t seed)
      : ShadowAdversary(ctx, std::move(s), seed, "proof_forger") {}

 protected:
  SeenAllProof forge(std::uint64_t tag, Epoch t, ProcessId sender, const Digest& d) const {
    const auto& cfg = ctx_.config();
    SeenAllProof p;
    p.mode = cfg.variant;
    const std::uint32_t need = cfg.n - cfg.f;
    if (cfg.variant == Variant::signed_relays) {
      auto payload = relay_payload(tag, t, sender, d);
      for (auto byz : cfg.byzantine_ids) p.signatures.push_back(ctx_.keys().sign(ctx_.key(byz), view(payload)));
      const auto& any_key = ctx_.key(*cfg.byzantine_ids.begin());
      for (ProcessId c = 1; c <= cfg.n && p.signatures.size() < need; ++c) {
        if (cfg.is_byzantine(c)) continue;
        auto sig = ctx_.keys().sign(any_key, view(payload));
        sig.signer = c;
        p.signatures.push_back(std::move(sig));
      }
    } else {
      for (auto byz : cfg.byzantine_ids) p.ids.push_back(byz);
      for (ProcessId c = 1; c <= cfg.n && p.ids.size() < need; ++c)
        if (!cfg.is_byzantine(c)) p.ids.push_back(c);
      std::sort(p.ids.begin(), p.ids.end());
    }
    return p;
  }

  std::optional<Frame> rewrite(ProcessId b, ProcessId, Frame fr, const AdversaryView&) override {
    if (fr.step == 5) {
      try {
        auto answers = ConfirmExchange::decode_answers(view_of(fr.body));
        for (auto& a : answers) a.second = true;
        fr.body = ConfirmExchange::encode_answers(answers);
      } catch (const DecodeError&) {
      }
      return fr;
    }
    if (fr.step != 1 || fr.epoch == 0) return fr;
    const std::uint64_t tag = fr.tag;
    return edit_message(std::move(fr), [&](ValueMessage& m) {
      auto v = surface_.fresh(b, 0);
      ProofChain chain;
      for (auto t : m.group.slave_positions()) {
        ProofEntry e;
        e.epoch = t;
        e.sender = b;
        e.group = m.group.prefix(t);
        e.values = {v};
        e.commitments = {chain_commitment(v, chain)};
        e.proof = forge(tag, t, b, e.message_digest());
        chain.push_back(std::move(e));
      }
      add_value(m, v, std::move(chain));
      return true;
    });
  }
};

class RandomFuzzer final : public ShadowAdversary {
 public:
  RandomFuzzer(const AdversaryContext& ctx, AttackSurface s, std::uint64_t seed)
      : ShadowAdversary(ctx, std::move(s), seed, "random_fuzzer") {}

 protected:
  std::optional<Frame> rewrite(ProcessId b, ProcessId to, Frame fr, const AdversaryView& view) override {
    std::mt19937_64 rng(mix(seed_, name_, {b, to, view.current_round()}));
    auto pick = [&](std::uint64_t k) { return k == 0 ? 0 : rng() % k; };
    remember(view, b);
    if (pick(8) == 0) {
      switch (fr.step) {
        case 1: fr.body = wire::encode_sends({}); break;
        case 2: fr.body = wire::encode_relays({}, false); break;
        case 3: fr.body = wire::encode_relays({}, true); break;
        case 4: fr.body = ConfirmExchange::encode_queries({}); break;
        default: fr.body = ConfirmExchange::encode_answers({}); break;
      }
      return fr;
    }
    switch (fr.step) {
      case 1: {
        std::vector<Bytes> msgs;
        auto count = pick(3);
        for (std::uint64_t i = 0; i < count; ++i) msgs.push_back(random_message(rng, fr.epoch, b));
        if (pick(2) == 0) {
          try {
            auto own = wire::decode_sends(view_of(fr.body));
            msgs.insert(msgs.begin(), own.begin(), own.end());
          } catch (const DecodeError&) {
          }
        }
        fr.body = wire::encode_sends(msgs);
        break;
      }
      case 2:
      case 3: {
        const bool step3 = fr.step == 3;
        std::vector<wire::Relay> relays;
        try {
          relays = wire::decode_relays(view_of(fr.body), step3);
        } catch (const DecodeError&) {
        }
        for (auto& x : relays) {
          auto c = pick(4);
          if (c == 0 && !seen_.empty()) x.message = seen_[pick(seen_.size())];
          if (c == 1) x.message = random_message(rng, fr.epoch, b);
          if (step3 && pick(3) == 0) x.signature.reset();
        }
        if (pick(3) == 0 && !seen_.empty()) {
          wire::Relay extra;
          extra.sender = static_cast<ProcessId>(1 + pick(ctx_.config().n));
          extra.message = seen_[pick(seen_.size())];
          relays.push_back(std::move(extra));
        }
        fr.body = wire::encode_relays(relays, step3);
        break;
      }
      case 4: {
        std::vector<RelayKey> keys;
        try {
          keys = ConfirmExchange::decode_queries(view_of(fr.body));
        } catch (const DecodeError&) {
        }
        RelayKey k;
        k.tag = fr.tag;
        k.epoch = static_cast<Epoch>(pick(fr.epoch + 1));
        k.sender = static_cast<ProcessId>(1 + pick(ctx_.config().n));
        for (auto& x : k.digest) x = static_cast<std::uint8_t>(rng());
        keys.push_back(k);
        fr.body = ConfirmExchange::encode_queries(keys);
        break;
      }
      case 5: {
        try {
          auto answers = ConfirmExchange::decode_answers(view_of(fr.body));
          for (auto& a : answers) a.second = pick(2) == 0;
          fr.body = ConfirmExchange::encode_answers(answers);
        } catch (const DecodeError&) {
        }
        break;
      }
    }
    return fr;
  }

 private:
  void remember(const AdversaryView& view, ProcessId b) {
    const Round r = view.current_round();
    if (r == last_round_ && b == last_byz_) return;
    last_round_ = r;
    last_byz_ = b;
    for (const auto* env : view.inbox(b, r)) {
      auto fr = Frame::decode(view_of(env->payload));
      if (!fr || fr->step != 1) continue;
      try {
        for (auto& m : wire::decode_sends(view_of(fr->body))) {
          auto vm = ValueMessage::decode(view_of(m));
          for (const auto& v : vm.values) atoms_.insert(v);
          for (const auto& c : vm.chains)
            for (const auto& e : c) entries_.push_back(e);
          seen_.push_back(std::move(m));
        }
      } catch (const DecodeError&) {
      }
    }
    if (seen_.size() > 64) seen_.erase(seen_.begin(), seen_.end() - 64);
    if (entries_.size() > 64) entries_.erase(entries_.begin(), entries_.end() - 64);
  }

  Bytes random_message(std::mt19937_64& rng, Epoch epoch, ProcessId b) {
    auto pick = [&](std::uint64_t k) { return k == 0 ? 0 : rng() % k; };
    ValueMessage m;
    std::string g;
    for (Epoch i = 0; i < epoch; ++i) g.push_back(i == 0 || pick(2) ? 's' : 'm');
    m.group = GroupLabel(g);
    std::vector<Atom> pool(atoms_.begin(), atoms_.end());
    pool.push_back(surface_.fresh(b, pick(4)));
    std::set<Atom> chosen;
    auto count = epoch == 0 ? 1 : 1 + pick(3);
    for (std::uint64_t i = 0; i < count; ++i) chosen.insert(pool[pick(pool.size())]);
    for (const auto& v : chosen) {
      m.values.push_back(v);
      ProofChain c;
      if (epoch > 0 && !entries_.empty()) {
        auto len = pick(epoch + 1);
        for (std::uint64_t i = 0; i < len; ++i) c.push_back(entries_[pick(entries_.size())]);
      }
      m.chains.push_back(std::move(c));
    }
    return m.encode();
  }

  Round last_round_ = 0;
  ProcessId last_byz_ = 0;
  std::set<Atom> atoms_;
  std::vector<ProofEntry> entries_;
  std::vector<Bytes> seen_;
};

}  // namespace

std::vector<std::string> builtin_strategy_names() {
  return {"silent", "equivocator", "late_value_injector", "fake_group_claimer",
          "proof_withholder", "proof_forger", "random_fuzzer"};
}

AdversaryFactory make_adversary(const std::string& name, std::uint64_t seed, AttackSurface surface) {
  auto known = builtin_strategy_names();
  if (std::find(known.begin(), known.end(), name) == known.end())
    throw ConfigError("unknown adversary strategy: " + name);
  return [name, seed, surface](const AdversaryContext& ctx) -> std::unique_ptr<Adversary> {
    if (name == "silent") return std::make_unique<SilentAdversary>();
    if (name == "equivocator") return std::make_unique<Equivocator>(ctx, surface, seed);
    if (name == "late_value_injector") return std::make_unique<LateValueInjector>(ctx, surface, seed);
    if (name == "fake_group_claimer") return std::make_unique<FakeGroupClaimer>(ctx, surface, seed);
    if (name == "proof_withholder") return std::make_unique<ProofWithholder>(ctx, surface, seed);
    if (name == "proof_forger") return std::make_unique<ProofForger>(ctx, surface, seed);
    return std::make_unique<RandomFuzzer>(ctx, surface, seed);
  };
}

BehaviorSpace::BehaviorSpace(std::uint32_t n, std::uint32_t f, std::uint32_t alphabet_size,
                             std::uint32_t rounds, std::uint64_t budget)
    : n_(n), f_(f), alphabet_(alphabet_size), rounds_(rounds) {
  if (f > n) throw ConfigError("f exceeds n");
  const std::uint64_t choices = alphabet_size + 1;
  const std::uint64_t slots = std::uint64_t{rounds} * f * (n - f);
  for (std::uint64_t i = 0; i < slots; ++i) {
    if (size_ > budget / choices)
      throw BudgetExceeded("behavior space exceeds budget of " + std::to_string(budget));
    size_ *= choices;
  }
  if (size_ > budget) throw BudgetExceeded("behavior space exceeds budget of " + std::to_string(budget));
}

Behavior BehaviorSpace::at(std::uint64_t index) const {
  Behavior b;
  const std::uint32_t choices = alphabet_ + 1;
  b.choice.assign(rounds_, std::vector<std::vector<std::uint32_t>>(f_, std::vector<std::uint32_t>(n_ - f_)));
  for (std::uint32_t r = 0; r < rounds_; ++r)
    for (std::uint32_t z = 0; z < f_; ++z)
      for (std::uint32_t c = 0; c < n_ - f_; ++c) {
        b.choice[r][z][c] = static_cast<std::uint32_t>(index % choices);
        index /= choices;
      }
  return b;
}

BehaviorSpace enumerate_adversaries(std::uint32_t n, std::uint32_t f, std::uint32_t alphabet_size,
                                    std::uint32_t rounds, std::uint64_t budget) {
  return BehaviorSpace(n, f, alphabet_size, rounds, budget);
}

}  // namespace bla
