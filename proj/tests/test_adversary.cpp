#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "bla/adversary.hpp"
#include "bla/runner.hpp"

using namespace bla;

namespace {

// Broadcasts whatever frames the script returns for the round.
class Scripted final : public Process {
 public:
  using Script = std::function<std::vector<Frame>(Round)>;
  Scripted(const ProcessContext& ctx, Script s) : ctx_(ctx), script_(std::move(s)) {}
  Outbox send(Round r) override {
    Outbox out;
    for (const auto& fr : script_(r))
      for (ProcessId p = 1; p <= ctx_.config->n; ++p)
        if (p != ctx_.self) out.emplace_back(p, fr.encode());
    return out;
  }
  void receive(Round, std::span<const Envelope>) override {}
  bool terminated() const override { return false; }
  Digest state_digest() const override { return Digest{}; }
  void drain(Round, ProcessEvents&) override {}

 private:
  ProcessContext ctx_;
  Script script_;
};

Atom fresh(ProcessId b, std::uint64_t i) { return Atom::text("fresh-" + std::to_string(b) + "-" + std::to_string(i)); }

Frame step1(Epoch e, const ValueMessage& m) { return Frame{0, e, 1, wire::encode_sends({m.encode()})}; }

// One adversary with a single Byzantine id 1 at n=4 whose shadow plays a script.
struct Bench {
  SimulationConfig config;
  KeyRegistry keys;
  std::unique_ptr<Adversary> adv;
  std::vector<std::vector<Envelope>> history;

  Bench(const std::string& name, std::uint64_t seed, Scripted::Script script,
        Variant variant = Variant::signed_relays)
      : config(make_config(variant)), keys(config.n, 0) {
    AttackSurface s;
    s.shadow = [script](const ProcessContext& ctx) { return std::make_unique<Scripted>(ctx, script); };
    s.fresh = fresh;
    adv = make_adversary(name, seed, s)(AdversaryContext(config, keys));
  }

  static SimulationConfig make_config(Variant v) {
    SimulationConfig c;
    c.n = v == Variant::signed_relays ? 4 : 5;
    c.f = 1;
    c.byzantine_ids = {1};
    c.variant = v;
    return c;
  }

  // Frames the adversary sends in round r, by recipient.
  std::map<ProcessId, std::vector<Frame>> step(Round r) {
    while (history.size() + 1 < r) history.emplace_back();
    std::vector<Envelope> current;
    AdversaryView v(config, r, history, current);
    AdversaryOutbox out(config);
    adv->act(v, out);
    std::map<ProcessId, std::vector<Frame>> got;
    for (auto& [from, to, payload] : out.take()) {
      EXPECT_EQ(from, 1u);
      auto fr = Frame::decode(view(payload));
      EXPECT_TRUE(fr) << "undecodable frame";
      if (fr) got[to].push_back(*fr);
    }
    history.emplace_back();
    return got;
  }
};

std::vector<ValueMessage> messages(const Frame& fr) {
  std::vector<ValueMessage> out;
  for (const auto& raw : wire::decode_sends(view(fr.body))) out.push_back(ValueMessage::decode(view(raw)));
  return out;
}

ProofChain chain_s(const Atom& v, ProcessId s) {
  return {ValueMessage{GroupLabel(), {v}, {ProofChain{}}}.as_entry(0, s, SeenAllProof{})};
}

// Round r plays epoch r-1 step 1 with the given message.
Scripted::Script epochs(std::vector<ValueMessage> per_epoch) {
  return [per_epoch](Round r) -> std::vector<Frame> {
    if (r < 1 || r > per_epoch.size()) return {};
    return {step1(static_cast<Epoch>(r - 1), per_epoch[r - 1])};
  };
}

const Atom kOne = Atom::integer(1), kTwo = Atom::integer(2);
const ValueMessage kEpoch0{GroupLabel(), {kOne}, {ProofChain{}}};
const ValueMessage kEpoch1{GroupLabel("s"), {kOne, kTwo}, {chain_s(kOne, 1), chain_s(kTwo, 2)}};
const ValueMessage kEpoch2{GroupLabel("ss"), {kOne}, {chain_s(kOne, 1)}};

Report run_with(const std::string& adv, std::uint64_t seed, ProtocolKind p = ProtocolKind::gac_fast,
                Variant variant = Variant::signed_relays, Transcript* t = nullptr) {
  RunSpec s;
  s.protocol = p;
  s.variant = variant;
  s.n = variant == Variant::signed_relays ? 4 : 5;
  s.f = 1;
  s.adversary = adv;
  s.adversary_seed = seed;
  auto rr = execute(s);
  if (t) *t = std::move(rr.transcript);
  return rr.report;
}

}  // namespace

TEST(Adversary, Names) {
  auto names = builtin_strategy_names();
  EXPECT_EQ(names.size(), 7u);
  EXPECT_THROW(make_adversary("nope", 0, {}), ConfigError);
  for (const auto& n : names) EXPECT_NO_THROW(make_adversary(n, 0, {}));
}

TEST(Adversary, SilentSendsNothing) {
  Transcript t;
  auto r = run_with("silent", 0, ProtocolKind::gac_fast, Variant::signed_relays, &t);
  EXPECT_TRUE(r.all_pass());
  for (const auto& e : t.envelopes) EXPECT_NE(e.from, 1u);
}

TEST(Adversary, EquivocatorSplitsRecipients) {
  bool split0 = false, split1 = false;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    Bench b("equivocator", seed, epochs({kEpoch0, kEpoch1}));
    auto r1 = b.step(1);
    std::set<Bytes> kinds;
    for (auto& [to, frames] : r1) {
      ASSERT_EQ(frames.size(), 1u);
      auto ms = messages(frames[0]);
      ASSERT_EQ(ms.size(), 1u);
      ASSERT_EQ(ms[0].values.size(), 1u);
      EXPECT_TRUE(ms[0].values[0] == kOne || ms[0].values[0] == fresh(1, 1));
      kinds.insert(ms[0].encode());
    }
    split0 = split0 || kinds.size() == 2;
    kinds.clear();
    for (auto& [to, frames] : b.step(2)) {
      auto ms = messages(frames.at(0));
      ASSERT_EQ(ms.size(), 1u);
      // Either the shadow's message or the same message without its first value.
      if (ms[0].values.size() == 1) EXPECT_EQ(ms[0].values[0], kTwo);
      kinds.insert(ms[0].encode());
    }
    split1 = split1 || kinds.size() == 2;
  }
  EXPECT_TRUE(split0);
  EXPECT_TRUE(split1);
}

TEST(Adversary, EquivocatorDeliversAtMostOneNonBottom) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Transcript t;
    auto r = run_with("equivocator", seed, ProtocolKind::gac_fast, Variant::signed_relays, &t);
    ASSERT_TRUE(r.all_pass()) << seed;
    KeyRegistry keys(t.config.n, t.config.seed, t.config.signer);
    InstanceOracle o(t, keys, 0, AllowedProposals::integer_singletons(4), 2);
    for (Epoch e = 0; e < 2; ++e) {
      std::set<Bytes> delivered;
      for (auto p : t.config.correct_ids()) {
        auto out = o.output(e, p, 1);
        if (out.rank > 0) delivered.insert(*out.message);
        else EXPECT_FALSE(out.message);
      }
      EXPECT_LE(delivered.size(), 1u);
    }
  }
}

TEST(Adversary, LateValueInjector) {
  Bench b("late_value_injector", 0, epochs({kEpoch0, kEpoch1}));
  for (auto& [to, frames] : b.step(1)) EXPECT_TRUE(messages(frames.at(0)).empty());
  for (auto& [to, frames] : b.step(2)) {
    auto ms = messages(frames.at(0));
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_TRUE(ms[0].index_of(fresh(1, 0)));
    EXPECT_TRUE(ms[0].index_of(fresh(1, 1001)));
    EXPECT_TRUE(ms[0].index_of(kOne));
  }
}

TEST(Adversary, LateValuesNeverDecided) {
  for (auto p : {ProtocolKind::gac, ProtocolKind::gac_fast, ProtocolKind::wrapped})
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      RunSpec s;
      s.protocol = p;
      s.adversary = "late_value_injector";
      s.adversary_seed = seed;
      auto rr = execute(s);
      ASSERT_TRUE(rr.report.all_pass()) << to_string(p) << " " << seed;
      EXPECT_TRUE(late_decided_atoms(rr.transcript, la_audit(s)).empty());
    }
}

TEST(Adversary, FakeGroupClaimer) {
  Bench b("fake_group_claimer", 0, epochs({kEpoch0, kEpoch1, kEpoch2}));
  for (auto& [to, frames] : b.step(1)) EXPECT_EQ(messages(frames.at(0))[0].group, GroupLabel());
  for (auto& [to, frames] : b.step(2)) EXPECT_EQ(messages(frames.at(0))[0].group, GroupLabel("s"));
  for (auto& [to, frames] : b.step(3)) EXPECT_EQ(messages(frames.at(0))[0].group, GroupLabel("sm"));
}

TEST(Adversary, ProofWithholder) {
  auto script = [](Round r) -> std::vector<Frame> {
    if (r == 1) return {step1(1, kEpoch1)};
    wire::Relay rel{2, kEpoch0.encode(), std::nullopt};
    return {Frame{0, 0, 3, wire::encode_relays({rel}, true)}};
  };
  bool empty = false, full = false;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Bench b("proof_withholder", seed, script);
    for (auto& [to, frames] : b.step(1)) {
      auto ms = messages(frames.at(0));
      for (const auto& c : ms.at(0).chains) EXPECT_TRUE(c.empty());
      EXPECT_EQ(ms.at(0).values, kEpoch1.values);
    }
    for (auto& [to, frames] : b.step(2)) {
      auto relays = wire::decode_relays(view(frames.at(0).body), true);
      (relays.empty() ? empty : full) = true;
    }
  }
  EXPECT_TRUE(empty);
  EXPECT_TRUE(full);
}

TEST(Adversary, ProofForgerCannotReachThreshold) {
  Bench b("proof_forger", 0, epochs({kEpoch0, kEpoch1, kEpoch2}));
  b.step(1);
  const auto params = GradecastParams::make(4, 1, Variant::signed_relays);
  for (Round r : {2u, 3u}) {
    for (auto& [to, frames] : b.step(r)) {
      auto m = messages(frames.at(0)).at(0);
      auto idx = m.index_of(fresh(1, 0));
      ASSERT_TRUE(idx);
      const auto& chain = m.chains[*idx];
      EXPECT_EQ(chain.size(), m.group.slave_positions().size());
      EXPECT_TRUE(chain_well_formed(fresh(1, 0), chain, m.group));
      for (const auto& e : chain) {
        EXPECT_EQ(e.proof.signatures.size(), 3u);
        EXPECT_EQ(check_signed(e.proof, 0, e.epoch, e.sender, e.message_digest(), params, b.keys),
                  ProofCheck::bad_signature);
        std::size_t genuine = 0;
        for (const auto& s : e.proof.signatures)
          genuine += b.keys.verify(view(relay_payload(0, e.epoch, e.sender, e.message_digest())), s);
        EXPECT_EQ(genuine, 1u);
      }
    }
  }
}

TEST(Adversary, ProofForgerConfirmsEverything) {
  RelayKey k{0, 0, 2, Digest{}};
  auto script = [k](Round r) -> std::vector<Frame> {
    if (r != 1) return {};
    return {Frame{0, 0, 5, ConfirmExchange::encode_answers({{k, false}})}};
  };
  Bench b("proof_forger", 0, script, Variant::interactive);
  for (auto& [to, frames] : b.step(1)) {
    auto answers = ConfirmExchange::decode_answers(view(frames.at(0).body));
    ASSERT_EQ(answers.size(), 1u);
    EXPECT_TRUE(answers[0].second);
  }
}

TEST(Adversary, FuzzerIsDeterministicAndWellFramed) {
  auto collect = [](std::uint64_t seed) {
    Bench b("random_fuzzer", seed, epochs({kEpoch0, kEpoch1, kEpoch2}));
    std::vector<Bytes> out;
    for (Round r = 1; r <= 3; ++r)
      for (auto& [to, frames] : b.step(r)) {
        EXPECT_EQ(frames.size(), 1u);
        EXPECT_EQ(frames.at(0).step, 1u);
        EXPECT_NO_THROW(wire::decode_sends(view(frames.at(0).body)));
        out.push_back(frames.at(0).encode());
      }
    return out;
  };
  EXPECT_EQ(collect(3), collect(3));
  bool differs = false;
  for (std::uint64_t s = 4; s < 10 && !differs; ++s) differs = collect(s) != collect(3);
  EXPECT_TRUE(differs);
}

TEST(Adversary, SendsToAllOrNone) {
  for (const auto& name : builtin_strategy_names()) {
    Transcript t;
    run_with(name, 1, ProtocolKind::gac_fast, Variant::signed_relays, &t);
    std::map<Round, std::set<ProcessId>> to;
    for (const auto& e : t.envelopes)
      if (e.from == 1) to[e.round].insert(e.to);
    for (const auto& [r, s] : to) EXPECT_EQ(s.size(), 3u) << name << " round " << r;
  }
}

// Every verifying signature by a correct id that a Byzantine forwards was
// produced by that id in one of its own round-3 relays.
TEST(Adversary, NoStrategyForgesCorrectSignatures) {
  for (const auto& name : builtin_strategy_names())
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      Transcript t;
      auto r = run_with(name, seed, ProtocolKind::gac, Variant::signed_relays, &t);
      EXPECT_TRUE(r.all_pass()) << name << " " << seed;
      KeyRegistry keys(t.config.n, t.config.seed, t.config.signer);
      std::set<Bytes> produced;
      std::vector<std::pair<Bytes, Signature>> claimed;
      for (const auto& e : t.envelopes) {
        auto fr = Frame::decode(view(e.payload));
        if (!fr) continue;
        if (fr->step == 3) {
          std::vector<wire::Relay> relays;
          try {
            relays = wire::decode_relays(view(fr->body), true);
          } catch (const DecodeError&) {
            continue;
          }
          for (const auto& rel : relays) {
            if (!rel.signature) continue;
            auto d = epoch_digester(fr->epoch)(view(rel.message));
            if (!d) continue;
            auto payload = relay_payload(fr->tag, fr->epoch, rel.sender, *d);
            if (!t.config.is_byzantine(e.from) && rel.signature->signer == e.from)
              produced.insert(rel.signature->binding);
            else if (t.config.is_byzantine(e.from)) claimed.emplace_back(payload, *rel.signature);
          }
        } else if (fr->step == 1 && t.config.is_byzantine(e.from)) {
          std::vector<Bytes> raw;
          try {
            raw = wire::decode_sends(view(fr->body));
          } catch (const DecodeError&) {
            continue;
          }
          for (const auto& m : raw) {
            ValueMessage vm;
            try {
              vm = ValueMessage::decode(view(m));
            } catch (const DecodeError&) {
              continue;
            }
            for (const auto& c : vm.chains)
              for (const auto& entry : c)
                for (const auto& s : entry.proof.signatures)
                  claimed.emplace_back(relay_payload(fr->tag, entry.epoch, entry.sender, entry.message_digest()), s);
          }
        }
      }
      for (const auto& [payload, sig] : claimed) {
        if (t.config.is_byzantine(sig.signer) || !keys.verify(view(payload), sig)) continue;
        EXPECT_TRUE(produced.count(sig.binding)) << name << " forged a signature of " << sig.signer;
      }
    }
}

TEST(Adversary, EnumerationCounts) {
  EXPECT_EQ(BehaviorSpace(4, 1, 2, 1).size(), 27u);
  EXPECT_EQ(BehaviorSpace(4, 0, 2, 3).size(), 1u);
  EXPECT_EQ(BehaviorSpace(4, 1, 2, 3).size(), 19683u);
  EXPECT_EQ(enumerate_adversaries(7, 2, 1, 1).size(), 1024u);
  EXPECT_THROW(BehaviorSpace(4, 1, 2, 3, 1000), BudgetExceeded);
  EXPECT_THROW(BehaviorSpace(13, 4, 2, 3), BudgetExceeded);
}

TEST(Adversary, EnumerationVisitsEveryBehaviorOnce) {
  BehaviorSpace space(4, 1, 2, 2);
  std::set<std::vector<std::uint32_t>> seen;
  space.for_each([&](const Behavior& b) {
    std::vector<std::uint32_t> flat;
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_LE(b.at(r, 0, i), 2u);
        flat.push_back(b.at(r, 0, i));
      }
    seen.insert(flat);
  });
  EXPECT_EQ(seen.size(), 729u);
}
