#include <gtest/gtest.h>

#include <sstream>

#include "bla/simnet.hpp"

using namespace bla;

namespace {

// Sends one ping to every peer for a fixed number of rounds.
class Ping final : public Process {
 public:
  Ping(const ProcessContext& ctx, Round rounds) : ctx_(ctx), rounds_(rounds) {}
  Outbox send(Round r) override {
    Outbox out;
    for (ProcessId p = 1; p <= ctx_.config->n; ++p)
      if (p != ctx_.self) out.emplace_back(p, Bytes{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(ctx_.self)});
    return out;
  }
  void receive(Round r, std::span<const Envelope> in) override {
    got_ += in.size();
    last_ = r;
  }
  bool terminated() const override { return last_ >= rounds_; }
  Digest state_digest() const override {
    ByteWriter w;
    w.u64(got_);
    return hash("ping", {view(w.data())});
  }
  void drain(Round r, ProcessEvents& ev) override {
    if (terminated() && !reported_) {
      ev.decisions.push_back({ctx_.self, r, 0, LatticeElement{Atom::integer(got_)}});
      reported_ = true;
    }
  }

 private:
  ProcessContext ctx_;
  Round rounds_;
  std::size_t got_ = 0;
  Round last_ = 0;
  bool reported_ = false;
};

ProtocolFactory ping(Round rounds) {
  return [rounds](const ProcessContext& ctx) { return std::make_unique<Ping>(ctx, rounds); };
}

SimulationConfig cfg(std::uint32_t n, std::uint32_t f) {
  SimulationConfig c;
  c.n = n;
  c.f = f;
  c.byzantine_ids = SimulationConfig::lowest_ids(f);
  return c;
}

// Records what the view exposes and probes the guards.
struct ProbeLog {
  std::vector<std::vector<Round>> seen;  // rounds of envelopes visible per act
  bool violated_view = false, violated_send = false;
};

struct Probe final : Adversary {
  explicit Probe(ProbeLog& log) : log_(log) {}
  ProbeLog& log_;
  void act(const AdversaryView& v, AdversaryOutbox& out) override {
    std::vector<Round> rounds;
    for (const auto* e : v.visible(1)) rounds.push_back(e->round);
    log_.seen.push_back(rounds);
    try {
      v.inbox(2, 1);
    } catch (const AccessViolation&) {
      log_.violated_view = true;
    }
    try {
      out.send(2, 3, Bytes{1});
    } catch (const AccessViolation&) {
      log_.violated_send = true;
    }
    out.broadcast(1, Bytes{0xee});
  }
  std::string name() const override { return "probe"; }
};

}  // namespace

TEST(Simnet, SingleProcessNoMessages) {
  auto t = run(cfg(1, 0), ping(1), nullptr, 5);
  EXPECT_TRUE(t.completed);
  EXPECT_EQ(t.rounds, 1u);
  EXPECT_TRUE(t.envelopes.empty());
}

TEST(Simnet, PingCountsTwelve) {
  auto t = run(cfg(4, 0), ping(1), nullptr, 5);
  ASSERT_EQ(t.reports.size(), 1u);
  EXPECT_EQ(t.reports[0].messages_sent, 12u);
  EXPECT_EQ(t.reports[0].live_senders, 4u);
  EXPECT_EQ(t.envelopes.size(), 12u);
}

TEST(Simnet, Deterministic) {
  auto a = run(cfg(5, 0), ping(3), nullptr, 5);
  auto b = run(cfg(5, 0), ping(3), nullptr, 5);
  EXPECT_EQ(a.digest(), b.digest());
  std::ostringstream sa, sb;
  a.write_jsonl(sa, true);
  b.write_jsonl(sb, true);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Simnet, ParallelMatchesSequential) {
  auto c = cfg(7, 0);
  auto a = run(c, ping(4), nullptr, 10);
  c.parallel = true;
  auto b = run(c, ping(4), nullptr, 10);
  EXPECT_EQ(a.digest(), b.digest());
}

TEST(Simnet, NonTerminationCarriesTranscript) {
  try {
    run(cfg(3, 0), ping(10), nullptr, 4);
    FAIL() << "expected NonTermination";
  } catch (const NonTermination& e) {
    EXPECT_EQ(e.transcript.rounds, 4u);
    EXPECT_FALSE(e.transcript.completed);
  }
}

TEST(Simnet, ConfigGuards) {
  EXPECT_THROW(cfg(3, 1).validate(), ConfigError);
  EXPECT_NO_THROW(cfg(4, 1).validate());
  auto c = cfg(4, 1);
  c.variant = Variant::interactive;
  EXPECT_THROW(c.validate(), ConfigError);
  c.n = 5;
  EXPECT_NO_THROW(c.validate());
  auto d = cfg(4, 1);
  d.byzantine_ids = {};
  EXPECT_THROW(d.validate(), ConfigError);
  d.byzantine_ids = {9};
  EXPECT_THROW(d.validate(), ConfigError);
  EXPECT_THROW(cfg(0, 0).validate(), ConfigError);
}

TEST(Simnet, RushingViewAndGuards) {
  for (bool rushing : {true, false}) {
    auto c = cfg(4, 1);
    c.rushing = rushing;
    ProbeLog log;
    auto* probe = &log;
    auto t = run(c, ping(3), [&](const AdversaryContext&) { return std::make_unique<Probe>(log); }, 5);
    ASSERT_EQ(probe->seen.size(), 3u);
    // Round 3 sees rounds 1..2, plus round 3 when rushing.
    const auto& r3 = probe->seen[2];
    std::set<Round> rounds(r3.begin(), r3.end());
    EXPECT_TRUE(rounds.count(1) && rounds.count(2));
    EXPECT_EQ(rounds.count(3) > 0, rushing);
    EXPECT_TRUE(probe->violated_view);
    EXPECT_TRUE(probe->violated_send);
    // Byzantine envelopes are stamped with the Byzantine sender.
    std::size_t from_byz = 0;
    for (const auto& e : t.envelopes) from_byz += e.from == 1;
    EXPECT_EQ(from_byz, 3u * 3u);
  }
}

TEST(Simnet, AdversaryCannotTakeCorrectKeys) {
  auto c = cfg(4, 1);
  KeyRegistry reg(4, 0);
  AdversaryContext ctx(c, reg);
  EXPECT_NO_THROW(ctx.key(1));
  EXPECT_THROW(ctx.key(2), AccessViolation);
  EXPECT_THROW(ctx.process_context(3), AccessViolation);
}

TEST(Simnet, TranscriptOutputs) {
  auto t = run(cfg(3, 0), ping(2), nullptr, 5);
  std::ostringstream js, csv;
  t.write_jsonl(js);
  t.write_round_csv(csv);
  EXPECT_NE(js.str().find("\"type\":\"summary\""), std::string::npos);
  EXPECT_NE(csv.str().find("round"), std::string::npos);
  EXPECT_EQ(t.inbox(2, 1).size(), 2u);
  EXPECT_EQ(t.in_round(2).size(), 6u);
  EXPECT_EQ(t.decisions_of(1).size(), 1u);
}
