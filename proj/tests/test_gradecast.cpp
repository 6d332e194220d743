#include <gtest/gtest.h>

#include "bla/gradecast.hpp"
#include "gc_harness.hpp"

using namespace bla;
using bla::testing::GcWorld;
using bla::testing::msg;

namespace {

std::map<ProcessId, Bytes> all_send(std::uint32_t n, const std::set<ProcessId>& byz) {
  std::map<ProcessId, Bytes> m;
  for (ProcessId p = 1; p <= n; ++p)
    if (!byz.count(p)) m[p] = msg("m" + std::to_string(p));
  return m;
}

}  // namespace

TEST(Gradecast, ParamsPerMode) {
  auto s = GradecastParams::make(4, 1, Variant::signed_relays);
  EXPECT_EQ(s.rank2_threshold, 3u);
  EXPECT_EQ(s.relay_threshold, 3u);
  EXPECT_EQ(s.rank1_threshold, 2u);
  auto i = GradecastParams::make(9, 2, Variant::interactive);
  EXPECT_EQ(i.rank2_threshold, 7u);  // 3f+1 at n = 4f+1
  EXPECT_EQ(i.rank1_threshold, 3u);
  EXPECT_EQ(i.confirm_quorum, 5u);
  EXPECT_THROW(GradecastParams::make(4, 1, Variant::interactive), ConfigError);
  EXPECT_NO_THROW(GradecastParams::make(4, 1, Variant::interactive, false));
  EXPECT_THROW(GradecastParams::make(3, 1, Variant::signed_relays), ConfigError);
}

TEST(Gradecast, CorrectSenderSilentByzantine) {
  GcWorld w(4, 1, Variant::signed_relays, {1});
  auto sends = all_send(4, {1});
  w.run(sends, nullptr);
  for (auto p : w.correct())
    for (ProcessId s = 2; s <= 4; ++s) {
      const auto& o = w.out(p, s);
      EXPECT_EQ(o.rank, 2);
      EXPECT_EQ(*o.message, sends[s]);
      ASSERT_TRUE(o.proof);
      EXPECT_TRUE(verify_seen_all(*o.proof, 0, 0, s, *o.digest, w.params(), w.keys()));
    }
}

TEST(Gradecast, EquivocatingSender) {
  GcWorld w(4, 1, Variant::signed_relays, {1});
  w.run(all_send(4, {1}), [](int step, ProcessId, ProcessId to) -> std::optional<Bytes> {
    if (step != 1) return std::nullopt;
    return wire::encode_sends({to == 4 ? msg("m'") : msg("m")});
  });
  std::optional<Bytes> seen;
  int lo = 3, hi = -1;
  for (auto p : w.correct()) {
    const auto& o = w.out(p, 1);
    lo = std::min<int>(lo, o.rank);
    hi = std::max<int>(hi, o.rank);
    if (o.rank > 0) {
      if (seen) EXPECT_EQ(*seen, *o.message);
      seen = o.message;
    }
  }
  EXPECT_LE(hi - lo, 1);
}

TEST(Gradecast, SilentSenderYieldsBottom) {
  GcWorld w(4, 1, Variant::signed_relays, {1});
  w.run(all_send(4, {1}), nullptr);
  for (auto p : w.correct()) {
    const auto& o = w.out(p, 1);
    EXPECT_EQ(o.rank, 0);
    EXPECT_FALSE(o.message);
    EXPECT_FALSE(o.proof);
  }
}

TEST(Gradecast, ShortSignedProofFails) {
  GcWorld w(4, 1, Variant::signed_relays, {1});
  w.run(all_send(4, {1}), nullptr);
  auto o = w.out(2, 3);
  ASSERT_TRUE(o.proof);
  auto p = *o.proof;
  p.signatures.pop_back();
  EXPECT_FALSE(verify_seen_all(p, 0, 0, 3, *o.digest, w.params(), w.keys()));
  auto dup = *o.proof;
  dup.signatures.back() = dup.signatures.front();
  EXPECT_THROW(verify_seen_all(dup, 0, 0, 3, *o.digest, w.params(), w.keys()), MalformedProof);
  auto wrong = *o.proof;
  wrong.mode = Variant::interactive;
  EXPECT_THROW(verify_seen_all(wrong, 0, 0, 3, *o.digest, w.params(), w.keys()), MalformedProof);
  // Bound to (tag, epoch, sender, digest).
  EXPECT_FALSE(verify_seen_all(*o.proof, 1, 0, 3, *o.digest, w.params(), w.keys()));
  EXPECT_FALSE(verify_seen_all(*o.proof, 0, 1, 3, *o.digest, w.params(), w.keys()));
  EXPECT_FALSE(verify_seen_all(*o.proof, 0, 0, 2, *o.digest, w.params(), w.keys()));
}

TEST(Gradecast, ByzantineKeysAloneCannotReachThreshold) {
  // f = 1 signature against n - f = 3 required.
  GcWorld w(4, 1, Variant::signed_relays, {1});
  w.run(all_send(4, {1}), nullptr);
  auto m = msg("forged");
  auto proof = w.best_signed_proof(2, m);
  EXPECT_EQ(proof.signatures.size(), 1u);
  EXPECT_FALSE(verify_seen_all(proof, 0, 0, 2, *plain_digester()(view(m)), w.params(), w.keys()));
}

TEST(Gradecast, InteractiveVerdictCounts) {
  auto params = GradecastParams::make(5, 1, Variant::interactive);
  SeenAllProof p;
  p.mode = Variant::interactive;
  p.ids = {1, 2, 3, 4};
  EXPECT_TRUE(verify_seen_all(p, {1, 2, 3, 4}, params));
  EXPECT_TRUE(verify_seen_all(p, {1, 2, 3}, params));
  EXPECT_FALSE(verify_seen_all(p, {1, 2}, params));  // only 2f confirm
  p.ids = {1, 2, 3};
  EXPECT_FALSE(verify_seen_all(p, {1, 2, 3}, params));
  p.ids = {1, 1, 2, 3};
  EXPECT_THROW(verify_seen_all(p, {1, 2, 3}, params), MalformedProof);
}

TEST(Gradecast, InteractiveRankTwoProofPasses) {
  GcWorld w(5, 1, Variant::interactive, {1});
  auto sends = all_send(5, {1});
  w.run(sends, nullptr);
  for (auto p : w.correct()) {
    const auto& o = w.out(p, 3);
    ASSERT_EQ(o.rank, 2);
    EXPECT_GE(o.proof->ids.size(), 4u);
    for (auto v : w.correct()) EXPECT_TRUE(w.interactive_verdict(v, w.key_of(3, *o.message), *o.proof, false));
  }
}

TEST(Gradecast, InteractiveNonRelayersDoNotConfirm) {
  // f Byzantine + f+1 correct non-relayers + f correct relayers: f=1, n=5.
  GcWorld w(5, 1, Variant::interactive, {1});
  auto sends = all_send(5, {1});
  w.run(sends, nullptr);
  // Processes 2..5 relayed m3; a message nobody relayed is confirmed by Byzantine only.
  SeenAllProof p;
  p.mode = Variant::interactive;
  p.ids = {1, 2, 3, 4};
  auto fake = msg("never sent");
  for (auto v : w.correct()) EXPECT_FALSE(w.interactive_verdict(v, w.key_of(3, fake), p, true));
}

TEST(Gradecast, ModesAgreeWithoutFaults) {
  GcWorld a(4, 0, Variant::signed_relays, {});
  GcWorld b(4, 0, Variant::interactive, {});
  auto sends = all_send(4, {});
  a.run(sends, nullptr);
  b.run(sends, nullptr);
  for (auto p : a.correct())
    for (ProcessId s = 1; s <= 4; ++s) {
      EXPECT_EQ(a.out(p, s).rank, b.out(p, s).rank);
      EXPECT_EQ(a.out(p, s).message, b.out(p, s).message);
    }
}

TEST(Gradecast, RelayPayloadLayout) {
  Digest d{};
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<std::uint8_t>(i);
  auto p = relay_payload(0x0102030405060708ull, 0x0a0b0c0d, 0x11121314, d);
  ASSERT_EQ(p.size(), 48u);
  EXPECT_EQ(p[0], 0x01);
  EXPECT_EQ(p[7], 0x08);
  EXPECT_EQ(p[8], 0x0a);
  EXPECT_EQ(p[12], 0x11);
  EXPECT_EQ(p[16], 0x00);
  EXPECT_EQ(p[47], 31);
}

TEST(Gradecast, WireRoundTrip) {
  Frame f{7, 2, 3, msg("body")};
  auto back = Frame::decode(view(f.encode()));
  ASSERT_TRUE(back);
  EXPECT_EQ(back->tag, 7u);
  EXPECT_EQ(back->epoch, 2u);
  EXPECT_EQ(back->step, 3);
  EXPECT_EQ(back->body, f.body);
  EXPECT_FALSE(Frame::decode(view(msg("xx"))));
  auto sends = wire::decode_sends(view(wire::encode_sends({msg("a"), msg("b")})));
  ASSERT_EQ(sends.size(), 2u);
  std::vector<RelayKey> keys{{1, 2, 3, Digest{}}};
  EXPECT_EQ(ConfirmExchange::decode_queries(view(ConfirmExchange::encode_queries(keys))), keys);
}

TEST(Gradecast, GarbageBodiesIgnored) {
  GcWorld w(4, 1, Variant::signed_relays, {1});
  auto sends = all_send(4, {1});
  w.run(sends, [](int, ProcessId, ProcessId) -> std::optional<Bytes> { return msg("\xff\xff\xff\xff garbage"); });
  for (auto p : w.correct())
    for (ProcessId s = 2; s <= 4; ++s) EXPECT_EQ(w.out(p, s).rank, 2);
}

TEST(Gradecast, ExhaustiveSignedByzantineSender) {
  auto r = bla::testing::exhaustive_audit(Variant::signed_relays, 1);
  EXPECT_EQ(r.branches, 19683u);
  EXPECT_EQ(r.counterexamples, 0u) << r.first;
}

TEST(Gradecast, ExhaustiveInteractiveByzantineSender) {
  auto r = bla::testing::exhaustive_audit(Variant::interactive, 1);
  EXPECT_EQ(r.branches, 19683u);
  EXPECT_EQ(r.counterexamples, 0u) << r.first;
}

TEST(Gradecast, ExhaustiveByzantineRelayer) {
  for (auto mode : {Variant::signed_relays, Variant::interactive}) {
    auto r = bla::testing::exhaustive_audit(mode, 4);
    EXPECT_EQ(r.counterexamples, 0u) << r.first;
  }
}
