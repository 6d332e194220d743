#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "bla/common.hpp"
#include "bla/signer.hpp"

namespace bla {

struct GradecastParams {
  std::uint32_t n = 0;
  std::uint32_t f = 0;
  Variant mode = Variant::signed_relays;
  std::uint32_t rank2_threshold = 0;
  std::uint32_t rank1_threshold = 0;
  std::uint32_t relay_threshold = 0;
  std::uint32_t confirm_quorum = 0;  // interactive only

  // relay = rank2 = n-f, rank1 = f+1, confirm = 2f+1. With enforce set, the
  // resiliency bound of the mode is checked.
  static GradecastParams make(std::uint32_t n, std::uint32_t f, Variant mode, bool enforce = true);
};

struct SeenAllProof {
  Variant mode = Variant::signed_relays;
  std::vector<Signature> signatures;  // signed: one per relayer
  std::vector<ProcessId> ids;         // interactive

  void encode(ByteWriter& w) const;
  static SeenAllProof decode(ByteReader& r);
  friend bool operator==(const SeenAllProof&, const SeenAllProof&) = default;
};

// Canonical signed payload: tag (u64) | epoch (u32) | sender (u32) | digest (32), big-endian.
Bytes relay_payload(std::uint64_t tag, Epoch epoch, ProcessId sender, const Digest& digest);

enum class ProofCheck { valid, wrong_mode, duplicate_ids, below_threshold, unknown_id, bad_signature };
std::string_view to_string(ProofCheck c);

// Structural checks shared by both modes (mode, distinct ids, size, id range).
ProofCheck check_structure(const SeenAllProof& proof, const GradecastParams& params);
ProofCheck check_signed(const SeenAllProof& proof, std::uint64_t tag, Epoch epoch, ProcessId sender,
                        const Digest& digest, const GradecastParams& params,
                        const PublicDirectory& keys);
// Throws MalformedProof when the structure is wrong; otherwise returns the verdict.
bool verify_seen_all(const SeenAllProof& proof, std::uint64_t tag, Epoch epoch, ProcessId sender,
                     const Digest& digest, const GradecastParams& params, const PublicDirectory& keys);
// Interactive verdict given the set of listed ids that confirmed.
bool verify_seen_all(const SeenAllProof& proof, const std::set<ProcessId>& confirmed,
                     const GradecastParams& params);

struct GradecastOutput {
  ProcessId sender = 0;
  std::optional<Bytes> message;
  std::optional<Digest> digest;
  std::uint8_t rank = 0;
  std::optional<SeenAllProof> proof;
};

// Returns nullopt for payloads that are not valid messages of this instance.
using MessageDigester = std::function<std::optional<Digest>(BytesView)>;
MessageDigester plain_digester();

struct Frame {
  std::uint64_t tag = 0;
  Epoch epoch = 0;
  std::uint8_t step = 0;
  Bytes body;

  Bytes encode() const;
  static std::optional<Frame> decode(BytesView b);
};

struct RelayKey {
  std::uint64_t tag = 0;
  Epoch epoch = 0;
  ProcessId sender = 0;
  Digest digest{};
  friend auto operator<=>(const RelayKey&, const RelayKey&) = default;
};

// Round-3 relays sent by one process, kept for interactive confirms.
class RelayLog {
 public:
  void record(const RelayKey& k) { relayed_.insert(k); }
  bool relayed(const RelayKey& k) const { return relayed_.count(k) > 0; }
  std::size_t size() const { return relayed_.size(); }

 private:
  std::set<RelayKey> relayed_;
};

struct GradecastContext {
  GradecastParams params;
  std::uint64_t tag = 0;
  Epoch epoch = 0;
  ProcessId self = 0;
  const PublicDirectory* keys = nullptr;
  const KeyPair* key = nullptr;
  MessageDigester digester = plain_digester();
  RelayLog* relay_log = nullptr;
};

// One process's state for the n parallel gradecast instances of one epoch.
// Each step body is broadcast; the caller loops its own body back via receive.
class GradecastEpoch {
 public:
  GradecastEpoch(GradecastContext ctx, std::optional<Bytes> own_message);

  Bytes body1() const;
  void receive1(ProcessId from, BytesView body);
  Bytes body2() const;
  void receive2(ProcessId from, BytesView body);
  Bytes body3();
  void receive3(ProcessId from, BytesView body);
  // Outputs for senders 1..n, index sender-1.
  std::vector<GradecastOutput> outputs() const;

  const GradecastContext& context() const { return ctx_; }
  std::optional<Digest> digest_of(BytesView message) const;

 private:
  struct Tally {
    std::map<Bytes, std::set<ProcessId>> sources;
    std::map<Bytes, std::map<ProcessId, Signature>> signatures;
  };
  static std::optional<Bytes> most_frequent(const Tally& t, std::size_t& count);

  GradecastContext ctx_;
  std::optional<Bytes> own_;
  std::map<ProcessId, Bytes> from_sender_;
  std::map<ProcessId, Tally> round2_;
  std::map<ProcessId, Tally> round3_;
  mutable std::map<Bytes, std::optional<Digest>> digest_cache_;
};

namespace wire {

// Step-1 body: messages offered by the sender (a correct sender offers one).
std::vector<Bytes> decode_sends(BytesView body);
Bytes encode_sends(const std::vector<Bytes>& messages);

struct Relay {
  ProcessId sender = 0;
  Bytes message;
  std::optional<Signature> signature;
};
// Step-2 bodies carry no signature flag; step-3 bodies do.
std::vector<Relay> decode_relays(BytesView body, bool step3);
Bytes encode_relays(const std::vector<Relay>& relays, bool step3);

}  // namespace wire

// Interactive verification: one query round then one confirm round.
class ConfirmExchange {
 public:
  ConfirmExchange(GradecastParams params, ProcessId self, const RelayLog* log)
      : params_(params), self_(self), log_(log) {}

  void add(const RelayKey& key, const SeenAllProof& proof);
  // Query body for every other process (possibly empty).
  std::map<ProcessId, Bytes> query_bodies() const;
  void receive_queries(ProcessId from, BytesView body);
  std::map<ProcessId, Bytes> confirm_bodies() const;
  void receive_confirms(ProcessId from, BytesView body);
  // Verdict for a proof previously added.
  bool verdict(const RelayKey& key, const SeenAllProof& proof) const;

  static Bytes encode_queries(const std::vector<RelayKey>& keys);
  static std::vector<RelayKey> decode_queries(BytesView body);
  static Bytes encode_answers(const std::vector<std::pair<RelayKey, bool>>& answers);
  static std::vector<std::pair<RelayKey, bool>> decode_answers(BytesView body);

 private:
  GradecastParams params_;
  ProcessId self_;
  const RelayLog* log_;
  std::map<ProcessId, std::set<RelayKey>> outgoing_;
  std::map<ProcessId, std::vector<RelayKey>> incoming_;
  std::map<ProcessId, std::map<RelayKey, bool>> answers_;
};

}  // namespace bla
