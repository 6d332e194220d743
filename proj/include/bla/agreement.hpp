#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bla/gradecast.hpp"
#include "bla/lattice.hpp"
#include "bla/simnet.hpp"

namespace bla {

enum class Role : char { slave = 's', master = 'm' };

class GroupLabel {
 public:
  GroupLabel() = default;
  explicit GroupLabel(std::string chars);

  const std::string& str() const { return chars_; }
  std::size_t size() const { return chars_.size(); }
  bool empty() const { return chars_.empty(); }
  char operator[](std::size_t i) const { return chars_[i]; }
  // First len characters.
  GroupLabel prefix(std::size_t len) const { return GroupLabel(chars_.substr(0, len)); }
  GroupLabel extended(Role r) const { return GroupLabel(chars_ + static_cast<char>(r)); }
  // Positions t with G[t] = 's'; these index the admissibility chain.
  std::vector<Epoch> slave_positions() const;
  std::vector<GroupLabel> prefixes() const;

  void encode(ByteWriter& w) const { w.str(chars_); }
  static GroupLabel decode(ByteReader& r);

  friend auto operator<=>(const GroupLabel&, const GroupLabel&) = default;

 private:
  std::string chars_;
};

// Keeps the labels ending in 's'.
std::vector<GroupLabel> slv(const std::vector<GroupLabel>& prefixes);

struct Thresholds {
  std::uint32_t down = 0;
  std::uint32_t mid = 0;
  std::uint32_t up = 0;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

Role classify(std::size_t v_size, std::uint32_t t_m);
Role classify(const LatticeElement& v, std::uint32_t t_m);
Thresholds update_thresholds(Role role, const Thresholds& th);

enum class LaProtocol { gac, gac_fast };
std::string_view to_string(LaProtocol p);

Thresholds initial_thresholds(LaProtocol p, std::uint32_t n, std::uint32_t f);
// Replays classifications after the first character.
Thresholds thresholds_for(const GroupLabel& g, LaProtocol p, std::uint32_t n, std::uint32_t f);
std::uint32_t ceil_log2(std::uint64_t x);
std::uint32_t post_commit_epochs(LaProtocol p, std::uint32_t n, std::uint32_t f);

// Seen-all evidence for one value-carrying message of an earlier epoch. It
// carries the message header (group, values, per-value commitments) so the
// message digest can be recomputed without the message body.
struct ProofEntry {
  Epoch epoch = 0;
  ProcessId sender = 0;
  GroupLabel group;
  std::vector<Atom> values;
  std::vector<Digest> commitments;
  SeenAllProof proof;

  Digest message_digest() const;
  Digest hash() const;
  void encode(ByteWriter& w) const;
  static ProofEntry decode(ByteReader& r);
  std::optional<std::size_t> index_of(const Atom& v) const;
  friend bool operator==(const ProofEntry&, const ProofEntry&) = default;
};

// One entry per slave position of the group, ascending.
using ProofChain = std::vector<ProofEntry>;

// Commitment of a message to the chain it carries for v.
Digest chain_commitment(const Atom& v, const ProofChain& chain, std::size_t len);
inline Digest chain_commitment(const Atom& v, const ProofChain& chain) {
  return chain_commitment(v, chain, chain.size());
}
Digest message_digest(const GroupLabel& g, const std::vector<Atom>& values,
                      const std::vector<Digest>& commitments);

// The epoch message M = (pro_i, G, proofs). Values are sorted and distinct;
// chains[i] documents values[i].
struct ValueMessage {
  GroupLabel group;
  std::vector<Atom> values;
  std::vector<ProofChain> chains;

  std::vector<Digest> commitments() const;
  Digest digest() const;
  Bytes encode() const;
  static ValueMessage decode(BytesView b);
  std::optional<std::size_t> index_of(const Atom& v) const;
  // Header of this message as an entry with the given seen-all proof.
  ProofEntry as_entry(Epoch epoch, ProcessId sender, SeenAllProof proof) const;
};

// Structural rules per epoch: epoch 0 carries exactly one value, the empty
// group and no chains; epoch e >= 1 carries a group of length e.
std::optional<ValueMessage> parse_for_epoch(BytesView b, Epoch epoch);
// Memoized per thread; null when parse_for_epoch would fail.
std::shared_ptr<const ValueMessage> parse_shared(BytesView b, Epoch epoch);
MessageDigester epoch_digester(Epoch epoch);

class ProofVerifier {
 public:
  virtual ~ProofVerifier() = default;
  virtual bool verify(std::uint64_t tag, const ProofEntry& e) const = 0;
};

class SignedVerifier final : public ProofVerifier {
 public:
  SignedVerifier(GradecastParams params, const PublicDirectory& keys) : params_(params), keys_(keys) {}
  bool verify(std::uint64_t tag, const ProofEntry& e) const override;

 private:
  GradecastParams params_;
  const PublicDirectory& keys_;
  mutable std::map<std::pair<std::uint64_t, Digest>, bool> cache_;
};

class InteractiveVerifier final : public ProofVerifier {
 public:
  explicit InteractiveVerifier(const ConfirmExchange& ex) : ex_(ex) {}
  bool verify(std::uint64_t tag, const ProofEntry& e) const override;

 private:
  const ConfirmExchange& ex_;
};

// Chain shape for v under G, ignoring seen-all verification.
bool chain_well_formed(const Atom& v, const ProofChain& chain, const GroupLabel& g);
bool chain_valid(const Atom& v, const ProofChain& chain, const GroupLabel& g, std::uint64_t tag,
                 const ProofVerifier& verifier);
bool admissible(const Atom& v, const ValueMessage& m, const GroupLabel& g, std::uint64_t tag,
                const ProofVerifier& verifier);

using ProvenValues = std::map<Atom, ProofChain>;

// V_i with the chain each value was admitted under (first sender in id order).
ProvenValues filter(const std::vector<GradecastOutput>& outputs, const GroupLabel& g, Epoch epoch,
                    const AllowedProposals& allowed, std::uint64_t tag, const ProofVerifier& verifier);

struct LaState {
  ProcessId pid = 0;
  GroupLabel group;
  Thresholds thresholds;
  ProvenValues proposal;
  Epoch epoch = 0;

  LatticeElement proposal_element() const;
};

// Slave update: appends this epoch's entry to every proposal chain, taken from
// the process's own rank-2 output or any rank-2 message that committed to the
// same chain. Throws ProofUnavailable if some value cannot be documented.
ProvenValues update_proofs(const LaState& state, const std::vector<GradecastOutput>& outputs,
                           Epoch epoch);

struct LaParams {
  LaProtocol protocol = LaProtocol::gac_fast;
  std::uint32_t n = 0;
  std::uint32_t f = 0;
  Variant variant = Variant::signed_relays;
  std::uint64_t tag = 0;
  AllowedProposals allowed = AllowedProposals::any();
  // Correct processes assert their invariants; shadows drive Byzantine
  // strategies and drop what they cannot document instead.
  bool strict = true;

  std::uint32_t epochs() const { return post_commit_epochs(protocol, n, f) + 1; }
  std::uint32_t rounds_per_epoch() const { return variant == Variant::signed_relays ? 3 : 5; }
  std::uint32_t total_rounds() const { return epochs() * rounds_per_epoch(); }
  GradecastParams gradecast() const;
};

// One process's LA state machine, driven by local rounds 1..total_rounds().
class LaMachine {
 public:
  LaMachine(LaParams params, ProcessId self, const PublicDirectory& keys, KeyPair key,
            std::optional<Atom> proposal);

  Outbox send(std::uint32_t local_round);
  void receive(std::uint32_t local_round, std::span<const Envelope> inbox);

  bool decided() const { return decision_.has_value(); }
  const LatticeElement& decision() const { return *decision_; }
  const LaState& state() const { return state_; }
  const LaParams& params() const { return params_; }
  std::vector<nlohmann::json> take_traces() { return std::move(traces_); }
  Digest state_digest() const;
  const RelayLog& relay_log() const { return relay_log_; }

  // Message this process gradecasts in the given epoch.
  ValueMessage epoch_message() const;

 private:
  Outbox broadcast(std::uint8_t step, const Bytes& body) const;
  void finish_epoch();
  void register_queries();

  LaParams params_;
  ProcessId self_;
  const PublicDirectory& keys_;
  KeyPair key_;
  std::optional<Atom> own_value_;
  LaState state_;
  RelayLog relay_log_;
  std::unique_ptr<GradecastEpoch> gc_;
  std::unique_ptr<ConfirmExchange> confirm_;
  std::vector<GradecastOutput> outputs_;
  std::optional<LatticeElement> decision_;
  std::vector<nlohmann::json> traces_;
  std::unique_ptr<SignedVerifier> signed_verifier_;
};

// Outer decision of the wrapper: join of second components admitted by E_A.
LatticeElement unwrap_decision(const LatticeElement& inner, const AllowedProposals& outer);

// GAC / GAC_fast over single atoms (L_n style), one machine per process.
class LaProcess final : public Process {
 public:
  LaProcess(LaParams params, const ProcessContext& ctx, Atom proposal);

  Outbox send(Round round) override;
  void receive(Round round, std::span<const Envelope> inbox) override;
  bool terminated() const override;
  Digest state_digest() const override { return machine_.state_digest(); }
  void drain(Round round, ProcessEvents& out) override;

 private:
  ProcessId self_;
  LaMachine machine_;
  bool reported_ = false;
};

// Arbitrary-lattice wrapper over GAC_fast.
class WrappedProcess final : public Process {
 public:
  WrappedProcess(LaParams inner, AllowedProposals outer, const ProcessContext& ctx,
                 LatticeElement proposal);

  Outbox send(Round round) override;
  void receive(Round round, std::span<const Envelope> inbox) override;
  bool terminated() const override;
  Digest state_digest() const override { return machine_.state_digest(); }
  void drain(Round round, ProcessEvents& out) override;

 private:
  ProcessId self_;
  AllowedProposals outer_;
  LaMachine machine_;
  bool reported_ = false;
};

nlohmann::json atoms_hex(const std::vector<Atom>& atoms);
std::vector<Atom> atoms_from_hex(const nlohmann::json& j);

}  // namespace bla
