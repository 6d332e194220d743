#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "bla/agreement.hpp"
#include "bla/gla.hpp"
#include "bla/simnet.hpp"

namespace bla {

struct PropertyVerdict {
  std::string property;
  bool pass = true;
  // Minimal counterexample when pass is false, free-form otherwise.
  nlohmann::json witness;
};

struct Verdicts {
  std::vector<PropertyVerdict> items;

  bool all_pass() const;
  const PropertyVerdict* find(std::string_view property) const;
  void add(PropertyVerdict v) { items.push_back(std::move(v)); }
  void merge(const Verdicts& other, const std::string& prefix = "");
  nlohmann::json to_json() const;
};

// Gradecast outputs and seen-all facts of one LA instance, rebuilt from the
// envelopes of a transcript. Nothing is read from process state.
class InstanceOracle {
 public:
  InstanceOracle(const Transcript& t, const PublicDirectory& keys, std::uint64_t tag,
                 AllowedProposals allowed, std::uint32_t epochs);

  struct Output {
    std::optional<Bytes> message;
    std::uint8_t rank = 0;
  };

  std::uint64_t tag() const { return tag_; }
  std::uint32_t epochs() const { return epochs_; }

  // Output of correct process p for sender s's instance in epoch e.
  Output output(Epoch e, ProcessId p, ProcessId s) const;
  // Message a correct sender offered first in step 1, if any.
  std::optional<Bytes> sent(Epoch e, ProcessId s) const;
  // Correct processes whose round-3 relay for s carried message m.
  std::set<ProcessId> correct_relayers(Epoch e, ProcessId s, const Bytes& m) const;
  // Some party, Byzantine ones included, can assemble a passing seen-all proof.
  bool seen_all_able(Epoch e, ProcessId s, const Bytes& m) const;
  // Every correct process output m for s with rank at least 1.
  bool in_w(Epoch e, ProcessId s, const Bytes& m) const;
  // W_ep as (sender, message) pairs; W_ep(G) when a group is given.
  std::set<std::pair<ProcessId, Bytes>> w(Epoch e, const std::optional<GroupLabel>& g = std::nullopt) const;

  // The carried seen-all proof would pass for some verifier.
  bool proof_passes(const ProofEntry& e) const;
  // Chain structure, commitments and proofs for v under group g.
  bool chain_ok(const Atom& v, const ProofChain& chain, const GroupLabel& g) const;

  // Values admissible for correct processes of group g.
  const std::set<Atom>& admissible(const GroupLabel& g) const;
  // v sits in an epoch-0 message that can carry a seen-all proof.
  bool committed_in_epoch0(const Atom& v) const;
  // Every atom appearing in any epoch-0 message on the wire.
  std::set<Atom> epoch0_atoms() const;
  // Messages appearing in correct processes' round-3 relays of epoch e.
  std::vector<std::pair<ProcessId, Bytes>> relayed_messages(Epoch e) const;

 private:
  struct EpochData {
    // relayer -> sender -> message (first valid item per sender).
    std::map<ProcessId, std::map<ProcessId, Bytes>> correct_relays;
    // recipient -> sender -> relayer -> message as accepted by recipient.
    std::map<ProcessId, std::map<ProcessId, std::map<ProcessId, Bytes>>> delivered;
    std::map<ProcessId, Bytes> correct_sends;
    std::set<Bytes> epoch_messages;
  };

  struct Parsed {
    ValueMessage message;
    Digest digest;
  };

  void index(const Transcript& t);
  const std::optional<Parsed>& parse(Epoch e, const Bytes& m) const;
  bool verify(BytesView payload, const Signature& sig) const;
  bool check_proof(const ProofEntry& e) const;
  Output compute_output(Epoch e, ProcessId p, ProcessId s) const;

  const SimulationConfig config_;
  const PublicDirectory& keys_;
  std::uint64_t tag_;
  AllowedProposals allowed_;
  std::uint32_t epochs_;
  std::vector<ProcessId> correct_;
  std::map<Epoch, EpochData> data_;
  mutable std::map<GroupLabel, std::set<Atom>> admissible_cache_;
  mutable std::map<std::pair<Epoch, Bytes>, std::optional<Parsed>> parse_cache_;
  mutable std::map<std::tuple<Digest, ProcessId, Bytes>, bool> verify_cache_;
  mutable std::map<Digest, bool> proof_cache_;
  mutable std::map<std::tuple<Epoch, ProcessId, ProcessId>, Output> output_cache_;
};

// Gradecast properties and seen-all soundness, per epoch of the instance.
Verdicts check_gradecast(const InstanceOracle& o, const SimulationConfig& config);

// atoms: decisions are joins of single atoms; wrapped: inner decisions are
// recorded as traces; gla_term: the inner instance of one GLA term.
enum class LaShape { atoms, wrapped, gla_term };

struct LaAudit {
  LaProtocol protocol = LaProtocol::gac_fast;
  LaShape shape = LaShape::atoms;
  // Correct proposals at the outer level.
  std::map<ProcessId, LatticeElement> proposals;
  AllowedProposals inner_allowed = AllowedProposals::any();
  AllowedProposals outer_allowed = AllowedProposals::any();
  std::uint64_t tag = 0;
};

// Liveness, Stability, Comparability, Inclusivity, Non-Triviality.
Verdicts check_la(const Transcript& t, const LaAudit& audit);
// Monotonicity, halving, master-dominates, once-forever, V_i inside A(G),
// seen-all soundness and decision epoch.
Verdicts check_lemmas(const Transcript& t, const LaAudit& audit);
// Decided atoms (outer level) that no epoch-0 message carried.
std::set<Atom> late_decided_atoms(const Transcript& t, const LaAudit& audit);

struct GlaAudit {
  GlaParams params;
  std::map<ProcessId, InputSchedule> inputs;
};

struct TermStats {
  std::uint32_t term = 0;
  std::uint64_t max_size = 0;
  std::uint64_t ceiling = 0;
  std::uint64_t ceiling_closed = 0;
  // Atoms in decisions that no correct process had been given.
  std::uint64_t byzantine_excess = 0;
};

Verdicts check_gla(const Transcript& t, const GlaAudit& audit, std::vector<TermStats>* stats = nullptr);

}  // namespace bla
