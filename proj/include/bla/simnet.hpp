#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include <json.hpp>

#include "bla/common.hpp"
#include "bla/lattice.hpp"
#include "bla/signer.hpp"

namespace bla {

struct SimulationConfig {
  std::uint32_t n = 1;
  std::uint32_t f = 0;
  std::set<ProcessId> byzantine_ids;
  std::uint64_t seed = 0;
  Variant variant = Variant::signed_relays;
  bool rushing = true;
  SignerBackend signer = SignerBackend::mock;
  bool parallel = false;

  // Throws ConfigError on any resiliency or id inconsistency.
  void validate() const;
  bool is_byzantine(ProcessId p) const { return byzantine_ids.count(p) > 0; }
  std::vector<ProcessId> correct_ids() const;

  static std::set<ProcessId> lowest_ids(std::uint32_t f);
  nlohmann::json to_json() const;
};

struct Envelope {
  ProcessId from = 0;
  ProcessId to = 0;
  Round round = 0;
  Bytes payload;
};

struct DecisionRecord {
  ProcessId pid = 0;
  Round round = 0;
  std::uint64_t index = 0;
  LatticeElement value;
};

struct TraceRecord {
  ProcessId pid = 0;
  Round round = 0;
  nlohmann::json data;
};

struct RoundReport {
  Round round = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t total_messages = 0;
  std::uint64_t total_bytes = 0;
  std::uint32_t live_senders = 0;
  std::map<ProcessId, Digest> state_digests;
};

struct ProcessEvents {
  std::vector<DecisionRecord> decisions;
  std::vector<TraceRecord> traces;
};

struct ProcessContext {
  ProcessId self = 0;
  const SimulationConfig* config = nullptr;
  const PublicDirectory* keys = nullptr;
  KeyPair key;
};

using Outbox = std::vector<std::pair<ProcessId, Bytes>>;

class Process {
 public:
  virtual ~Process() = default;
  virtual Outbox send(Round round) = 0;
  virtual void receive(Round round, std::span<const Envelope> inbox) = 0;
  virtual bool terminated() const = 0;
  virtual Digest state_digest() const = 0;
  virtual void drain(Round round, ProcessEvents& out) = 0;
};

struct Transcript {
  SimulationConfig config;
  std::vector<Envelope> envelopes;
  std::vector<DecisionRecord> decisions;
  std::vector<TraceRecord> traces;
  std::vector<RoundReport> reports;
  Round rounds = 0;
  bool completed = false;

  std::vector<const Envelope*> inbox(ProcessId to, Round round) const;
  std::vector<const Envelope*> in_round(Round round) const;
  std::vector<const DecisionRecord*> decisions_of(ProcessId pid) const;

  Digest digest() const;
  void write_jsonl(std::ostream& os, bool payloads = false) const;
  void write_round_csv(std::ostream& os) const;
};

struct NonTermination : Error {
  NonTermination(std::string what, Transcript t) : Error(std::move(what)), transcript(std::move(t)) {}
  Transcript transcript;
};

// What the Byzantine coalition may observe in the current round.
class AdversaryView {
 public:
  AdversaryView(const SimulationConfig& config, Round current, const std::vector<std::vector<Envelope>>& history,
                const std::vector<Envelope>& current_sends)
      : config_(config), current_(current), history_(history), current_sends_(current_sends) {}

  Round current_round() const { return current_; }
  bool rushing() const { return config_.rushing; }
  const SimulationConfig& config() const { return config_; }

  // Envelopes delivered to (or, when rushing, being sent this round to) byz.
  std::vector<const Envelope*> inbox(ProcessId byz, Round round) const;
  // All rounds visible for byz, oldest first.
  std::vector<const Envelope*> visible(ProcessId byz) const;

 private:
  void guard(ProcessId byz) const;

  const SimulationConfig& config_;
  Round current_;
  const std::vector<std::vector<Envelope>>& history_;
  const std::vector<Envelope>& current_sends_;
};

class AdversaryOutbox {
 public:
  explicit AdversaryOutbox(const SimulationConfig& config) : config_(config) {}
  // Throws AccessViolation unless from is Byzantine.
  void send(ProcessId from, ProcessId to, Bytes payload);
  void broadcast(ProcessId from, const Bytes& payload);
  std::vector<std::tuple<ProcessId, ProcessId, Bytes>> take() { return std::move(out_); }

 private:
  const SimulationConfig& config_;
  std::vector<std::tuple<ProcessId, ProcessId, Bytes>> out_;
};

class AdversaryContext {
 public:
  AdversaryContext(const SimulationConfig& config, const KeyRegistry& registry)
      : config_(&config), registry_(&registry) {}

  const SimulationConfig& config() const { return *config_; }
  const PublicDirectory& keys() const { return *registry_; }
  // Throws AccessViolation for a correct id.
  const KeyPair& key(ProcessId byz) const;
  ProcessContext process_context(ProcessId byz) const;

 private:
  const SimulationConfig* config_;
  const KeyRegistry* registry_;
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual void act(const AdversaryView& view, AdversaryOutbox& out) = 0;
  virtual std::string name() const = 0;
};

using ProtocolFactory = std::function<std::unique_ptr<Process>(const ProcessContext&)>;
using AdversaryFactory = std::function<std::unique_ptr<Adversary>(const AdversaryContext&)>;

// Throws NonTermination if a correct process is still running after max_rounds.
Transcript run(const SimulationConfig& config, const ProtocolFactory& protocol,
               const AdversaryFactory& adversary, Round max_rounds);

}  // namespace bla
