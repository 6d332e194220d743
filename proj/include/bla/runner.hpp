#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bla/adversary.hpp"
#include "bla/oracle.hpp"

namespace bla {

enum class ProtocolKind { gac, gac_fast, wrapped, gla };
std::string_view to_string(ProtocolKind p);
ProtocolKind parse_protocol(std::string_view s);

struct RunSpec {
  ProtocolKind protocol = ProtocolKind::gac_fast;
  std::uint32_t n = 4;
  std::uint32_t f = 1;
  Variant variant = Variant::signed_relays;
  std::string adversary = "silent";
  std::uint64_t adversary_seed = 0;
  std::uint64_t seed = 0;
  std::uint32_t terms = 5;
  // 0 picks the protocol's round count plus slack.
  Round max_rounds = 0;
  // Lowest f ids when unset.
  std::optional<std::set<ProcessId>> byzantine_ids;
  SignerBackend signer = SignerBackend::mock;
  bool rushing = true;
  bool parallel = false;

  // Throws ConfigError.
  void validate() const;
  SimulationConfig config() const;
  LaParams la_params() const;
  GlaParams gla_params() const;
  Round expected_rounds() const;
  nlohmann::json to_json() const;
};

struct Report {
  RunSpec spec;
  bool completed = false;
  Round rounds = 0;
  std::uint32_t epochs = 0;
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  Verdicts verdicts;
  std::map<ProcessId, std::vector<LatticeElement>> decisions;
  std::vector<TermStats> terms;
  std::string transcript_digest;
  std::string error;

  bool all_pass() const { return completed && verdicts.all_pass(); }
  nlohmann::json to_json() const;
};

struct RunResult {
  Report report;
  Transcript transcript;
};

// Proposal of a correct process, per protocol.
LatticeElement default_proposal(ProtocolKind p, ProcessId pid);
AttackSurface attack_surface(const RunSpec& spec);
ProtocolFactory protocol_factory(const RunSpec& spec, bool strict = true);
LaAudit la_audit(const RunSpec& spec);

// Runs and audits. Throws ConfigError for an invalid spec; non-termination
// is reported as a failing report.
RunResult execute(const RunSpec& spec);

// Writes report.json, rounds.csv and, with trace set, transcript.jsonl.
void write_outputs(const RunResult& r, const std::string& dir, bool trace);

std::string sweep_csv_header();
std::string sweep_csv_row(const Report& r);
// One row per spec, in spec order.
std::string sweep(const std::vector<RunSpec>& grid, bool parallel = true);

}  // namespace bla
