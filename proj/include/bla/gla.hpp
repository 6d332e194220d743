#pragma once

#include <map>
#include <optional>
#include <vector>

#include "bla/agreement.hpp"

namespace bla {

// T(k) by the recurrence: T(-1) = 0, T(k) = (f+1) T(k-1) + n delta.
std::uint64_t t_bound(std::int64_t k, std::uint64_t n, std::uint64_t f, std::uint64_t delta);
// delta n ((f+1)^{k+1} - 1) / f for f >= 1, delta n (k+1) for f = 0.
std::uint64_t t_bound_closed(std::int64_t k, std::uint64_t n, std::uint64_t f, std::uint64_t delta);

struct GlaParams {
  std::uint32_t n = 0;
  std::uint32_t f = 0;
  Variant variant = Variant::signed_relays;
  std::uint32_t terms = 1;
  AllowedProposals outer = AllowedProposals::any();
  bool strict = true;

  // Rounds per term: the inner LA's exact round count.
  std::uint32_t delta() const;
  // Inner LA of term k over E_k = Pi x (subsets of E of size <= T(k-1)+delta).
  LaParams inner(std::uint32_t k) const;
  std::uint64_t size_bound(std::uint32_t k) const;
};

using InputSchedule = std::map<Round, Atom>;

class GlaMachine {
 public:
  GlaMachine(GlaParams params, ProcessId self, const PublicDirectory& keys, KeyPair key,
             InputSchedule inputs);

  void on_propose(const Atom& v) { batch_.insert(v); }
  // Launches term k; returns the inner proposal (p_i, dec + C) and resets C.
  Atom start_term(std::uint32_t k);
  const LatticeElement& on_inner_decision(const LatticeElement& inner);

  Outbox send(Round round);
  void receive(Round round, std::span<const Envelope> inbox);

  bool done() const { return log_.size() == params_.terms; }
  const std::vector<LatticeElement>& decisions() const { return log_; }
  const LatticeElement& batch() const { return batch_; }
  const LatticeElement& current() const { return dec_; }
  std::vector<nlohmann::json> take_traces() { return std::move(traces_); }
  Digest state_digest() const;
  const GlaParams& params() const { return params_; }

 private:
  void absorb_inputs(Round up_to);

  GlaParams params_;
  ProcessId self_;
  const PublicDirectory& keys_;
  KeyPair key_;
  InputSchedule inputs_;
  Round consumed_ = 0;
  bool any_consumed_ = false;
  LatticeElement batch_;
  LatticeElement dec_;
  std::vector<LatticeElement> log_;
  std::optional<LaMachine> inner_;
  std::uint32_t term_ = 0;
  std::vector<nlohmann::json> traces_;
};

class GlaProcess final : public Process {
 public:
  GlaProcess(GlaParams params, const ProcessContext& ctx, InputSchedule inputs);

  Outbox send(Round round) override { return machine_.send(round); }
  void receive(Round round, std::span<const Envelope> inbox) override { machine_.receive(round, inbox); }
  bool terminated() const override { return machine_.done(); }
  Digest state_digest() const override { return machine_.state_digest(); }
  void drain(Round round, ProcessEvents& out) override;

 private:
  ProcessId self_;
  GlaMachine machine_;
  std::size_t reported_ = 0;
};

// One value per round 0..terms*delta, named "p<pid>r<round>".
InputSchedule default_inputs(ProcessId pid, std::uint32_t terms, std::uint32_t delta);

}  // namespace bla
