#include "bla/gla.hpp"

namespace bla {

namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw Overflow("T(k) exceeds 64 bits");
  return out;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw Overflow("T(k) exceeds 64 bits");
  return out;
}

}  // namespace

std::uint64_t t_bound(std::int64_t k, std::uint64_t n, std::uint64_t f, std::uint64_t delta) {
  if (k < -1) throw ConfigError("term index below -1");
  std::uint64_t t = 0;
  for (std::int64_t i = 0; i <= k; ++i) t = add(mul(f + 1, t), mul(n, delta));
  return t;
}

std::uint64_t t_bound_closed(std::int64_t k, std::uint64_t n, std::uint64_t f, std::uint64_t delta) {
  if (k < -1) throw ConfigError("term index below -1");
  if (f == 0) return mul(mul(delta, n), static_cast<std::uint64_t>(k + 1));
  std::uint64_t p = 1;
  for (std::int64_t i = 0; i < k + 1; ++i) p = mul(p, f + 1);
  return mul(mul(delta, n), p - 1) / f;
}

std::uint32_t GlaParams::delta() const { return inner(0).total_rounds(); }

std::uint64_t GlaParams::size_bound(std::uint32_t k) const {
  LaParams probe;
  probe.protocol = LaProtocol::gac_fast;
  probe.n = n;
  probe.f = f;
  probe.variant = variant;
  std::uint64_t d = probe.total_rounds();
  return add(t_bound(static_cast<std::int64_t>(k) - 1, n, f, d), d);
}

LaParams GlaParams::inner(std::uint32_t k) const {
  LaParams p;
  p.protocol = LaProtocol::gac_fast;
  p.n = n;
  p.f = f;
  p.variant = variant;
  p.tag = k;
  p.strict = strict;
  std::uint64_t d = p.total_rounds();
  std::uint64_t bound = add(t_bound(static_cast<std::int64_t>(k) - 1, n, f, d), d);
  AllowedProposals e = outer;
  p.allowed = AllowedProposals::wrapped(
      n, AllowedProposals("E_" + std::to_string(k), [bound, e](const LatticeElement& y) {
        if (y.size() > bound) return false;
        for (const auto& a : y)
          if (!e.admits_atom(a)) return false;
        return true;
      }));
  return p;
}

GlaMachine::GlaMachine(GlaParams params, ProcessId self, const PublicDirectory& keys, KeyPair key,
                       InputSchedule inputs)
    : params_(std::move(params)), self_(self), keys_(keys), key_(std::move(key)),
      inputs_(std::move(inputs)) {}

void GlaMachine::absorb_inputs(Round up_to) {
  for (auto it = inputs_.lower_bound(any_consumed_ ? consumed_ + 1 : 0);
       it != inputs_.end() && it->first <= up_to; ++it)
    on_propose(it->second);
  consumed_ = up_to;
  any_consumed_ = true;
}

Atom GlaMachine::start_term(std::uint32_t k) {
  term_ = k;
  auto proposal = WrappedAtom{self_, join(dec_, batch_)}.to_atom();
  batch_ = LatticeElement{};
  inner_.emplace(params_.inner(k), self_, keys_, key_, proposal);
  return proposal;
}

const LatticeElement& GlaMachine::on_inner_decision(const LatticeElement& inner) {
  dec_ = unwrap_decision(inner, AllowedProposals::any());
  log_.push_back(dec_);
  return dec_;
}

Outbox GlaMachine::send(Round round) {
  if (done() || round < 1) return {};
  const Round delta = params_.delta();
  auto k = static_cast<std::uint32_t>((round - 1) / delta);
  if (k >= params_.terms) return {};
  if ((round - 1) % delta == 0) {
    absorb_inputs(round - 1);
    start_term(k);
  }
  return inner_->send(static_cast<std::uint32_t>(round - static_cast<Round>(k) * delta));
}

void GlaMachine::receive(Round round, std::span<const Envelope> inbox) {
  if (done() || !inner_) return;
  const Round delta = params_.delta();
  auto local = static_cast<std::uint32_t>(round - static_cast<Round>(term_) * delta);
  inner_->receive(local, inbox);
  for (auto& t : inner_->take_traces()) traces_.push_back(std::move(t));
  if (inner_->decided()) {
    const auto& dec = on_inner_decision(inner_->decision());
    traces_.push_back({{"kind", "term"},
                       {"term", term_},
                       {"size", dec.size()},
                       {"ceiling", t_bound(term_, params_.n, params_.f, delta)},
                       {"inner", atoms_hex(inner_->decision().atoms())}});
    inner_.reset();
  }
}

Digest GlaMachine::state_digest() const {
  ByteWriter w;
  w.u32(term_);
  dec_.encode(w);
  batch_.encode(w);
  w.u64(log_.size());
  if (inner_) w.digest(inner_->state_digest());
  return hash("gla-state", {view(w.data())});
}

GlaProcess::GlaProcess(GlaParams params, const ProcessContext& ctx, InputSchedule inputs)
    : self_(ctx.self), machine_(std::move(params), ctx.self, *ctx.keys, ctx.key, std::move(inputs)) {}

void GlaProcess::drain(Round round, ProcessEvents& out) {
  for (auto& t : machine_.take_traces()) out.traces.push_back(TraceRecord{self_, round, std::move(t)});
  const auto& log = machine_.decisions();
  for (; reported_ < log.size(); ++reported_)
    out.decisions.push_back(DecisionRecord{self_, round, reported_, log[reported_]});
}

InputSchedule default_inputs(ProcessId pid, std::uint32_t terms, std::uint32_t delta) {
  InputSchedule s;
  for (Round r = 0; r <= static_cast<Round>(terms) * delta; ++r)
    s.emplace(r, Atom::text("p" + std::to_string(pid) + "r" + std::to_string(r)));
  return s;
}

}  // namespace bla
