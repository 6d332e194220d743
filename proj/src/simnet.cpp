#include "bla/simnet.hpp"

#include <algorithm>
#include <ostream>
#include <thread>

namespace bla {

void SimulationConfig::validate() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (byzantine_ids.size() != f)
    throw ConfigError("byzantine id count " + std::to_string(byzantine_ids.size()) +
                      " differs from f=" + std::to_string(f));
  for (auto b : byzantine_ids)
    if (b < 1 || b > n) throw ConfigError("byzantine id out of range: " + std::to_string(b));
  if (variant == Variant::signed_relays && n < 3 * f + 1)
    throw ConfigError("signed variant requires n >= 3f+1 (n=" + std::to_string(n) +
                      ", f=" + std::to_string(f) + ")");
  if (variant == Variant::interactive && n < 4 * f + 1)
    throw ConfigError("interactive variant requires n >= 4f+1 (n=" + std::to_string(n) +
                      ", f=" + std::to_string(f) + ")");
}

std::vector<ProcessId> SimulationConfig::correct_ids() const {
  std::vector<ProcessId> out;
  for (ProcessId p = 1; p <= n; ++p)
    if (!is_byzantine(p)) out.push_back(p);
  return out;
}

std::set<ProcessId> SimulationConfig::lowest_ids(std::uint32_t f) {
  std::set<ProcessId> out;
  for (ProcessId p = 1; p <= f; ++p) out.insert(p);
  return out;
}

nlohmann::json SimulationConfig::to_json() const {
  return {{"n", n},
          {"f", f},
          {"byzantine_ids", std::vector<ProcessId>(byzantine_ids.begin(), byzantine_ids.end())},
          {"seed", seed},
          {"variant", to_string(variant)},
          {"rushing", rushing},
          {"signer", signer == SignerBackend::mock ? "mock" : "ed25519"}};
}

std::vector<const Envelope*> Transcript::inbox(ProcessId to, Round round) const {
  std::vector<const Envelope*> out;
  for (const auto& e : envelopes)
    if (e.round == round && e.to == to) out.push_back(&e);
  return out;
}

std::vector<const Envelope*> Transcript::in_round(Round round) const {
  std::vector<const Envelope*> out;
  for (const auto& e : envelopes)
    if (e.round == round) out.push_back(&e);
  return out;
}

std::vector<const DecisionRecord*> Transcript::decisions_of(ProcessId pid) const {
  std::vector<const DecisionRecord*> out;
  for (const auto& d : decisions)
    if (d.pid == pid) out.push_back(&d);
  return out;
}

Digest Transcript::digest() const {
  ByteWriter w;
  w.str(config.to_json().dump());
  w.u64(rounds);
  w.u8(completed ? 1 : 0);
  w.u64(envelopes.size());
  for (const auto& e : envelopes) {
    w.u64(e.round);
    w.u32(e.from);
    w.u32(e.to);
    w.bytes(view(e.payload));
  }
  w.u64(decisions.size());
  for (const auto& d : decisions) {
    w.u32(d.pid);
    w.u64(d.round);
    w.u64(d.index);
    d.value.encode(w);
  }
  w.u64(traces.size());
  for (const auto& t : traces) {
    w.u32(t.pid);
    w.u64(t.round);
    w.str(t.data.dump());
  }
  for (const auto& r : reports) {
    w.u64(r.round);
    w.u64(r.messages_sent);
    w.u64(r.bytes_sent);
    for (const auto& [p, d] : r.state_digests) {
      w.u32(p);
      w.digest(d);
    }
  }
  return hash("transcript", {view(w.data())});
}

void Transcript::write_jsonl(std::ostream& os, bool payloads) const {
  os << nlohmann::json{{"type", "config"}, {"config", config.to_json()}}.dump() << '\n';
  for (const auto& e : envelopes) {
    nlohmann::json j{{"type", "envelope"},
                     {"round", e.round},
                     {"from", e.from},
                     {"to", e.to},
                     {"bytes", e.payload.size()},
                     {"digest", to_hex(hash(view(e.payload)))}};
    if (payloads) j["payload"] = to_hex(view(e.payload));
    os << j.dump() << '\n';
  }
  for (const auto& d : decisions)
    os << nlohmann::json{{"type", "decision"},
                         {"pid", d.pid},
                         {"round", d.round},
                         {"index", d.index},
                         {"value", to_json(d.value)}}
              .dump()
       << '\n';
  for (const auto& t : traces)
    os << nlohmann::json{{"type", "trace"}, {"pid", t.pid}, {"round", t.round}, {"data", t.data}}.dump()
       << '\n';
  for (const auto& r : reports)
    os << nlohmann::json{{"type", "round"},
                         {"round", r.round},
                         {"messages", r.messages_sent},
                         {"bytes", r.bytes_sent},
                         {"live_senders", r.live_senders}}
              .dump()
       << '\n';
  os << nlohmann::json{{"type", "summary"},
                       {"rounds", rounds},
                       {"completed", completed},
                       {"digest", to_hex(digest())}}
            .dump()
     << '\n';
}

void Transcript::write_round_csv(std::ostream& os) const {
  os << "round,messages_sent,bytes_sent,total_messages,total_bytes,live_senders,state_digest\n";
  for (const auto& r : reports) {
    ByteWriter w;
    for (const auto& [p, d] : r.state_digests) {
      w.u32(p);
      w.digest(d);
    }
    os << r.round << ',' << r.messages_sent << ',' << r.bytes_sent << ',' << r.total_messages << ','
       << r.total_bytes << ',' << r.live_senders << ',' << to_hex(hash("states", {view(w.data())}))
       << '\n';
  }
}

void AdversaryView::guard(ProcessId byz) const {
  if (!config_.is_byzantine(byz))
    throw AccessViolation("adversary view requested for correct process " + std::to_string(byz));
}

std::vector<const Envelope*> AdversaryView::inbox(ProcessId byz, Round round) const {
  guard(byz);
  std::vector<const Envelope*> out;
  if (round >= 1 && round < current_) {
    for (const auto& e : history_[round - 1])
      if (e.to == byz) out.push_back(&e);
  } else if (round == current_ && config_.rushing) {
    for (const auto& e : current_sends_)
      if (e.to == byz) out.push_back(&e);
  }
  return out;
}

std::vector<const Envelope*> AdversaryView::visible(ProcessId byz) const {
  std::vector<const Envelope*> out;
  for (Round r = 1; r <= current_; ++r) {
    auto in = inbox(byz, r);
    out.insert(out.end(), in.begin(), in.end());
  }
  return out;
}

void AdversaryOutbox::send(ProcessId from, ProcessId to, Bytes payload) {
  if (!config_.is_byzantine(from))
    throw AccessViolation("adversary cannot send as correct process " + std::to_string(from));
  if (to < 1 || to > config_.n || to == from) return;
  out_.emplace_back(from, to, std::move(payload));
}

void AdversaryOutbox::broadcast(ProcessId from, const Bytes& payload) {
  for (ProcessId to = 1; to <= config_.n; ++to)
    if (to != from) send(from, to, payload);
}

const KeyPair& AdversaryContext::key(ProcessId byz) const {
  if (!config_->is_byzantine(byz))
    throw AccessViolation("secret key of correct process " + std::to_string(byz) +
                          " is not available to the adversary");
  return registry_->issue(byz);
}

ProcessContext AdversaryContext::process_context(ProcessId byz) const {
  return ProcessContext{byz, config_, registry_, key(byz)};
}

namespace {

template <typename F>
void for_each_index(bool parallel, std::size_t count, F&& fn) {
  unsigned workers = parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

Transcript run(const SimulationConfig& config, const ProtocolFactory& protocol,
               const AdversaryFactory& adversary_factory, Round max_rounds) {
  config.validate();
  KeyRegistry registry(config.n, config.seed, config.signer);

  const auto correct = config.correct_ids();
  std::vector<std::unique_ptr<Process>> procs;
  for (auto p : correct)
    procs.push_back(protocol(ProcessContext{p, &config, &registry, registry.issue(p)}));

  std::unique_ptr<Adversary> adversary;
  if (config.f > 0 && adversary_factory) adversary = adversary_factory(AdversaryContext(config, registry));

  Transcript t;
  t.config = config;
  std::vector<std::vector<Envelope>> history;
  std::uint64_t total_messages = 0, total_bytes = 0;

  auto all_done = [&] {
    return std::all_of(procs.begin(), procs.end(), [](const auto& p) { return p->terminated(); });
  };

  Round r = 1;
  for (; r <= max_rounds && !all_done(); ++r) {
    std::vector<Outbox> outs(procs.size());
    std::vector<bool> live(procs.size());
    for (std::size_t i = 0; i < procs.size(); ++i) live[i] = !procs[i]->terminated();
    for_each_index(config.parallel, procs.size(), [&](std::size_t i) {
      if (live[i]) outs[i] = procs[i]->send(r);
    });

    std::vector<Envelope> round_env;
    std::set<ProcessId> senders;
    for (std::size_t i = 0; i < procs.size(); ++i) {
      for (auto& [to, payload] : outs[i]) {
        if (to < 1 || to > config.n || to == correct[i])
          throw Error("process " + std::to_string(correct[i]) + " addressed invalid recipient " +
                      std::to_string(to));
        round_env.push_back(Envelope{correct[i], to, r, std::move(payload)});
        senders.insert(correct[i]);
      }
    }

    if (adversary) {
      AdversaryView view(config, r, history, round_env);
      AdversaryOutbox out(config);
      adversary->act(view, out);
      for (auto& [from, to, payload] : out.take()) {
        round_env.push_back(Envelope{from, to, r, std::move(payload)});
        senders.insert(from);
      }
    }

    std::map<ProcessId, std::vector<Envelope>> inboxes;
    for (const auto& e : round_env) inboxes[e.to].push_back(e);
    for (auto& [to, in] : inboxes)
      std::stable_sort(in.begin(), in.end(),
                       [](const Envelope& a, const Envelope& b) { return a.from < b.from; });

    for_each_index(config.parallel, procs.size(), [&](std::size_t i) {
      if (!live[i]) return;
      static const std::vector<Envelope> kEmpty;
      auto it = inboxes.find(correct[i]);
      const auto& in = it == inboxes.end() ? kEmpty : it->second;
      procs[i]->receive(r, in);
    });

    RoundReport rep;
    rep.round = r;
    rep.live_senders = static_cast<std::uint32_t>(senders.size());
    for (const auto& e : round_env) {
      ++rep.messages_sent;
      rep.bytes_sent += e.payload.size();
    }
    total_messages += rep.messages_sent;
    total_bytes += rep.bytes_sent;
    rep.total_messages = total_messages;
    rep.total_bytes = total_bytes;
    for (std::size_t i = 0; i < procs.size(); ++i) {
      ProcessEvents ev;
      procs[i]->drain(r, ev);
      for (auto& d : ev.decisions) t.decisions.push_back(std::move(d));
      for (auto& tr : ev.traces) t.traces.push_back(std::move(tr));
      rep.state_digests[correct[i]] = procs[i]->state_digest();
    }
    t.reports.push_back(std::move(rep));
    t.envelopes.insert(t.envelopes.end(), round_env.begin(), round_env.end());
    history.push_back(std::move(round_env));
  }
  t.rounds = r - 1;
  t.completed = all_done();
  if (!t.completed)
    throw NonTermination("correct processes still running after " + std::to_string(max_rounds) +
                             " rounds",
                         std::move(t));
  return t;
}

}  // namespace bla
