#include "bla/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace bla {

std::string_view to_string(ProtocolKind p) {
  switch (p) {
    case ProtocolKind::gac: return "gac";
    case ProtocolKind::gac_fast: return "gac_fast";
    case ProtocolKind::wrapped: return "wrapped";
    case ProtocolKind::gla: return "gla";
  }
  return "?";
}

ProtocolKind parse_protocol(std::string_view s) {
  if (s == "gac") return ProtocolKind::gac;
  if (s == "gac_fast") return ProtocolKind::gac_fast;
  if (s == "wrapped") return ProtocolKind::wrapped;
  if (s == "gla") return ProtocolKind::gla;
  throw ConfigError("unknown protocol: " + std::string(s));
}

void RunSpec::validate() const {
  config().validate();
  if (protocol == ProtocolKind::gla && terms == 0) throw ConfigError("gla needs at least one term");
  auto names = builtin_strategy_names();
  if (std::find(names.begin(), names.end(), adversary) == names.end())
    throw ConfigError("unknown adversary strategy: " + adversary);
}

SimulationConfig RunSpec::config() const {
  SimulationConfig c;
  c.n = n;
  c.f = f;
  c.byzantine_ids = byzantine_ids ? *byzantine_ids : SimulationConfig::lowest_ids(f);
  c.seed = seed;
  c.variant = variant;
  c.rushing = rushing;
  c.signer = signer;
  c.parallel = parallel;
  return c;
}

LaParams RunSpec::la_params() const {
  LaParams p;
  p.protocol = protocol == ProtocolKind::gac ? LaProtocol::gac : LaProtocol::gac_fast;
  p.n = n;
  p.f = f;
  p.variant = variant;
  p.allowed = protocol == ProtocolKind::wrapped ? AllowedProposals::wrapped(n, AllowedProposals::any())
                                                : AllowedProposals::integer_singletons(n);
  return p;
}

GlaParams RunSpec::gla_params() const {
  GlaParams g;
  g.n = n;
  g.f = f;
  g.variant = variant;
  g.terms = terms;
  return g;
}

Round RunSpec::expected_rounds() const {
  if (protocol == ProtocolKind::gla) return static_cast<Round>(terms) * gla_params().delta();
  return la_params().total_rounds();
}

nlohmann::json RunSpec::to_json() const {
  auto ids = nlohmann::json::array();
  for (auto b : config().byzantine_ids) ids.push_back(b);
  nlohmann::json j = {{"protocol", to_string(protocol)},
                      {"n", n},
                      {"f", f},
                      {"variant", bla::to_string(variant)},
                      {"adversary", adversary},
                      {"adversary_seed", adversary_seed},
                      {"seed", seed},
                      {"byzantine_ids", ids},
                      {"signer", signer == SignerBackend::mock ? "mock" : "ed25519"},
                      {"rushing", rushing}};
  if (protocol == ProtocolKind::gla) j["terms"] = terms;
  return j;
}

LatticeElement default_proposal(ProtocolKind p, ProcessId pid) {
  if (p == ProtocolKind::gac || p == ProtocolKind::gac_fast) return {Atom::integer(pid)};
  return {Atom::text("v" + std::to_string(pid))};
}

ProtocolFactory protocol_factory(const RunSpec& spec, bool strict) {
  switch (spec.protocol) {
    case ProtocolKind::gac:
    case ProtocolKind::gac_fast: {
      auto params = spec.la_params();
      params.strict = strict;
      return [params](const ProcessContext& ctx) -> std::unique_ptr<Process> {
        return std::make_unique<LaProcess>(params, ctx, Atom::integer(ctx.self));
      };
    }
    case ProtocolKind::wrapped: {
      auto params = spec.la_params();
      params.strict = strict;
      auto kind = spec.protocol;
      return [params, kind](const ProcessContext& ctx) -> std::unique_ptr<Process> {
        return std::make_unique<WrappedProcess>(params, AllowedProposals::any(), ctx,
                                                default_proposal(kind, ctx.self));
      };
    }
    case ProtocolKind::gla: {
      auto params = spec.gla_params();
      params.strict = strict;
      return [params](const ProcessContext& ctx) -> std::unique_ptr<Process> {
        return std::make_unique<GlaProcess>(params, ctx, default_inputs(ctx.self, params.terms, params.delta()));
      };
    }
  }
  throw ConfigError("unknown protocol");
}

AttackSurface attack_surface(const RunSpec& spec) {
  AttackSurface s;
  s.shadow = protocol_factory(spec, false);
  const std::uint32_t n = spec.n;
  if (spec.protocol == ProtocolKind::gac || spec.protocol == ProtocolKind::gac_fast) {
    s.fresh = [n](ProcessId b, std::uint64_t i) {
      return Atom::integer((static_cast<std::uint64_t>(b) - 1 + i) % n + 1);
    };
  } else {
    s.fresh = [](ProcessId b, std::uint64_t i) {
      return WrappedAtom{b, {Atom::text("late-b" + std::to_string(b) + "-" + std::to_string(i))}}.to_atom();
    };
  }
  return s;
}

LaAudit la_audit(const RunSpec& spec) {
  LaAudit a;
  auto params = spec.la_params();
  a.protocol = params.protocol;
  a.shape = spec.protocol == ProtocolKind::wrapped ? LaShape::wrapped : LaShape::atoms;
  a.inner_allowed = params.allowed;
  for (auto p : spec.config().correct_ids()) a.proposals[p] = default_proposal(spec.protocol, p);
  return a;
}

namespace {

Verdicts accounting(const Transcript& t) {
  PropertyVerdict v{"message_accounting", true, nullptr};
  const std::uint64_t n = t.config.n;
  std::uint64_t sum = 0;
  for (const auto& r : t.reports) {
    sum += r.messages_sent;
    std::uint64_t in_round = 0;
    for (const auto& e : t.envelopes) in_round += e.round == r.round;
    if (in_round != r.messages_sent || r.messages_sent != r.live_senders * (n - 1)) {
      v.pass = false;
      v.witness = {{"round", r.round}, {"reported", r.messages_sent}, {"envelopes", in_round},
                   {"live_senders", r.live_senders}};
      break;
    }
  }
  if (v.pass && (sum != t.envelopes.size() || sum > n * n * t.rounds)) {
    v.pass = false;
    v.witness = {{"reported", sum}, {"envelopes", t.envelopes.size()}, {"cap", n * n * t.rounds}};
  }
  if (v.pass) v.witness = {{"messages", sum}, {"cap", n * n * t.rounds}};
  Verdicts out;
  out.add(v);
  return out;
}

}  // namespace

RunResult execute(const RunSpec& spec) {
  spec.validate();
  const auto config = spec.config();
  Round max_rounds = spec.max_rounds ? spec.max_rounds : 2 * spec.expected_rounds() + 8;
  auto adversary = make_adversary(spec.adversary, spec.adversary_seed, attack_surface(spec));

  RunResult out;
  out.report.spec = spec;
  try {
    out.transcript = run(config, protocol_factory(spec), adversary, max_rounds);
  } catch (NonTermination& e) {
    out.transcript = std::move(e.transcript);
    out.report.error = e.what();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    out.report.error = e.what();
    out.transcript.config = config;
  }
  const auto& t = out.transcript;
  auto& rep = out.report;
  rep.completed = t.completed;
  rep.rounds = t.rounds;
  rep.epochs = spec.protocol == ProtocolKind::gla ? spec.gla_params().inner(0).epochs() : spec.la_params().epochs();
  for (const auto& r : t.reports) {
    rep.messages += r.messages_sent;
    rep.bytes += r.bytes_sent;
  }
  for (const auto& d : t.decisions) rep.decisions[d.pid].push_back(d.value);
  rep.transcript_digest = to_hex(view(t.digest()));

  if (!t.completed) {
    rep.verdicts.add({"liveness", false, {{"error", rep.error}}});
    return out;
  }
  rep.verdicts.merge(accounting(t));
  if (spec.protocol == ProtocolKind::gla) {
    GlaAudit audit;
    audit.params = spec.gla_params();
    for (auto p : config.correct_ids()) audit.inputs[p] = default_inputs(p, spec.terms, audit.params.delta());
    rep.verdicts.merge(check_gla(t, audit, &rep.terms));
    for (std::uint32_t k = 0; k < spec.terms; ++k) {
      LaAudit la;
      la.protocol = LaProtocol::gac_fast;
      la.shape = LaShape::gla_term;
      la.tag = k;
      la.inner_allowed = audit.params.inner(k).allowed;
      rep.verdicts.merge(check_lemmas(t, la), "term" + std::to_string(k) + ".");
    }
  } else {
    auto audit = la_audit(spec);
    rep.verdicts.merge(check_la(t, audit));
    rep.verdicts.merge(check_lemmas(t, audit));
  }
  return out;
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["spec"] = spec.to_json();
  j["completed"] = completed;
  j["rounds"] = rounds;
  j["epochs"] = epochs;
  j["messages"] = messages;
  j["bytes"] = bytes;
  j["all_pass"] = all_pass();
  j["verdicts"] = verdicts.to_json();
  auto d = nlohmann::json::object();
  for (const auto& [p, ds] : decisions) {
    auto arr = nlohmann::json::array();
    for (const auto& x : ds) arr.push_back(bla::to_json(x));
    d[std::to_string(p)] = arr;
  }
  j["decisions"] = d;
  if (spec.protocol == ProtocolKind::gla) {
    auto arr = nlohmann::json::array();
    for (const auto& s : terms)
      arr.push_back({{"term", s.term},
                     {"max_size", s.max_size},
                     {"T", s.ceiling},
                     {"T_closed", s.ceiling_closed},
                     {"byzantine_excess", s.byzantine_excess}});
    j["t_table"] = arr;
    j["delta"] = spec.gla_params().delta();
  }
  j["transcript_digest"] = transcript_digest;
  if (!error.empty()) j["error"] = error;
  return j;
}

void write_outputs(const RunResult& r, const std::string& dir, bool trace) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream os(base / "report.json");
    os << r.report.to_json().dump(2) << "\n";
  }
  {
    std::ofstream os(base / "rounds.csv");
    r.transcript.write_round_csv(os);
  }
  if (trace) {
    std::ofstream os(base / "transcript.jsonl");
    r.transcript.write_jsonl(os, true);
  }
}

std::string sweep_csv_header() {
  return "protocol,n,f,variant,adversary,adversary_seed,seed,terms,completed,rounds,epochs,messages,bytes,"
         "all_pass\n";
}

std::string sweep_csv_row(const Report& r) {
  std::ostringstream os;
  const auto& s = r.spec;
  os << to_string(s.protocol) << ',' << s.n << ',' << s.f << ',' << bla::to_string(s.variant) << ','
     << s.adversary << ',' << s.adversary_seed << ',' << s.seed << ','
     << (s.protocol == ProtocolKind::gla ? s.terms : 0) << ',' << (r.completed ? 1 : 0) << ',' << r.rounds
     << ',' << r.epochs << ',' << r.messages << ',' << r.bytes << ',' << (r.all_pass() ? 1 : 0) << '\n';
  return os.str();
}

std::string sweep(const std::vector<RunSpec>& grid, bool parallel) {
  for (const auto& s : grid) s.validate();
  std::vector<std::string> rows(grid.size());
  auto work = [&](std::size_t i) { rows[i] = sweep_csv_row(execute(grid[i]).report); };
  unsigned workers = parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
  if (workers <= 1 || grid.size() <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < grid.size(); i += workers) work(i);
      });
    for (auto& t : pool) t.join();
  }
  std::string out = rows.empty() ? "" : sweep_csv_header();
  for (const auto& r : rows) out += r;
  return out;
}

}  // namespace bla
