// Experiment runner for the lattice agreement simulator.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bla/runner.hpp"

namespace {

std::string default_out_dir() {
  if (const char* env = std::getenv("BLA_OUT_DIR")) return env;
  return "";
}

bla::RunSpec make_spec(const std::string& protocol, std::uint32_t n, std::uint32_t f, const std::string& variant,
                       const std::string& adversary, std::uint64_t seed, std::uint32_t terms, bla::Round max_rounds,
                       const std::string& signer, const std::vector<bla::ProcessId>& byz) {
  bla::RunSpec s;
  s.protocol = bla::parse_protocol(protocol);
  s.n = n;
  s.f = f;
  s.variant = bla::parse_variant(variant);
  s.adversary = adversary;
  s.adversary_seed = seed;
  s.seed = seed;
  s.terms = terms;
  s.max_rounds = max_rounds;
  if (signer == "ed25519") s.signer = bla::SignerBackend::ed25519;
  else if (signer != "mock") throw bla::ConfigError("unknown signer: " + signer);
  if (!byz.empty()) s.byzantine_ids = std::set<bla::ProcessId>(byz.begin(), byz.end());
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine lattice agreement simulator"};
  app.require_subcommand(0, 1);

  std::string protocol = "gac_fast", variant = "signed", adversary = "silent", out = default_out_dir();
  std::string signer = "mock";
  std::uint32_t n = 4, f = 1, terms = 5;
  std::uint64_t seed = 0;
  bla::Round max_rounds = 0;
  bool trace = false, quiet = false;
  std::vector<bla::ProcessId> byz;

  app.add_option("--protocol", protocol, "gac | gac_fast | wrapped | gla");
  app.add_option("--n", n, "number of processes");
  app.add_option("--f", f, "number of Byzantine processes");
  app.add_option("--variant", variant, "signed | interactive");
  app.add_option("--adversary", adversary, "builtin strategy name");
  app.add_option("--seed", seed, "run and adversary seed");
  app.add_option("--terms", terms, "GLA terms");
  app.add_option("--max-rounds", max_rounds, "round cap (0 = protocol rounds plus slack)");
  app.add_option("--out", out, "output directory (default $BLA_OUT_DIR)");
  app.add_option("--byzantine", byz, "Byzantine ids (default: lowest f)");
  app.add_option("--signer", signer, "mock | ed25519");
  app.add_flag("--trace", trace, "write the full transcript");
  app.add_flag("--quiet", quiet, "print only the verdict line");

  auto* sw = app.add_subcommand("sweep", "Cartesian product of specs to CSV");
  std::vector<std::string> sw_protocols{"gac_fast"}, sw_variants{"signed"}, sw_adversaries{"silent"};
  std::vector<std::uint32_t> sw_fs{1};
  std::vector<std::uint32_t> sw_ns;
  std::uint32_t sw_seeds = 1;
  std::string sw_csv;
  sw->add_option("--protocols", sw_protocols)->delimiter(',');
  sw->add_option("--variants", sw_variants)->delimiter(',');
  sw->add_option("--adversaries", sw_adversaries)->delimiter(',');
  sw->add_option("--fs", sw_fs)->delimiter(',');
  sw->add_option("--ns", sw_ns, "n values (default: minimal n per variant)")->delimiter(',');
  sw->add_option("--seeds", sw_seeds, "seeds 0..k-1 per cell");
  sw->add_option("--csv", sw_csv, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*sw) {
      std::vector<bla::RunSpec> grid;
      for (const auto& p : sw_protocols)
        for (const auto& v : sw_variants)
          for (auto ff : sw_fs) {
            std::vector<std::uint32_t> ns = sw_ns;
            if (ns.empty()) ns = {bla::parse_variant(v) == bla::Variant::signed_relays ? 3 * ff + 1 : 4 * ff + 1};
            for (auto nn : ns)
              for (const auto& a : sw_adversaries)
                for (std::uint32_t s = 0; s < sw_seeds; ++s)
                  grid.push_back(make_spec(p, nn, ff, v, a, s, terms, max_rounds, signer, {}));
          }
      auto csv = bla::sweep(grid);
      if (sw_csv.empty()) {
        std::cout << csv;
      } else {
        std::ofstream os(sw_csv);
        os << csv;
      }
      bool ok = csv.find(",0\n") == std::string::npos;
      return ok ? 0 : 1;
    }

    auto spec = make_spec(protocol, n, f, variant, adversary, seed, terms, max_rounds, signer, byz);
    auto result = bla::execute(spec);
    if (!out.empty()) bla::write_outputs(result, out, trace);
    if (quiet)
      std::cout << (result.report.all_pass() ? "PASS" : "FAIL") << " rounds=" << result.report.rounds << "\n";
    else
      std::cout << result.report.to_json().dump(2) << "\n";
    return result.report.all_pass() ? 0 : 1;
  } catch (const bla::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
