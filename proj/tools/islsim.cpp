// islsim: command-line front end for the ISL channel simulator.
//
//   islsim run   --preset case2 --out out/case2 --sbpa both
//   islsim sweep --out out/sweep --snr-db 0:30:5
//   islsim presets [--show NAME]

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "islchan/cli.hpp"
#include "islchan/config.hpp"

namespace {

void add_run_flags(CLI::App* sub, islchan::cli::RunManifest& m, std::string& preset, std::uint64_t& seed,
                   unsigned& workers) {
  sub->add_option("--config", m.config_path, "JSON config file (flat dotted keys)");
  sub->add_option("--preset", preset, "case1..case4, angle_sweep, fig4_state_trace");
  sub->add_option("--seed", seed, "root seed override");
  sub->add_option("--out", m.output_dir, "output directory (created if missing)");
  sub->add_option("--sbpa", m.sbpa, "power allocation: on, off or both")
      ->check(CLI::IsMember({"on", "off", "both"}));
  sub->add_option_function<std::string>("--snr-db", [&m](const std::string& s) { m.snr_db = s; },
                                        "SNR grid a:b:step in dB");
  sub->add_option("--workers", workers, "worker threads, 0 = all cores");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inter-satellite link channel simulator"};
  app.set_version_flag("--version", std::string(ISLCHAN_VERSION));
  app.require_subcommand(1);

  islchan::cli::RunManifest run_m, sweep_m;
  std::string run_preset, sweep_preset;
  std::uint64_t run_seed = 0, sweep_seed = 0;
  unsigned run_workers = 0, sweep_workers = 0;

  auto* run = app.add_subcommand("run", "run a configured experiment");
  add_run_flags(run, run_m, run_preset, run_seed, run_workers);
  auto* sweep = app.add_subcommand("sweep", "single-state BER/OP/capacity against SEP angle");
  add_run_flags(sweep, sweep_m, sweep_preset, sweep_seed, sweep_workers);
  auto* presets = app.add_subcommand("presets", "list built-in presets");
  std::string show;
  presets->add_option("--show", show, "print the full key set of one preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : islchan::cli::config_error;
  }

  if (*presets) {
    const auto& all = islchan::config::presets();
    if (show.empty()) {
      for (const auto& [name, doc] : all) std::cout << name << '\n';
      return 0;
    }
    const auto it = all.find(show);
    if (it == all.end()) {
      std::cerr << "config error: unknown preset '" << show << "'\n";
      return islchan::cli::config_error;
    }
    std::cout << it->second.dump(2) << '\n';
    return 0;
  }

  auto finish = [](CLI::App* sub, islchan::cli::RunManifest& m, const std::string& preset, std::uint64_t seed,
                   unsigned workers) {
    if (!preset.empty()) m.preset = preset;
    if (sub->count("--seed")) m.seed_override = seed;
    if (sub->count("--workers")) m.workers = workers;
  };

  if (*run) {
    finish(run, run_m, run_preset, run_seed, run_workers);
    return islchan::cli::run(run_m, std::cout, std::cerr);
  }
  finish(sweep, sweep_m, sweep_preset, sweep_seed, sweep_workers);
  if (!sweep_m.preset && sweep_m.config_path.empty()) sweep_m.preset = "angle_sweep";
  return islchan::cli::run(sweep_m, std::cout, std::cerr, islchan::config::RunKind::angle_sweep);
}
