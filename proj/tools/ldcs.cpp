// ldcs: command-line driver for laser-dressed double Compton rates.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ldcs/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-photon emission by an electron in an intense laser wave"};
  app.require_subcommand(1);

  std::string config_path, out, regularization, laser_pol, theory;
  double tau = 0.0;
  int threads = 1;
  bool deterministic = false, force = false;
  std::vector<std::string> sets;

  const std::vector<std::pair<std::string, std::string>> subs{
      {"spectrum", "rate versus omega_b at fixed angles"},
      {"angmap", "rate on a (psi_b, psi_c) or (theta_b, theta_c) grid"},
      {"norders", "contribution of each photon order, linear and circular laser"},
      {"integrate", "phase-space integrated rates over a xi sweep, with power-law fit"},
      {"concurrence", "photon-pair concurrence on an angular grid"},
      {"gaugecheck", "random gauge-shift sweep of the amplitude"}};
  for (const auto& [name, help] : subs) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "key = value file, or a .manifest.json to rerun");
    s->add_option("--out", out, "output CSV (manifest written next to it)");
    s->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    s->add_flag("--deterministic", deterministic, "ordered accumulation, no timestamp in the manifest");
    s->add_flag("--force", force, "allow parameters outside the safe window");
    s->add_option("--regularization", regularization, "pulse, imag-mass or none")
        ->check(CLI::IsMember({"pulse", "imag-mass", "none"}));
    s->add_option("--tau", tau, "pulse length in MeV^-1 (default 1e4/omega)");
    s->add_option("--laser-pol", laser_pol, "linear or circular")->check(CLI::IsMember({"linear", "circular"}));
    s->add_option("--theory", theory, "nonpert, pdcs or both")->check(CLI::IsMember({"nonpert", "pdcs", "both"}));
    s->add_option("--set", sets, "override any config key: --set key=value");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  ldcs::cli::ConfigMap cfg;
  try {
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ldcs::cli::ConfigError("--set expects key=value, got " + kv);
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  } catch (const ldcs::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ldcs::cli::kInvalidConfig;
  }
  const auto* s = app.get_subcommand(sub);
  if (s->count("--out")) cfg.set("out", out);
  if (s->count("--threads")) cfg.set("threads", std::to_string(threads));
  if (deterministic) cfg.set("deterministic", "true");
  if (force) cfg.set("force", "true");
  if (s->count("--regularization")) cfg.set("regularization", regularization);
  if (s->count("--tau")) cfg.set("tau", ldcs::cli::format_double(tau));
  if (s->count("--laser-pol")) cfg.set("laser_pol", laser_pol);
  if (s->count("--theory")) cfg.set("theory", theory);
  return ldcs::cli::run(sub, cfg, std::cout, std::cerr);
}
