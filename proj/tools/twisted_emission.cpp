// twisted_emission: angular photon distributions of plane-wave and twisted
// atoms, coincidence rings and the numerical self-check suite.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twem/cli.hpp"

namespace {

using twem::cli::Command;

struct Flag {
  const char *name;
  const char *help;
};

// Every flag maps onto the config-file key of the same name.
const std::vector<Flag> kFlags = {
    {"channel", "planewave | twisted-exact | twisted-quad"},
    {"P", "total atom momentum"},
    {"M", "atom mass"},
    {"omega", "photon energy"},
    {"detuning", "eps_a - eps_b - omega"},
    {"theta-a", "opening angle of the twisted beam (rad)"},
    {"m-oam", "OAM projection of the twisted beam"},
    {"sigma-e", "width of the Gaussian energy delta"},
    {"grid", "angular grid min:max:n (rad)"},
    {"inset", "exclusion around the exact-channel discontinuities (rad)"},
    {"kappa-b", "detected atom transverse momentum (ring)"},
    {"n-samples", "number of ring points"},
    {"seed", "seed for randomized checks"},
    {"format", "csv | json"},
    {"out", "output path (default: stdout)"},
};

struct Subcommand {
  Command cmd;
  CLI::App *app;
  std::map<std::string, std::string> values;
  std::string level;
};

void add_flags(Subcommand &sc) {
  for (const Flag &f : kFlags) {
    const std::string key = f.name;
    sc.app->add_option_function<std::string>(
        "--" + key, [&sc, key](const std::string &v) { sc.values[key] = v; }, f.help);
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Photon emission of plane-wave and twisted atoms"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value config file")->envname("TWISTED_EMISSION_CONFIG");

  std::vector<Subcommand> subs;
  subs.reserve(4);
  subs.push_back({Command::Scan, app.add_subcommand("scan", "angular scan of one channel"), {}, {}});
  subs.push_back({Command::Compare, app.add_subcommand("compare", "plane-wave vs twisted distributions"), {}, {}});
  subs.push_back({Command::Ring, app.add_subcommand("ring", "coincidence ring in the photon transverse plane"), {}, {}});
  subs.push_back({Command::Verify, app.add_subcommand("verify", "run the numerical self-checks"), {}, {}});
  for (auto &sc : subs) {
    add_flags(sc);
    sc.app->add_option("--config", config_path, "flat key=value config file");
  }
  subs[3].app->add_option("--level", subs[3].level, "fast | full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : twem::cli::kConfigError;
  }

  for (auto &sc : subs) {
    if (!sc.app->parsed()) continue;
    twem::cli::RunConfig cfg;
    try {
      if (!config_path.empty()) twem::cli::apply_config_file(cfg, config_path);
      for (const auto &[k, v] : sc.values) twem::cli::apply_setting(cfg, k, v);
      if (!sc.level.empty()) cfg.level = twem::cli::parse_level(sc.level);
    } catch (const twem::ConfigError &e) {
      std::cerr << "config error: " << e.what() << '\n';
      return twem::cli::kConfigError;
    }

    if (cfg.out.empty()) return twem::cli::run(sc.cmd, cfg, std::cout, std::cerr, std::cerr);
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) {
      std::cerr << "config error: cannot write '" << cfg.out << "'\n";
      return twem::cli::kConfigError;
    }
    const int rc = twem::cli::run(sc.cmd, cfg, file, std::cout, std::cerr);
    file.close();
    return rc;
  }
  return twem::cli::kConfigError;
}
