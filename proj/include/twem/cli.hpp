#pragma once

// Run configuration, table serialization (CSV / JSON) and the bodies of the
// `scan`, `compare`, `ring` and `verify` subcommands. The executable in
// tools/ only parses flags and routes streams.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twem/coincidence.hpp"
#include "twem/emission.hpp"
#include "twem/errors.hpp"
#include "twem/kinematics.hpp"
#include "twem/verify.hpp"

namespace twem::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

enum class Format { Csv, Json };

struct GridSpec {
  double theta_min;
  double theta_max;
  int n_points;
};

struct RunConfig {
  double momentum = 1.0;
  double mass = 1.0;
  double omega = 0.1;
  double detuning = 1e-3; ///< eps_a - eps_b - omega
  double theta_a = std::numbers::pi / 6;
  int m_oam = 0;
  double sigma_e = 5e-4;
  Channel channel = Channel::TwistedExact;
  std::optional<GridSpec> grid; ///< default: 2000 points on theta_pw -+ 2 theta_a
  double inset = 1e-6;
  std::optional<double> kappa_b; ///< default: half the beam's kappa
  int n_samples = 360;
  std::uint64_t seed = 1;
  Format format = Format::Csv;
  std::string out;
  VerifyLevel level = VerifyLevel::Fast;

  void validate() const {
    auto positive = [](double v, const char *what) {
      if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
    };
    positive(momentum, "P");
    positive(mass, "M");
    positive(omega, "omega");
    positive(sigma_e, "sigma-e");
    if (!std::isfinite(detuning) || !(omega + detuning > 0.0))
      throw ConfigError("detuning must leave eps_a - eps_b = omega + detuning > 0");
    if (!(theta_a >= 0.0) || !(theta_a < std::numbers::pi / 2)) throw ConfigError("theta-a must lie in [0, pi/2)");
    if (grid) {
      if (grid->n_points < 2) throw ConfigError("grid needs n >= 2");
      if (!(grid->theta_min >= 0.0) || !(grid->theta_max <= std::numbers::pi) ||
          !(grid->theta_min < grid->theta_max))
        throw ConfigError("grid needs 0 <= min < max <= pi");
    }
    if (!(inset >= 0.0)) throw ConfigError("inset must be non-negative");
    if (kappa_b && (!std::isfinite(*kappa_b) || *kappa_b < 0.0)) throw ConfigError("kappa-b must be >= 0");
    if (n_samples < 1) throw ConfigError("n-samples must be >= 1");
  }

  EmissionProblem problem() const {
    const BeamState beam = theta_a > 0.0 ? BeamState::twisted(mass, momentum, theta_a, m_oam)
                                         : BeamState::plane_wave(mass, momentum);
    return {beam, TransitionLine{omega + detuning, 0.0, 1.0}, omega, GaussianDelta(sigma_e)};
  }
};

inline std::string channel_name(Channel c) {
  switch (c) {
  case Channel::PlaneWave: return "planewave";
  case Channel::TwistedExact: return "twisted-exact";
  case Channel::TwistedQuad: return "twisted-quad";
  }
  return "?";
}

inline Channel parse_channel(std::string_view s) {
  if (s == "planewave") return Channel::PlaneWave;
  if (s == "twisted-exact") return Channel::TwistedExact;
  if (s == "twisted-quad") return Channel::TwistedQuad;
  throw ConfigError("unknown channel '" + std::string(s) + "'");
}

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("unknown format '" + std::string(s) + "'");
}

inline VerifyLevel parse_level(std::string_view s) {
  if (s == "fast") return VerifyLevel::Fast;
  if (s == "full") return VerifyLevel::Full;
  throw ConfigError("unknown verify level '" + std::string(s) + "'");
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s, std::string_view key) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("bad number for " + std::string(key) + ": '" + std::string(s) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s, std::string_view key) {
  s = trim(s);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("bad integer for " + std::string(key) + ": '" + std::string(s) + "'");
  return v;
}

/// "min:max:n"
inline GridSpec parse_grid(std::string_view s) {
  const auto c1 = s.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw ConfigError("grid must be min:max:n");
  return {parse_double(s.substr(0, c1), "grid"), parse_double(s.substr(c1 + 1, c2 - c1 - 1), "grid"),
          parse_int<int>(s.substr(c2 + 1), "grid")};
}

/// Apply one `key=value` setting; keys match the long flag names.
inline void apply_setting(RunConfig &cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "P") cfg.momentum = parse_double(value, key);
  else if (key == "M") cfg.mass = parse_double(value, key);
  else if (key == "omega") cfg.omega = parse_double(value, key);
  else if (key == "detuning") cfg.detuning = parse_double(value, key);
  else if (key == "theta-a") cfg.theta_a = parse_double(value, key);
  else if (key == "m-oam") cfg.m_oam = parse_int<int>(value, key);
  else if (key == "sigma-e") cfg.sigma_e = parse_double(value, key);
  else if (key == "channel") cfg.channel = parse_channel(value);
  else if (key == "grid") cfg.grid = parse_grid(value);
  else if (key == "inset") cfg.inset = parse_double(value, key);
  else if (key == "kappa-b") cfg.kappa_b = parse_double(value, key);
  else if (key == "n-samples") cfg.n_samples = parse_int<int>(value, key);
  else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(value, key);
  else if (key == "format") cfg.format = parse_format(value);
  else if (key == "out") cfg.out = std::string(value);
  else if (key == "level") cfg.level = parse_level(value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

/// Flat `key = value` file; blank lines and lines starting with '#' are skipped.
inline void apply_config_text(RunConfig &cfg, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + " is not key=value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

inline void apply_config_file(RunConfig &cfg, const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Ordered key/value echo of the run configuration.
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig &c) {
  std::vector<std::pair<std::string, std::string>> e{
      {"P", format_double(c.momentum)},          {"M", format_double(c.mass)},
      {"omega", format_double(c.omega)},         {"detuning", format_double(c.detuning)},
      {"theta-a", format_double(c.theta_a)},     {"m-oam", std::to_string(c.m_oam)},
      {"sigma-e", format_double(c.sigma_e)},     {"channel", channel_name(c.channel)},
      {"inset", format_double(c.inset)},         {"seed", std::to_string(c.seed)},
  };
  if (c.grid)
    e.emplace_back("grid", format_double(c.grid->theta_min) + ":" + format_double(c.grid->theta_max) + ":" +
                               std::to_string(c.grid->n_points));
  return e;
}

struct Table {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, double>> meta; ///< extra header scalars
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<double> peaks;
  std::optional<double> theta_pw;
};

inline void write_csv(std::ostream &os, const Table &t) {
  for (const auto &[k, v] : t.config) os << "# " << k << '=' << v << '\n';
  for (const auto &[k, v] : t.meta) os << "# " << k << '=' << format_double(v) << '\n';
  if (t.theta_pw) os << "# theta_pw=" << format_double(*t.theta_pw) << '\n';
  if (!t.peaks.empty()) {
    os << "# peaks=";
    for (std::size_t i = 0; i < t.peaks.size(); ++i) os << (i ? ";" : "") << format_double(t.peaks[i]);
    os << '\n';
  }
  for (std::size_t j = 0; j < t.names.size(); ++j) os << (j ? "," : "") << t.names[j];
  os << '\n';
  const std::size_t rows = t.columns.empty() ? 0 : t.columns.front().size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << format_double(t.columns[j][i]);
    os << '\n';
  }
}

inline void write_json(std::ostream &os, const Table &t) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto &[k, v] : t.config) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json cols = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < t.names.size(); ++c) cols[t.names[c]] = t.columns[c];
  j["columns"] = cols;
  j["peaks"] = t.peaks;
  j["theta_pw"] = t.theta_pw ? nlohmann::ordered_json(*t.theta_pw) : nlohmann::ordered_json(nullptr);
  for (const auto &[k, v] : t.meta) j[k] = v;
  os << j.dump(2) << '\n';
}

inline void write_table(std::ostream &os, const Table &t, Format f) {
  if (f == Format::Csv)
    write_csv(os, t);
  else
    write_json(os, t);
}

/// Parsed numeric body of a CSV emitted by write_csv.
struct CsvData {
  std::map<std::string, std::string> header;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

inline CsvData read_csv(std::string_view text) {
  CsvData d;
  bool have_names = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) d.header[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
      continue;
    }
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (!have_names) {
      for (auto c : cells) d.names.emplace_back(c);
      d.columns.resize(cells.size());
      have_names = true;
      continue;
    }
    if (cells.size() != d.names.size()) throw ConfigError("ragged CSV row");
    for (std::size_t j = 0; j < cells.size(); ++j) d.columns[j].push_back(parse_double(cells[j], d.names[j]));
  }
  return d;
}

/// Grid for emission scans: the configured one, or the default window with
/// points near the window edges removed for the exact channel.
inline std::vector<double> scan_grid(const RunConfig &cfg, const EmissionProblem &p, bool exact) {
  const auto edges = p.beam.is_twisted() ? window_edges(p.beam, p.line, p.omega) : std::vector<double>{};
  const double inset = exact ? cfg.inset : 0.0;
  if (cfg.grid) return uniform_grid(cfg.grid->theta_min, cfg.grid->theta_max, cfg.grid->n_points, edges, inset);
  const auto [lo, hi] = default_window(p);
  return uniform_grid(lo, hi, 2000, edges, inset);
}

inline void require_twisted(const EmissionProblem &p, Channel c) {
  if (c != Channel::PlaneWave && !p.beam.is_twisted())
    throw ConfigError("twisted channels need theta-a > 0");
}

inline Table scan_table(const RunConfig &cfg, std::ostream &log) {
  const EmissionProblem p = cfg.problem();
  require_twisted(p, cfg.channel);
  const auto grid = scan_grid(cfg, p, cfg.channel == Channel::TwistedExact);
  const ScanResult r = scan(p, cfg.channel, grid);
  const double tpw = reference_angle(p);
  log << "theta_pw = " << format_double(tpw) << '\n';
  log << "peaks:";
  for (double pk : r.peaks) log << ' ' << format_double(pk);
  log << '\n';
  Table t;
  t.config = config_echo(cfg);
  t.names = {"theta_p", "density_raw", "density_normalized"};
  t.columns = {r.thetas, r.raw, r.values};
  t.peaks = r.peaks;
  t.theta_pw = tpw;
  return t;
}

/// Opening angles below this report the plane-wave limit deviation.
inline constexpr double kLimitReportThreshold = 0.01;

inline Table compare_table(const RunConfig &cfg, std::ostream &log) {
  const EmissionProblem p = cfg.problem();
  require_twisted(p, Channel::TwistedExact);
  const auto grid = scan_grid(cfg, p, true);
  const ScanResult pw = scan(p, Channel::PlaneWave, grid);
  const ScanResult quad = scan(p, Channel::TwistedQuad, grid);
  const ScanResult exact = scan(p, Channel::TwistedExact, grid);
  const double tpw = reference_angle(p);
  log << "theta_pw = " << format_double(tpw) << '\n';
  auto print_peaks = [&](const char *name, const ScanResult &r) {
    log << name << " peaks:";
    for (double pk : r.peaks) log << ' ' << format_double(pk);
    log << '\n';
  };
  print_peaks("pw", pw);
  print_peaks("tw_quad", quad);
  print_peaks("tw_exact", exact);
  Table t;
  t.config = config_echo(cfg);
  if (cfg.theta_a < kLimitReportThreshold) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (pw.values[i] >= 0.5) worst = std::max(worst, std::fabs(kTwoPi * kTwoPi * quad.raw[i] / pw.raw[i] - 1.0));
    log << "max |(2 pi)^2 tw_quad / pw - 1| = " << format_double(worst) << '\n';
    t.meta.emplace_back("limit_deviation", worst);
  }
  t.names = {"theta_p", "pw", "tw_quad", "tw_exact"};
  t.columns = {grid, pw.values, quad.values, exact.values};
  t.peaks = exact.peaks;
  t.theta_pw = tpw;
  return t;
}

inline Table ring_table(const RunConfig &cfg, std::ostream &log) {
  const double ka = cfg.momentum * std::sin(cfg.theta_a);
  if (!(ka > 0.0)) throw ConfigError("ring needs a twisted beam with kappa_a > 0 (theta-a > 0)");
  const double kb = cfg.kappa_b.value_or(0.5 * ka);
  const RingGeometry ring = ring_geometry(ka, kb);
  const auto pts = sample_ring(ring, cfg.n_samples);
  log << "ring center = (" << format_double(ring.center_x) << ", " << format_double(ring.center_y)
      << "), radius = " << format_double(ring.radius) << '\n';
  Table t;
  t.config = config_echo(cfg);
  t.config.emplace_back("kappa-b", format_double(kb));
  t.config.emplace_back("n-samples", std::to_string(cfg.n_samples));
  t.meta = {{"center_x", ring.center_x}, {"center_y", ring.center_y}, {"radius", ring.radius}};
  t.names = {"kappa_x", "kappa_y"};
  t.columns.resize(2);
  for (const auto &pt : pts) {
    t.columns[0].push_back(pt.kx);
    t.columns[1].push_back(pt.ky);
  }
  return t;
}

inline void write_verify_report(std::ostream &os, const std::vector<CheckResult> &results) {
  for (const auto &r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%-4s  %-48s measured=%.3e  tol=%.3e\n", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.measured, r.tolerance);
    os << line;
  }
  os << (all_passed(results) ? "all checks passed\n" : "verification FAILED\n");
}

enum class Command { Scan, Compare, Ring, Verify };

/// Runs one subcommand, mapping failures to exit codes. `table` receives the
/// data file, `log` the human-readable summary, `err` diagnostics.
inline int run(Command cmd, const RunConfig &cfg, std::ostream &table, std::ostream &log, std::ostream &err,
               const VerifyHooks &hooks = {}) {
  try {
    cfg.validate();
    switch (cmd) {
    case Command::Scan: write_table(table, scan_table(cfg, log), cfg.format); return kOk;
    case Command::Compare: write_table(table, compare_table(cfg, log), cfg.format); return kOk;
    case Command::Ring: write_table(table, ring_table(cfg, log), cfg.format); return kOk;
    case Command::Verify: {
      const auto results = run_verification(cfg.level, cfg.seed, hooks);
      write_verify_report(table, results);
      return all_passed(results) ? kOk : kVerifyFailed;
    }
    }
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error &e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const InternalConsistencyError &e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument &e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

} // namespace twem::cli
