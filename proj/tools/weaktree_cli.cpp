// weaktree_cli: batch front end. Reads a flat key=value config plus --set
// overrides, runs one command and writes <out>/<command>.csv (and .svg with --plot).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "weaktree/asymptotics.hpp"
#include "weaktree/birman_schwinger.hpp"
#include "weaktree/errors.hpp"
#include "weaktree/fb_checks.hpp"
#include "weaktree/halfline_solver.hpp"
#include "weaktree/tree_solver.hpp"

namespace fs = std::filesystem;
using namespace weaktree;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kSolver = 2, kIo = 3 };

struct CliError : std::runtime_error {
  CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
  int code;
};

const char* kind_of(int code) {
  switch (code) {
    case kValidation: return "validation";
    case kSolver: return "convergence";
    case kIo: return "io";
    default: return "internal";
  }
}

const std::vector<std::string> kCommands{"sweep", "fit", "bs-trace", "bs-correspond", "fb-check", "tree-bracket", "bounds"};

class RunConfig {
 public:
  RunConfig()
      : values_{{"command", ""},         {"d", "1.6"},          {"gamma", "1.2"},
                {"c", "1.0"},            {"scale", "1.0"},      {"b", "2"},
                {"alpha_min", "1e-3"},   {"alpha_max", "1e-1"}, {"alpha_count", "10"},
                {"alphas", ""},          {"e_min", "1e-4"},     {"e_max", "1e-1"},
                {"e_count", "4"},        {"energies", ""},      {"mesh_ratio", "1.02"},
                {"first_cell", "0.01"},  {"truncation_factor", "12"}, {"truncation_cap", "inf"},
                {"rank", "200"},         {"k", "0"},            {"beta", "0"},
                {"fb_dimensions", "1.3,1.6,2.0"}, {"law", "auto"}} {}

  void set(const std::string& key, const std::string& value, const std::string& where) {
    auto it = values_.find(key);
    if (it == values_.end()) throw CliError(kValidation, "unknown config key '" + key + "'" + where);
    it->second = value;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError(kIo, "cannot read config file '" + path + "'");
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
      line = line.substr(0, line.find('#'));
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw CliError(kValidation, "expected key=value at " + path + ":" + std::to_string(n));
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), " at " + path + ":" + std::to_string(n));
    }
  }

  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CliError(kValidation, "--set expects key=value, got '" + kv + "'");
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)), " in --set");
  }

  const std::string& text(const std::string& key) const { return values_.at(key); }

  double real(const std::string& key) const {
    const std::string& s = values_.at(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw CliError(kValidation, "config key '" + key + "' is not a number: '" + s + "'");
    }
  }

  int integer(const std::string& key) const {
    const double v = real(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw CliError(kValidation, "config key '" + key + "' must be an integer");
    return static_cast<int>(v);
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(values_.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw CliError(kValidation, "config key '" + key + "' has a non-numeric entry '" + item + "'");
      }
    }
    return out;
  }

  /// FNV-1a over the sorted key=value lines.
  std::string hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& [k, v] : values_) {
      for (char ch : k + "=" + v + "\n") {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
      }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  }

  std::map<std::string, std::string> values_;
};

void check(bool ok, const std::string& message) {
  if (!ok) throw CliError(kValidation, message);
}

// ---- parameter extraction with validation up front ----

struct Params {
  double d, gamma, c, scale;
  int b, rank;
  double k, beta;
  std::vector<double> alphas, energies, fb_dims;
  DiscretizationOptions disc;
  std::string law;
};

bool uses_potential(const std::string& cmd) { return cmd != "fb-check"; }

Params read_params(const RunConfig& cfg, const std::string& cmd) {
  Params p;
  p.d = cfg.real("d");
  p.gamma = cfg.real("gamma");
  p.c = cfg.real("c");
  p.scale = cfg.real("scale");
  p.b = cfg.integer("b");
  p.rank = cfg.integer("rank");
  p.k = cfg.real("k");
  p.beta = cfg.real("beta");
  p.law = cfg.text("law");

  if (uses_potential(cmd)) {
    check(p.gamma != 2.0, "gamma = 2 is the excluded case (γ ≠ 2)");
    check(p.d > 1.0 && p.d <= 2.0, "d must lie in (1, 2]");
    check(p.gamma > 1.0 && p.gamma <= p.d, "need 1 < gamma <= d");
    check(p.c > 0.0 && std::isfinite(p.c), "potential constant c must be positive");
    check(p.scale > 0.0, "scale must be positive");
  }
  check(p.law == "auto" || p.law == "power" || p.law == "log", "law must be auto, power or log");

  p.alphas = cfg.list("alphas");
  if (p.alphas.empty()) {
    const double lo = cfg.real("alpha_min"), hi = cfg.real("alpha_max");
    const int n = cfg.integer("alpha_count");
    check(lo > 0.0 && hi > lo && n >= 1, "alpha grid needs 0 < alpha_min < alpha_max and alpha_count >= 1");
    p.alphas = n == 1 ? std::vector<double>{hi} : alpha_grid(lo, hi, static_cast<std::size_t>(n));
  } else {
    std::sort(p.alphas.begin(), p.alphas.end(), std::greater<>());
    check(std::adjacent_find(p.alphas.begin(), p.alphas.end()) == p.alphas.end(), "alphas must be distinct");
  }
  for (double a : p.alphas) check(a > 0.0 && std::isfinite(a), "alphas must be positive");

  p.energies = cfg.list("energies");
  if (p.energies.empty()) {
    const double lo = cfg.real("e_min"), hi = cfg.real("e_max");
    const int n = cfg.integer("e_count");
    check(lo > 0.0 && hi > lo && n >= 2, "E grid needs 0 < e_min < e_max and e_count >= 2");
    p.energies = quad::geomspace(lo, hi, static_cast<std::size_t>(n));
  }
  for (double e : p.energies) check(e > 0.0 && std::isfinite(e), "energies must be positive");

  p.fb_dims = cfg.list("fb_dimensions");
  for (double d : p.fb_dims) check(d > 1.0 && d <= 2.0, "fb_dimensions entries must lie in (1, 2]");

  p.disc.mesh.ratio = cfg.real("mesh_ratio");
  p.disc.mesh.first_cell = cfg.real("first_cell");
  p.disc.truncation_factor = cfg.real("truncation_factor");
  p.disc.truncation_cap = cfg.real("truncation_cap");
  check(p.disc.mesh.ratio > 1.0 && p.disc.mesh.ratio < 2.0, "mesh_ratio must lie in (1, 2)");
  check(p.disc.mesh.first_cell > 0.0, "first_cell must be positive");
  check(p.disc.truncation_factor > 0.0, "truncation_factor must be positive");
  check(p.disc.truncation_cap > 0.0, "truncation_cap must be positive");

  if (cmd == "fit") check(p.alphas.size() >= 5, "fit needs at least 5 couplings");
  if (cmd == "fit" && (p.law == "log" || (p.law == "auto" && p.gamma == p.d))) {
    check(p.alphas.front() < std::exp(-1.0), "log-corrected fit needs all alphas < 1/e");
  }
  if (cmd == "bs-correspond") check(p.rank >= 200, "rank must be at least 200");
  if (cmd == "tree-bracket") check(p.b >= 2, "branching b must be an integer >= 2");
  if (cmd == "bounds" && p.gamma == p.d) {
    check(p.d < 2.0, "hat bound needs gamma = d < 2");
    check(p.alphas.front() < 1.0, "hat bound needs alpha < 1");
  }
  if (cmd == "bounds" && p.gamma < p.d) check(p.k >= 0.0, "k must be non-negative (0 selects the default)");
  return p;
}

PotentialSpec potential_of(const Params& p) { return PotentialSpec::exact_power(p.c, p.gamma); }

// ---- output ----

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;  // trailing comment lines
  bool all_converged = true;
};

std::string num(double v) { return format_real(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kIo, "cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw CliError(kIo, "write failed for '" + path.string() + "'");
}

std::string render_csv(const Table& t, const std::string& command, const RunConfig& cfg) {
  std::ostringstream os;
  os << "# weaktree " << WEAKTREE_VERSION << " command=" << command << " config_hash=" << cfg.hash() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  for (const auto& note : t.notes) os << "# " << note << '\n';
  return os.str();
}

/// Log-log scatter of (alpha, |e1|) with an optional fitted line log|e1| = a + s log(alpha).
std::string render_svg(const SweepReport& r, bool with_line, double slope, double intercept) {
  std::vector<std::pair<double, double>> pts;
  for (const SweepEntry& e : r.entries) {
    if (e.converged && e.e1 < 0.0) pts.emplace_back(std::log10(e.alpha), std::log10(-e.e1));
  }
  const double w = 640, h = 480, m = 50;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  if (pts.empty()) {
    os << "</svg>\n";
    return os.str();
  }
  double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
  for (auto [x, y] : pts) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const auto sx = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  const auto sy = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  char buf[160];
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (with_line) {
    const double ln10 = std::log(10.0);
    const auto fy = [&](double lx) { return (intercept + slope * lx * ln10) / ln10; };
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"red\"/>\n", sx(x0),
                  sy(fy(x0)), sx(x1), sy(fy(x1)));
    os << buf;
  }
  for (auto [x, y] : pts) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\"/>\n", sx(x), sy(y));
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.0f\" y=\"%.0f\">log10 alpha</text>\n", w / 2 - 40, h - 15);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"5\" y=\"%.0f\">log10 |e1|</text>\n", m - 15);
  os << buf;
  os << "</svg>\n";
  return os.str();
}

// ---- commands ----

HalfLineFamily family_of(const Params& p) { return {p.d, potential_of(p), p.scale, p.disc, {}}; }

Table sweep_table(const SweepReport& r) {
  Table t;
  t.columns = {"alpha", "e1", "truncation", "converged"};
  for (const SweepEntry& e : r.entries) {
    t.rows.push_back({num(e.alpha), num(e.e1), num(e.truncation), flag(e.converged)});
    t.all_converged = t.all_converged && e.converged;
  }
  return t;
}

Table run_sweep(const Params& p, SweepReport& report) {
  report = sweep_ground_state(family_of(p), p.alphas);
  return sweep_table(report);
}

Table run_fit(const Params& p, SweepReport& report) {
  report = sweep_ground_state(family_of(p), p.alphas);
  Table t = sweep_table(report);
  const bool log_law = p.law == "log" || (p.law == "auto" && p.gamma == p.d);
  try {
    const PowerFit power = fit_power_law(report);
    t.notes.push_back("fit law=power exponent=" + num(power.exponent) + " intercept=" + num(power.intercept) +
                      " residual=" + num(power.residual) + " expected_exponent=" + num(2.0 / (2.0 - p.gamma)));
    if (log_law) {
      const LogCorrectedFit lf = fit_log_corrected(report, p.gamma);
      t.notes.push_back("fit law=log-corrected ratio_min=" + num(lf.ratio_min) + " ratio_max=" + num(lf.ratio_max) +
                        " spread=" + num(lf.ratio_max / lf.ratio_min) + " exponent=" + num(lf.exponent) +
                        " residual=" + num(lf.residual) + " power_over_log_residual=" + num(power.residual / lf.residual));
      attach_fit(report, Law::LogCorrected, p.gamma);
    } else {
      attach_fit(report, Law::Power);
    }
  } catch (const InsufficientDataError& e) {
    throw CliError(kSolver, e.what());
  }
  return t;
}

Table run_bs_trace(const Params& p) {
  Table t;
  t.columns = {"E", "trace", "error", "log_ratio", "converged"};
  std::vector<double> lx, ly;
  for (double e : p.energies) {
    const TraceResult tr = trace_qe({e, p.d, potential_of(p), {}});
    const double ratio = tr.value * std::pow(e, (2.0 - p.gamma) / 2.0) / (1.0 + std::abs(std::log(e)));
    t.rows.push_back({num(e), num(tr.value), num(tr.error), num(ratio), flag(tr.converged)});
    t.all_converged = t.all_converged && tr.converged;
    if (tr.slow_convergence) t.notes.push_back("warning slow_convergence E=" + num(e));
    lx.push_back(std::log(e));
    ly.push_back(std::log(tr.value));
  }
  const LineFit f = least_squares(lx, ly);
  t.notes.push_back("slope=" + num(f.slope) + " expected=" + num((p.gamma - 2.0) / 2.0));
  return t;
}

Table run_bs_correspond(const Params& p) {
  Table t;
  t.columns = {"alpha", "E", "mu", "mu_alpha", "converged"};
  const PotentialSpec v = potential_of(p);
  for (double a : p.alphas) {
    const SpectralResult g = ground_state_weighted(make_halfline_problem(p.d, a, v, p.scale, p.disc));
    if (!(g.e1 < 0.0)) {
      t.rows.push_back({num(a), num(std::numeric_limits<double>::quiet_NaN()), num(std::numeric_limits<double>::quiet_NaN()),
                        num(std::numeric_limits<double>::quiet_NaN()), "0"});
      t.all_converged = false;
      continue;
    }
    BSKernelSpec spec{-g.e1, p.d, PotentialSpec::exact_power(p.c * p.scale, p.gamma), {}};
    const TopEigenvalue mu = top_eigenvalue_qe(spec, p.rank);
    const bool ok = g.converged && mu.converged;
    t.rows.push_back({num(a), num(-g.e1), num(mu.value), num(mu.value * a), flag(ok)});
    t.all_converged = t.all_converged && ok;
  }
  return t;
}

Table run_fb_check(const Params& p) {
  Table t;
  t.columns = {"d", "isometry_residual", "diagonalization_residual", "roundtrip_error", "converged"};
  for (double d : p.fb_dims) {
    const FbCheckReport r = fb_self_check(d);
    t.rows.push_back({num(d), num(r.isometry_residual), num(r.diagonalization_residual), num(r.roundtrip_error), flag(r.converged)});
    t.all_converged = t.all_converged && r.converged;
  }
  return t;
}

Table run_tree_bracket(const Params& p) {
  Table t;
  t.columns = {"alpha", "e1_minus", "e1_tree", "e1_reduced", "e1_plus", "ordered", "converged"};
  const PotentialSpec v = potential_of(p);
  for (double a : p.alphas) {
    TreeSolveOptions opts;
    opts.discretization = p.disc;
    const TreeBracket br = tree_bracket(p.d, p.b, a, v, opts);
    t.rows.push_back({num(a), num(br.e_minus), num(br.e_tree), num(br.e_reduced), num(br.e_plus), flag(br.ordered(1e-5)),
                      flag(br.converged)});
    t.all_converged = t.all_converged && br.converged;
  }
  return t;
}

Table run_bounds(const Params& p) {
  Table t;
  t.columns = {"alpha", "trial", "parameter", "quotient", "bound", "e1", "holds"};
  const PotentialSpec v = potential_of(p);
  for (double a : p.alphas) {
    const bool hat = p.gamma == p.d;
    const VariationalBound vb = hat ? variational_bound_hat(p.d, p.c, a, p.beta) : variational_bound_exp(p.d, p.gamma, p.c, a, p.k);
    const SpectralResult g = ground_state_weighted(make_halfline_problem(p.d, a, v, 1.0, p.disc));
    const bool holds = vb.rayleigh_quotient < 0.0 && vb.rayleigh_quotient <= vb.bound && g.e1 <= vb.rayleigh_quotient;
    t.rows.push_back({num(a), hat ? "hat" : "exp", num(vb.parameter), num(vb.rayleigh_quotient), num(vb.bound), num(g.e1), flag(holds)});
    t.all_converged = t.all_converged && g.converged;
  }
  return t;
}

int run(const std::string& command, const RunConfig& cfg, const fs::path& out_dir, bool plot) {
  const Params p = read_params(cfg, command);
  SweepReport report;
  Table table;
  if (command == "sweep") table = run_sweep(p, report);
  else if (command == "fit") table = run_fit(p, report);
  else if (command == "bs-trace") table = run_bs_trace(p);
  else if (command == "bs-correspond") table = run_bs_correspond(p);
  else if (command == "fb-check") table = run_fb_check(p);
  else if (command == "tree-bracket") table = run_tree_bracket(p);
  else table = run_bounds(p);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw CliError(kIo, "cannot create output directory '" + out_dir.string() + "': " + ec.message());
  write_text(out_dir / (command + ".csv"), render_csv(table, command, cfg));
  if (plot && (command == "sweep" || command == "fit")) {
    const bool line = command == "fit" && report.law == Law::Power;
    write_text(out_dir / (command + ".svg"), render_svg(report, line, report.fit_exponent, report.fit_intercept));
  }
  if (!table.all_converged) throw CliError(kSolver, "some solves did not converge (see converged column)");
  return kOk;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

int report_error(int code, const std::string& message) {
  std::cerr << "weaktree_cli: error code=" << code << " kind=" << kind_of(code) << " message=" << quoted(message) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-coupling spectral toolkit for radial trees"};
  app.set_version_flag("--version", std::string(WEAKTREE_VERSION));
  std::string command, config_path, out_dir = ".";
  std::vector<std::string> overrides;
  bool plot = false;
  app.add_option("command", command, "sweep | fit | bs-trace | bs-correspond | fb-check | tree-bracket | bounds");
  app.add_option("--config", config_path, "flat key=value configuration file");
  app.add_option("--set", overrides, "override one key (repeatable)")->take_all();
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--plot", plot, "also write an SVG plot (sweep, fit)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error(kValidation, e.what());
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const std::string& kv : overrides) cfg.apply_override(kv);
    if (!command.empty()) cfg.set("command", command, "");
    command = cfg.text("command");
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
      throw CliError(kValidation, command.empty() ? "no command given" : "unknown command '" + command + "'");
    }
    return run(command, cfg, out_dir, plot);
  } catch (const CliError& e) {
    return report_error(e.code, e.what());
  } catch (const PreconditionError& e) {
    return report_error(kValidation, e.what());
  } catch (const DomainError& e) {
    return report_error(kValidation, e.what());
  } catch (const ConvergenceError& e) {
    return report_error(kSolver, e.what());
  } catch (const ResourceError& e) {
    return report_error(kSolver, e.what());
  } catch (const InsufficientDataError& e) {
    return report_error(kSolver, e.what());
  } catch (const std::exception& e) {
    return report_error(kSolver, e.what());
  }
}
