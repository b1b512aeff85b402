#include "vg/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace vg {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"model.c", "--c", "inf", "light speed; inf selects the classical model"},
      {"casimir.kind", "--casimir", "polytrope", "polytrope or table"},
      {"casimir.p", "--p", "2", "polytrope exponent"},
      {"casimir.table", "--table", "", "CSV with columns t,j_prime"},
      {"casimir.samples", "--samples", "200", "sample count of check-casimir"},
      {"grids.r_max", "--r-max", "4", "radial extent in support radii"},
      {"grids.n", "--n", "4096", "radial nodes"},
      {"grids.u_max", "--u-max", "1.2", "speed extent in units of the speed bound"},
      {"grids.m", "--m", "257", "speed nodes"},
      {"targets.m1", "--m1", "1", "prescribed mass"},
      {"targets.mj", "--mj", "1", "prescribed Casimir mass"},
      {"targets.tol", "--tol", "1e-8", "target tolerance"},
      {"dynamics.n_particles", "--n-particles", "auto", "particle count"},
      {"dynamics.dt", "--dt", "auto", "time step in dynamical times"},
      {"dynamics.t_end", "--t-end", "10", "run length in dynamical times"},
      {"dynamics.seed", "--seed", "1", "sampling seed"},
      {"dynamics.delta", "--delta", "0.01,0.02,0.04", "perturbation amplitudes"},
      {"dynamics.bins", "--bins", "16", "equal-mass bins of the density distance"},
      {"dynamics.perturbation", "--perturbation", "amplitude", "amplitude, dilation or velocity_kick"},
      {"blowup.sigma", "--sigma", "2.5", "concentration factor of the blow-up datum"},
      {"output.directory", "--out", "out", "output directory"},
      {"output.formats", "--formats", "json,csv", "json, csv, phase"},
      {"verify.input", "--input", "", "solve output directory"},
      {"scan.param", "--param", "mu", "mu, psi0 or c"},
      {"scan.from", "--from", "", "first value"},
      {"scan.to", "--to", "", "last value"},
      {"scan.steps", "--steps", "16", "row count"},
      {"scan.psi0", "--psi0", "-1", "psi0 held fixed in a mu scan"},
      {"scan.mu", "--mu", "-1", "mu held fixed in a psi0 scan"},
      {"kj.budget", "--budget", "120", "quotient evaluations per family"},
      {"kj.families", "--families", "ellipsoid,separable,box,gaussian", "trial families"},
      {"equimeasure.lambda", "--lambda", "2", "dilation factor"},
      {"equimeasure.levels", "--levels", "32", "level count"},
      {"froots.a", "--a", "1", "reduced depth a"},
      {"froots.mu0", "--mu0", "-1", "multiplier mu0"},
      {"bootstrap.q0", "--q0", "1.2", "starting exponent"},
  };
  return keys;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check-casimir", "solve",   "verify",   "kj",
                                                 "scan",          "equimeasure", "froots", "bootstrap",
                                                 "evolve",        "stability", "blowup"};
  return names;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& values) : values_(values) {}

  const std::string& text(const std::string& key) const { return values_.at(key); }
  bool present(const std::string& key) const { return !text(key).empty(); }

  double real(const std::string& key) const { return parse_real(key, text(key)); }

  std::size_t count(const std::string& key) const {
    const std::string& s = text(key);
    unsigned long long v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) fail(key, "expected a non-negative integer", s);
    return static_cast<std::size_t>(v);
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(text(key))) out.push_back(parse_real(key, item));
    if (out.empty()) fail(key, "expected a comma-separated list of numbers", text(key));
    return out;
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& what, const std::string& got) {
    throw ConfigError(key + ": " + what + ", got '" + got + "'");
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) fail(key, "expected a number", s);
    return v;
  }

  const std::map<std::string, std::string>& values_;
};

void require(bool ok, const std::string& key, double value, const std::string& condition) {
  if (ok) return;
  std::ostringstream os;
  os << key << " = " << value << " violates " << condition;
  throw ConfigError(os.str());
}

bool known_key(const std::string& key) {
  const auto& keys = config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.key == key; });
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!known_key(key)) throw ConfigError(path.string() + ":" + std::to_string(number) + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig parse_config(const std::string& command, const std::map<std::string, std::string>& flags,
                       const std::optional<std::filesystem::path>& file) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw ConfigError("unknown command '" + command + "'");

  std::map<std::string, std::string> values;
  for (const auto& k : config_keys()) values[k.key] = k.value;
  if (file)
    for (const auto& [k, v] : read_config_file(*file)) values[k] = v;
  for (const auto& [k, v] : flags) {
    if (!known_key(k)) throw ConfigError("unknown key '" + k + "'");
    values[k] = v;
  }

  RunConfig cfg;
  cfg.command = command;
  cfg.resolved = values;
  const Reader in(values);

  if (in.text("model.c") == "inf") {
    cfg.model = ModelParams::classical();
  } else {
    const double c = in.real("model.c");
    require(c > 0.0, "model.c", c, "c > 0 (use 'inf' for the classical model)");
    cfg.model = ModelParams::relativistic(c);
  }

  cfg.casimir_kind = in.text("casimir.kind");
  if (cfg.casimir_kind != "polytrope" && cfg.casimir_kind != "table")
    Reader::fail("casimir.kind", "expected polytrope or table", cfg.casimir_kind);
  cfg.p = in.real("casimir.p");
  if (cfg.casimir_kind == "polytrope") require(cfg.p > 1.5, "casimir.p", cfg.p, "p > 3/2");
  if (cfg.casimir_kind == "table") {
    if (!in.present("casimir.table")) throw ConfigError("casimir.table is required when casimir.kind = table");
    cfg.casimir_table = in.text("casimir.table");
  }
  cfg.check_samples = in.count("casimir.samples");
  require(cfg.check_samples >= 2, "casimir.samples", static_cast<double>(cfg.check_samples), "samples >= 2");

  cfg.r_max_ratio = in.real("grids.r_max");
  require(cfg.r_max_ratio >= 1.0, "grids.r_max", cfg.r_max_ratio, "r_max >= 1 support radius");
  cfg.n = in.count("grids.n");
  require(cfg.n >= 64, "grids.n", static_cast<double>(cfg.n), "n >= 64");
  cfg.u_max_ratio = in.real("grids.u_max");
  require(cfg.u_max_ratio >= 1.0, "grids.u_max", cfg.u_max_ratio, "u_max >= 1 speed bound");
  cfg.m = in.count("grids.m");
  require(cfg.m >= 5, "grids.m", static_cast<double>(cfg.m), "m >= 5");

  cfg.m1 = in.real("targets.m1");
  require(cfg.m1 > 0.0, "targets.m1", cfg.m1, "m1 > 0");
  cfg.mj = in.real("targets.mj");
  require(cfg.mj > 0.0, "targets.mj", cfg.mj, "mj > 0");
  cfg.tol = in.real("targets.tol");
  require(cfg.tol > 0.0, "targets.tol", cfg.tol, "tol > 0");

  if (in.text("dynamics.n_particles") != "auto") {
    cfg.n_particles = in.count("dynamics.n_particles");
    require(*cfg.n_particles >= 1000, "dynamics.n_particles", static_cast<double>(*cfg.n_particles),
            "n_particles >= 1000");
  }
  if (in.text("dynamics.dt") != "auto") {
    cfg.dt = in.real("dynamics.dt");
    require(*cfg.dt > 0.0 && *cfg.dt <= 0.5, "dynamics.dt", *cfg.dt, "0 < dt <= 0.5 dynamical times");
  }
  cfg.t_end = in.real("dynamics.t_end");
  require(cfg.t_end > 0.0, "dynamics.t_end", cfg.t_end, "t_end > 0");
  cfg.seed = in.count("dynamics.seed");
  cfg.delta = in.reals("dynamics.delta");
  for (double d : cfg.delta) require(d > 0.0 && d < 1.0, "dynamics.delta", d, "0 < delta < 1");
  cfg.bins = in.count("dynamics.bins");
  require(cfg.bins >= 2, "dynamics.bins", static_cast<double>(cfg.bins), "bins >= 2");
  try {
    cfg.perturbation = perturbation_from_string(in.text("dynamics.perturbation"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("dynamics.perturbation: ") + e.what());
  }
  cfg.sigma = in.real("blowup.sigma");
  require(cfg.sigma > 0.0, "blowup.sigma", cfg.sigma, "sigma > 0");

  if (!in.present("output.directory")) throw ConfigError("output.directory must not be empty");
  cfg.directory = in.text("output.directory");
  cfg.write_csv = false;
  for (const auto& f : split_list(in.text("output.formats"))) {
    if (f == "csv") cfg.write_csv = true;
    else if (f == "phase") cfg.write_phase = true;
    else if (f != "json") Reader::fail("output.formats", "expected json, csv or phase", f);
  }

  if (in.present("verify.input")) cfg.input = in.text("verify.input");
  if (command == "verify" && !cfg.input) throw ConfigError("verify requires verify.input (--input)");

  cfg.scan_param = in.text("scan.param");
  if (cfg.scan_param != "mu" && cfg.scan_param != "psi0" && cfg.scan_param != "c")
    Reader::fail("scan.param", "expected mu, psi0 or c", cfg.scan_param);
  cfg.scan_steps = in.count("scan.steps");
  require(cfg.scan_steps >= 1, "scan.steps", static_cast<double>(cfg.scan_steps), "steps >= 1");
  cfg.scan_psi0 = in.real("scan.psi0");
  require(cfg.scan_psi0 < 0.0, "scan.psi0", cfg.scan_psi0, "psi0 < 0");
  cfg.scan_mu = in.real("scan.mu");
  require(cfg.scan_mu < 0.0, "scan.mu", cfg.scan_mu, "mu < 0");
  if (command == "scan") {
    for (const char* k : {"scan.from", "scan.to"})
      if (!in.present(k)) throw ConfigError(std::string("scan requires ") + k);
    cfg.scan_from = in.real("scan.from");
    cfg.scan_to = in.real("scan.to");
    const std::string& key = cfg.scan_param;
    for (double v : {cfg.scan_from, cfg.scan_to}) {
      if (key == "c") require(v > 0.0, "scan.from/scan.to", v, "c > 0");
      else require(v < 0.0, "scan.from/scan.to", v, key + " < 0");
    }
  }

  cfg.kj_budget = in.count("kj.budget");
  require(cfg.kj_budget >= 8, "kj.budget", static_cast<double>(cfg.kj_budget), "budget >= 8");
  cfg.kj_families.clear();
  for (const auto& name : split_list(in.text("kj.families"))) {
    try {
      cfg.kj_families.push_back(trial_family_from_string(name));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("kj.families: ") + e.what());
    }
  }
  if (cfg.kj_families.empty()) throw ConfigError("kj.families must name at least one family");

  cfg.equimeasure_lambda = in.real("equimeasure.lambda");
  require(cfg.equimeasure_lambda > 0.0, "equimeasure.lambda", cfg.equimeasure_lambda, "lambda > 0");
  cfg.equimeasure_levels = in.count("equimeasure.levels");
  require(cfg.equimeasure_levels >= 2, "equimeasure.levels", static_cast<double>(cfg.equimeasure_levels),
          "levels >= 2");
  cfg.froots_a = in.real("froots.a");
  require(cfg.froots_a > 0.0, "froots.a", cfg.froots_a, "a > 0");
  cfg.froots_mu0 = in.real("froots.mu0");
  require(cfg.froots_mu0 < 0.0, "froots.mu0", cfg.froots_mu0, "mu0 < 0");
  cfg.bootstrap_q0 = in.real("bootstrap.q0");
  require(cfg.bootstrap_q0 > 1.0 && cfg.bootstrap_q0 < 1.5, "bootstrap.q0", cfg.bootstrap_q0, "1 < q0 < 3/2");
  return cfg;
}

RunConfig parse_config(int argc, const char* const* argv) {
  CLI::App app{"Ground states of the gravitational Vlasov-Poisson system", "vgs"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::string file;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", file, "key = value file");
    for (const auto& k : config_keys()) {
      const std::string key = k.key;
      sub->add_option_function<std::string>(
             k.flag, [&flags, key](const std::string& v) { flags[key] = v; }, k.help + " [" + k.key + "]")
          ->allow_extra_args(false);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequest(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return parse_config(command, flags, file.empty() ? std::nullopt : std::optional<std::filesystem::path>(file));
}

CasimirSpec build_casimir(const RunConfig& cfg) {
  if (cfg.casimir_kind == "polytrope") return make_polytrope(cfg.p);
  std::ifstream in(*cfg.casimir_table);
  if (!in) throw ConfigError("cannot read casimir.table " + cfg.casimir_table->string());
  std::string line;
  std::getline(in, line);
  if (trim(line) != "t,j_prime") throw ConfigError(cfg.casimir_table->string() + ": expected header t,j_prime");
  std::vector<double> t, jp;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto items = split_list(line);
    if (items.size() != 2) throw ConfigError(cfg.casimir_table->string() + ": expected two columns");
    std::map<std::string, std::string> row{{"t", items[0]}, {"j_prime", items[1]}};
    const Reader r(row);
    t.push_back(r.real("t"));
    jp.push_back(r.real("j_prime"));
  }
  try {
    return make_tabulated_casimir(t, jp);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace vg
