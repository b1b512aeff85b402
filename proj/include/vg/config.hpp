#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vg/experiments.hpp"
#include "vg/kernel.hpp"
#include "vg/rigidity.hpp"

namespace vg {

/// Invalid, missing or unknown configuration entries.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// --help on the command line; carries the help text.
class HelpRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string key;    // "casimir.p"
  std::string flag;   // "--p"
  std::string value;  // default; empty when the key has none
  std::string help;
};

/// Every accepted key in a fixed order.
const std::vector<ConfigKey>& config_keys();

const std::vector<std::string>& command_names();

struct RunConfig {
  std::string command;
  ModelParams model;
  std::string casimir_kind = "polytrope";  // polytrope | table
  double p = 2.0;
  std::optional<std::filesystem::path> casimir_table;
  std::size_t check_samples = 200;

  double r_max_ratio = 4.0;   // r_max / r_support
  std::size_t n = 4096;
  double u_max_ratio = 1.2;   // u_max / u_bound
  std::size_t m = 257;

  double m1 = 1.0, mj = 1.0, tol = 1e-8;

  std::optional<std::size_t> n_particles;  // command default when absent
  std::optional<double> dt;                // fraction of the dynamical time
  double t_end = 10.0;                     // dynamical times
  std::uint64_t seed = 1;
  std::vector<double> delta{0.01, 0.02, 0.04};
  std::size_t bins = 16;
  PerturbationKind perturbation = PerturbationKind::amplitude;
  double sigma = 2.5;

  std::filesystem::path directory = "out";
  bool write_csv = true;
  bool write_phase = false;

  std::optional<std::filesystem::path> input;

  std::string scan_param = "mu";  // mu | psi0 | c
  double scan_from = 0.0, scan_to = 0.0;
  std::size_t scan_steps = 16;
  double scan_psi0 = -1.0, scan_mu = -1.0;

  std::size_t kj_budget = 120;
  std::vector<TrialFamily> kj_families{TrialFamily::ellipsoid, TrialFamily::separable, TrialFamily::box,
                                       TrialFamily::gaussian};
  double equimeasure_lambda = 2.0;
  std::size_t equimeasure_levels = 32;
  double froots_a = 1.0, froots_mu0 = -1.0;
  double bootstrap_q0 = 1.2;

  /// Effective text of every key, defaults included.
  std::map<std::string, std::string> resolved;
};

/// key=value lines; '#' starts a comment, blank lines are skipped.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Flags override file values, file values override defaults. Throws
/// ConfigError for unknown keys, malformed numbers, violated preconditions
/// and keys a command requires but does not get.
RunConfig parse_config(const std::string& command, const std::map<std::string, std::string>& flags,
                       const std::optional<std::filesystem::path>& file = std::nullopt);

/// Command line front end: `vgs <command> [--config FILE] [--key value ...]`.
RunConfig parse_config(int argc, const char* const* argv);

/// Polytrope, or the table read from casimir.table with p = p1 of the table.
CasimirSpec build_casimir(const RunConfig& config);

}  // namespace vg
