#pragma once

#include <stdexcept>
#include <string>

#include "degen/grid.hpp"
#include "degen/operator.hpp"
#include "json.hpp"

namespace degen::cli {

// Config file problems: malformed JSON, unknown keys, wrong types, unknown
// enum values. Mapped to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A check the run performs against an independent oracle came out wrong.
// Mapped to exit code 5.
struct OracleMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fully-resolved run configuration; every field holds its default unless
// the file set it. echo is the resolved document that goes into the report.
struct RunConfig {
  std::string case_kind;

  HestonParams heston{0.5, -0.3, 2.0, 0.3, 0.05, 0.0};
  double gauge_sigma = 0.0;

  DomainSpec dom = DomainSpec::slab(-2.0, 2.0, 1.0);
  int n1 = 33, n2 = 17;
  double stretch = 1.0;

  std::string f_kind = "zero";  // zero | constant | smooth
  double f_value = 0.0;
  std::string g_kind = "zero";  // zero | constant | payoff
  double g_value = 0.0;
  std::string psi_kind = "none";  // none | constant | payoff
  double psi_value = 0.0;
  std::string payoff_kind = "put";  // put | call
  double strike = 1.0;

  std::string method = "direct";  // direct | sor
  double omega = 1.5;
  double tol = 1e-10;
  int max_iter = 50000;

  int radius = 6, overlap = 2;
  double sweep_tol = 1e-8;
  int max_sweeps = 500;
  std::string lift_mode = "two-tier";  // two-tier | obstacle-everywhere
  std::string direction = "up";        // up | down
  bool coloring = false;
  double gap_stop = 0.0;

  std::string inject_fault = "none";  // none | flip-degenerate-drift

  int samples = 1000;

  nlohmann::ordered_json echo;
};

// Parses and validates; ConfigError for file/key/type/enum problems,
// std::invalid_argument listing every semantic violation at once.
RunConfig parse_config(const std::string& path);

// Executes the configured case, writing artifacts under out_dir. Throws:
// std::invalid_argument (validation, exit 3), solver_error (exit 4),
// OracleMismatch (exit 5).
void run_case(const RunConfig& cfg, const std::string& out_dir, unsigned long seed,
              bool acceptance);

}  // namespace degen::cli
