#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "degen/common.hpp"

// Exit codes: 0 ok, 1 unexpected, 2 config file / CLI problems,
// 3 validation, 4 solver failure, 5 oracle mismatch.
int main(int argc, char** argv) {
  CLI::App app{"degenerate-elliptic workbench"};
  std::string config_path;
  std::string out_dir = ".";
  unsigned long seed = 0;
  bool acceptance = false;
  app.add_option("--config", config_path, "run configuration (json)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "rng seed for sampling cases");
  app.add_flag("--acceptance", acceptance, "enable strict in-run assertions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    degen::cli::RunConfig cfg = degen::cli::parse_config(config_path);
    degen::cli::run_case(cfg, out_dir, seed, acceptance);
  } catch (const degen::cli::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const degen::cli::OracleMismatch& e) {
    std::fprintf(stderr, "oracle mismatch: %s\n", e.what());
    return 5;
  } catch (const degen::solver_error& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid setup: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
