#include <cstdlib>
#include <iostream>
#include <omp.h>

#include "CLI11.hpp"
#include "ergode/errors.hpp"
#include "ergode/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ergode: entropy and genericity experiments"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "run one JSON experiment config");
  std::string config;
  std::string out;
  bool diagnostics = false;
  int threads = 0;
  run->add_option("config", config, "config file")->required();
  run->add_option("--out", out, "output directory (overrides the config's output)");
  run->add_flag("--diagnostics", diagnostics, "also write diagnostics.json");
  run->add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ergode::kExitValidation;
  }

  ergode::RunOptions opts;
  if (!out.empty()) opts.out_dir = out;
  opts.diagnostics = diagnostics;
  if (threads > 0) omp_set_num_threads(threads);
  if (const char* s = std::getenv("ERGODE_SEED")) {
    try {
      opts.seed_override = ergode::parse_seed(s);
    } catch (const ergode::ValidationError& e) {
      std::cerr << "error: ERGODE_SEED: " << e.what() << '\n';
      return ergode::kExitValidation;
    }
  }
  return ergode::run(config, opts, std::cerr);
}
