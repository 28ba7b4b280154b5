// Command-line driver: mpsdp --config run.json [--threads k] [--cap-net-size M] [--verbose]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mpsdp/errors.hpp"
#include "mpsdp/io.hpp"
#include "mpsdp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ground states of 1D nearest-neighbour Hamiltonians by dynamic programming over MPS nets"};
  std::string config_path;
  unsigned threads = 0;
  double cap = 0.0;
  bool verbose = false;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--threads", threads, "Worker threads (default: all cores)");
  app.add_option("--cap-net-size", cap, "Override solver.cap, the candidate limit per generated net");
  app.add_flag("--verbose", verbose, "Progress messages on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    mpsdp::RunConfig cfg = mpsdp::parse_config(mpsdp::read_text_file(config_path));
    if (app.count("--threads") > 0) cfg.threads = threads;
    if (app.count("--cap-net-size") > 0) cfg.solver.cap = cap;
    cfg.verbose = verbose;
    mpsdp::validate_config(cfg);

    const mpsdp::RunOutput out = mpsdp::execute(cfg, &std::cerr);
    const std::string text = out.result.dump(2) + "\n";
    if (cfg.output.path.empty()) {
      std::cout << text;
    } else {
      mpsdp::write_text_file(cfg.output.path, text);
      if (verbose) std::cerr << "[mpsdp] wrote " << cfg.output.path << '\n';
    }
    if (out.mps) {
      mpsdp::write_text_file(cfg.output.mps_path, out.mps->dump() + "\n");
      if (verbose) std::cerr << "[mpsdp] wrote " << cfg.output.mps_path << '\n';
    }
    return 0;
  } catch (const mpsdp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    const int code = mpsdp::exit_code_for(e);
    std::cerr << (code == 3 ? "infeasible: " : code == 4 ? "numerical failure: " : "error: ")
              << e.what() << '\n';
    return code;
  }
}
