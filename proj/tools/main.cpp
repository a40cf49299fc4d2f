#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "floq/commands.hpp"
#include "floq/config.hpp"
#include "floq/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Floquet spectral data and dispersive-decay toolkit for periodic "
               "discrete Schrödinger operators"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;

  const std::vector<std::string> names = {"bands", "edges",     "mo",   "delta",
                                          "partition", "constant", "propagate", "decay",
                                          "dnls",  "vdc-check", "selftest"};
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (default: config output_dir)");
    sub->add_option("--threads", threads, "worker threads (default: TOOL_THREADS or 1)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  floq::RunConfig cfg;
  try {
    cfg = floq::parse_config(config_path);
  } catch (const floq::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (threads <= 0) {
    if (const char* env = std::getenv("TOOL_THREADS")) threads = std::atoi(env);
    if (threads <= 0) threads = 1;
  }
  if (out_dir.empty()) out_dir = cfg.output_dir;

  return floq::run_command(command, cfg, out_dir, threads);
}
