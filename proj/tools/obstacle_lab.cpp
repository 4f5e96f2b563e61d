#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oblab/config.hpp"
#include "oblab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"obstacle-lab: numerical laboratory for the thin obstacle problem"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "execute the experiment described by a config file");
  run->add_option("config", config_path, "path to the key=value config")->required();

  CLI::App* describe =
      app.add_subcommand("describe", "print experiments, config schema and output formats");

  CLI11_PARSE(app, argc, argv);

  try {
    if (describe->parsed()) {
      std::cout << oblab::describe();
      return 0;
    }
    const oblab::Config cfg = oblab::Config::parse_file(config_path);
    return oblab::run_experiment(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
