#include "wave/commands.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Traveling-wave speed and profile solver"};
  app.require_subcommand(1);

  wave::CommandOptions opts;
  for (const char* name : {"bounds", "gamma", "speed", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", opts.jobs, "threads for independent gamma evaluations")->check(CLI::PositiveNumber);
    sub->add_option("--out", opts.out_dir, "output directory (overrides [output] directory)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : wave::kExitConfig;
  }
  return wave::run_command(app.get_subcommands().front()->get_name(), opts).exit_code;
}
