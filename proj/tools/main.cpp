#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char **argv)
{
  CLI::App app{"Eddy-current modal analysis and monotonicity imaging"};
  app.require_subcommand(1);

  mitmp::app::RunOptions options;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--scenario", options.scenario, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", options.out, "output directory")->capture_default_str();
    sub->add_option("--threads", options.threads, "worker threads (< 1: all cores)")
        ->capture_default_str();
    sub->add_flag("--quiet", options.quiet, "suppress progress messages");
  };
  const std::pair<const char *, const char *> commands[] = {
      {"assemble", "write the inductance and resistance matrices (L.csv, R.csv)"},
      {"modes", "solve for time constants and modes (taus.json, modes.json)"},
      {"simulate", "simulate the step-off free response at the sensors (traces.csv)"},
      {"extract", "extract time constants from traces (spectrum.json)"},
      {"image", "monotonicity imaging (imaging_report.json, occupancy.csv)"},
      {"pipeline", "simulate, extract and image in one run (summary.json and all of the above)"},
  };
  for (const auto &[name, help] : commands)
  {
    add_common(app.add_subcommand(name, help));
  }

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    // argument errors are input validation failures
    return code == 0 ? 0 : mitmp::app::kValidation;
  }
  return mitmp::app::Run(app.get_subcommands().front()->get_name(), options, std::cerr);
}
