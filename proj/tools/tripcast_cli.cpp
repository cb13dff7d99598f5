// Command-line driver: `tripcast <stage> [options]`.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>
#include "tripcast/error.h"
#include "tripcast/pipeline.h"

namespace {

std::string toml_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tripcast: trip generation and distribution from GPS pings"};
  app.set_version_flag("--version", "tripcast 0.1.0");

  std::vector<std::string> commands = tripcast::stage_names();
  commands.push_back("all");
  commands.push_back("config");

  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  int workers = 0;
  long long seed = -1;
  std::string log_level = "info";

  app.add_option("command", command,
                 "Stage to run (synth, ingest, quality, homes, trips, odm, fit-gen, calibrate, "
                 "forecast, compare, report), 'all' for ingest..report, or 'config' to print the "
                 "effective configuration")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("-c,--config", config_path, "TOML configuration file");
  app.add_option("--set", overrides, "Override a setting: section.key=value (repeatable)");
  app.add_option("-o,--output-dir", output_dir, "Output directory (paths.output_dir)");
  app.add_option("-j,--workers", workers, "Worker threads (general.workers)")
      ->check(CLI::Range(1, 256));
  app.add_option("--seed", seed, "Random seed (general.seed)")->check(CLI::NonNegativeNumber);
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // Flags take precedence over --set, which takes precedence over the file.
  if (!output_dir.empty()) overrides.push_back("paths.output_dir=" + toml_string(output_dir));
  if (workers > 0) overrides.push_back("general.workers=" + std::to_string(workers));
  if (seed >= 0) overrides.push_back("general.seed=" + std::to_string(seed));

  tripcast::init_logging(log_level);
  try {
    const auto config = tripcast::load_config(config_path, overrides);
    if (command == "config") {
      std::cout << config.to_json().dump(2) << '\n';
    } else if (command == "all") {
      tripcast::run_chain(config);
    } else {
      tripcast::run_stage(command, config);
    }
  } catch (const tripcast::MissingArtifactError& e) {
    std::cerr << "error: missing dependency (stage '" << e.stage() << "'): " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return tripcast::exit_code_for(e);
  }
  return 0;
}
