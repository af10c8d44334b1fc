// mrc: direct and inverse obstacle scattering from the command line.
//
//   mrc solve      --config cfg.json --out dir
//   mrc synthesize --config cfg.json --out dir --seed 7
//   mrc invert     --data dir/near_field.json [--config cfg.json] --out dir
//   mrc oracle     --config cfg.json --out dir
//   mrc fieldmap   --config cfg.json --out dir
//
// MRC_LOG=trace|debug|info|warn|error|off sets log verbosity (default info).

#include <cstdlib>
#include <exception>
#include <functional>
#include <map>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>

#include "commands.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("mrc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* lvl = std::getenv("MRC_LOG")) spdlog::cfg::helpers::load_levels(lvl);

  CLI::App app{"Direct and inverse acoustic obstacle scattering with outgoing spherical waves"};
  app.require_subcommand(1);
  mrc::cli::CommonOptions opt;

  using Handler = std::function<int(const mrc::cli::CommonOptions&)>;
  const std::map<std::string, std::pair<std::string, Handler>> commands = {
      {"solve", {"adaptive boundary-residual solve, writes solution.json", mrc::cli::cmd_solve}},
      {"synthesize", {"synthetic near-field data on a measurement sphere", mrc::cli::cmd_synthesize}},
      {"invert", {"reconstruct r = f(theta, phi) from near-field data", mrc::cli::cmd_invert}},
      {"oracle", {"exact sphere scattering coefficients", mrc::cli::cmd_oracle}},
      {"fieldmap", {"total and scattered field on a grid, CSV", mrc::cli::cmd_fieldmap}},
  };
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    auto* cfg = sub->add_option("--config", opt.config, "JSON configuration file");
    if (name == "invert") {
      sub->add_option("--data", opt.data, "near_field.json produced by synthesize")->required();
    } else {
      cfg->required();
    }
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "noise seed")->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mrc::cli::exit_error;
  }

  for (const auto& [name, entry] : commands) {
    if (!app.got_subcommand(name)) continue;
    try {
      return entry.second(opt);
    } catch (const std::exception& e) {
      spdlog::error("{}: {}", name, e.what());
      return mrc::cli::exit_error;
    }
  }
  return mrc::cli::exit_error;
}
