// Command-line front end: run scenario configs, execute the figure presets,
// compare simulation against the analytic predictions, validate configs.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vodsim/vodsim.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<double> warmup_fraction;
  std::string out_dir;
  std::string format = "csv";
  unsigned threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_output) {
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--replications", flags.replications, "replications per point")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--warmup-fraction", flags.warmup_fraction,
                  "fraction of the horizon discarded from estimates")
      ->check(CLI::Range(0.0, 0.999));
  if (with_output) {
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--format", flags.format, "result file format")
        ->check(CLI::IsMember({"csv", "json"}));
  }
}

vodsim::RunOptions to_run_options(const CommonFlags& flags, const std::string& fallback_dir) {
  vodsim::RunOptions options;
  options.out_dir = flags.out_dir.empty() ? fallback_dir : flags.out_dir;
  options.format = flags.format == "json" ? vodsim::OutputFormat::json
                                          : vodsim::OutputFormat::csv;
  options.seed = flags.seed;
  options.replications = flags.replications;
  options.warmup_fraction = flags.warmup_fraction;
  options.threads = flags.threads;
  return options;
}

void apply_scenario_overrides(vodsim::Scenario& scenario, const CommonFlags& flags) {
  if (flags.seed) scenario.seed = *flags.seed;
  if (flags.warmup_fraction) scenario.warmup_fraction = *flags.warmup_fraction;
}

int run_command(const std::string& config_path, const CommonFlags& flags) {
  vodsim::ScenarioConfig config = vodsim::load_config(config_path);
  apply_scenario_overrides(config.scenario, flags);
  const int replications = flags.replications.value_or(config.replications);
  const std::string stem = fs::path(config_path).stem().string();
  const vodsim::RunOptions options = to_run_options(flags, config.output_dir);

  if (config.sweep) {
    // Reuse the preset writer: a config sweep is a single-variant figure with
    // the sweep value on x and blocking on y.
    vodsim::FigurePreset figure;
    figure.name = stem;
    figure.description = "sweep of " + config.sweep->parameter;
    figure.x = vodsim::PlotX::sweep_value;
    figure.y = vodsim::PlotY::blocking;
    figure.x_label = config.sweep->parameter;
    figure.x_units = config.sweep->parameter == "rate_scale" ? "factor" : "requests/s";
    figure.y_label = "blocking probability";
    figure.y_units = "probability";
    figure.replications = replications;
    figure.seed = config.scenario.seed;
    figure.variants = {{std::string{}, config.scenario, *config.sweep}};
    const auto written = run_figure_preset(figure, options);
    for (const auto& path : written) std::cout << path.string() << "\n";
    return 0;
  }

  const auto summary =
      vodsim::run_replicated(config.scenario, replications, config.scenario.seed,
                             options.threads);
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  fs::path path = options.out_dir;
  if (options.format == vodsim::OutputFormat::csv) {
    path /= stem + "_report.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path.string());
    vodsim::pooled_report(summary).write_csv(out);
  } else {
    path /= stem + "_report.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path.string());
    out << vodsim::detail::point_json(summary).dump(2) << '\n';
  }
  std::cout << path.string() << "\n";
  if (summary.pooled_blocking)
    std::printf("offered %llu, denied %llu, blocking %.6f [%.6f, %.6f]\n",
                static_cast<unsigned long long>(summary.offered),
                static_cast<unsigned long long>(summary.denied),
                summary.pooled_blocking->estimate, summary.pooled_blocking->ci_low,
                summary.pooled_blocking->ci_high);
  else
    std::printf("offered 0 (blocking undefined)\n");
  return 0;
}

int preset_command(const std::string& name, const CommonFlags& flags) {
  const vodsim::FigurePreset preset = vodsim::figure_preset(name);
  const auto written =
      run_figure_preset(preset, to_run_options(flags, "out/" + name));
  for (const auto& path : written) std::cout << path.string() << "\n";
  return 0;
}

int compare_command(const std::string& config_path, const CommonFlags& flags) {
  vodsim::ScenarioConfig config = vodsim::load_config(config_path);
  apply_scenario_overrides(config.scenario, flags);
  const int replications = flags.replications.value_or(config.replications);
  const auto table =
      vodsim::compare_analytic(config.scenario, replications, flags.threads);
  if (flags.format == "json")
    std::cout << table.to_json().dump(2) << "\n";
  else
    table.render(std::cout);
  return 0;
}

int validate_command(const std::string& config_path) {
  const vodsim::ScenarioConfig config = vodsim::load_config(config_path);
  const auto& s = config.scenario;
  std::printf("OK: %d partitions, %d ports total, %zu classes, horizon %g s",
              s.plan.partition_count(), s.plan.total_capacity(), s.classes.size(),
              s.horizon);
  if (config.sweep)
    std::printf(", sweep %s over %zu points", config.sweep->parameter.c_str(),
                config.sweep->values().size());
  std::printf(", %d replications\n", config.replications);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"class-based admission-control simulator for a partitioned VoD server"};
  app.require_subcommand(1);

  std::string config_path, preset_name;
  CommonFlags flags;

  auto* run_cmd = app.add_subcommand("run", "run a scenario or sweep from a config file");
  run_cmd->add_option("config", config_path, "JSON config file")->required();
  add_common_flags(run_cmd, flags, true);

  auto* preset_cmd = app.add_subcommand("preset", "run a bundled figure preset");
  preset_cmd->add_option("name", preset_name, "one of fig2..fig7")->required();
  add_common_flags(preset_cmd, flags, true);

  auto* compare_cmd =
      app.add_subcommand("compare", "simulated vs analytic blocking for a scenario");
  compare_cmd->add_option("config", config_path, "JSON config file")->required();
  add_common_flags(compare_cmd, flags, false);
  compare_cmd->add_option("--format", flags.format, "table or json output")
      ->check(CLI::IsMember({"text", "json"}));

  auto* validate_cmd = app.add_subcommand("validate", "check a config file");
  validate_cmd->add_option("config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are configuration errors
  }

  try {
    if (run_cmd->parsed()) return run_command(config_path, flags);
    if (preset_cmd->parsed()) return preset_command(preset_name, flags);
    if (compare_cmd->parsed()) return compare_command(config_path, flags);
    if (validate_cmd->parsed()) return validate_command(config_path);
    return 1;
  } catch (const vodsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
