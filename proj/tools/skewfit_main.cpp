#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "skewfit/bench.hpp"
#include "skewfit/data.hpp"
#include "skewfit/report.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kExperimentError = 2;

int run_command(const std::string& config_path, const std::string& out_path, bool quiet) {
  skewfit::ExperimentConfig config;
  try {
    config = skewfit::load_config(config_path);
  } catch (const skewfit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const auto result = skewfit::run_experiment(config);
    if (out_path.empty() || out_path == "-") {
      for (const auto& r : result.trials) {
        std::cout << skewfit::trial_result_to_json(r) << '\n';
      }
    } else {
      skewfit::write_trial_results(result.trials, out_path);
    }
    int failures = 0;
    for (const auto& row : result.summary) {
      failures += row.failures;
    }
    if (!quiet) {
      std::cerr << skewfit::emit_report(result.summary, skewfit::ReportFormat::kMarkdown);
    }
    if (failures > 0) {
      std::cerr << failures << " method fit(s) failed; see the error field of the results\n";
    }
    // Every fit failing counts as an experiment failure.
    for (const auto& row : result.summary) {
      if (row.count > 0) {
        return 0;
      }
    }
    std::cerr << "experiment failed: no trial produced a result\n";
    return kExperimentError;
  } catch (const std::exception& e) {
    std::cerr << "experiment failed: " << e.what() << '\n';
    return kExperimentError;
  }
}

int synth_command(int setting, std::size_t n, std::uint64_t seed, const std::string& out_path) {
  try {
    const auto data = skewfit::generate_synthetic(skewfit::synthetic_setting(setting), n, seed);
    skewfit::write_csv(data, out_path);
    return 0;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "synth failed: " << e.what() << '\n';
    return kExperimentError;
  }
}

int report_command(const std::string& in_path, const std::string& format_name, const std::string& out_path) {
  skewfit::ReportFormat format;
  try {
    format = skewfit::report_format_from_name(format_name);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const std::string text = skewfit::emit_report(skewfit::read_trial_results(in_path), format);
    if (out_path.empty() || out_path == "-") {
      std::cout << text;
    } else {
      std::ofstream out(out_path);
      if (!out) {
        throw std::runtime_error("cannot write " + out_path);
      }
      out << text;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "report failed: " << e.what() << '\n';
    return kExperimentError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skewfit: F-measure oriented logistic regression for imbalanced data"};
  app.require_subcommand(1);

  std::string config_path, results_out;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", results_out, "results file (JSON lines); stdout when omitted");
  run->add_flag("--quiet", quiet, "do not print the summary table to stderr");

  int setting = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset as CSV");
  synth->add_option("--setting", setting, "setting id 1..6")->required();
  synth->add_option("--n", n, "number of rows")->required();
  synth->add_option("--seed", seed, "random seed")->required();
  synth->add_option("--out", synth_out, "output CSV path")->required();

  std::string report_in, format = "md", report_out;
  auto* report = app.add_subcommand("report", "summarize a results file");
  report->add_option("--in", report_in, "results file (JSON lines)")->required();
  report->add_option("--format", format, "md or csv");
  report->add_option("--out", report_out, "output path; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (*run) return run_command(config_path, results_out, quiet);
  if (*synth) return synth_command(setting, n, seed, synth_out);
  return report_command(report_in, format, report_out);
}
