#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "crnsn/pipeline.hpp"

using namespace crnsn;

int main(int argc, char** argv) {
  CLI::App app{"Saddle-node certificates for chemical reaction networks"};
  AnalysisConfig config;
  std::string command = "pipeline", kinetics = "mm", epsilon, out, params;

  app.add_option("command", command, "analyze, certify, realize, verify, scan or pipeline")
      ->required()
      ->check(CLI::IsMember({"analyze", "certify", "realize", "verify", "scan", "pipeline"}));
  app.add_option("input", config.input, "network file")->required();
  app.add_option("--kinetics", kinetics, "mm or hill")->check(CLI::IsMember({"mm", "hill"}));
  app.add_option("--xbar", config.x_bar, "equilibrium concentration NAME=p/q (repeatable)");
  app.add_option("--epsilon", epsilon, "single epsilon p/q instead of the schedule");
  app.add_option("--cap", config.cap, "enumeration cap")->check(CLI::PositiveNumber);
  app.add_option("--window", config.window, "relative lambda window of the fold scan")->check(CLI::Range(1e-12, 0.99));
  app.add_option("--grid", config.grid, "fold scan grid size")->check(CLI::Range(3, 100001));
  app.add_option("--format", config.format, "json, text or csv")->check(CLI::IsMember({"json", "text", "csv"}));
  app.add_option("--out", out, "working directory for cached stages and reports");
  app.add_option("--params", params, "supplied kinetics (JSON) instead of the constructed realization");
  app.add_option("--seed", config.seed, "recorded in the report");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    config.command = command_from_string(command);
    config.kinetics = kinetics_from_string(kinetics);
    if (!epsilon.empty()) {
      config.epsilon = parse_rational(epsilon);
      if (*config.epsilon < 0) throw Error("epsilon must be nonnegative");
    }
  } catch (const std::exception& e) {
    std::cerr << "crnsn: " << e.what() << "\n";
    return 1;
  }
  if (!out.empty()) config.out_dir = out;
  if (!params.empty()) config.params = params;

  const PipelineReport report = run(config);
  const std::string json = to_json(report, config).dump(2) + "\n";
  const std::string csv = report.scan && report.network ? to_csv(*report.network, *report.scan) : std::string();

  if (config.format == "text")
    std::cout << to_text(report);
  else if (config.format == "csv" && report.scan)
    std::cout << csv;
  else
    std::cout << json;

  if (config.out_dir) {
    std::filesystem::create_directories(*config.out_dir);
    std::ofstream(std::filesystem::path(*config.out_dir) / "report.json") << json;
    if (report.scan) std::ofstream(std::filesystem::path(*config.out_dir) / "scan.csv") << csv;
  }
  if (report.error) std::cerr << "crnsn: " << report.error->stage << ": " << report.error->message << "\n";
  return report.exit_code();
}
