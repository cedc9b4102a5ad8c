#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "crnsn/expansion.hpp"
#include "crnsn/kinetics.hpp"
#include "crnsn/network.hpp"
#include "crnsn/selections.hpp"
#include "crnsn/verify.hpp"

namespace crnsn {

inline constexpr int kSchemaVersion = 1;

enum class Command { Analyze, Certify, Realize, Verify, Scan, Pipeline };
const char* to_string(Command c);
Command command_from_string(const std::string& s);

struct AnalysisConfig {
  Command command = Command::Pipeline;
  std::string input;
  KineticsKind kinetics = KineticsKind::MichaelisMenten;
  std::vector<std::string> x_bar;  // NAME=p/q overrides
  std::optional<Rational> epsilon;
  std::size_t cap = kDefaultCap;
  double window = 0.1;
  std::size_t grid = 21;
  std::string format = "json";  // json, text or csv
  std::optional<std::string> out_dir;  // stage cache and report files
  std::optional<std::string> params;   // supplied kinetics, JSON
  unsigned seed = 0;
};

enum class Verdict { SNCertified, SingularOnlyNecessary, NoSignSwitch, PermanentlySingular, Infeasible };
const char* to_string(Verdict v);

struct StageError {
  std::string stage;
  std::string message;
  int exit_code = 1;
};

struct PipelineReport {
  std::optional<ReactionNetwork> network;
  std::optional<SelectionCensus> census;
  std::vector<std::pair<ChildSelection, ChildSelection>> pairs;
  std::vector<SNPairCertificate> certificates;
  std::optional<std::size_t> chosen;  // certificate behind `point`
  std::optional<SimpleZeroPoint> point;
  std::optional<BifurcationRealization> realization;
  std::optional<SNReport> sn_report;
  std::optional<FoldScan> scan;
  Verdict verdict = Verdict::SingularOnlyNecessary;
  std::vector<std::string> notes;
  std::optional<StageError> error;
  Command command = Command::Pipeline;

  /// 0 ok, 2 degenerate SN3, 3 no certificate, 4 infeasible, 1 operational error.
  int exit_code() const;
};

/// Runs every stage up to config.command. With out_dir set, exact artifacts of
/// analyze, certify and realize are cached there under a content hash of the
/// input and the stage's configuration, and reused on later runs.
PipelineReport run(const AnalysisConfig& config);

nlohmann::json to_json(const PipelineReport& report, const AnalysisConfig& config);
std::string to_text(const PipelineReport& report);

/// Hex SHA-256 of `data`.
std::string sha256_hex(const std::string& data);

/// Raised when a cached artifact's content hash does not match its payload.
class TamperedArtifact : public Error {
 public:
  using Error::Error;
};

}  // namespace crnsn
