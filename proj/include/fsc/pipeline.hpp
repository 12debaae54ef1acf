// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fsc/attacker.hpp"
#include "fsc/benchgen.hpp"
#include "fsc/discriminant.hpp"
#include "fsc/mitigation.hpp"

#include "json.hpp"

namespace fsc {

struct PipelineConfig {
  std::optional<std::filesystem::path> input;
  std::optional<BenchConfig> bench;
  double eps = 0.001;
  std::optional<double> eps_aux;    // defaults to eps
  DistanceSpec spec;
  std::optional<std::size_t> max_k; // defaults to the number of secrets
  Algorithm algo = Algorithm::Hierarchical;
  std::size_t folds = 20;
  std::optional<MitigationScheme> mitigation;
  std::uint64_t seed = 0;
  std::optional<int> n_basis;       // overrides the default basis size
  std::filesystem::path out;        // empty: nothing is written

  void validate() const;
};

/// An error tagged with the pipeline stage that raised it and the process
/// exit status it maps to.
class StageError : public Error {
public:
  StageError(std::string stage, const std::string &what, int status)
      : Error(stage + ": " + what), stage_(std::move(stage)), status_(status) {}
  const std::string &stage() const { return stage_; }
  int status() const { return status_; }

private:
  std::string stage_;
  int status_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitInput = 3;

/// Exit status for an exception escaping a command.
int exit_status(const std::exception &e);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  TraceSet traces;
  BasisSpec basis;
  std::vector<HyperTrace> hypertraces;
  ClusterResult clusters;
  std::optional<LabeledData> labels;
  std::optional<DecisionTree> tree;
  std::size_t folds_used = 0;
  std::optional<double> accuracy;
  std::optional<double> training_accuracy;
  std::optional<double> discriminant_error;
  std::string note;
  std::vector<StageTiming> timings;

  std::size_t public_count() const;
};

PipelineResult run_pipeline(const PipelineConfig &config);

/// Deterministic summary: every real rounded to 9 significant digits, no
/// wall-clock values.
nlohmann::ordered_json make_report(const PipelineResult &result,
                                   const PipelineConfig &config);

/// clusters.csv, centroids.json, tree.txt, tree.dot, report.json,
/// timings.json, curves.csv and curves.svg under `dir`.
void write_bundle(const PipelineResult &result, const PipelineConfig &config,
                  const std::filesystem::path &dir);

std::string clusters_csv(const PipelineResult &result);
nlohmann::ordered_json centroids_json(const ClusterResult &clusters);
ClusterResult clusters_from_json(const nlohmann::json &j);
std::string curves_csv(const PipelineResult &result, std::size_t points = 101);
std::string curves_svg(const PipelineResult &result, std::size_t points = 101);

/// Reads `y,t` samples; a header naming public:/time: columns is honoured,
/// otherwise the first two columns are used.
RemoteObservation load_observation(const std::filesystem::path &path);

nlohmann::ordered_json match_report(const MatchResult &match);

} // namespace fsc
