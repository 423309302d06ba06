// Copyright 2026 The DriveOpt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Artifact directory layout, manifests and the fit/build/solve steps shared
// by the command line, the service and the acceptance suite.

#ifndef DRIVEOPT_PIPELINE_H_
#define DRIVEOPT_PIPELINE_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "driveopt/config.h"
#include "driveopt/football.h"
#include "driveopt/ingest.h"
#include "driveopt/lategame.h"
#include "driveopt/models.h"
#include "driveopt/simeval.h"
#include "driveopt/transitions.h"

namespace driveopt {

inline constexpr char kVersion[] = "0.1.0";

inline constexpr char kModelsFile[] = "models.jsonl";
inline constexpr char kTransitionsFile[] = "transitions.txt";
inline constexpr char kUtilityFile[] = "utility.txt";
inline constexpr char kLateGameFile[] = "lategame.jsonl";
inline constexpr char kCallerFile[] = "caller.json";
inline constexpr char kSimulationCsv[] = "simulation.csv";
inline constexpr char kSimulationJson[] = "simulation.json";
inline constexpr char kTeamsCsv[] = "teams.csv";
inline constexpr char kCalibrationCsv[] = "calibration.csv";
inline constexpr char kEpCsv[] = "ep_comparison.csv";

std::string JoinPath(const std::string& dir, const std::string& name);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, const std::string& contents);

// FNV-1a of the file contents, hex encoded.
absl::StatusOr<std::string> FileDigest(const std::string& path);

// Fails with a message naming the command that produces `name`.
absl::Status RequireArtifact(const std::string& dir, const std::string& name,
                             const std::string& producer);

struct Manifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  nlohmann::json parameters = nlohmann::json::object();
};

// Writes <dir>/manifest-<command>.json listing input and output digests.
absl::Status WriteManifest(const std::string& dir, const Config& config,
                           const Manifest& manifest);

absl::StatusOr<Corpus> LoadCorpus(const std::string& path,
                                  const std::string& columns_path);

absl::Status StepFit(const Corpus& corpus, const std::string& corpus_path,
                     const Config& config, const std::string& dir);
absl::Status StepBuildTransitions(const Config& config, const std::string& dir);
absl::Status StepSolve(const Config& config, const std::string& dir);

enum ArtifactNeed {
  kNeedModels = 1,
  kNeedTransitions = 2,
  kNeedUtility = 4,
  kNeedCaller = 8,
};

struct Artifacts {
  std::string dir;
  std::optional<ModelStore> models;
  std::string models_hash;
  std::optional<TransitionTable> transitions;
  std::string transitions_hash;
  std::optional<UtilityTable> utility;
  std::optional<HistoricalCaller> caller;

  int max_dist() const;
};

// Loads the artifacts named by `needs` (a mask of ArtifactNeed); a missing
// file names the command that produces it.
absl::StatusOr<Artifacts> LoadArtifacts(const std::string& dir, int needs);

// The persisted late-game store, or an empty one when it is absent or was
// built from other models or transitions; `note` says which.
LateGameStore OpenLateStore(const Artifacts& artifacts, std::string* note);

// Optimal caller against the fitted historical caller; writes the CSV and
// JSON reports and a manifest.
absl::StatusOr<SimulationReport> StepSimulate(const Config& config,
                                              const std::string& dir,
                                              int n_states, int reps);

// Team agreement with the policy on an evaluation corpus; refuses the corpus
// the models were fitted on. Writes the CSV report and a manifest.
absl::StatusOr<TeamReport> StepScoreTeams(const Config& config,
                                          const std::string& dir,
                                          const std::string& eval_path,
                                          const std::string& columns_path);

// Late-game win utilities for corpus run and pass plays inside the late
// window whose final margin is known, paired with the game outcome. At most
// `max_plays` plays, in corpus order; zero means all.
absl::StatusOr<std::vector<Prediction>> CorpusLatePredictions(
    const std::vector<PlayRecord>& corpus, LateGameSolver& solver,
    LateGameStore* store, const LateSolveLimits& limits, int max_plays);

}  // namespace driveopt

#endif  // DRIVEOPT_PIPELINE_H_
