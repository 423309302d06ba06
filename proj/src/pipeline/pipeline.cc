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

#include "driveopt/pipeline.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace driveopt {

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

absl::Status WriteFile(const std::string& path, const std::string& contents) {
  std::error_code ec;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  // Write then rename so readers never see a partial artifact.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      return absl::UnavailableError(absl::StrCat("cannot write ", path));
    out << contents;
    if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot rename ", tmp, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> FileDigest(const std::string& path) {
  auto text = ReadFile(path);
  if (!text.ok()) return text.status();
  return absl::StrFormat("%016x", Fnv1a64(*text));
}

absl::Status RequireArtifact(const std::string& dir, const std::string& name,
                             const std::string& producer) {
  const std::string path = JoinPath(dir, name);
  if (std::filesystem::exists(path)) return absl::OkStatus();
  return absl::FailedPreconditionError(
      absl::StrCat(path, " not found; run `driveopt ", producer, " --store ",
                   dir, "` first"));
}

absl::Status WriteManifest(const std::string& dir, const Config& config,
                           const Manifest& manifest) {
  auto describe = [](const std::vector<std::string>& paths)
      -> absl::StatusOr<nlohmann::json> {
    nlohmann::json out = nlohmann::json::array();
    for (const std::string& p : paths) {
      auto digest = FileDigest(p);
      if (!digest.ok()) return digest.status();
      out.push_back({{"path", std::filesystem::path(p).filename().string()},
                     {"fnv1a64", *digest}});
    }
    return out;
  };
  auto inputs = describe(manifest.inputs);
  if (!inputs.ok()) return inputs.status();
  auto outputs = describe(manifest.outputs);
  if (!outputs.ok()) return outputs.status();
  nlohmann::json j = {{"schema", "driveopt.manifest/1"},
                      {"command", manifest.command},
                      {"version", kVersion},
                      {"config_hash", config.Hash()},
                      {"seed", config.seed},
                      {"inputs", *inputs},
                      {"outputs", *outputs},
                      {"parameters", manifest.parameters}};
  return WriteFile(
      JoinPath(dir, absl::StrCat("manifest-", manifest.command, ".json")),
      j.dump(2) + "\n");
}

absl::StatusOr<Corpus> LoadCorpus(const std::string& path,
                                  const std::string& columns_path) {
  ColumnMap columns;
  if (!columns_path.empty()) {
    auto loaded = ColumnMap::FromFile(columns_path);
    if (!loaded.ok()) return loaded.status();
    columns = *loaded;
  }
  return ParseCorpus(path, columns);
}

absl::Status StepFit(const Corpus& corpus, const std::string& corpus_path,
                     const Config& config, const std::string& dir) {
  auto store = FitModels(corpus.records, config);
  if (!store.ok()) return store.status();
  for (const std::string& w : corpus.report.warnings) {
    store->warnings.push_back(w);
  }
  const std::string out = JoinPath(dir, kModelsFile);
  if (auto s = WriteFile(out, store->Serialize()); !s.ok()) return s;
  const HistoricalCaller caller = HistoricalCaller::Fit(
      corpus.records, config.sim.caller_seasons, config.sim);
  const std::string caller_out = JoinPath(dir, kCallerFile);
  if (auto s = WriteFile(caller_out, caller.Serialize()); !s.ok()) return s;
  Manifest m;
  m.command = "fit";
  if (!corpus_path.empty()) m.inputs.push_back(corpus_path);
  m.outputs.push_back(out);
  m.outputs.push_back(caller_out);
  m.parameters = {{"rows", corpus.report.rows},
                  {"kept", corpus.report.kept},
                  {"dropped_no_play", corpus.report.dropped_no_play},
                  {"dropped_other", corpus.report.dropped_other},
                  {"malformed", corpus.report.malformed}};
  return WriteManifest(dir, config, m);
}

absl::Status StepBuildTransitions(const Config& config,
                                  const std::string& dir) {
  if (auto s = RequireArtifact(dir, kModelsFile, "fit"); !s.ok()) return s;
  const std::string in = JoinPath(dir, kModelsFile);
  auto store = ModelStore::Load(in);
  if (!store.ok()) return store.status();
  StateSpace space(store->max_dist);
  TransitionOptions options;
  options.prune = config.solver.prune;
  TransitionTable table = BuildAll(space, *store, options, config.jobs);
  auto digest = FileDigest(in);
  if (!digest.ok()) return digest.status();
  table.store_hash = *digest;
  const std::string out = JoinPath(dir, kTransitionsFile);
  if (auto s = WriteFile(out, table.Serialize()); !s.ok()) return s;
  Manifest m;
  m.command = "build-transitions";
  m.inputs.push_back(in);
  m.outputs.push_back(out);
  m.parameters = {{"rows", table.rows.size()},
                  {"omitted", table.report.size()}};
  return WriteManifest(dir, config, m);
}

absl::Status StepSolve(const Config& config, const std::string& dir) {
  if (auto s = RequireArtifact(dir, kTransitionsFile, "build-transitions");
      !s.ok()) {
    return s;
  }
  const std::string in = JoinPath(dir, kTransitionsFile);
  auto table = TransitionTable::Load(in);
  if (!table.ok()) return table.status();
  StateSpace space(table->max_dist);
  SolveOptions options;
  options.theta = config.solver.theta;
  options.max_sweeps = config.solver.max_sweeps;
  auto solved = SolveFootball(space, *table, options);
  if (!solved.ok()) return solved.status();
  auto digest = FileDigest(in);
  if (!digest.ok()) return digest.status();
  solved->transitions_hash = *digest;
  const std::string out = JoinPath(dir, kUtilityFile);
  if (auto s = WriteFile(out, solved->Serialize()); !s.ok()) return s;
  Manifest m;
  m.command = "solve";
  m.inputs.push_back(in);
  m.outputs.push_back(out);
  m.parameters = {{"sweeps", solved->sweeps},
                  {"final_delta", solved->final_delta},
                  {"converged", solved->converged}};
  return WriteManifest(dir, config, m);
}

int Artifacts::max_dist() const {
  if (utility) return utility->max_dist;
  if (transitions) return transitions->max_dist;
  if (models) return models->max_dist;
  return kDefaultMaxDist;
}

absl::StatusOr<Artifacts> LoadArtifacts(const std::string& dir, int needs) {
  Artifacts a;
  a.dir = dir;
  if (needs & kNeedModels) {
    if (auto s = RequireArtifact(dir, kModelsFile, "fit"); !s.ok()) return s;
    const std::string path = JoinPath(dir, kModelsFile);
    auto models = ModelStore::Load(path);
    if (!models.ok()) return models.status();
    a.models = *std::move(models);
    auto digest = FileDigest(path);
    if (!digest.ok()) return digest.status();
    a.models_hash = *digest;
  }
  if (needs & kNeedTransitions) {
    if (auto s = RequireArtifact(dir, kTransitionsFile, "build-transitions");
        !s.ok()) {
      return s;
    }
    const std::string path = JoinPath(dir, kTransitionsFile);
    auto table = TransitionTable::Load(path);
    if (!table.ok()) return table.status();
    a.transitions = *std::move(table);
    auto digest = FileDigest(path);
    if (!digest.ok()) return digest.status();
    a.transitions_hash = *digest;
  }
  if (needs & kNeedUtility) {
    if (auto s = RequireArtifact(dir, kUtilityFile, "solve"); !s.ok()) return s;
    auto table = UtilityTable::Load(JoinPath(dir, kUtilityFile));
    if (!table.ok()) return table.status();
    a.utility = *std::move(table);
  }
  if (needs & kNeedCaller) {
    if (auto s = RequireArtifact(dir, kCallerFile, "fit"); !s.ok()) return s;
    auto text = ReadFile(JoinPath(dir, kCallerFile));
    if (!text.ok()) return text.status();
    auto caller = HistoricalCaller::Deserialize(*text);
    if (!caller.ok()) return caller.status();
    a.caller = *std::move(caller);
  }
  return a;
}

LateGameStore OpenLateStore(const Artifacts& artifacts, std::string* note) {
  const std::string path = JoinPath(artifacts.dir, kLateGameFile);
  LateGameStore fresh;
  fresh.models_hash = artifacts.models_hash;
  fresh.transitions_hash = artifacts.transitions_hash;
  if (!std::filesystem::exists(path)) {
    *note = "cold start: no late-game store yet";
    return fresh;
  }
  auto loaded = LateGameStore::Load(path);
  if (!loaded.ok()) {
    *note = absl::StrCat("cold start: ", loaded.status().message());
    return fresh;
  }
  if (loaded->models_hash != artifacts.models_hash ||
      loaded->transitions_hash != artifacts.transitions_hash) {
    *note = "cold start: late-game store was built from other artifacts";
    fresh.version = loaded->version;
    return fresh;
  }
  *note = absl::StrCat("loaded ", loaded->size(), " late-game entries");
  return *std::move(loaded);
}

absl::StatusOr<SimulationReport> StepSimulate(const Config& config,
                                              const std::string& dir,
                                              int n_states, int reps) {
  auto a = LoadArtifacts(dir, kNeedTransitions | kNeedUtility | kNeedCaller);
  if (!a.ok()) return a.status();
  StateSpace space(a->max_dist());
  OptimalCaller optimal(space, *a->utility);
  SimulationReport report =
      SimulateMatchups(space, *a->transitions, *a->utility, optimal, *a->caller,
                       n_states, reps, config.seed, config.sim, config.jobs);
  const std::string csv = JoinPath(dir, kSimulationCsv);
  const std::string json = JoinPath(dir, kSimulationJson);
  if (auto s = WriteFile(csv, report.ToCsv()); !s.ok()) return s;
  if (auto s = WriteFile(json, report.ToJson()); !s.ok()) return s;
  Manifest m;
  m.command = "simulate";
  m.inputs = {JoinPath(dir, kTransitionsFile), JoinPath(dir, kUtilityFile),
              JoinPath(dir, kCallerFile)};
  m.outputs = {csv, json};
  m.parameters = {{"states", n_states},
                  {"reps", reps},
                  {"optimal_mean", report.FirstMean()},
                  {"historical_mean", report.SecondMean()},
                  {"capped", report.capped}};
  if (auto s = WriteManifest(dir, config, m); !s.ok()) return s;
  return report;
}

absl::StatusOr<std::vector<Prediction>> CorpusLatePredictions(
    const std::vector<PlayRecord>& corpus, LateGameSolver& solver,
    LateGameStore* store, const LateSolveLimits& limits, int max_plays) {
  std::vector<Prediction> out;
  for (const PlayRecord& r : corpus) {
    if (max_plays > 0 && static_cast<int>(out.size()) >= max_plays) break;
    if (!r.is_scrimmage() || !r.final_score_differential.has_value()) {
      continue;
    }
    const LateGameState s{r.state(), r.score_differential, r.clock_seconds,
                          Phase::kScrimmage};
    if (!solver.Validate(s).ok()) continue;
    auto result = solver.Solve(s, store, limits);
    if (!result.ok()) return result.status();
    out.push_back(Prediction{result->utility,
                             TerminalWinUtility(*r.final_score_differential)});
  }
  return out;
}

absl::StatusOr<TeamReport> StepScoreTeams(const Config& config,
                                          const std::string& dir,
                                          const std::string& eval_path,
                                          const std::string& columns_path) {
  auto a = LoadArtifacts(dir, kNeedUtility);
  if (!a.ok()) return a.status();
  auto eval_digest = FileDigest(eval_path);
  if (!eval_digest.ok()) return eval_digest.status();
  auto fit_manifest = ReadFile(JoinPath(dir, "manifest-fit.json"));
  if (fit_manifest.ok()) {
    const nlohmann::json m =
        nlohmann::json::parse(*fit_manifest, nullptr, false);
    if (!m.is_discarded() && m.contains("inputs")) {
      for (const nlohmann::json& in : m["inputs"]) {
        if (in.value("fnv1a64", "") == *eval_digest) {
          return absl::FailedPreconditionError(
              absl::StrCat(eval_path,
                           " is the corpus the models were fitted on; score "
                           "teams on held-out games"));
        }
      }
    }
  }
  auto corpus = LoadCorpus(eval_path, columns_path);
  if (!corpus.ok()) return corpus.status();
  StateSpace space(a->max_dist());
  TeamReport report = ScoreTeamOptimality(corpus->records, space, *a->utility);
  const std::string out = JoinPath(dir, kTeamsCsv);
  if (auto s = WriteFile(out, report.ToCsv()); !s.ok()) return s;
  Manifest m;
  m.command = "score-teams";
  m.inputs = {eval_path, JoinPath(dir, kUtilityFile)};
  m.outputs = {out};
  m.parameters = {{"teams", report.teams.size()}, {"notes", report.notes}};
  if (auto s = WriteManifest(dir, config, m); !s.ok()) return s;
  return report;
}

}  // namespace driveopt
