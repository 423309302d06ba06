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

// driveopt: command-line entry point for the whole pipeline.

#include <climits>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "driveopt/config.h"
#include "driveopt/football.h"
#include "driveopt/lategame.h"
#include "driveopt/pipeline.h"
#include "driveopt/service.h"
#include "driveopt/simeval.h"
#include "driveopt/solver.h"
#include "driveopt/synthetic.h"
#include "httplib.h"

namespace driveopt {
namespace {

struct CommonFlags {
  std::string corpus;
  std::string columns;
  std::string store = "artifacts";
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<double> theta;
  std::optional<int> jobs;
};

void AddCommon(CLI::App* app, CommonFlags* f) {
  app->add_option("--store", f->store, "Artifact directory");
  app->add_option("--config", f->config, "JSON config overriding defaults");
  app->add_option("--seed", f->seed, "Master seed");
  app->add_option("--theta", f->theta, "Convergence threshold");
  app->add_option("--jobs", f->jobs, "Worker threads");
}

absl::StatusOr<Config> ResolveConfig(const CommonFlags& f) {
  Config c;
  if (!f.config.empty()) {
    auto loaded = Config::FromFile(f.config);
    if (!loaded.ok()) return loaded.status();
    c = *loaded;
  }
  if (f.seed) c.seed = *f.seed;
  if (f.theta) c.solver.theta = *f.theta;
  if (f.jobs) c.jobs = *f.jobs;
  return c;
}

int Fail(const absl::Status& s) {
  std::cerr << "error: " << s.message() << "\n";
  return 1;
}

struct StateFlags {
  int down = 1;
  int dist = 10;
  int los = 75;
};

void AddState(CLI::App* app, StateFlags* s) {
  app->add_option("--down", s->down, "Down (1-4)")->required();
  app->add_option("--dist", s->dist, "Yards to gain")->required();
  app->add_option("--los", s->los, "Yards to the opponent goal")->required();
}

int RunDemoSolve() {
  SolveOptions options;
  auto r = SolveValueIteration(FiveStateInstance(), options);
  if (!r.ok()) return Fail(r.status());
  for (int s = 0; s < 3; ++s) {
    std::cout << "U(" << s + 1 << ")=" << Fixed4(r->utility[s]) << " pi("
              << s + 1 << ")=" << FiveStateActionName(r->policy[s]) << "\n";
  }
  std::cout << "sweeps=" << r->sweeps << "\n";
  return 0;
}

absl::StatusOr<UtilityTable> LoadUtility(const std::string& dir) {
  if (auto s = RequireArtifact(dir, kUtilityFile, "solve"); !s.ok()) return s;
  return UtilityTable::Load(JoinPath(dir, kUtilityFile));
}

std::string ValueText(const std::optional<double>& v) {
  return v.has_value() ? Fixed4(*v) : "NA";
}

struct LateFlags {
  StateFlags state;
  int sd = 0;
  int time = 0;
  std::optional<int> budget;
  std::optional<int> depth;
  bool exhaustive = false;
};

int RunSolveLateGame(const Config& config, const std::string& dir,
                     const LateFlags& f) {
  auto a = LoadArtifacts(dir, kNeedModels | kNeedTransitions);
  if (!a.ok()) return Fail(a.status());
  StateSpace space(a->max_dist());
  LateGameSolver solver(space, *a->transitions, *a->models, config.late);
  std::string note;
  LateGameStore store = OpenLateStore(*a, &note);
  std::cerr << note << "\n";
  LateSolveLimits limits{f.budget.value_or(config.late.node_budget),
                         f.depth.value_or(config.late.lookahead_depth)};
  if (f.exhaustive) limits = LateSolveLimits{INT_MAX, 1 << 20};
  const LateGameState s{GameState{f.state.down, f.state.dist, f.state.los},
                        f.sd, f.time, Phase::kScrimmage};
  auto r = solver.Solve(s, &store, limits);
  if (!r.ok()) return Fail(r.status());
  const std::string out = JoinPath(dir, kLateGameFile);
  if (!r->terminal) {
    if (auto st = store.Save(out); !st.ok()) return Fail(st);
  }
  std::cout << "state=" << ToString(r->state) << "\n";
  std::cout << "action="
            << (r->action ? std::string(LateActionName(*r->action)) : "NONE")
            << "\n";
  std::cout << "utility=" << Fixed4(r->utility) << "\n";
  for (const auto& [action, v] : r->values) {
    std::cout << LateActionName(action) << "=" << Fixed4(v) << "\n";
  }
  std::cout << "converged=" << (r->converged ? "yes" : "no")
            << " exact=" << (r->exact ? "yes" : "no")
            << " nodes=" << r->nodes_expanded
            << " store_version=" << store.version << "\n";
  Manifest m;
  m.command = "solve-lategame";
  m.inputs = {JoinPath(dir, kModelsFile), JoinPath(dir, kTransitionsFile)};
  if (!r->terminal) m.outputs = {out};
  m.parameters = {{"state", ToString(r->state)},
                  {"node_budget", limits.node_budget},
                  {"depth", limits.depth},
                  {"store_version", store.version}};
  if (auto st = WriteManifest(dir, config, m); !st.ok()) return Fail(st);
  return 0;
}

int RunSimulate(const Config& config, const std::string& dir, int states,
                int reps) {
  auto report = StepSimulate(config, dir, states, reps);
  if (!report.ok()) return Fail(report.status());
  std::cout << "states=" << report->rows.size() << " reps=" << report->reps
            << " seed=" << report->seed << "\n";
  std::cout << "optimal_first_mean=" << Fixed4(report->FirstMean())
            << " historical_first_mean=" << Fixed4(report->SecondMean())
            << " capped=" << report->capped << "\n";
  std::cout << "wrote " << JoinPath(dir, kSimulationCsv) << "\n";
  return 0;
}

int RunScoreTeams(const Config& config, const std::string& dir,
                  const std::string& eval, const std::string& columns) {
  auto report = StepScoreTeams(config, dir, eval, columns);
  if (!report.ok()) return Fail(report.status());
  std::cout << report->ToCsv();
  for (const std::string& n : report->notes) std::cerr << "note: " << n << "\n";
  return 0;
}

struct CalibrateFlags {
  std::string source = "synthetic";
  int n = 100000;
  int max_plays = 2000;
};

int RunCalibrate(const Config& config, const std::string& dir,
                 const CommonFlags& common, const CalibrateFlags& f) {
  std::vector<Prediction> predictions;
  Manifest m;
  m.command = "calibrate";
  if (f.source == "synthetic") {
    predictions = CalibratedStream(f.n, config.seed);
  } else {
    if (common.corpus.empty()) {
      return Fail(absl::InvalidArgumentError("--source corpus needs --corpus"));
    }
    auto corpus = LoadCorpus(common.corpus, common.columns);
    if (!corpus.ok()) return Fail(corpus.status());
    auto a = LoadArtifacts(dir, kNeedModels | kNeedTransitions);
    if (!a.ok()) return Fail(a.status());
    StateSpace space(a->max_dist());
    LateGameSolver solver(space, *a->transitions, *a->models, config.late);
    std::string note;
    LateGameStore store = OpenLateStore(*a, &note);
    auto p = CorpusLatePredictions(
        corpus->records, solver, &store,
        LateSolveLimits{config.late.node_budget, config.late.lookahead_depth},
        f.max_plays);
    if (!p.ok()) return Fail(p.status());
    predictions = *std::move(p);
    if (auto st = store.Save(JoinPath(dir, kLateGameFile)); !st.ok()) {
      return Fail(st);
    }
    m.inputs = {common.corpus, JoinPath(dir, kModelsFile),
                JoinPath(dir, kTransitionsFile)};
  }
  auto report = Calibrate(predictions);
  if (!report.ok()) return Fail(report.status());
  const std::string out = JoinPath(dir, kCalibrationCsv);
  if (auto st = WriteFile(out, report->ToCsv()); !st.ok()) return Fail(st);
  std::cout << "predictions=" << predictions.size()
            << " bins=" << report->bins.size()
            << " max_abs_gap=" << Fixed4(report->max_abs_gap) << "\n";
  std::cout << "wrote " << out << "\n";
  m.outputs = {out};
  m.parameters = {{"source", f.source},
                  {"predictions", predictions.size()},
                  {"max_abs_gap", report->max_abs_gap}};
  if (auto st = WriteManifest(dir, config, m); !st.ok()) return Fail(st);
  return 0;
}

int RunCompareEp(const Config& config, const std::string& dir,
                 const std::string& ep_path) {
  auto a = LoadArtifacts(dir, kNeedUtility);
  if (!a.ok()) return Fail(a.status());
  auto text = ReadFile(ep_path);
  if (!text.ok()) return Fail(text.status());
  auto rows = ParseEpCsv(*text);
  if (!rows.ok()) return Fail(rows.status());
  StateSpace space(a->max_dist());
  auto cmp = CompareExpectedPoints(*rows, space, *a->utility);
  if (!cmp.ok()) return Fail(cmp.status());
  const std::string out = JoinPath(dir, kEpCsv);
  if (auto st = WriteFile(out, cmp->ToCsv()); !st.ok()) return Fail(st);
  std::cout << "rows=" << cmp->rows << " matched=" << cmp->matched
            << " coverage=" << Fixed4(cmp->coverage) << "\n";
  std::cout << "correlation=" << Fixed4(cmp->correlation)
            << " mean_difference=" << Fixed4(cmp->mean_difference) << "\n";
  std::cout << "wrote " << out << "\n";
  Manifest m;
  m.command = "compare-ep";
  m.inputs = {ep_path, JoinPath(dir, kUtilityFile)};
  m.outputs = {out};
  m.parameters = {{"matched", cmp->matched},
                  {"coverage", cmp->coverage},
                  {"correlation", cmp->correlation},
                  {"mean_difference", cmp->mean_difference}};
  if (auto st = WriteManifest(dir, config, m); !st.ok()) return Fail(st);
  return 0;
}

int RunServe(const Config& config, const std::string& dir,
             const std::string& host, int port) {
  AdvisorService service(config);
  if (auto st = service.Load(dir); !st.ok()) return Fail(st);
  Manifest m;
  m.command = "serve";
  m.parameters = {{"host", host}, {"port", port}};
  if (auto st = WriteManifest(dir, config, m); !st.ok()) return Fail(st);
  httplib::Server server;
  service.Mount(&server);
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    return Fail(absl::UnavailableError(
        absl::StrCat("cannot listen on ", host, ":", port)));
  }
  return 0;
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"Football drive optimization engine"};
  app.require_subcommand(1);
  CommonFlags common;

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus CSV");
  std::string synth_out = "synthetic.csv";
  SyntheticOptions synth_options;
  synth->add_option("--out", synth_out, "Output CSV path");
  synth->add_option("--games", synth_options.games, "Games to simulate");
  synth->add_option("--first-season", synth_options.first_season,
                    "First season label");
  synth->add_option("--seasons", synth_options.seasons, "Season count");
  synth->add_option("--seed", synth_options.seed, "Generator seed");

  auto* fit = app.add_subcommand("fit", "Fit outcome models from a corpus");
  AddCommon(fit, &common);
  fit->add_option("--corpus", common.corpus, "Play-by-play CSV")->required();
  fit->add_option("--columns", common.columns, "Column map JSON");

  auto* build = app.add_subcommand("build-transitions",
                                   "Build transition rows from fitted models");
  AddCommon(build, &common);

  auto* solve = app.add_subcommand("solve", "Solve the normal-regime MDP");
  AddCommon(solve, &common);
  std::string demo;
  solve->add_option("--demo", demo, "Solve a bundled instance instead")
      ->check(CLI::IsMember({"five-state"}));

  auto* recommend =
      app.add_subcommand("recommend", "Best call and per-action values");
  AddCommon(recommend, &common);
  StateFlags rec_state;
  AddState(recommend, &rec_state);

  auto* curve = app.add_subcommand(
      "curve", "CSV of successor utility against resulting los");
  AddCommon(curve, &common);
  StateFlags curve_state;
  AddState(curve, &curve_state);

  auto* late = app.add_subcommand(
      "solve-lategame", "Win utility and best call in the final minutes");
  AddCommon(late, &common);
  LateFlags late_flags;
  AddState(late, &late_flags.state);
  late->add_option("--sd", late_flags.sd, "Score differential (offense)")
      ->required();
  late->add_option("--time", late_flags.time, "Seconds remaining")->required();
  late->add_option("--budget", late_flags.budget, "Node budget");
  late->add_option("--depth", late_flags.depth, "Lookahead depth");
  late->add_flag("--exhaustive", late_flags.exhaustive,
                 "Solve the whole game tree below the state");

  auto* simulate = app.add_subcommand(
      "simulate", "Optimal against historical play-caller, drive until score");
  AddCommon(simulate, &common);
  int sim_states = 100;
  int sim_reps = 20;
  simulate->add_option("--states", sim_states, "Starting states");
  simulate->add_option("--reps", sim_reps, "Games per side and state");

  auto* teams = app.add_subcommand(
      "score-teams", "Share of each team's calls that match the policy");
  AddCommon(teams, &common);
  teams->add_option("--corpus", common.corpus, "Held-out evaluation CSV")
      ->required();
  teams->add_option("--columns", common.columns, "Column map JSON");

  auto* calibrate =
      app.add_subcommand("calibrate", "Binned win-utility calibration");
  AddCommon(calibrate, &common);
  CalibrateFlags cal;
  calibrate->add_option("--source", cal.source, "Prediction source")
      ->check(CLI::IsMember({"synthetic", "corpus"}));
  calibrate->add_option("--n", cal.n, "Synthetic stream length");
  calibrate->add_option("--max-plays", cal.max_plays,
                        "Corpus plays to predict (0 for all)");
  calibrate->add_option("--corpus", common.corpus, "Play-by-play CSV");
  calibrate->add_option("--columns", common.columns, "Column map JSON");

  auto* compare = app.add_subcommand(
      "compare-ep",
      "Correlate utilities with an external expected-points file");
  AddCommon(compare, &common);
  std::string ep_path;
  compare->add_option("--ep", ep_path, "CSV with down, dist, los, ep")
      ->required();

  auto* serve = app.add_subcommand("serve", "HTTP JSON service");
  AddCommon(serve, &common);
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (synth->parsed()) {
    const std::string csv = GenerateCorpusCsv(SyntheticTruth(), synth_options);
    if (auto s = WriteFile(synth_out, csv); !s.ok()) return Fail(s);
    std::cout << "wrote " << synth_out << "\n";
    return 0;
  }
  if (solve->parsed() && !demo.empty()) return RunDemoSolve();

  auto config = ResolveConfig(common);
  if (!config.ok()) return Fail(config.status());

  if (fit->parsed()) {
    auto corpus = LoadCorpus(common.corpus, common.columns);
    if (!corpus.ok()) return Fail(corpus.status());
    const ParseReport& r = corpus->report;
    std::cerr << "rows=" << r.rows << " kept=" << r.kept
              << " no_play=" << r.dropped_no_play
              << " other=" << r.dropped_other << " malformed=" << r.malformed
              << "\n";
    for (const std::string& w : r.warnings)
      std::cerr << "warning: " << w << "\n";
    if (auto s = StepFit(*corpus, common.corpus, *config, common.store);
        !s.ok()) {
      return Fail(s);
    }
    std::cout << "wrote " << JoinPath(common.store, kModelsFile) << "\n";
    return 0;
  }
  if (build->parsed()) {
    if (auto s = StepBuildTransitions(*config, common.store); !s.ok()) {
      return Fail(s);
    }
    std::cout << "wrote " << JoinPath(common.store, kTransitionsFile) << "\n";
    return 0;
  }
  if (solve->parsed()) {
    if (auto s = StepSolve(*config, common.store); !s.ok()) return Fail(s);
    auto table = LoadUtility(common.store);
    if (!table.ok()) return Fail(table.status());
    std::cout << "sweeps=" << table->sweeps
              << " final_delta=" << table->final_delta
              << " converged=" << (table->converged ? "yes" : "no") << "\n";
    return table->converged ? 0 : 2;
  }
  if (recommend->parsed()) {
    auto table = LoadUtility(common.store);
    if (!table.ok()) return Fail(table.status());
    StateSpace space(table->max_dist);
    auto rec =
        Recommend(space, *table,
                  GameState{rec_state.down, rec_state.dist, rec_state.los});
    if (!rec.ok()) return Fail(rec.status());
    std::cout << "state=" << ToString(rec->state) << "\n";
    std::cout << "action="
              << (rec->action ? std::string(ActionName(*rec->action)) : "NONE")
              << "\n";
    std::cout << "utility=" << Fixed4(rec->utility) << "\n";
    for (int a = 0; a < kNumScrimmageActions; ++a) {
      std::cout << ActionName(kScrimmageActions[a]) << "="
                << ValueText(rec->values[a]) << "\n";
    }
    Manifest m;
    m.command = "recommend";
    m.inputs.push_back(JoinPath(common.store, kUtilityFile));
    m.parameters = {{"state", ToString(rec->state)}};
    if (auto s = WriteManifest(common.store, *config, m); !s.ok()) {
      return Fail(s);
    }
    return 0;
  }
  if (curve->parsed()) {
    auto table = LoadUtility(common.store);
    if (!table.ok()) return Fail(table.status());
    StateSpace space(table->max_dist);
    const GameState s{curve_state.down, curve_state.dist, curve_state.los};
    auto points = UtilityCurve(space, *table, s);
    if (!points.ok()) return Fail(points.status());
    std::cout << "resulting_los,gain,successor,utility\n";
    for (const CurvePoint& p : *points) {
      std::cout << p.resulting_los << "," << p.gain << "," << p.successor << ","
                << Fixed4(p.utility) << "\n";
    }
    Manifest m;
    m.command = "curve";
    m.inputs.push_back(JoinPath(common.store, kUtilityFile));
    m.parameters = {{"state", ToString(s)}};
    if (auto st = WriteManifest(common.store, *config, m); !st.ok()) {
      return Fail(st);
    }
    return 0;
  }
  if (late->parsed())
    return RunSolveLateGame(*config, common.store, late_flags);
  if (simulate->parsed()) {
    return RunSimulate(*config, common.store, sim_states, sim_reps);
  }
  if (teams->parsed()) {
    return RunScoreTeams(*config, common.store, common.corpus, common.columns);
  }
  if (calibrate->parsed()) {
    return RunCalibrate(*config, common.store, common, cal);
  }
  if (compare->parsed()) return RunCompareEp(*config, common.store, ep_path);
  if (serve->parsed()) return RunServe(*config, common.store, host, port);
  return 0;
}

}  // namespace driveopt

int main(int argc, char** argv) { return driveopt::Main(argc, argv); }
