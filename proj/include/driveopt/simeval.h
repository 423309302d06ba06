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

// Policy evaluation: simulated matchups against a historical play-caller,
// team agreement with the policy, calibration of win utilities and
// agreement with an external expected-points model.

#ifndef DRIVEOPT_SIMEVAL_H_
#define DRIVEOPT_SIMEVAL_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "driveopt/config.h"
#include "driveopt/football.h"
#include "driveopt/ingest.h"
#include "driveopt/statespace.h"
#include "driveopt/transitions.h"

namespace driveopt {

// Rows of a transition table by state and action; missing rows are null.
class RowIndex {
 public:
  RowIndex(const StateSpace& space, const TransitionTable& table);
  const TransitionRow* Find(const GameState& s, Action a) const;

 private:
  const StateSpace& space_;
  std::vector<std::array<const TransitionRow*, kNumScrimmageActions>> rows_;
};

// Inverse-CDF draw of one entry of a non-empty row.
const TransitionEntry& SampleEntry(const TransitionRow& row,
                                   std::mt19937_64& rng);

class Caller {
 public:
  virtual ~Caller() = default;
  // Picks one of the actions whose rows exist at `s`.
  virtual Action Choose(const GameState& s, const RowIndex& rows,
                        std::mt19937_64& rng) const = 0;
};

// Always the table's greedy action.
class OptimalCaller : public Caller {
 public:
  OptimalCaller(const StateSpace& space, const UtilityTable& table)
      : space_(space), table_(table) {}
  Action Choose(const GameState& s, const RowIndex& rows,
                std::mt19937_64& rng) const override;

 private:
  const StateSpace& space_;
  const UtilityTable& table_;
};

inline constexpr char kCallerSchema[] = "driveopt.caller/1";

// Empirical play-type frequencies by down, distance bucket and field zone.
class HistoricalCaller : public Caller {
 public:
  static constexpr int kBuckets = 4;
  static constexpr int kZones = 4;
  static constexpr int kConditions = 4 * kBuckets * kZones;

  HistoricalCaller() = default;
  // Uses plays from `seasons`, or every season when empty.
  static HistoricalCaller Fit(const std::vector<PlayRecord>& corpus,
                              const std::vector<int>& seasons,
                              const SimConfig& config);

  int DistBucket(int dist) const;
  int Zone(int los) const;
  int Condition(const GameState& s) const;

  // Call counts and probabilities in RUN, PASS, FG, PUNT order. Conditions
  // without plays borrow the pooled frequencies of their down, then of the
  // whole corpus.
  const std::array<int64_t, kNumScrimmageActions>& counts(int c) const {
    return counts_[c];
  }
  const std::array<double, kNumScrimmageActions>& probabilities(int c) const {
    return probabilities_[c];
  }

  Action Choose(const GameState& s, const RowIndex& rows,
                std::mt19937_64& rng) const override;

  std::string Serialize() const;
  static absl::StatusOr<HistoricalCaller> Deserialize(const std::string& text);

  std::vector<int> seasons;

 private:
  void Finish();

  SimConfig config_;
  std::array<std::array<int64_t, kNumScrimmageActions>, kConditions> counts_{};
  std::array<std::array<double, kNumScrimmageActions>, kConditions>
      probabilities_{};
};

// ---------------------------------------------------------------- matchups

struct MatchupRow {
  GameState start;
  double utility = 0.0;
  // Mean points for the side that started on offense, and standard errors.
  double first_mean = 0.0;
  double first_se = 0.0;
  double second_mean = 0.0;
  double second_se = 0.0;
};

inline constexpr char kSimulationSchema[] = "driveopt.simulation/1";

struct SimulationReport {
  uint64_t seed = 0;
  int reps = 0;
  std::vector<MatchupRow> rows;
  // Drives stopped by the possession cap.
  int64_t capped = 0;

  double FirstMean() const;
  double SecondMean() const;

  std::string ToCsv() const;
  std::string ToJson() const;
};

// Starting states: first down is 1st & 10 (or goal); other downs draw dist
// below 15.
std::vector<GameState> SampleStartStates(const StateSpace& space, int n,
                                         uint64_t seed);

// Plays one game from `start` with `first` on offense until a score. Points
// are from the first caller's side; `capped` is set when the possession cap
// ends the game scoreless.
int PlayUntilScore(const GameState& start, const Caller& first,
                   const Caller& second, const RowIndex& rows,
                   int possession_cap, std::mt19937_64& rng, bool* capped);

// For each start state, `reps` games with caller A starting and `reps` with
// caller B starting. The "first" columns report A-first games from A's side
// and the "second" columns B-first games from B's side.
SimulationReport SimulateMatchups(const StateSpace& space,
                                  const TransitionTable& table,
                                  const UtilityTable& utility, const Caller& a,
                                  const Caller& b, int n_states, int reps,
                                  uint64_t seed, const SimConfig& config,
                                  int jobs = 1);

// ---------------------------------------------------------------- teams

struct TeamScore {
  std::string team;
  int64_t plays = 0;
  int64_t agreed = 0;
  double fraction = 0.0;
};

struct TeamReport {
  std::vector<TeamScore> teams;
  std::vector<std::string> notes;
  std::string ToCsv() const;
};

// Share of each team's run and pass calls that match the policy. The dist of
// a play is capped to the state space.
TeamReport ScoreTeamOptimality(const std::vector<PlayRecord>& eval,
                               const StateSpace& space,
                               const UtilityTable& table);

// ---------------------------------------------------------------- calibration

struct Prediction {
  double utility = 0.0;
  // 1 win, 0.5 tie, 0 loss.
  double outcome = 0.0;
};

struct CalibrationBin {
  int index = 0;
  int64_t n = 0;
  double mean_prediction = 0.0;
  double mean_outcome = 0.0;
  double gap() const { return mean_prediction - mean_outcome; }
};

struct CalibrationReport {
  // Populated 1% bins only.
  std::vector<CalibrationBin> bins;
  double max_abs_gap = 0.0;
  std::string ToCsv() const;
};

absl::StatusOr<CalibrationReport> Calibrate(
    const std::vector<Prediction>& predictions);

// Uniform utilities with Bernoulli(utility) outcomes: calibrated by
// construction.
std::vector<Prediction> CalibratedStream(int n, uint64_t seed);

// ---------------------------------------------------------------- EP

struct EpRow {
  GameState state;
  double ep = 0.0;
};

// CSV with columns down, dist, los, ep.
absl::StatusOr<std::vector<EpRow>> ParseEpCsv(const std::string& text);

struct EpPoint {
  GameState state;
  double utility = 0.0;
  double ep = 0.0;
};

struct EpComparison {
  int64_t rows = 0;
  int64_t matched = 0;
  // Matched states over the size of the state space.
  double coverage = 0.0;
  double correlation = 0.0;
  // Mean of U - EP.
  double mean_difference = 0.0;
  std::vector<EpPoint> points;
  std::string ToCsv() const;
};

absl::StatusOr<EpComparison> CompareExpectedPoints(
    const std::vector<EpRow>& rows, const StateSpace& space,
    const UtilityTable& table);

}  // namespace driveopt

#endif  // DRIVEOPT_SIMEVAL_H_
