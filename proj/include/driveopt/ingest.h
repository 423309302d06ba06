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

// Play-by-play ingestion and matched-sample selection.

#ifndef DRIVEOPT_INGEST_H_
#define DRIVEOPT_INGEST_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "driveopt/config.h"
#include "driveopt/statespace.h"

namespace driveopt {

enum class PlayType : uint8_t {
  kRun,
  kPass,
  kPunt,
  kFieldGoal,
  kKickoff,
};

std::string_view PlayTypeName(PlayType type);

enum class PassResult : uint8_t {
  kNotApplicable,
  kComplete,
  kIncomplete,
  kInterception,
  kSack,
};

struct PlayRecord {
  int season = 0;
  std::string game_id;
  std::string offense;
  // Zero for kickoffs, which carry no down/distance.
  int down = 0;
  int dist = 0;
  int los = 0;
  PlayType type = PlayType::kRun;
  int yards_gained = 0;
  PassResult pass_result = PassResult::kNotApplicable;
  bool fumble_lost = false;
  int clock_seconds = 0;
  int score_differential = 0;
  bool fourth_down_attempt = false;

  // Seconds until the next snap of the same half, when derivable.
  std::optional<int> elapsed_seconds;
  // Punts and kickoffs: the receiving team's los at its first snap;
  // 0 means the return went for a touchdown.
  std::optional<int> result_los;
  std::optional<bool> field_goal_made;
  // Final margin from this offense's point of view, when known.
  std::optional<int> final_score_differential;

  GameState state() const { return GameState{down, dist, los}; }
  bool is_scrimmage() const {
    return type == PlayType::kRun || type == PlayType::kPass;
  }
};

// Maps canonical column names to the header names of a particular file.
class ColumnMap {
 public:
  ColumnMap();
  static absl::StatusOr<ColumnMap> FromFile(const std::string& path);

  const std::string& Header(const std::string& canonical) const;
  void Set(const std::string& canonical, const std::string& header);

  static const std::vector<std::string>& RequiredColumns();
  static const std::vector<std::string>& OptionalColumns();

 private:
  std::map<std::string, std::string> names_;
};

struct ParseReport {
  int64_t rows = 0;
  int64_t kept = 0;
  int64_t dropped_no_play = 0;
  int64_t dropped_other = 0;
  int64_t malformed = 0;
  std::vector<std::string> warnings;
};

struct Corpus {
  std::vector<PlayRecord> records;
  ParseReport report;
};

// Reads a play-by-play CSV. A missing required column is fatal; a malformed
// row is skipped with a warning; penalty-voided rows ("no_play") and
// unmodelled play types are dropped and counted.
absl::StatusOr<Corpus> ParseCorpus(const std::string& path,
                                   const ColumnMap& columns = ColumnMap());
absl::StatusOr<Corpus> ParseCorpusText(const std::string& text,
                                       const ColumnMap& columns = ColumnMap());

// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> SplitCsvLine(const std::string& line);

struct MatchedPlay {
  int record_index = 0;
  double scale = 1.0;
  double scaled_gain = 0.0;
  double distance = 0.0;
};

struct MatchedSample {
  GameState target;
  Action action = Action::kRun;
  std::vector<MatchedPlay> plays;
  // Fewer than k candidates existed.
  bool shortfall = false;
};

// Rescales a borrowed gain into the target's distance context: inflates by
// min(max_scale, dist_target / dist_borrow) when that ratio exceeds one,
// never turns a failed conversion into a successful one, and clamps to the
// physical range [los - 100, los].
double ScaleBorrowedGain(double gain, int dist_borrow, int dist_target,
                         int los_target, double max_scale);

// Nearest-neighbour selection of matched plays by Mahalanobis distance over
// (down, dist, los). The corpus must outlive the matcher.
class PlayMatcher {
 public:
  static absl::StatusOr<PlayMatcher> Create(
      const std::vector<PlayRecord>& corpus, const MatchConfig& config);

  // Only kRun and kPass are matched. Down is matched exactly except that a
  // fourth-down target may borrow third-down plays.
  absl::StatusOr<MatchedSample> Match(const GameState& target, Action action,
                                      int k) const;

  const Eigen::Matrix3d& covariance() const { return covariance_; }
  double Distance(const GameState& a, const GameState& b) const;

 private:
  PlayMatcher(const std::vector<PlayRecord>* corpus, MatchConfig config)
      : corpus_(corpus), config_(config) {}

  const std::vector<PlayRecord>* corpus_;
  MatchConfig config_;
  Eigen::Matrix3d covariance_;
  Eigen::Matrix3d precision_;
  // Candidate record indices by family (0 run, 1 pass) and down (1..4).
  std::vector<int> pools_[2][5];
};

}  // namespace driveopt

#endif  // DRIVEOPT_INGEST_H_
