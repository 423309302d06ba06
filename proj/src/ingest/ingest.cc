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

#include "driveopt/ingest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "nlohmann/json.hpp"

namespace driveopt {
namespace {

constexpr int kHalfSeconds = 1800;
constexpr size_t kMaxWarnings = 1000;

// Cursor over RFC 4180 text; quoted fields may span lines.
class CsvReader {
 public:
  explicit CsvReader(const std::string& text) : text_(text) {}

  bool Next(std::vector<std::string>* fields) {
    fields->clear();
    if (pos_ >= text_.size()) return false;
    std::string field;
    bool quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields->push_back(std::move(field));
        field.clear();
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        break;
      } else {
        field.push_back(c);
      }
    }
    fields->push_back(std::move(field));
    return true;
  }

 private:
  const std::string& text_;
  size_t pos_ = 0;
};

bool IsMissing(absl::string_view s) {
  s = absl::StripAsciiWhitespace(s);
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

// Accepts "4" and "4.0"; rejects fractional values.
std::optional<int> ParseInt(absl::string_view s) {
  if (IsMissing(s)) return std::nullopt;
  s = absl::StripAsciiWhitespace(s);
  int v;
  if (absl::SimpleAtoi(s, &v)) return v;
  double d;
  if (absl::SimpleAtod(s, &d) && std::isfinite(d) && d == std::floor(d) &&
      std::abs(d) < 1e9) {
    return static_cast<int>(d);
  }
  return std::nullopt;
}

std::optional<bool> ParseFlag(absl::string_view s) {
  if (IsMissing(s)) return false;
  s = absl::StripAsciiWhitespace(s);
  if (s == "TRUE" || s == "true" || s == "True") return true;
  if (s == "FALSE" || s == "false" || s == "False") return false;
  auto v = ParseInt(s);
  if (!v.has_value() || (*v != 0 && *v != 1)) return std::nullopt;
  return *v == 1;
}

std::optional<PlayType> ParsePlayType(absl::string_view s) {
  if (s == "run") return PlayType::kRun;
  if (s == "pass") return PlayType::kPass;
  if (s == "punt") return PlayType::kPunt;
  if (s == "field_goal") return PlayType::kFieldGoal;
  if (s == "kickoff") return PlayType::kKickoff;
  return std::nullopt;
}

struct RowClock {
  std::string game_id;
  std::optional<int> clock;
};

class RowParser {
 public:
  RowParser(const std::vector<std::string>& header, const ColumnMap& columns)
      : columns_(columns) {
    for (size_t i = 0; i < header.size(); ++i) {
      index_[std::string(absl::StripAsciiWhitespace(header[i]))] =
          static_cast<int>(i);
    }
  }

  absl::Status CheckRequired() const {
    for (const auto& name : ColumnMap::RequiredColumns()) {
      if (!index_.contains(columns_.Header(name))) {
        return absl::InvalidArgumentError(absl::StrCat(
            "missing required column '", columns_.Header(name), "'",
            columns_.Header(name) == name ? ""
                                          : absl::StrCat(" (for ", name, ")")));
      }
    }
    return absl::OkStatus();
  }

  absl::string_view Get(const std::vector<std::string>& row,
                        const std::string& canonical) const {
    auto it = index_.find(columns_.Header(canonical));
    if (it == index_.end() || it->second >= static_cast<int>(row.size())) {
      return {};
    }
    return row[it->second];
  }

 private:
  const ColumnMap& columns_;
  std::map<std::string, int> index_;
};

// Fills `record` from a kept row; returns an error message on malformed input.
std::string FillRecord(const RowParser& p, const std::vector<std::string>& row,
                       PlayType type, PlayRecord* r) {
  r->type = type;
  r->game_id = std::string(p.Get(row, "game_id"));
  r->offense = std::string(p.Get(row, "posteam"));
  if (auto season = ParseInt(p.Get(row, "season"))) r->season = *season;

  auto clock = ParseInt(p.Get(row, "game_seconds_remaining"));
  if (!clock.has_value() || *clock < 0) return "bad game_seconds_remaining";
  r->clock_seconds = *clock;
  auto sd = ParseInt(p.Get(row, "score_differential"));
  if (!sd.has_value()) return "bad score_differential";
  r->score_differential = *sd;
  if (auto fsd = ParseInt(p.Get(row, "final_score_differential"))) {
    r->final_score_differential = *fsd;
  }
  auto fumble = ParseFlag(p.Get(row, "fumble_lost"));
  if (!fumble.has_value()) return "bad fumble_lost";
  r->fumble_lost = *fumble;

  auto los = ParseInt(p.Get(row, "yardline_100"));
  if (type == PlayType::kKickoff) {
    r->los = los.value_or(0);
  } else {
    if (!los.has_value() || *los < kMinLos || *los > kMaxLos) {
      return "bad yardline_100";
    }
    r->los = *los;
  }
  auto result = ParseInt(p.Get(row, "result_yardline_100"));
  if (result.has_value()) {
    if (*result < 0 || *result > kMaxLos) return "bad result_yardline_100";
    r->result_los = *result;
  }

  auto gained = ParseInt(p.Get(row, "yards_gained"));
  if (type == PlayType::kFieldGoal) {
    absl::string_view fg =
        absl::StripAsciiWhitespace(p.Get(row, "field_goal_result"));
    if (!IsMissing(fg)) r->field_goal_made = (fg == "made");
  }
  if (type == PlayType::kKickoff || type == PlayType::kPunt ||
      type == PlayType::kFieldGoal) {
    r->yards_gained = gained.value_or(0);
    auto down = ParseInt(p.Get(row, "down"));
    auto dist = ParseInt(p.Get(row, "ydstogo"));
    if (type != PlayType::kKickoff && down.has_value() && dist.has_value()) {
      r->down = *down;
      r->dist = *dist;
      r->fourth_down_attempt = false;
    }
    return "";
  }

  auto down = ParseInt(p.Get(row, "down"));
  auto dist = ParseInt(p.Get(row, "ydstogo"));
  if (!down.has_value() || *down < 1 || *down > 4) return "bad down";
  if (!dist.has_value() || *dist < 1 || *dist > r->los) return "bad ydstogo";
  if (!gained.has_value() || *gained > r->los || *gained < r->los - 100) {
    return "yards_gained outside physical bounds";
  }
  r->down = *down;
  r->dist = *dist;
  r->yards_gained = *gained;
  r->fourth_down_attempt = (*down == 4);

  if (type == PlayType::kPass) {
    auto complete = ParseFlag(p.Get(row, "complete_pass"));
    auto incomplete = ParseFlag(p.Get(row, "incomplete_pass"));
    auto interception = ParseFlag(p.Get(row, "interception"));
    auto sack = ParseFlag(p.Get(row, "sack"));
    if (!complete || !incomplete || !interception || !sack) {
      return "bad pass result flags";
    }
    if (*interception) {
      r->pass_result = PassResult::kInterception;
    } else if (*sack) {
      r->pass_result = PassResult::kSack;
    } else if (*complete) {
      r->pass_result = PassResult::kComplete;
    } else if (*incomplete) {
      r->pass_result = PassResult::kIncomplete;
    } else {
      return "pass without a result flag";
    }
  }
  return "";
}

}  // namespace

std::string_view PlayTypeName(PlayType type) {
  switch (type) {
    case PlayType::kRun:
      return "run";
    case PlayType::kPass:
      return "pass";
    case PlayType::kPunt:
      return "punt";
    case PlayType::kFieldGoal:
      return "field_goal";
    case PlayType::kKickoff:
      return "kickoff";
  }
  return "?";
}

ColumnMap::ColumnMap() {
  for (const auto& name : RequiredColumns()) names_[name] = name;
  for (const auto& name : OptionalColumns()) names_[name] = name;
}

const std::vector<std::string>& ColumnMap::RequiredColumns() {
  static const auto* const kRequired =
      new std::vector<std::string>{"down",
                                   "ydstogo",
                                   "yardline_100",
                                   "play_type",
                                   "yards_gained",
                                   "complete_pass",
                                   "incomplete_pass",
                                   "interception",
                                   "sack",
                                   "fumble_lost",
                                   "game_seconds_remaining",
                                   "score_differential",
                                   "posteam"};
  return *kRequired;
}

const std::vector<std::string>& ColumnMap::OptionalColumns() {
  static const auto* const kOptional = new std::vector<std::string>{
      "season", "game_id", "field_goal_result", "result_yardline_100",
      "final_score_differential"};
  return *kOptional;
}

const std::string& ColumnMap::Header(const std::string& canonical) const {
  auto it = names_.find(canonical);
  return it == names_.end() ? canonical : it->second;
}

void ColumnMap::Set(const std::string& canonical, const std::string& header) {
  names_[canonical] = header;
}

absl::StatusOr<ColumnMap> ColumnMap::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": ", e.what()));
  }
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": expected an object of column renames"));
  }
  ColumnMap map;
  for (const auto& [key, value] : j.items()) {
    if (!map.names_.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": unknown column '", key, "'"));
    }
    if (!value.is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": column '", key, "' must map to a string"));
    }
    map.Set(key, value.get<std::string>());
  }
  return map;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  CsvReader reader(line);
  reader.Next(&fields);
  return fields;
}

absl::StatusOr<Corpus> ParseCorpus(const std::string& path,
                                   const ColumnMap& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCorpusText(buffer.str(), columns);
}

absl::StatusOr<Corpus> ParseCorpusText(const std::string& text,
                                       const ColumnMap& columns) {
  CsvReader reader(text);
  std::vector<std::string> header;
  if (!reader.Next(&header) || (header.size() == 1 && header[0].empty())) {
    return absl::InvalidArgumentError("missing header row");
  }
  RowParser parser(header, columns);
  if (auto status = parser.CheckRequired(); !status.ok()) return status;

  Corpus corpus;
  ParseReport& report = corpus.report;
  std::vector<RowClock> clocks;
  // Record index -> row index, to attach elapsed times afterwards.
  std::vector<size_t> row_of_record;
  std::vector<std::string> row;
  int64_t line = 1;
  while (reader.Next(&row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;
    ++report.rows;
    clocks.push_back({std::string(parser.Get(row, "game_id")),
                      ParseInt(parser.Get(row, "game_seconds_remaining"))});
    auto warn = [&](absl::string_view why) {
      ++report.malformed;
      if (report.warnings.size() < kMaxWarnings) {
        report.warnings.push_back(absl::StrCat("line ", line, ": ", why));
      }
    };
    if (row.size() != header.size()) {
      warn(absl::StrCat("expected ", header.size(), " fields, found ",
                        row.size()));
      continue;
    }
    absl::string_view label =
        absl::StripAsciiWhitespace(parser.Get(row, "play_type"));
    if (label == "no_play") {
      ++report.dropped_no_play;
      continue;
    }
    auto type = ParsePlayType(label);
    if (!type.has_value()) {
      ++report.dropped_other;
      continue;
    }
    PlayRecord record;
    std::string error = FillRecord(parser, row, *type, &record);
    if (!error.empty()) {
      warn(error);
      continue;
    }
    corpus.records.push_back(std::move(record));
    row_of_record.push_back(clocks.size() - 1);
  }

  for (size_t i = 0; i < corpus.records.size(); ++i) {
    const size_t r = row_of_record[i];
    if (r + 1 >= clocks.size()) continue;
    const RowClock& here = clocks[r];
    const RowClock& next = clocks[r + 1];
    if (!here.clock.has_value() || !next.clock.has_value()) continue;
    if (here.game_id != next.game_id) continue;
    if (*here.clock > kHalfSeconds && *next.clock <= kHalfSeconds) continue;
    const int elapsed = *here.clock - *next.clock;
    if (elapsed < 0) continue;
    corpus.records[i].elapsed_seconds = elapsed;
  }
  report.kept = static_cast<int64_t>(corpus.records.size());
  return corpus;
}

double ScaleBorrowedGain(double gain, int dist_borrow, int dist_target,
                         int los_target, double max_scale) {
  const double ratio =
      static_cast<double>(dist_target) / static_cast<double>(dist_borrow);
  const double scale = ratio > 1.0 ? std::min(max_scale, ratio) : 1.0;
  double scaled = gain * scale;
  if (gain < dist_borrow && scaled >= dist_target) scaled = dist_target - 0.5;
  return std::clamp(scaled, static_cast<double>(los_target - 100),
                    static_cast<double>(los_target));
}

absl::StatusOr<PlayMatcher> PlayMatcher::Create(
    const std::vector<PlayRecord>& corpus, const MatchConfig& config) {
  PlayMatcher m(&corpus, config);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  int n = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const PlayRecord& r = corpus[i];
    if (!r.is_scrimmage()) continue;
    Eigen::Vector3d x(r.down, r.dist, r.los);
    mean += x;
    second += x * x.transpose();
    ++n;
    if (r.type == PlayType::kRun) {
      if (!r.fumble_lost) m.pools_[0][r.down].push_back(static_cast<int>(i));
    } else {
      m.pools_[1][r.down].push_back(static_cast<int>(i));
    }
  }
  if (n < 2) {
    return absl::FailedPreconditionError(
        "matching needs at least two scrimmage plays");
  }
  mean /= n;
  m.covariance_ = (second - n * mean * mean.transpose()) / (n - 1);
  m.covariance_ += config.ridge * Eigen::Matrix3d::Identity();
  Eigen::LLT<Eigen::Matrix3d> llt(m.covariance_);
  if (llt.info() != Eigen::Success) {
    return absl::FailedPreconditionError(
        "scrimmage covariance is not positive definite");
  }
  m.precision_ = llt.solve(Eigen::Matrix3d::Identity());
  m.precision_ = 0.5 * (m.precision_ + m.precision_.transpose());
  return m;
}

double PlayMatcher::Distance(const GameState& a, const GameState& b) const {
  Eigen::Vector3d d(a.down - b.down, a.dist - b.dist, a.los - b.los);
  return std::sqrt(std::max(0.0, d.dot(precision_ * d)));
}

absl::StatusOr<MatchedSample> PlayMatcher::Match(const GameState& target,
                                                 Action action, int k) const {
  if (action != Action::kRun && action != Action::kPass) {
    return absl::InvalidArgumentError(absl::StrCat(
        "no matching for action ", std::string(ActionName(action))));
  }
  if (target.down < 1 || target.down > 4 || target.los < kMinLos ||
      target.los > kMaxLos || target.dist < 1 || target.dist > target.los) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid target ", ToString(target)));
  }
  const int family = action == Action::kRun ? 0 : 1;
  std::vector<std::pair<double, int>> scored;
  auto add_pool = [&](int down) {
    for (int idx : pools_[family][down]) {
      scored.emplace_back(Distance(target, (*corpus_)[idx].state()), idx);
    }
  };
  add_pool(target.down);
  if (target.down == 4) add_pool(3);
  if (scored.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("no ", std::string(ActionName(action)), " plays to match ",
                     ToString(target)));
  }
  MatchedSample sample;
  sample.target = target;
  sample.action = action;
  sample.shortfall = static_cast<int>(scored.size()) < k;
  const size_t take = std::min(scored.size(), static_cast<size_t>(k));
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end());
  sample.plays.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    const PlayRecord& r = (*corpus_)[scored[i].second];
    MatchedPlay play;
    play.record_index = scored[i].second;
    play.distance = scored[i].first;
    const double ratio = static_cast<double>(target.dist) / r.dist;
    play.scale = ratio > 1.0 ? std::min(config_.max_scale, ratio) : 1.0;
    play.scaled_gain = ScaleBorrowedGain(r.yards_gained, r.dist, target.dist,
                                         target.los, config_.max_scale);
    sample.plays.push_back(play);
  }
  return sample;
}

}  // namespace driveopt
