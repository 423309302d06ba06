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

#include "driveopt/statespace.h"

#include <algorithm>

#include "absl/strings/str_cat.h"

namespace driveopt {

std::string ToString(const GameState& state) {
  return absl::StrCat("(", state.down, ",", state.dist, ",", state.los, ")");
}

std::string_view ActionName(Action action) {
  switch (action) {
    case Action::kRun:
      return "RUN";
    case Action::kPass:
      return "PASS";
    case Action::kFieldGoal:
      return "FG";
    case Action::kPunt:
      return "PUNT";
    case Action::kExtraPoint:
      return "XP";
    case Action::kTwoPoint:
      return "TWO_POINT";
  }
  return "?";
}

absl::StatusOr<Action> ParseAction(std::string_view name) {
  for (Action a : {Action::kRun, Action::kPass, Action::kFieldGoal,
                   Action::kPunt, Action::kExtraPoint, Action::kTwoPoint}) {
    if (ActionName(a) == name) return a;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown action: ", std::string(name)));
}

int TerminalReward(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::kOffTouchdown:
      return 7;
    case TerminalKind::kOffFieldGoal:
      return 3;
    case TerminalKind::kSafety:
      return -2;
    case TerminalKind::kDefTouchdown:
      return -7;
  }
  return 0;
}

std::string_view TerminalName(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::kOffTouchdown:
      return "TD";
    case TerminalKind::kOffFieldGoal:
      return "FG";
    case TerminalKind::kSafety:
      return "SAFETY";
    case TerminalKind::kDefTouchdown:
      return "DEF_TD";
  }
  return "?";
}

Successor Successor::Terminal(TerminalKind kind) {
  Successor s;
  s.kind = Kind::kTerminal;
  s.terminal = kind;
  s.state = GameState{0, 0, 0};
  return s;
}

Successor Successor::Offense(const GameState& state) {
  Successor s;
  s.kind = Kind::kOffense;
  s.state = state;
  return s;
}

Successor Successor::Defense(int defense_los) {
  Successor s;
  s.kind = Kind::kDefense;
  s.state = CanonicalFirstDown(defense_los);
  return s;
}

int Successor::Slot() const {
  switch (kind) {
    case Kind::kTerminal:
      return static_cast<int>(terminal);
    case Kind::kOffense:
      return kNumTerminals + state.los - 1;
    case Kind::kDefense:
      return kNumTerminals + kMaxLos + state.los - 1;
  }
  return -1;
}

bool operator==(const Successor& a, const Successor& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Successor::Kind::kTerminal) return a.terminal == b.terminal;
  return a.state == b.state;
}

std::string ToString(const Successor& successor) {
  switch (successor.kind) {
    case Successor::Kind::kTerminal:
      return std::string(TerminalName(successor.terminal));
    case Successor::Kind::kOffense:
      return absl::StrCat("OFF", ToString(successor.state));
    case Successor::Kind::kDefense:
      return absl::StrCat("DEF", ToString(successor.state));
  }
  return "?";
}

GameState CanonicalFirstDown(int los) {
  return GameState{1, std::min(10, los), los};
}

StateSpace::StateSpace(int max_dist) : max_dist_(std::max(10, max_dist)) {
  block_offset_.assign(4 * kMaxLos, 0);
  for (int down = 1; down <= 4; ++down) {
    for (int los = kMinLos; los <= kMaxLos; ++los) {
      block_offset_[(down - 1) * kMaxLos + (los - 1)] =
          static_cast<int>(states_.size());
      const int top = std::min(los, max_dist_);
      for (int dist = 1; dist <= top; ++dist) {
        states_.push_back(GameState{down, dist, los});
      }
    }
  }
}

bool StateSpace::IsValid(const GameState& s) const {
  return s.down >= 1 && s.down <= 4 && s.los >= kMinLos && s.los <= kMaxLos &&
         s.dist >= 1 && s.dist <= std::min(s.los, max_dist_);
}

int StateSpace::IndexOf(const GameState& s) const {
  if (!IsValid(s)) return -1;
  return block_offset_[(s.down - 1) * kMaxLos + (s.los - 1)] + s.dist - 1;
}

std::vector<GameState> StateSpace::SemiTerminalStates() const {
  std::vector<GameState> out;
  out.reserve(kMaxLos);
  for (int los = kMinLos; los <= kMaxLos; ++los) {
    out.push_back(CanonicalFirstDown(los));
  }
  return out;
}

absl::StatusOr<Successor> StateSpace::Advance(const GameState& s,
                                              int gain) const {
  if (!IsValid(s)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid state ", ToString(s)));
  }
  if (gain > s.los || gain < s.los - 100) {
    return absl::OutOfRangeError(absl::StrCat("gain ", gain, " outside [",
                                              s.los - 100, ", ", s.los, "] at ",
                                              ToString(s)));
  }
  if (gain == s.los) return Successor::Terminal(TerminalKind::kOffTouchdown);
  if (gain == s.los - 100) return Successor::Terminal(TerminalKind::kSafety);
  const int next_los = s.los - gain;
  if (gain >= s.dist) return Successor::Offense(CanonicalFirstDown(next_los));
  if (s.down == 4) return Successor::Defense(100 - next_los);
  const int next_dist = std::min({s.dist - gain, next_los, max_dist_});
  return Successor::Offense(GameState{s.down + 1, next_dist, next_los});
}

}  // namespace driveopt
