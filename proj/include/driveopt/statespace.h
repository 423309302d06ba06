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

// State and action vocabulary for a single offensive possession.
//
// Field position is measured as `los`: yards between the line of scrimmage and
// the opponent's goal line, so los = 1 is one yard from a touchdown and
// los = 99 is the offense's own 1-yard line. A gain of `los` yards is a
// touchdown, a gain of `los - 100` yards is a safety.

#ifndef DRIVEOPT_STATESPACE_H_
#define DRIVEOPT_STATESPACE_H_

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace driveopt {

inline constexpr int kMinLos = 1;
inline constexpr int kMaxLos = 99;
inline constexpr int kDefaultMaxDist = 30;
inline constexpr int kTouchbackLos = 80;

struct GameState {
  int down = 1;
  int dist = 10;
  int los = 75;

  friend auto operator<=>(const GameState&, const GameState&) = default;
};

std::string ToString(const GameState& state);

// RUN < PASS < FG < PUNT is also the argmax tie-break order.
enum class Action : uint8_t {
  kRun = 0,
  kPass = 1,
  kFieldGoal = 2,
  kPunt = 3,
  kExtraPoint = 4,
  kTwoPoint = 5,
};

inline constexpr std::array<Action, 4> kScrimmageActions = {
    Action::kRun, Action::kPass, Action::kFieldGoal, Action::kPunt};
inline constexpr int kNumScrimmageActions = 4;

std::string_view ActionName(Action action);
absl::StatusOr<Action> ParseAction(std::string_view name);

enum class TerminalKind : uint8_t {
  kOffTouchdown = 0,
  kOffFieldGoal = 1,
  kSafety = 2,
  kDefTouchdown = 3,
};

inline constexpr int kNumTerminals = 4;

// Points to the offense: +7, +3, -2, -7.
int TerminalReward(TerminalKind kind);
std::string_view TerminalName(TerminalKind kind);

// Where a play leaves the drive, seen from the offense.
struct Successor {
  enum class Kind : uint8_t { kTerminal, kOffense, kDefense };

  Kind kind = Kind::kOffense;
  TerminalKind terminal = TerminalKind::kOffTouchdown;
  // kOffense: the offense's next state. kDefense: the canonical first-down
  // state of the team taking over, in that team's own coordinates.
  GameState state;

  static Successor Terminal(TerminalKind kind);
  static Successor Offense(const GameState& state);
  static Successor Defense(int defense_los);

  // Position in the 202-slot successor universe: 0..3 terminals,
  // 4..102 offense ball at los 1..99, 103..201 defense ball at los 1..99.
  int Slot() const;

  friend bool operator==(const Successor& a, const Successor& b);
};

inline constexpr int kNumSuccessorSlots = 202;

std::string ToString(const Successor& successor);

// First-down state after gaining possession at `los`: 1st & 10, or 1st & goal
// inside the 10.
GameState CanonicalFirstDown(int los);

// Finite enumeration of scrimmage states with 1 <= dist <= min(los, max_dist).
// max_dist is at least 10.
class StateSpace {
 public:
  explicit StateSpace(int max_dist = kDefaultMaxDist);

  int max_dist() const { return max_dist_; }
  int size() const { return static_cast<int>(states_.size()); }

  bool IsValid(const GameState& state) const;
  // -1 when the state is outside the space.
  int IndexOf(const GameState& state) const;
  const GameState& StateAt(int index) const { return states_[index]; }
  const std::vector<GameState>& states() const { return states_; }

  // The 99 first-down states a defense can take over in.
  std::vector<GameState> SemiTerminalStates() const;

  // Deterministic advancement of `state` by an integer `gain`. Rejects gains
  // outside [los - 100, los].
  absl::StatusOr<Successor> Advance(const GameState& state, int gain) const;

 private:
  int max_dist_;
  std::vector<GameState> states_;
  // Offsets into states_ by (down, los); dist is contiguous within a block.
  std::vector<int> block_offset_;
};

}  // namespace driveopt

#endif  // DRIVEOPT_STATESPACE_H_
