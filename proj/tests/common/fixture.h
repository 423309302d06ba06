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

// A small fitted model store shared by tests: synthetic games, a reduced
// state space and short Gibbs chains.

#ifndef DRIVEOPT_TESTS_COMMON_FIXTURE_H_
#define DRIVEOPT_TESTS_COMMON_FIXTURE_H_

#include "driveopt/models.h"
#include "driveopt/synthetic.h"

namespace driveopt {
namespace testing {

inline Config SmallConfig() {
  Config c;
  c.max_dist = 10;
  c.gibbs = GibbsSettings{200, 50, 5};
  c.seed = 7;
  return c;
}

inline const Corpus& SmallCorpus() {
  static const Corpus* corpus = [] {
    SyntheticOptions options;
    options.games = 150;
    options.seed = 3;
    auto parsed = ParseCorpusText(GenerateCorpusCsv(SyntheticTruth(), options));
    return new Corpus(*std::move(parsed));
  }();
  return *corpus;
}

inline const ModelStore& SmallStore() {
  static const ModelStore* store = [] {
    auto fitted = FitModels(SmallCorpus().records, SmallConfig());
    return new ModelStore(*std::move(fitted));
  }();
  return *store;
}

// SmallStore with family-only time fits of 5, 7 or 9 seconds per play and
// 4-second kickoffs, so short clocks have small exact game trees.
inline const ModelStore& FrozenLateStore() {
  static const ModelStore* store = [] {
    auto* s = new ModelStore(SmallStore());
    s->time = TimeModel();
    TimeFit play;
    play.mass = IntMass(1, kMaxElapsed);
    play.mass.add(5, 0.3);
    play.mass.add(7, 0.4);
    play.mass.add(9, 0.3);
    for (TimeFamily f : {TimeFamily::kRun, TimeFamily::kPass, TimeFamily::kPunt,
                         TimeFamily::kFieldGoal}) {
      s->time.SetFamily(f, play);
    }
    TimeFit kick;
    kick.mass = IntMass(1, kMaxElapsed);
    kick.mass.add(4, 1.0);
    s->time.SetFamily(TimeFamily::kKickoff, kick);
    return s;
  }();
  return *store;
}

}  // namespace testing
}  // namespace driveopt

#endif  // DRIVEOPT_TESTS_COMMON_FIXTURE_H_
