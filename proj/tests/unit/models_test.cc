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

#include "driveopt/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "gtest/gtest.h"

namespace driveopt {
namespace {

double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TEST(IntMassTest, ModeTieGoesLow) {
  IntMass m(0, {0.2, 0.4, 0.4});
  EXPECT_EQ(m.Mode(), 1);
}

TEST(IntMassTest, InverseCdfSampling) {
  IntMass m(3, {0.25, 0.0, 0.75});
  std::mt19937_64 rng(7);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 20000; ++i) ++counts[m.Sample(rng) - 3];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[0] / 20000.0, 0.25, 0.015);
}

TEST(IntMassTest, QuantileIsSmallestReachingShare) {
  IntMass m(3, std::vector<double>{0.2, 0.0, 0.3, 0.5});
  EXPECT_EQ(m.Quantile(0.0), 3);
  EXPECT_EQ(m.Quantile(0.2), 3);
  EXPECT_EQ(m.Quantile(0.21), 5);
  EXPECT_EQ(m.Quantile(0.5), 5);
  EXPECT_EQ(m.Quantile(0.95), 6);
  EXPECT_EQ(m.Quantile(1.0), 6);
}

TEST(IntMassTest, DiscretizedNormalFoldsTails) {
  IntMass m(-2, 2);
  AddDiscretizedNormal(1.0, 0.3, 1.7, &m);
  EXPECT_NEAR(m.Total(), 1.0, 1e-12);
  EXPECT_NEAR(m.at(-2), Phi((-1.5 - 0.3) / 1.7), 1e-12);
  EXPECT_NEAR(m.at(0), Phi(0.2 / 1.7) - Phi(-0.8 / 1.7), 1e-12);
  EXPECT_NEAR(m.at(2), 1.0 - Phi(1.2 / 1.7), 1e-12);
}

TEST(IntMassTest, TotalVariationOverDisjointSupport) {
  EXPECT_DOUBLE_EQ(TotalVariation(IntMass(0, std::vector<double>{1.0}),
                                  IntMass(5, std::vector<double>{1.0})),
                   1.0);
  EXPECT_DOUBLE_EQ(
      TotalVariation(IntMass(0, {0.5, 0.5}), IntMass(1, {0.5, 0.5})), 0.5);
}

GibbsSettings Short() { return GibbsSettings{400, 100, 5}; }

TEST(GibbsTest, DegenerateSampleIsPointMass) {
  MixtureFit fit = FitNormalMixture(std::vector<double>(50, 0.0),
                                    MixturePrior(), Short(), 1);
  EXPECT_TRUE(fit.degenerate);
  IntMass m = PredictiveMass(fit, -100, 0);
  EXPECT_DOUBLE_EQ(m.at(0), 1.0);
}

TEST(GibbsTest, SingleNormalRecoveredInPredictive) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> draw(4.0, 2.0);
  std::vector<double> data(2000);
  for (double& x : data) x = draw(rng);
  MixtureFit fit = FitNormalMixture(data, MixturePrior(), GibbsSettings(), 9);
  IntMass got = PredictiveMass(fit, -30, 30);
  IntMass truth(-30, 30);
  AddDiscretizedNormal(1.0, 4.0, 2.0, &truth);
  EXPECT_LT(TotalVariation(got, truth), 0.03);
  EXPECT_NEAR(got.Total(), 1.0, 1e-9);
}

TEST(GibbsTest, SingleComponentDataEmptiesThreeWeights) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> draw(4.0, 2.0);
  std::vector<double> data(2000);
  for (double& x : data) x = draw(rng);
  MixtureFit fit = FitNormalMixture(data, MixturePrior(), GibbsSettings(), 9);
  std::vector<double> w = fit.PosteriorMean().weights;
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(
      std::count_if(w.begin(), w.end(), [](double x) { return x < 0.05; }), 3)
      << "weights " << w[0] << " " << w[1] << " " << w[2] << " " << w[3];
}

TEST(GibbsTest, TwoComponentsSeparated) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> a(-10.0, 1.5), b(10.0, 1.5);
  std::vector<double> data;
  for (int i = 0; i < 600; ++i) data.push_back(a(rng));
  for (int i = 0; i < 400; ++i) data.push_back(b(rng));
  MixtureFit fit = FitNormalMixture(data, MixturePrior(), Short(), 11);
  IntMass got = PredictiveMass(fit, -40, 40);
  double left = 0.0;
  for (int k = -40; k < 0; ++k) left += got.at(k);
  EXPECT_NEAR(left, 0.6, 0.03);
}

TEST(GibbsTest, SameSeedSameDraws) {
  std::vector<double> data = {1, 4, 2, 8, 5, 7, 3, 3, 9, 0, -2, 6};
  MixtureFit a = FitNormalMixture(data, MixturePrior(), Short(), 42);
  MixtureFit b = FitNormalMixture(data, MixturePrior(), Short(), 42);
  MixtureFit c = FitNormalMixture(data, MixturePrior(), Short(), 43);
  ASSERT_EQ(a.draws.size(), 60u);
  for (size_t i = 0; i < a.draws.size(); ++i) {
    EXPECT_EQ(a.draws[i].means, b.draws[i].means);
    EXPECT_EQ(a.draws[i].variance, b.draws[i].variance);
  }
  EXPECT_NE(a.draws.back().means, c.draws.back().means);
}

TEST(RunModelTest, MassCoversPhysicalRange) {
  std::vector<double> gains = {3, 4, -1, 12, 5, 2, 0, 7, 3, 45};
  RunModel m = FitRun(GameState{1, 10, 40}, gains, RunConfig(), Short(), 5);
  EXPECT_EQ(m.gain_mass.lo(), -60);
  EXPECT_EQ(m.gain_mass.hi(), 40);
  EXPECT_NEAR(m.gain_mass.Total(), 1.0, 1e-9);
  EXPECT_EQ(m.n, 10);
}

PlayRecord Pass(int los, int gain, PassResult result, bool fumble = false) {
  PlayRecord r;
  r.type = PlayType::kPass;
  r.down = 1;
  r.dist = std::min(10, los);
  r.los = los;
  r.yards_gained = gain;
  r.pass_result = result;
  r.fumble_lost = fumble;
  return r;
}

TEST(PassModelTest, Categories) {
  const auto c = PassResult::kComplete;
  EXPECT_EQ(CategorizePass(Pass(30, 0, PassResult::kIncomplete), 0, 30), kInc);
  EXPECT_EQ(CategorizePass(Pass(30, 0, c), 0.4, 30), kInc);
  EXPECT_EQ(CategorizePass(Pass(30, 0, c), 30, 30), kTd);
  EXPECT_EQ(CategorizePass(Pass(30, 0, c), 29.6, 30), kTd);
  EXPECT_EQ(CategorizePass(Pass(30, 0, c), 29.4, 30), kPos);
  EXPECT_EQ(CategorizePass(Pass(30, 0, PassResult::kSack), -7, 30), kNeg);
  EXPECT_EQ(CategorizePass(Pass(30, 0, PassResult::kInterception), 0, 30), kTo);
  EXPECT_EQ(CategorizePass(Pass(30, 12, c, true), 12, 30), kTo);
}

TEST(PassModelTest, ConjugateClosedForms) {
  PassSample s;
  s.counts = {30, 2, 50, 8, 3};
  s.n = 93;
  s.interceptions = 2;
  s.pos_gains = std::vector<double>(50, 9.0);
  s.neg_counts.assign(24, 0);
  s.neg_counts[4] = 6;
  s.neg_counts[9] = 2;
  CategoryVector rho = {0.4, 0.05, 0.45, 0.07, 0.03};
  TauTable tau;
  tau.tau.assign(24, 1.0 / 24);
  PassConfig cfg;
  PassModel m = FitPass(GameState{1, 10, 60}, s, rho, tau, 0.025, cfg);
  double total = 0.0;
  for (int c = 0; c < kNumPassCategories; ++c) {
    EXPECT_DOUBLE_EQ(m.dirichlet[c], 10 * rho[c] + s.counts[c]);
    EXPECT_NEAR(m.probabilities[c], (10 * rho[c] + s.counts[c]) / 103.0, 1e-15);
    total += m.probabilities[c];
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(m.pos_shape, 130 + 1.3 * 50);
  EXPECT_DOUBLE_EQ(m.pos_rate, 1300 + 450);
  EXPECT_NEAR(m.neg_mass[4], (10.0 / 24 + 6) / 18.0, 1e-15);
  EXPECT_NEAR(m.neg_mass[0], (10.0 / 24) / 18.0, 1e-15);
  EXPECT_NEAR(std::accumulate(m.neg_mass.begin(), m.neg_mass.end(), 0.0), 1.0,
              1e-12);
  EXPECT_NEAR(m.interception_rate, (2 + 10 * 0.025) / 103.0, 1e-15);
}

TEST(PassModelTest, EmptySampleReturnsPrior) {
  PassSample s;
  s.neg_counts.assign(24, 0);
  CategoryVector rho = {0.35, 0.1, 0.4, 0.1, 0.05};
  TauTable tau;
  tau.tau.assign(24, 1.0 / 24);
  PassModel m = FitPass(GameState{1, 10, 60}, s, rho, tau, 0.02, PassConfig());
  for (int c = 0; c < kNumPassCategories; ++c) {
    EXPECT_NEAR(m.probabilities[c], rho[c], 1e-15);
  }
  EXPECT_DOUBLE_EQ(m.interception_rate, 0.02);
}

// P(Y <= y) for Y | b ~ Gamma(shape, rate b), b ~ Gamma(A, B), by quadrature
// over b.
double QuadratureCdf(double y, double shape, double a, double b) {
  const double mean = a / b, sd = std::sqrt(a) / b;
  const double lo = std::max(1e-12, mean - 12 * sd), hi = mean + 12 * sd;
  const int n = 4000;
  const double h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double beta = lo + i * h;
    const double log_density =
        a * std::log(b) + (a - 1) * std::log(beta) - b * beta - std::lgamma(a);
    const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    sum += w * std::exp(log_density) * boost::math::gamma_p(shape, beta * y);
  }
  return sum * h / 3;
}

TEST(PassModelTest, CompoundGammaMatchesQuadrature) {
  for (double y : {0.5, 3.0, 12.0, 40.0}) {
    EXPECT_NEAR(CompoundGammaCdf(y, 1.3, 195, 1750),
                QuadratureCdf(y, 1.3, 195, 1750), 1e-7)
        << y;
  }
  EXPECT_EQ(CompoundGammaCdf(0.0, 1.3, 195, 1750), 0.0);
}

PassModel PriorPass(int los) {
  PassSample s;
  s.neg_counts.assign(24, 0);
  TauTable tau;
  tau.tau.assign(24, 1.0 / 24);
  CategoryVector rho = {0.36, 0.05, 0.5, 0.07, 0.02};
  if (los == 1) rho = {0.5, 0.4, 0.0, 0.08, 0.02};
  return FitPass(GameState{1, std::min(10, los), los}, s, rho, tau, 0.02,
                 PassConfig());
}

TEST(PassModelTest, PositiveMassIsDiscretizedBetaPrime) {
  PassModel m = PriorPass(30);
  IntMass pos = m.PositiveMass();
  ASSERT_EQ(pos.lo(), 1);
  ASSERT_EQ(pos.hi(), 29);
  const double z = CompoundGammaCdf(29.5, 1.3, 130, 1300) -
                   CompoundGammaCdf(0.5, 1.3, 130, 1300);
  const double p7 = CompoundGammaCdf(7.5, 1.3, 130, 1300) -
                    CompoundGammaCdf(6.5, 1.3, 130, 1300);
  EXPECT_NEAR(pos.at(7), p7 / z, 1e-12);
  EXPECT_NEAR(pos.Total(), 1.0, 1e-12);
}

TEST(PassModelTest, GainMassSumsAndFoldsSafeties) {
  PassModel m = PriorPass(95);
  IntMass g = m.GainMass();
  EXPECT_EQ(g.lo(), -5);
  EXPECT_EQ(g.hi(), 95);
  EXPECT_NEAR(g.Total(), 1.0, 1e-9);
  const double keep = 1 - m.probabilities[kTo];
  // Losses of 5..24 yards all land on the safety bin.
  double folded = 0.0;
  for (int i = 4; i < 24; ++i) folded += m.neg_mass[i];
  EXPECT_NEAR(g.at(-5), m.probabilities[kNeg] / keep * folded, 1e-12);
}

TEST(PassModelTest, GoalLineHasNoPositiveGain) {
  PassModel m = PriorPass(1);
  EXPECT_EQ(m.probabilities[kPos], 0.0);
  IntMass g = m.GainMass();
  EXPECT_NEAR(g.Total(), 1.0, 1e-9);
  EXPECT_EQ(g.hi(), 1);
}

TEST(RhoTableTest, WindowWidensAndGoalLineZeroesPositive) {
  std::vector<PlayRecord> corpus;
  for (int i = 0; i < 5; ++i) {
    corpus.push_back(Pass(50, 0, PassResult::kIncomplete));
  }
  for (int i = 0; i < 15; ++i) {
    corpus.push_back(Pass(56, 8, PassResult::kComplete));
  }
  corpus.push_back(Pass(1, 1, PassResult::kComplete));
  corpus.push_back(Pass(2, 1, PassResult::kComplete));
  PassConfig cfg;
  RhoTable rho = RhoTable::Fit(corpus, cfg);
  // los 50 must widen to 6 yards to reach 20 plays.
  EXPECT_NEAR(rho.at(50)[kInc], 0.25, 1e-12);
  EXPECT_NEAR(rho.at(50)[kPos], 0.75, 1e-12);
  EXPECT_EQ(rho.at(1)[kPos], 0.0);
  double total = 0.0;
  for (double p : rho.at(1)) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(TauTableTest, AddOneSmoothing) {
  std::vector<PlayRecord> corpus = {Pass(40, -3, PassResult::kSack),
                                    Pass(40, -30, PassResult::kSack),
                                    Pass(40, 5, PassResult::kComplete)};
  TauTable t = TauTable::Fit(corpus, PassConfig());
  ASSERT_EQ(t.tau.size(), 24u);
  EXPECT_NEAR(t.tau[2], 2.0 / 26, 1e-15);
  EXPECT_NEAR(t.tau[23], 2.0 / 26, 1e-15);
  EXPECT_NEAR(t.tau[0], 1.0 / 26, 1e-15);
}

TEST(TurnoverTest, ReturnSpotMass) {
  const double rate = 0.02, sd = 25.0;
  auto out = TurnoverMass(50, rate, sd);
  double total = 0.0;
  for (const auto& o : out) total += o.probability;
  EXPECT_NEAR(total, rate, 1e-15);
  EXPECT_EQ(out[0].successor, Successor::Terminal(TerminalKind::kDefTouchdown));
  EXPECT_NEAR(out[0].probability, rate * Phi(-49.5 / sd), 1e-15);
  for (const auto& o : out) {
    if (o.successor == Successor::Defense(50)) {
      EXPECT_NEAR(o.probability, rate * (Phi(0.5 / sd) - Phi(-0.5 / sd)),
                  1e-15);
    }
    if (o.successor == Successor::Defense(80)) {
      EXPECT_NEAR(o.probability,
                  rate * (Phi(30.5 / sd) - Phi(29.5 / sd) + 1 - Phi(49.5 / sd)),
                  1e-15);
    }
  }
}

TEST(TurnoverTest, DeepTurnoverScoresOften) {
  // A fumble at the opponent's 95 hands the defense the ball near its own
  // goal line.
  auto out = TurnoverMass(95, 1.0, 10.0);
  EXPECT_NEAR(out[0].probability, Phi(-4.5 / 10.0), 1e-12);
}

TEST(FieldGoalTest, IrlsSolvesPenalizedScore) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> spot(1, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PlayRecord> corpus;
  for (int i = 0; i < 8000; ++i) {
    PlayRecord r;
    r.type = PlayType::kFieldGoal;
    r.down = 4;
    r.los = spot(rng);
    r.dist = 1;
    const double p = 1 / (1 + std::exp(-(6.0 - 0.105 * (r.los + 17))));
    r.field_goal_made = u(rng) < p;
    corpus.push_back(r);
  }
  KickConfig cfg;
  FieldGoalModel m = FitFieldGoal(corpus, cfg);
  ASSERT_TRUE(m.available);
  EXPECT_LT(m.slope, 0.0);
  EXPECT_NEAR(m.slope, -0.105, 0.02);
  // Gradient of the penalized log-likelihood vanishes at the fit, measured in
  // the raw distance parametrization up to the centring of the ridge term.
  double g0 = 0.0, g1 = 0.0;
  for (const PlayRecord& r : corpus) {
    const double x = r.los + 17;
    const double p = 1 / (1 + std::exp(-(m.intercept + m.slope * x)));
    g0 += (*r.field_goal_made ? 1.0 : 0.0) - p;
    g1 += ((*r.field_goal_made ? 1.0 : 0.0) - p) * x;
  }
  EXPECT_LT(std::abs(g0), 0.05);
  EXPECT_LT(std::abs(g1), 2.0);
  EXPECT_EQ(m.MakeProbability(59), 0.0);
  EXPECT_EQ(m.MakeProbability(80), 0.0);
  EXPECT_GT(m.MakeProbability(58), 0.0);
  EXPECT_GT(m.MakeProbability(5), m.MakeProbability(40));
}

TEST(KickTest, PuntMassFoldsReturnTouchdownAndTouchback) {
  std::vector<double> receive = {0, 98, 99, 97, 96, 99, 95, 98, 92, 99};
  PuntModel m = FitPunt(receive, 60, 60, Short(), 3);
  ASSERT_TRUE(m.available);
  EXPECT_EQ(m.receive_mass.lo(), 0);
  EXPECT_EQ(m.receive_mass.hi(), 99);
  EXPECT_NEAR(m.receive_mass.Total(), 1.0, 1e-9);
  EXPECT_GT(m.receive_mass.at(0), 0.0);
  EXPECT_GT(m.receive_mass.at(80), m.receive_mass.at(79));
  EXPECT_GE(m.mode, 1);
}

TEST(KickTest, KickoffIsEmpirical) {
  std::vector<PlayRecord> corpus(4);
  for (auto& r : corpus) r.type = PlayType::kKickoff;
  corpus[0].result_los = 75;
  corpus[1].result_los = 75;
  corpus[2].result_los = 70;
  KickoffModel m = FitKickoff(corpus);
  EXPECT_EQ(m.n, 3);
  EXPECT_NEAR(m.receive_mass.at(75), 2.0 / 3, 1e-15);
}

TEST(TimeTest, ClampToOneSecond) {
  EXPECT_EQ(ClampElapsed(-3), 1);
  EXPECT_EQ(ClampElapsed(0), 1);
  EXPECT_EQ(ClampElapsed(1), 1);
  EXPECT_EQ(ClampElapsed(38), 38);
}

TEST(TimeTest, MassStartsAtOneSecond) {
  std::vector<double> secs = {1, 2, 1, 3, 0, 2, 1, 5, 4, 2, 1, 1};
  TimeFit t = FitTimeSample(secs, Short(), 8);
  EXPECT_EQ(t.mass.lo(), 1);
  EXPECT_EQ(t.mass.hi(), kMaxElapsed);
  EXPECT_NEAR(t.mass.Total(), 1.0, 1e-9);
}

TEST(TimeTest, KeyFallsBackToFamily) {
  std::vector<PlayRecord> corpus;
  for (int i = 0; i < 40; ++i) {
    PlayRecord r;
    r.type = PlayType::kRun;
    r.down = 1 + (i % 2) * 3;
    r.dist = 1;
    r.los = 50;
    r.clock_seconds = 1000;
    r.elapsed_seconds = 30 + (i % 7);
    corpus.push_back(r);
  }
  TimeConfig cfg;
  cfg.min_key_count = 30;
  TimeModel model = TimeModel::Fit(corpus, cfg, Short(), 1);
  TimeKey first{TimeFamily::kRun, 0, true, false};
  EXPECT_FALSE(model.Has(first));
  EXPECT_TRUE(model.HasFamily(TimeFamily::kRun));
  EXPECT_EQ(model.Lookup(first), &model.family().at(TimeFamily::kRun));
  TimeKey pass{TimeFamily::kPass, 0, true, false};
  EXPECT_EQ(model.Lookup(pass), nullptr);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_GE(model.Sample(first, rng), 1);
}

TEST(StoreTest, RoundTripIsByteIdentical) {
  ModelStore store;
  store.max_dist = 10;
  store.seed = 99;
  store.config_hash = "abc";
  StateSpace space(10);
  store.run.assign(space.size(), std::nullopt);
  store.pass.assign(space.size(), std::nullopt);
  store.run[3] =
      FitRun(space.StateAt(3), {1, 2, 3, 9}, RunConfig(), Short(), 1);
  store.pass[7] = PriorPass(space.StateAt(7).los);
  store.pass[7]->state = space.StateAt(7);
  store.punt.resize(kMaxLos);
  for (int los = 1; los <= kMaxLos; ++los) store.punt[los - 1].los = los;
  store.punt[59] = FitPunt({50, 60, 70}, 60, 60, Short(), 2);
  store.tau.tau.assign(24, 1.0 / 24);
  store.warnings = {"thin"};
  const std::string text = store.Serialize();
  auto back = ModelStore::Deserialize(text);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->Serialize(), text);
  EXPECT_FALSE(back->run[0].has_value());
  EXPECT_TRUE(back->run[3].has_value());
}

TEST(StoreTest, RejectsForeignSchema) {
  auto back = ModelStore::Deserialize("{\"schema\":\"other/1\"}\n");
  EXPECT_EQ(back.status().code(), absl::StatusCode::kInvalidArgument);
}

TEST(SeedTest, DependsOnEveryInput) {
  EXPECT_EQ(ScenarioSeed(1, "run", 5), ScenarioSeed(1, "run", 5));
  EXPECT_NE(ScenarioSeed(1, "run", 5), ScenarioSeed(2, "run", 5));
  EXPECT_NE(ScenarioSeed(1, "run", 5), ScenarioSeed(1, "pass", 5));
  EXPECT_NE(ScenarioSeed(1, "run", 5), ScenarioSeed(1, "run", 6));
}

}  // namespace
}  // namespace driveopt
