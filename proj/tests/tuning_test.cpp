// Copyright 2026 The mmgtune Authors
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

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "mmgtune/error.hpp"
#include "mmgtune/tuning.hpp"

namespace mmgtune {
namespace {

// Explored values published for a_r = 0.2 ... 0.6, default selector order.
constexpr std::array<double, 5> kExploredAr{0.2, 0.3, 0.4, 0.5, 0.6};
constexpr std::array<std::array<double, 12>, 5> kExplored{{
    {0.0174, 0.0960, 0.5064, -2.4000, -0.0464, 0.1896, -0.7260, 1.0438, 0.6000,
     -1.0656, 0.4866, 0.2064},
    {0.0179, 0.1040, 0.5486, -2.6000, -0.0406, 0.2054, -0.7865, 1.0248, 0.6500,
     -1.1544, 0.4531, 0.2236},
    {0.0188, 0.1019, 0.5908, -2.8000, -0.0348, 0.2212, -0.8470, 1.0049, 0.7000,
     -1.2432, 0.4262, 0.2408},
    {0.0207, 0.0400, 0.6330, -3.0000, -0.0290, 0.2370, -0.9075, 1.1872, 0.4014,
     -1.3320, 0.3655, 0.2580},
    {0.0204, 0.0320, 0.6752, -3.2000, -0.0232, 0.2528, -0.9680, 1.3736, 0.2000,
     -1.4208, 0.3017, 0.2752},
}};

Trial synthetic(double rudder_deg, const MmgParams& theta, double duration = 200.0) {
  ManeuverSpec spec;
  spec.rudder_deg = rudder_deg;
  spec.duration = duration;
  return generate_synthetic_trial(theta, spec, ShipParticulars{},
                                  NoiseModel::none(), 1);
}

TEST_CASE("default selector") {
  const ParamSelector s;
  CHECK(s.names() == std::vector<std::string>{"r0", "t_p", "w_p0", "c_w",
                                              "t_r", "a_h", "x_h", "epsilon",
                                              "kappa", "l_r", "gamma_rp",
                                              "gamma_rn"});
  const std::vector<double> pre = s.extract(MmgParams{});
  CHECK(pre == std::vector<double>{0.017, 0.080, 0.422, -2.0, -0.058, 0.158,
                                   -0.605, 1.27, 0.5, -0.888, 0.483, 0.172});
  CHECK_THROWS_AS(ParamSelector({"r0", "r0"}), Error);
  CHECK_THROWS_AS(ParamSelector({"bogus"}), Error);
  CHECK_THROWS_AS(ParamSelector(std::vector<std::string>{}), Error);
}

TEST_CASE("exploration box") {
  const std::vector<double> w{0.422};
  const BoxConstraint b = exploration_box(w, 0.2);
  CHECK(b.lower[0] == doctest::Approx(0.3376).epsilon(1e-14));
  CHECK(b.upper[0] == doctest::Approx(0.5064).epsilon(1e-14));

  const std::vector<double> cw{-2.0};
  const BoxConstraint c = exploration_box(cw, 0.2);
  CHECK(c.lower[0] == doctest::Approx(-2.4).epsilon(1e-14));
  CHECK(c.upper[0] == doctest::Approx(-1.6).epsilon(1e-14));

  for (double ar : {1e-9, 0.01, 0.7}) {
    const BoxConstraint t = exploration_box(w, ar);
    CHECK(0.5 * (t.lower[0] + t.upper[0]) == doctest::Approx(0.422).epsilon(1e-15));
    CHECK(t.upper[0] - t.lower[0] ==
          doctest::Approx(2.0 * ar * 0.422).epsilon(1e-6));
  }

  const std::vector<double> zero{0.1, 0.0};
  try {
    exploration_box(zero, 0.2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateBox);
  }
  CHECK_THROWS_AS(exploration_box(w, 0.0), Error);
  CHECK_THROWS_AS(exploration_box(w, -0.1), Error);
}

TEST_CASE("published explored values lie inside their boxes") {
  const std::vector<double> pre = ParamSelector().extract(MmgParams{});
  for (std::size_t row = 0; row < kExplored.size(); ++row) {
    const BoxConstraint box = exploration_box(pre, kExploredAr[row]);
    for (std::size_t i = 0; i < 12; ++i) {
      // Printed to four decimals.
      CHECK(kExplored[row][i] >= box.lower[i] - 5e-5);
      CHECK(kExplored[row][i] <= box.upper[i] + 5e-5);
    }
  }
}

TEST_CASE("apply candidate") {
  const MmgParams base;
  const ParamSelector s;
  CHECK(apply_candidate(base, s, s.extract(base)) == base);

  const ParamSelector r0({"r0"});
  const MmgParams one = apply_candidate(base, r0, std::vector<double>{0.02});
  CHECK(one.r0 == 0.02);
  MmgParams expect = base;
  expect.r0 = 0.02;
  CHECK(one == expect);

  const std::array<double, 12>& row = kExplored[3];
  const MmgParams t7 = apply_candidate(base, s, row);
  CHECK(t7.w_p0 == 0.6330);
  CHECK(t7.kappa == 0.4014);
  CHECK(t7.c_w == -3.0);
  CHECK(t7.gamma_rn == 0.2580);
  CHECK(t7.m_y == base.m_y);
  CHECK(t7.y_v == base.y_v);

  CHECK_THROWS_AS(apply_candidate(base, s, std::vector<double>{1.0}), Error);
}

TEST_CASE("default pose weights") {
  const PoseWeights w = default_pose_weights(ShipParticulars{});
  CHECK(w[0] == 83.0);
  CHECK(w[1] == 83.0);
  CHECK(w[2] == doctest::Approx(0.7854).epsilon(1e-4));
  CHECK(TuningSpec{}.weights == w);
}

TEST_CASE("objective vanishes on the generating parameters") {
  const MmgParams base;
  const std::vector<Trial> trials{synthetic(35.0, base), synthetic(-20.0, base)};
  const ParamSelector s;
  const PoseWeights w = default_pose_weights(ShipParticulars{});
  CHECK(objective_j(s.extract(base), s, trials, base, ShipParticulars{}, w) ==
        0.0);

  std::vector<double> x = s.extract(base);
  x[2] *= 1.1;
  CHECK(objective_j(x, s, trials, base, ShipParticulars{}, w) > 0.0);
}

TEST_CASE("objective is linear in the weights and additive over trials") {
  MmgParams truth;
  truth.kappa = 0.55;
  const MmgParams base;
  const Trial t = synthetic(35.0, truth);
  const ParamSelector s;
  const ShipParticulars ship;
  const std::vector<double> x = s.extract(base);
  const PoseWeights w = default_pose_weights(ship);
  const PoseWeights w2{2 * w[0], 2 * w[1], 2 * w[2]};

  const std::vector<Trial> one{t};
  const std::vector<Trial> two{t, t};
  const double j1 = objective_j(x, s, one, base, ship, w);
  CHECK(j1 > 0.0);
  CHECK(objective_j(x, s, one, base, ship, w2) == doctest::Approx(2 * j1).epsilon(1e-14));
  CHECK(objective_j(x, s, two, base, ship, w) == 2 * j1);

  const Trial u = synthetic(-10.0, truth);
  const std::vector<Trial> tu{t, u};
  const std::vector<Trial> ut{u, t};
  CHECK(objective_j(x, s, tu, base, ship, w) ==
        doctest::Approx(objective_j(x, s, ut, base, ship, w)).epsilon(1e-15));
  CHECK(objective_j(x, s, tu, base, ship, w) ==
        doctest::Approx(j1 + trial_deviation(u, base, ship, w)).epsilon(1e-15));
}

TEST_CASE("objective counts rows two onwards") {
  const MmgParams base;
  Trial t = synthetic(35.0, base, 10.0);
  t.data.states[0].p1 += 100.0;  // row one is the initial condition
  const PoseWeights w{1.0, 1.0, 1.0};
  // Shifting the start shifts every simulated position by the same amount.
  CHECK(trial_deviation(t, base, ShipParticulars{}, w) ==
        doctest::Approx(10 * 100.0 * 100.0).epsilon(1e-9));

  Trial pair = synthetic(0.0, base, 1.0);
  CHECK(pair.size() == 2);
  CHECK(trial_deviation(pair, base, ShipParticulars{}, w) == 0.0);
}

TEST_CASE("failed rollouts are sentineled in the objective") {
  const MmgParams base;
  const std::vector<Trial> trials{synthetic(10.0, base, 20.0)};
  const ParamSelector s({"r0"});
  const PoseWeights w{1.0, 1.0, 1.0};
  const std::vector<double> crazy{50.0};
  CHECK(objective_j(crazy, s, trials, base, ShipParticulars{}, w) ==
        kFailedRolloutFitness);
  const MmgParams bad = apply_candidate(base, s, crazy);
  CHECK_THROWS_AS(trial_deviation(trials[0], bad, ShipParticulars{}, w),
                  SimulationAborted);
  const std::vector<double> d =
      trial_deviations_serial(trials, bad, ShipParticulars{}, w);
  CHECK(d == std::vector<double>{kFailedRolloutFitness});

  const Evaluation e = evaluate(bad, trials, w, ShipParticulars{});
  CHECK(e.any_aborted);
  CHECK(e.trials[0].aborted);
  CHECK(!e.trials[0].error.empty());
  CHECK(std::isinf(e.total));
}

TEST_CASE("evaluate agrees with the objective") {
  MmgParams truth;
  truth.epsilon = 1.1;
  const MmgParams base;
  const std::vector<Trial> trials{synthetic(35.0, truth), synthetic(-40.0, truth)};
  const PoseWeights w = default_pose_weights(ShipParticulars{});
  const Evaluation e = evaluate(base, trials, w, ShipParticulars{});
  const ParamSelector s;
  CHECK(e.total == objective_j(s.extract(base), s, trials, base,
                               ShipParticulars{}, w));
  REQUIRE(e.trials.size() == 2);
  CHECK(e.trials[1].label == "turn-40");
  CHECK(e.trials[0].simulated.size() == trials[0].size());
  CHECK(e.trials[0].simulated.states.front() == trials[0].data.states.front());
  CHECK(!e.any_aborted);
  CHECK_THROWS_AS(evaluate(base, std::vector<Trial>{}, w, ShipParticulars{}),
                  Error);
}

TEST_CASE("tuning spec validation") {
  const MmgParams base;
  TuningSpec spec;
  spec.tune_set = {synthetic(35.0, base, 20.0)};
  CHECK_NOTHROW(spec.validate(base));

  TuningSpec s = spec;
  s.a_r = 0.0;
  CHECK_THROWS_AS(s.validate(base), Error);
  s = spec;
  s.weights = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(s.validate(base), Error);
  s = spec;
  s.weights = {1.0, -1.0, 0.0};
  CHECK_THROWS_AS(s.validate(base), Error);
  s = spec;
  s.tune_set.clear();
  CHECK_THROWS_AS(s.validate(base), Error);
  s = spec;
  s.selector = ParamSelector({"x_vv", "n_rrr"});
  MmgParams zeroed = base;
  zeroed.x_vv = 0.0;
  try {
    s.validate(zeroed);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateBox);
  }
  s = spec;
  Trial other = synthetic(-35.0, base, 20.0);
  other.data.dt = 0.5;
  s.test_set = {other};
  CHECK_THROWS_AS(s.validate(base), Error);
}

TEST_CASE("tune recovers a single coefficient") {
  MmgParams truth;
  truth.kappa = 0.56;
  const MmgParams base;
  TuningSpec spec;
  spec.selector = ParamSelector({"kappa"});
  spec.tune_set = {synthetic(35.0, truth)};
  spec.test_set = {synthetic(-35.0, truth)};
  spec.cma.max_evals = 600;
  const TuneOutcome out = tune(spec, base, ShipParticulars{});
  const TuneReport& r = out.report;
  CHECK(out.theta_star.kappa == doctest::Approx(0.56).epsilon(1e-5));
  CHECK(r.box.contains(r.theta_star));
  CHECK(r.star_tune.total <= 1e-6 * r.pre_tune.total);
  CHECK(r.star_test.total < r.pre_test.total);
  CHECK(r.theta_pre == std::vector<double>{0.5});
  CHECK(r.tune_labels == std::vector<std::string>{"turn+35"});
  CHECK(!r.tune_only);
  CHECK(r.optimizer.evals_used <= 600);
  CHECK(r.wall_clock_s >= 0.0);
}

TEST_CASE("sweep returns one row per width") {
  MmgParams truth;
  truth.kappa = 0.69;
  const MmgParams base;
  TuningSpec spec;
  spec.selector = ParamSelector({"kappa"});
  spec.tune_set = {synthetic(20.0, truth, 100.0)};
  spec.cma.max_evals = 300;
  const std::vector<double> widths{0.2, 0.4};
  const SweepOutcome sw = sweep(spec, widths, base, ShipParticulars{});
  REQUIRE(sw.rows.size() == 2);
  CHECK(sw.rows[0].a_r == 0.2);
  CHECK(std::isnan(sw.rows[0].j_test));
  CHECK(sw.runs[0].report.tune_only);
  // The truth lies outside the narrower box only.
  CHECK(sw.runs[0].theta_star.kappa == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(sw.rows[1].j_tune < sw.rows[0].j_tune);
}

}  // namespace
}  // namespace mmgtune
