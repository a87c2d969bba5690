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

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mmgtune/cmaes.hpp"
#include "mmgtune/error.hpp"

namespace mmgtune {
namespace {

BoxConstraint cube(std::size_t n, double lo, double hi) {
  return {std::vector<double>(n, lo), std::vector<double>(n, hi)};
}

Objective shifted_sphere(double center) {
  return [center](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += (v - center) * (v - center);
    return s;
  };
}

double rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    s += 100.0 * a * a + b * b;
  }
  return s;
}

double rastrigin(std::span<const double> x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
  return s;
}

TEST_CASE("normalize maps the box onto the unit cube") {
  const BoxConstraint box{{-2.0, 0.3376, 10.0}, {4.0, 0.5064, 10.5}};
  const std::vector<double> lo = normalize(box.lower, box);
  const std::vector<double> hi = normalize(box.upper, box);
  const std::vector<double> mid =
      normalize(std::vector<double>{1.0, 0.422, 10.25}, box);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(lo[i] == 0.0);
    CHECK(hi[i] == 1.0);
    CHECK(mid[i] == doctest::Approx(0.5).epsilon(1e-14));
  }
  CHECK(denormalize(lo, box) == box.lower);
  CHECK(denormalize(hi, box) == box.upper);

  const std::vector<double> x{-1.234, 0.4, 10.0001};
  const std::vector<double> back = denormalize(normalize(x, box), box);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(back[i] - x[i]) <= 1e-14 * std::abs(x[i]));
  }
}

TEST_CASE("box validation") {
  CHECK_NOTHROW(cube(3, 0.0, 1.0).validate());
  CHECK_THROWS_AS((BoxConstraint{{0.0}, {0.0}}.validate()), Error);
  CHECK_THROWS_AS((BoxConstraint{{0.0, 1.0}, {1.0}}.validate()), Error);
  CHECK_THROWS_AS(
      (BoxConstraint{{0.0}, {std::numeric_limits<double>::infinity()}}
           .validate()),
      Error);
  const BoxConstraint box = cube(2, -1.0, 1.0);
  CHECK(box.contains(std::vector<double>{-1.0, 1.0}));
  CHECK(!box.contains(std::vector<double>{-1.0, 1.0 + 1e-15}));
}

TEST_CASE("repair clamps and penalizes the excursion") {
  const RepairedPoint in = repair_and_penalize(std::vector<double>{0.2, 0.7}, 5.0);
  CHECK(in.z == std::vector<double>{0.2, 0.7});
  CHECK(in.penalty == 0.0);

  const RepairedPoint out =
      repair_and_penalize(std::vector<double>{1.2, 0.5, -0.1}, 10.0);
  CHECK(out.z == std::vector<double>{1.0, 0.5, 0.0});
  CHECK(out.penalty == doctest::Approx(10.0 * (0.04 + 0.01)).epsilon(1e-14));
}

TEST_CASE("config validation") {
  CmaConfig c;
  CHECK_NOTHROW(c.validate(12));
  c.lambda0 = 3;
  CHECK_THROWS_AS(c.validate(12), Error);
  c = CmaConfig{};
  c.lambda_max = 8;
  CHECK_THROWS_AS(c.validate(12), Error);
  c = CmaConfig{};
  c.sigma0 = 1.5;
  CHECK_THROWS_AS(c.validate(12), Error);
  c = CmaConfig{};
  c.max_evals = 0;
  CHECK_THROWS_AS(c.validate(12), Error);
  c = CmaConfig{};
  c.mean0 = {0.5};
  CHECK_THROWS_AS(c.validate(12), Error);
}

TEST_CASE("sphere in twelve dimensions") {
  CmaConfig c;
  c.max_evals = 20000;
  const OptResult r =
      cmaes_minimize_with_restarts(shifted_sphere(0.3), cube(12, 0.0, 1.0), c);
  CHECK(r.f_best < 1e-10);
  CHECK(r.evals_used <= 20000);
  for (double v : r.x_best) CHECK(v == doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("sphere centred outside the box lands on the boundary") {
  CmaConfig c;
  c.max_evals = 20000;
  const BoxConstraint box = cube(12, 0.0, 1.0);
  const OptResult r = cmaes_minimize_with_restarts(shifted_sphere(1.2), box, c);
  CHECK(box.contains(r.x_best));
  for (double v : r.x_best) CHECK(std::abs(v - 1.0) <= 1e-6);
  CHECK(r.f_best == doctest::Approx(12 * 0.04).epsilon(1e-9));
}

TEST_CASE("rosenbrock with restarts") {
  CmaConfig c;
  c.max_evals = 200000;
  const OptResult r =
      cmaes_minimize_with_restarts(rosenbrock, cube(12, -2.0, 2.0), c);
  CHECK(r.f_best < 1e-6);
  for (double v : r.x_best) CHECK(v == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("population doubles at each restart up to the cap") {
  CmaConfig c;
  c.max_evals = 60000;
  c.tol_fun = 1e-3;  // converge quickly so that many restarts happen
  const OptResult r =
      cmaes_minimize_with_restarts(shifted_sphere(0.3), cube(4, 0.0, 1.0), c);
  REQUIRE(r.runs.size() >= 7);
  const std::vector<int> expected{12, 24, 48, 96, 128, 128, 128};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(r.runs[i].lambda == expected[i]);
    CHECK(r.runs[i].restart_index == static_cast<int>(i));
  }
  for (const IterationRecord& it : r.history) {
    CHECK(it.lambda == r.runs[it.restart_index].lambda);
  }
}

TEST_CASE("restarts escape rastrigin local minima") {
  int restart_hits = 0;
  int single_hits = 0;
  const BoxConstraint box = cube(6, -5.12, 5.12);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CmaConfig c;
    c.seed = seed;
    c.sigma0 = 0.2;
    c.max_evals = 100000;
    c.mean0 = std::vector<double>(6, 0.8);
    const OptResult r = cmaes_minimize_with_restarts(rastrigin, box, c);
    if (r.f_best < 1e-8) ++restart_hits;
    const RunResult single = cmaes_run(rastrigin, box, c, 12);
    if (single.f_best < 1e-8) ++single_hits;
  }
  CHECK(restart_hits >= 4);
  CHECK(restart_hits > single_hits);
}

TEST_CASE("fixed seed gives identical results") {
  CmaConfig c;
  c.max_evals = 5000;
  c.seed = 42;
  const BoxConstraint box = cube(5, -2.0, 2.0);
  const OptResult a = cmaes_minimize_with_restarts(rosenbrock, box, c);
  const OptResult b = cmaes_minimize_with_restarts(rosenbrock, box, c);
  CHECK(a.x_best == b.x_best);
  CHECK(a.f_best == b.f_best);
  CHECK(a.evals_used == b.evals_used);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].best_f == b.history[i].best_f);
  }
  c.seed = 43;
  const OptResult d = cmaes_minimize_with_restarts(rosenbrock, box, c);
  CHECK(d.x_best != a.x_best);
}

TEST_CASE("best-ever is monotone and consistent with the reported point") {
  CmaConfig c;
  c.max_evals = 30000;
  const BoxConstraint box = cube(6, -5.12, 5.12);
  const OptResult r = cmaes_minimize_with_restarts(rastrigin, box, c);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].best_ever_f <= r.history[i - 1].best_ever_f);
    CHECK(r.history[i].iteration == r.history[i - 1].iteration + 1);
    CHECK(r.history[i].evals > r.history[i - 1].evals);
  }
  CHECK(box.contains(r.x_best));
  CHECK(rastrigin(r.x_best) == r.f_best);
  CHECK(r.history.back().best_ever_f == r.f_best);
}

TEST_CASE("a budget below one run reduces to a single run") {
  CmaConfig c;
  c.max_evals = 301;
  c.seed = 9;
  const BoxConstraint box = cube(8, -2.0, 2.0);
  const OptResult r = cmaes_minimize_with_restarts(rosenbrock, box, c);
  const RunResult s = cmaes_run(rosenbrock, box, c, c.lambda0);
  REQUIRE(r.runs.size() == 1);
  CHECK(r.runs[0].termination == Termination::kBudget);
  CHECK(s.termination == Termination::kBudget);
  CHECK(r.x_best == s.x_best);
  CHECK(r.f_best == s.f_best);
  CHECK(r.evals_used == s.evals);
  CHECK(r.evals_used <= 301);
}

TEST_CASE("the starting mean is never beaten by a worse result") {
  // A needle at the box centre: the evaluated start is the optimum.
  const Objective needle = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s == 0.0 ? -1.0 : std::sqrt(s);
  };
  CmaConfig c;
  c.max_evals = 500;
  const OptResult r = cmaes_minimize_with_restarts(needle, cube(3, -1.0, 1.0), c);
  CHECK(r.f_best == -1.0);
  for (double v : r.x_best) CHECK(v == 0.0);
}

TEST_CASE("non-finite objective values abort with the candidate index") {
  const Objective f = [](std::span<const double> x) {
    return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0];
  };
  const std::vector<std::vector<double>> pts{{0.1}, {0.7}, {0.9}};
  std::vector<double> out(3);
  for (int mode = 0; mode < 2; ++mode) {
    try {
      if (mode == 0) {
        evaluate_population_serial(f, pts, out);
      } else {
        evaluate_population_openmp(f, pts, out);
      }
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNonFiniteObjective);
      CHECK(std::string(e.what()).find("candidate 1") != std::string::npos);
    }
  }
}

TEST_CASE("history export") {
  CmaConfig c;
  c.max_evals = 100;
  const OptResult r =
      cmaes_minimize_with_restarts(shifted_sphere(0.1), cube(2, 0.0, 1.0), c);
  std::ostringstream os;
  write_history_csv(r, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "iteration,evals,lambda,best_f,best_ever_f,restart_index");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == r.history.size());
}

}  // namespace
}  // namespace mmgtune
