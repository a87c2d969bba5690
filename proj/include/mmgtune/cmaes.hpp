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

// Box-constrained CMA-ES with an increasing-population restart schedule.
//
// The search runs in normalized coordinates z in [0, 1]^n. Samples that
// leave the unit box are clamped before evaluation and ranked with a
// quadratic penalty on the clamp distance; the strategy update uses the
// unclamped samples.

#ifndef MMGTUNE_CMAES_HPP_
#define MMGTUNE_CMAES_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace mmgtune {

struct BoxConstraint {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  // lower < upper coordinate-wise, all finite, same length.
  void validate() const;
  bool contains(std::span<const double> x) const;
};

std::vector<double> normalize(std::span<const double> x,
                              const BoxConstraint& box);
// Maps z = 0 and z = 1 exactly onto the bounds and clamps into the box.
std::vector<double> denormalize(std::span<const double> z,
                                const BoxConstraint& box);

struct RepairedPoint {
  std::vector<double> z;   // clamp of the input into [0, 1]^n
  double penalty = 0.0;    // c_pen * ||z_in - z||^2
};

RepairedPoint repair_and_penalize(std::span<const double> z,
                                  double penalty_coefficient);

enum class EvalMode { kSerial, kOpenMP };

struct CmaConfig {
  int lambda0 = 12;
  int lambda_max = 128;
  double sigma0 = 0.3;
  // Normalized initial mean; empty means the box center.
  std::vector<double> mean0;
  std::int64_t max_evals = 500000;
  double tol_fun = 1e-10;
  double tol_x = 1e-11;
  std::uint64_t seed = 1;
  // <= 0 selects 1e4 x median |f| of the first generation.
  double penalty_coefficient = 0.0;
  EvalMode eval_mode = EvalMode::kSerial;

  void validate(std::size_t dimension) const;
};

enum class Termination {
  kTolFun,
  kTolX,
  kConditionCov,
  kMaxIter,
  kBudget,
};

std::string_view to_string(Termination t);

struct IterationRecord {
  std::int64_t iteration = 0;  // global, 1-based
  std::int64_t evals = 0;      // cumulative after this iteration
  int lambda = 0;
  double best_f = 0.0;         // min objective over this generation
  double best_ever_f = 0.0;
  int restart_index = 0;
};

struct RunRecord {
  int restart_index = 0;
  int lambda = 0;
  std::int64_t iterations = 0;
  std::int64_t evals = 0;
  double best_f = 0.0;
  Termination termination = Termination::kBudget;
};

struct OptResult {
  std::vector<double> x_best;  // original coordinates, inside the box
  double f_best = 0.0;
  std::vector<IterationRecord> history;
  std::vector<RunRecord> runs;
  std::int64_t evals_used = 0;
};

// Must be safe to call concurrently when EvalMode::kOpenMP is used.
using Objective = std::function<double(std::span<const double>)>;

// Evaluates f at each row of `points`. The OpenMP kernel and the serial
// reference produce identical results for a pure objective. Non-finite
// values throw Error(kNonFiniteObjective).
void evaluate_population_serial(const Objective& f,
                                std::span<const std::vector<double>> points,
                                std::span<double> values);
void evaluate_population_openmp(const Objective& f,
                                std::span<const std::vector<double>> points,
                                std::span<double> values);

struct RunResult {
  std::vector<double> x_best;
  double f_best = 0.0;
  Termination termination = Termination::kBudget;
  std::int64_t evals = 0;
  std::int64_t iterations = 0;
};

// A single CMA-ES run with population `lambda` started from config.mean0.
RunResult cmaes_run(const Objective& f, const BoxConstraint& box,
                    const CmaConfig& config, int lambda);

// Restarts with lambda <- min(2 lambda, lambda_max) and a uniformly drawn
// mean until config.max_evals is spent.
OptResult cmaes_minimize_with_restarts(const Objective& f,
                                       const BoxConstraint& box,
                                       const CmaConfig& config);

// iteration,evals,lambda,best_f,best_ever_f,restart_index
void write_history_csv(const OptResult& result, std::ostream& out);

}  // namespace mmgtune

#endif  // MMGTUNE_CMAES_HPP_
