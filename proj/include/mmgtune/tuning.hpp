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

// Fine-tuning of a selected subset of MMG coefficients against recorded
// trials. The search box around the pre-determined values is
// [theta_i - a_r |theta_i|, theta_i + a_r |theta_i|]; the objective is the
// Q-weighted squared pose deviation of a forward-Euler rollout started from
// each trial's first recorded row and driven by the recorded inputs.

#ifndef MMGTUNE_TUNING_HPP_
#define MMGTUNE_TUNING_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmgtune/cmaes.hpp"
#include "mmgtune/dynamics.hpp"
#include "mmgtune/mmg.hpp"
#include "mmgtune/trial_data.hpp"

namespace mmgtune {

class ParamSelector {
 public:
  // R'_0, t_P, w_P0, C_w, t_R, a_H, x'_H, epsilon, kappa, l'_R, gamma_Rp,
  // gamma_Rn.
  ParamSelector();
  // Throws kUnknownParameter / kValidationError for unknown or repeated
  // names.
  explicit ParamSelector(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  std::vector<double> extract(const MmgParams& params) const;

  bool operator==(const ParamSelector&) const = default;

 private:
  std::vector<std::string> names_;
};

// Copy of `base` with the selected fields overwritten by x.
MmgParams apply_candidate(const MmgParams& base, const ParamSelector& selector,
                          std::span<const double> x);

// Throws kDegenerateBox if any theta_pre is zero, kValidationError if
// a_r <= 0.
BoxConstraint exploration_box(std::span<const double> theta_pre, double a_r);

// Diagonal of Q for (p1, p2, psi).
using PoseWeights = std::array<double, 3>;

// diag(lpp, lpp, 0.25 pi).
PoseWeights default_pose_weights(const ShipParticulars& ship);

// Returned for a candidate whose rollout leaves the model's regime.
inline constexpr double kFailedRolloutFitness = 1e30;

struct TuningSpec {
  ParamSelector selector;
  double a_r = 0.2;
  PoseWeights weights{83.0, 83.0, 0.7853981633974483};
  std::vector<Trial> tune_set;
  std::vector<Trial> test_set;
  CmaConfig cma;

  // Checks a_r, weights, selector against `base` (no zero pre-determined
  // values), trial invariants and a consistent dt across trials.
  void validate(const MmgParams& base) const;
};

// Weighted squared deviation summed over rows 2..T of one trial. Throws
// SimulationAborted if the rollout fails.
double trial_deviation(const Trial& trial, const MmgParams& params,
                       const ShipParticulars& ship,
                       const PoseWeights& weights);

// Per-trial deviations; failed rollouts yield kFailedRolloutFitness. The
// OpenMP kernel and the serial reference return identical vectors.
std::vector<double> trial_deviations_serial(std::span<const Trial> trials,
                                            const MmgParams& params,
                                            const ShipParticulars& ship,
                                            const PoseWeights& weights);
std::vector<double> trial_deviations_openmp(std::span<const Trial> trials,
                                            const MmgParams& params,
                                            const ShipParticulars& ship,
                                            const PoseWeights& weights);

// J(x) = sum over trials, summed in trial order; capped at
// kFailedRolloutFitness when any rollout fails.
double objective_j(std::span<const double> x, const ParamSelector& selector,
                   std::span<const Trial> trials, const MmgParams& base,
                   const ShipParticulars& ship, const PoseWeights& weights);

struct TrialEvaluation {
  std::string label;
  double j = 0.0;
  bool aborted = false;
  std::string error;
  Trajectory simulated;  // rows up to the failure when aborted
};

struct Evaluation {
  std::vector<TrialEvaluation> trials;
  double total = 0.0;  // +inf if any trial aborted
  bool any_aborted = false;
};

Evaluation evaluate(const MmgParams& theta, std::span<const Trial> trials,
                    const PoseWeights& weights, const ShipParticulars& ship);

struct TuneReport {
  std::vector<std::string> names;
  double a_r = 0.0;
  PoseWeights weights{};
  BoxConstraint box;
  std::vector<double> theta_pre;
  std::vector<double> theta_star;
  std::vector<std::string> tune_labels;
  std::vector<std::string> test_labels;
  Evaluation pre_tune;
  Evaluation star_tune;
  Evaluation pre_test;   // empty when the test set is empty
  Evaluation star_test;
  OptResult optimizer;
  std::uint64_t seed = 0;
  bool tune_only = false;
  double wall_clock_s = 0.0;
};

struct TuneOutcome {
  MmgParams theta_star;
  TuneReport report;
};

TuneOutcome tune(const TuningSpec& spec, const MmgParams& base,
                 const ShipParticulars& ship);

struct SweepRow {
  double a_r = 0.0;
  double j_tune = 0.0;
  double j_test = 0.0;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::vector<TuneOutcome> runs;
};

// One tune() per a_r with otherwise identical settings.
SweepOutcome sweep(const TuningSpec& spec, std::span<const double> a_r_values,
                   const MmgParams& base, const ShipParticulars& ship);

}  // namespace mmgtune

#endif  // MMGTUNE_TUNING_HPP_
