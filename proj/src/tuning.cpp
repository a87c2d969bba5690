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

#include "mmgtune/tuning.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "mmgtune/error.hpp"

namespace mmgtune {

ParamSelector::ParamSelector()
    : names_{"r0",    "t_p",     "w_p0", "c_w",      "t_r",     "a_h",
             "x_h",   "epsilon", "kappa", "l_r", "gamma_rp", "gamma_rn"} {}

ParamSelector::ParamSelector(std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.empty()) {
    throw Error(ErrorKind::kValidationError, "selector: no parameters");
  }
  std::set<std::string> seen;
  for (const std::string& name : names_) {
    if (!find_param_field(name)) {
      throw Error(ErrorKind::kUnknownParameter,
                  "selector: unknown parameter '" + name + "'");
    }
    if (!seen.insert(name).second) {
      throw Error(ErrorKind::kValidationError,
                  "selector: parameter '" + name + "' listed twice");
    }
  }
}

std::vector<double> ParamSelector::extract(const MmgParams& params) const {
  std::vector<double> x;
  x.reserve(names_.size());
  for (const std::string& name : names_) x.push_back(get_param(params, name));
  return x;
}

MmgParams apply_candidate(const MmgParams& base, const ParamSelector& selector,
                          std::span<const double> x) {
  if (x.size() != selector.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "apply_candidate: expected " + std::to_string(selector.size()) +
                    " values, got " + std::to_string(x.size()));
  }
  MmgParams out = base;
  for (std::size_t i = 0; i < x.size(); ++i) {
    set_param(out, selector.names()[i], x[i]);
  }
  return out;
}

BoxConstraint exploration_box(std::span<const double> theta_pre, double a_r) {
  if (!(a_r > 0.0) || !std::isfinite(a_r)) {
    throw Error(ErrorKind::kValidationError, "a_r must be positive");
  }
  BoxConstraint box;
  for (std::size_t i = 0; i < theta_pre.size(); ++i) {
    const double t = theta_pre[i];
    if (t == 0.0) {
      throw Error(ErrorKind::kDegenerateBox,
                  "pre-determined value " + std::to_string(i) +
                      " is zero; its exploration range is empty");
    }
    box.lower.push_back(t - a_r * std::abs(t));
    box.upper.push_back(t + a_r * std::abs(t));
  }
  return box;
}

PoseWeights default_pose_weights(const ShipParticulars& ship) {
  return {ship.lpp, ship.lpp, 0.25 * std::numbers::pi};
}

void TuningSpec::validate(const MmgParams& base) const {
  if (!(a_r > 0.0) || !std::isfinite(a_r)) {
    throw Error(ErrorKind::kValidationError, "tuning: a_r must be positive");
  }
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::kValidationError,
                  "tuning: weights must be finite and non-negative");
    }
    weight_sum += w;
  }
  if (weight_sum == 0.0) {
    throw Error(ErrorKind::kValidationError, "tuning: all weights are zero");
  }
  const std::vector<double> pre = selector.extract(base);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (pre[i] == 0.0) {
      throw Error(ErrorKind::kDegenerateBox,
                  "tuning: parameter '" + selector.names()[i] +
                      "' has a zero pre-determined value");
    }
  }
  if (tune_set.empty()) {
    throw Error(ErrorKind::kValidationError, "tuning: tune set is empty");
  }
  const double dt = tune_set.front().data.dt;
  for (const auto* set : {&tune_set, &test_set}) {
    for (const Trial& t : *set) {
      t.validate();
      if (t.data.dt != dt) {
        throw Error(ErrorKind::kValidationError,
                    "tuning: trial " + t.label + " has a different dt");
      }
    }
  }
  cma.validate(selector.size());
}

namespace {

double pose_cost(const AugmentedState& sim, const AugmentedState& rec,
                 const PoseWeights& w) {
  const double e1 = sim.p1 - rec.p1;
  const double e2 = sim.p2 - rec.p2;
  const double e3 = sim.psi - rec.psi;
  return w[0] * e1 * e1 + w[1] * e2 * e2 + w[2] * e3 * e3;
}

// Rolls the model along a trial; optionally records the simulated rows.
double rollout(const Trial& trial, const MmgParams& params,
               const ShipParticulars& ship, const PoseWeights& weights,
               Trajectory* record) {
  const Trajectory& d = trial.data;
  AugmentedState zeta = d.states.front();
  if (record != nullptr) {
    record->dt = d.dt;
    record->states.assign(1, zeta);
    record->controls.assign(1, d.controls.front());
  }
  double j = 0.0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    try {
      zeta = euler_step(zeta, d.controls[i - 1], params, ship, d.dt);
    } catch (const Error& e) {
      throw SimulationAborted(i, trial.label + ": step " + std::to_string(i) +
                                     ": " + e.what());
    }
    if (!is_finite(zeta)) {
      throw SimulationAborted(i, trial.label + ": non-finite state at step " +
                                     std::to_string(i));
    }
    if (record != nullptr) {
      record->states.push_back(zeta);
      record->controls.push_back(d.controls[i]);
    }
    j += pose_cost(zeta, d.states[i], weights);
  }
  return j;
}

double guarded_deviation(const Trial& trial, const MmgParams& params,
                         const ShipParticulars& ship,
                         const PoseWeights& weights) {
  try {
    const double j = rollout(trial, params, ship, weights, nullptr);
    return std::isfinite(j) ? std::min(j, kFailedRolloutFitness)
                            : kFailedRolloutFitness;
  } catch (const Error&) {
    return kFailedRolloutFitness;
  }
}

}  // namespace

double trial_deviation(const Trial& trial, const MmgParams& params,
                       const ShipParticulars& ship,
                       const PoseWeights& weights) {
  return rollout(trial, params, ship, weights, nullptr);
}

std::vector<double> trial_deviations_serial(std::span<const Trial> trials,
                                            const MmgParams& params,
                                            const ShipParticulars& ship,
                                            const PoseWeights& weights) {
  std::vector<double> out(trials.size());
  for (std::size_t k = 0; k < trials.size(); ++k) {
    out[k] = guarded_deviation(trials[k], params, ship, weights);
  }
  return out;
}

std::vector<double> trial_deviations_openmp(std::span<const Trial> trials,
                                            const MmgParams& params,
                                            const ShipParticulars& ship,
                                            const PoseWeights& weights) {
  std::vector<double> out(trials.size());
  const auto n = static_cast<std::int64_t>(trials.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) {
    out[k] = guarded_deviation(trials[k], params, ship, weights);
  }
  return out;
}

double objective_j(std::span<const double> x, const ParamSelector& selector,
                   std::span<const Trial> trials, const MmgParams& base,
                   const ShipParticulars& ship, const PoseWeights& weights) {
  const MmgParams params = apply_candidate(base, selector, x);
  double total = 0.0;
  for (double j : trial_deviations_serial(trials, params, ship, weights)) {
    if (j >= kFailedRolloutFitness) return kFailedRolloutFitness;
    total += j;
  }
  return std::min(total, kFailedRolloutFitness);
}

Evaluation evaluate(const MmgParams& theta, std::span<const Trial> trials,
                    const PoseWeights& weights, const ShipParticulars& ship) {
  if (trials.empty()) {
    throw Error(ErrorKind::kValidationError, "evaluate: no trials");
  }
  Evaluation out;
  out.trials.resize(trials.size());
  for (std::size_t k = 0; k < trials.size(); ++k) {
    TrialEvaluation& te = out.trials[k];
    te.label = trials[k].label;
    try {
      te.j = rollout(trials[k], theta, ship, weights, &te.simulated);
    } catch (const SimulationAborted& e) {
      te.aborted = true;
      te.error = e.what();
      te.j = std::numeric_limits<double>::infinity();
    }
  }
  for (const TrialEvaluation& te : out.trials) {
    out.any_aborted = out.any_aborted || te.aborted;
    out.total += te.j;
  }
  return out;
}

TuneOutcome tune(const TuningSpec& spec, const MmgParams& base,
                 const ShipParticulars& ship) {
  const auto started = std::chrono::steady_clock::now();
  spec.validate(base);
  ship.validate();

  TuneOutcome outcome;
  TuneReport& report = outcome.report;
  report.names = spec.selector.names();
  report.a_r = spec.a_r;
  report.weights = spec.weights;
  report.theta_pre = spec.selector.extract(base);
  report.box = exploration_box(report.theta_pre, spec.a_r);
  report.tune_labels = labels_of(spec.tune_set);
  report.test_labels = labels_of(spec.test_set);
  report.tune_only = spec.test_set.empty();
  report.seed = spec.cma.seed;

  const Objective objective = [&](std::span<const double> x) {
    return objective_j(x, spec.selector, spec.tune_set, base, ship,
                       spec.weights);
  };
  CmaConfig cma = spec.cma;
  if (cma.mean0.empty()) {
    cma.mean0 = normalize(report.theta_pre, report.box);
  }
  report.optimizer = cmaes_minimize_with_restarts(objective, report.box, cma);
  report.theta_star = report.optimizer.x_best;

  outcome.theta_star = apply_candidate(base, spec.selector, report.theta_star);
  report.pre_tune = evaluate(base, spec.tune_set, spec.weights, ship);
  report.star_tune =
      evaluate(outcome.theta_star, spec.tune_set, spec.weights, ship);
  if (!spec.test_set.empty()) {
    report.pre_test = evaluate(base, spec.test_set, spec.weights, ship);
    report.star_test =
        evaluate(outcome.theta_star, spec.test_set, spec.weights, ship);
  }
  report.wall_clock_s = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  return outcome;
}

SweepOutcome sweep(const TuningSpec& spec, std::span<const double> a_r_values,
                   const MmgParams& base, const ShipParticulars& ship) {
  SweepOutcome out;
  for (double a_r : a_r_values) {
    TuningSpec s = spec;
    s.a_r = a_r;
    TuneOutcome run = tune(s, base, ship);
    SweepRow row;
    row.a_r = a_r;
    row.j_tune = run.report.star_tune.total;
    row.j_test = run.report.tune_only
                     ? std::numeric_limits<double>::quiet_NaN()
                     : run.report.star_test.total;
    out.rows.push_back(row);
    out.runs.push_back(std::move(run));
  }
  return out;
}

}  // namespace mmgtune
