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

#include "mmgtune/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "mmgtune/error.hpp"

namespace mmgtune {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kTolFun: return "tol_fun";
    case Termination::kTolX: return "tol_x";
    case Termination::kConditionCov: return "condition_cov";
    case Termination::kMaxIter: return "max_iter";
    case Termination::kBudget: return "budget";
  }
  return "unknown";
}

void BoxConstraint::validate() const {
  if (lower.size() != upper.size() || lower.empty()) {
    throw Error(ErrorKind::kDegenerateBox,
                "box: bounds must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) ||
        !(lower[i] < upper[i])) {
      throw Error(ErrorKind::kDegenerateBox,
                  "box: coordinate " + std::to_string(i) +
                      " needs finite lower < upper");
    }
  }
}

bool BoxConstraint::contains(std::span<const double> x) const {
  if (x.size() != size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

std::vector<double> normalize(std::span<const double> x,
                              const BoxConstraint& box) {
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = (x[i] - box.lower[i]) / (box.upper[i] - box.lower[i]);
  }
  return z;
}

std::vector<double> denormalize(std::span<const double> z,
                                const BoxConstraint& box) {
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double width = box.upper[i] - box.lower[i];
    // Anchor on the nearer bound so that 0 and 1 map exactly.
    const double v = z[i] <= 0.5 ? box.lower[i] + z[i] * width
                                 : box.upper[i] - (1.0 - z[i]) * width;
    x[i] = std::clamp(v, box.lower[i], box.upper[i]);
  }
  return x;
}

RepairedPoint repair_and_penalize(std::span<const double> z,
                                  double penalty_coefficient) {
  RepairedPoint out;
  out.z.resize(z.size());
  double dist_sq = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out.z[i] = std::clamp(z[i], 0.0, 1.0);
    const double d = z[i] - out.z[i];
    dist_sq += d * d;
  }
  out.penalty = penalty_coefficient * dist_sq;
  return out;
}

void CmaConfig::validate(std::size_t dimension) const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kValidationError, "cma: " + what);
  };
  if (lambda0 < 4) fail("lambda0 must be >= 4");
  if (lambda_max < lambda0) fail("lambda_max must be >= lambda0");
  if (!(sigma0 > 0.0 && sigma0 <= 1.0)) fail("sigma0 must lie in (0, 1]");
  if (max_evals <= 0) fail("max_evals must be positive");
  if (!(tol_fun >= 0.0) || !(tol_x >= 0.0)) fail("tolerances must be >= 0");
  if (!mean0.empty()) {
    if (mean0.size() != dimension) fail("mean0 has the wrong dimension");
    for (double m : mean0) {
      if (!(m >= 0.0 && m <= 1.0)) fail("mean0 must lie in [0, 1]");
    }
  }
}

namespace {

[[noreturn]] void throw_non_finite(std::size_t index,
                                   std::span<const double> point,
                                   double value) {
  std::ostringstream msg;
  msg << "objective returned " << value << " for candidate " << index
      << " at (";
  for (std::size_t i = 0; i < point.size(); ++i) {
    msg << (i ? ", " : "") << point[i];
  }
  msg << ")";
  throw Error(ErrorKind::kNonFiniteObjective, msg.str());
}

}  // namespace

void evaluate_population_serial(const Objective& f,
                                std::span<const std::vector<double>> points,
                                std::span<double> values) {
  for (std::size_t k = 0; k < points.size(); ++k) {
    values[k] = f(points[k]);
    if (!std::isfinite(values[k])) throw_non_finite(k, points[k], values[k]);
  }
}

void evaluate_population_openmp(const Objective& f,
                                std::span<const std::vector<double>> points,
                                std::span<double> values) {
  const auto n = static_cast<std::int64_t>(points.size());
  std::vector<std::exception_ptr> errors(points.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) {
    try {
      values[k] = f(points[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  // Report the lowest failing index so the outcome matches the serial path.
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    if (!std::isfinite(values[k])) throw_non_finite(k, points[k], values[k]);
  }
}

namespace {

struct BestTracker {
  std::vector<double> z;  // normalized, feasible
  double f = std::numeric_limits<double>::infinity();

  void offer(const std::vector<double>& candidate, double value) {
    if (value < f) {
      f = value;
      z = candidate;
    }
  }
};

// Shared state across the runs of one optimization.
struct Session {
  const Objective& f;
  const BoxConstraint& box;
  const CmaConfig& config;
  std::mt19937_64 rng;
  double penalty_coefficient;
  BestTracker best;
  std::int64_t evals = 0;
  std::int64_t iteration = 0;
  std::vector<IterationRecord>* history = nullptr;

  Session(const Objective& fn, const BoxConstraint& b, const CmaConfig& c)
      : f(fn), box(b), config(c), rng(c.seed),
        penalty_coefficient(c.penalty_coefficient) {}

  std::int64_t budget_left() const { return config.max_evals - evals; }

  void evaluate(std::span<const std::vector<double>> z_feasible,
                std::span<double> values) {
    std::vector<std::vector<double>> xs;
    xs.reserve(z_feasible.size());
    for (const auto& z : z_feasible) xs.push_back(denormalize(z, box));
    if (config.eval_mode == EvalMode::kOpenMP) {
      evaluate_population_openmp(f, xs, values);
    } else {
      evaluate_population_serial(f, xs, values);
    }
    evals += static_cast<std::int64_t>(z_feasible.size());
  }

  // The starting mean is always evaluated once so the result is never worse
  // than it.
  void evaluate_start(const Eigen::VectorXd& mean) {
    std::vector<std::vector<double>> z = {
        repair_and_penalize(std::span<const double>(mean.data(), mean.size()),
                            0.0)
            .z};
    double value = 0.0;
    evaluate(z, std::span<double>(&value, 1));
    best.offer(z.front(), value);
  }
};

RunRecord run_once(Session& s, int restart_index, int lambda,
                   Eigen::VectorXd mean) {
  const auto n = static_cast<Eigen::Index>(s.box.size());
  const double nd = static_cast<double>(n);

  // Strategy constants, standard defaults.
  const int mu = lambda / 2;
  Eigen::VectorXd weights(mu);
  for (int i = 0; i < mu; ++i) {
    weights(i) = std::log((lambda + 1.0) / 2.0) - std::log(i + 1.0);
  }
  weights /= weights.sum();
  const double mueff = 1.0 / weights.squaredNorm();
  const double cc = (4.0 + mueff / nd) / (nd + 4.0 + 2.0 * mueff / nd);
  const double cs = (mueff + 2.0) / (nd + mueff + 5.0);
  const double c1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mueff);
  const double cmu = std::min(
      1.0 - c1,
      2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nd + 2.0) * (nd + 2.0) + mueff));
  const double damps =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (nd + 1.0)) - 1.0) +
      cs;
  const double chi_n =
      std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
  const auto tol_window = static_cast<std::size_t>(
      10 + std::ceil(30.0 * nd / static_cast<double>(lambda)));
  const std::int64_t max_iter = static_cast<std::int64_t>(
      100 + 150 * (nd + 3) * (nd + 3) / std::sqrt(static_cast<double>(lambda)));

  double sigma = s.config.sigma0;
  Eigen::VectorXd pc = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ps = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd inv_sqrt_c = Eigen::MatrixXd::Identity(n, n);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::deque<double> recent_best;

  RunRecord rec;
  rec.restart_index = restart_index;
  rec.lambda = lambda;
  rec.best_f = std::numeric_limits<double>::infinity();
  const std::int64_t evals_at_start = s.evals;
  const std::int64_t iteration_at_start = s.iteration;

  Eigen::MatrixXd y(n, lambda);
  std::vector<std::vector<double>> z_feasible(lambda);
  std::vector<double> penalty(lambda);
  std::vector<double> raw(lambda);
  std::vector<double> fitness(lambda);
  std::vector<int> order(lambda);

  for (std::int64_t gen = 0;; ++gen) {
    if (s.budget_left() < lambda) {
      rec.termination = Termination::kBudget;
      break;
    }
    if (gen >= max_iter) {
      rec.termination = Termination::kMaxIter;
      break;
    }

    // Sample in candidate order so the RNG stream is independent of how the
    // objective is evaluated.
    for (int k = 0; k < lambda; ++k) {
      Eigen::VectorXd g(n);
      for (Eigen::Index i = 0; i < n; ++i) g(i) = normal(s.rng);
      y.col(k) = b * d.cwiseProduct(g);
      const Eigen::VectorXd x = mean + sigma * y.col(k);
      RepairedPoint rp = repair_and_penalize(
          std::span<const double>(x.data(), x.size()), 1.0);
      z_feasible[k] = std::move(rp.z);
      penalty[k] = rp.penalty;  // squared clamp distance for now
    }
    s.evaluate(z_feasible, raw);

    if (!(s.penalty_coefficient > 0.0)) {
      std::vector<double> mags(raw.size());
      std::transform(raw.begin(), raw.end(), mags.begin(),
                     [](double v) { return std::abs(v); });
      std::nth_element(mags.begin(), mags.begin() + mags.size() / 2,
                       mags.end());
      const double typical = mags[mags.size() / 2];
      s.penalty_coefficient = 1e4 * (typical > 0.0 ? typical : 1.0);
    }
    for (int k = 0; k < lambda; ++k) {
      fitness[k] = raw[k] + s.penalty_coefficient * penalty[k];
      s.best.offer(z_feasible[k], raw[k]);
    }

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int bb) {
      return fitness[a] < fitness[bb];
    });

    ++s.iteration;
    const double gen_best_raw = *std::min_element(raw.begin(), raw.end());
    rec.best_f = std::min(rec.best_f, gen_best_raw);
    if (s.history != nullptr) {
      s.history->push_back({s.iteration, s.evals, lambda, gen_best_raw,
                            s.best.f, restart_index});
    }

    // Recombination and path updates.
    Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < mu; ++i) y_w += weights(i) * y.col(order[i]);
    mean += sigma * y_w;

    ps = (1.0 - cs) * ps +
         std::sqrt(cs * (2.0 - cs) * mueff) * (inv_sqrt_c * y_w);
    const double ps_norm = ps.norm();
    const double ps_decay =
        std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * static_cast<double>(gen + 1)));
    const bool hsig = ps_norm / ps_decay / chi_n < 1.4 + 2.0 / (nd + 1.0);
    pc = (1.0 - cc) * pc +
         (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < mu; ++i) {
      const auto yi = y.col(order[i]);
      rank_mu.noalias() += weights(i) * yi * yi.transpose();
    }
    const double hsig_fix = hsig ? 0.0 : cc * (2.0 - cc);
    c = (1.0 - c1 - cmu) * c + c1 * (pc * pc.transpose() + hsig_fix * c) +
        cmu * rank_mu;
    c = 0.5 * (c + c.transpose()).eval();

    sigma *= std::exp((cs / damps) * (ps_norm / chi_n - 1.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    const Eigen::VectorXd evals_c = eig.eigenvalues();
    if (eig.info() != Eigen::Success || !(evals_c.minCoeff() > 0.0) ||
        !std::isfinite(sigma) ||
        evals_c.maxCoeff() > 1e14 * evals_c.minCoeff()) {
      rec.termination = Termination::kConditionCov;
      break;
    }
    b = eig.eigenvectors();
    d = evals_c.cwiseSqrt();
    inv_sqrt_c = b * d.cwiseInverse().asDiagonal() * b.transpose();

    // Stopping rules.
    recent_best.push_back(fitness[order.front()]);
    if (recent_best.size() > tol_window) recent_best.pop_front();
    if (recent_best.size() == tol_window) {
      const auto [lo_it, hi_it] =
          std::minmax_element(recent_best.begin(), recent_best.end());
      const double lo = std::min(*lo_it, fitness[order.front()]);
      const double hi = std::max(*hi_it, fitness[order.back()]);
      const double scale = std::max(std::abs(lo), std::abs(hi));
      if (hi - lo <= s.config.tol_fun * scale) {
        rec.termination = Termination::kTolFun;
        break;
      }
    }
    const double max_sd = sigma * c.diagonal().cwiseSqrt().maxCoeff();
    if (max_sd < s.config.tol_x &&
        sigma * pc.cwiseAbs().maxCoeff() < s.config.tol_x) {
      rec.termination = Termination::kTolX;
      break;
    }
  }

  rec.iterations = s.iteration - iteration_at_start;
  rec.evals = s.evals - evals_at_start;
  return rec;
}

Eigen::VectorXd initial_mean(const CmaConfig& config, std::size_t n) {
  if (config.mean0.empty()) {
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 0.5);
  }
  return Eigen::Map<const Eigen::VectorXd>(config.mean0.data(),
                                           static_cast<Eigen::Index>(n));
}

}  // namespace

RunResult cmaes_run(const Objective& f, const BoxConstraint& box,
                    const CmaConfig& config, int lambda) {
  box.validate();
  config.validate(box.size());
  if (lambda < 4) {
    throw Error(ErrorKind::kInvalidArgument, "cma: lambda must be >= 4");
  }
  Session s(f, box, config);
  const Eigen::VectorXd mean = initial_mean(config, box.size());
  s.evaluate_start(mean);
  const RunRecord rec = run_once(s, 0, lambda, mean);

  RunResult out;
  out.x_best = denormalize(s.best.z, box);
  out.f_best = s.best.f;
  out.termination = rec.termination;
  out.evals = s.evals;
  out.iterations = rec.iterations;
  return out;
}

OptResult cmaes_minimize_with_restarts(const Objective& f,
                                       const BoxConstraint& box,
                                       const CmaConfig& config) {
  box.validate();
  config.validate(box.size());
  OptResult out;
  Session s(f, box, config);
  s.history = &out.history;

  Eigen::VectorXd mean = initial_mean(config, box.size());
  s.evaluate_start(mean);
  int lambda = config.lambda0;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int restart = 0;; ++restart) {
    const RunRecord rec = run_once(s, restart, lambda, mean);
    out.runs.push_back(rec);
    if (rec.termination == Termination::kBudget) break;
    lambda = std::min(2 * lambda, config.lambda_max);
    if (s.budget_left() < lambda) break;
    for (Eigen::Index i = 0; i < mean.size(); ++i) mean(i) = uniform(s.rng);
  }

  out.x_best = denormalize(s.best.z, box);
  out.f_best = s.best.f;
  out.evals_used = s.evals;
  return out;
}

void write_history_csv(const OptResult& result, std::ostream& out) {
  out << "iteration,evals,lambda,best_f,best_ever_f,restart_index\n";
  const auto old_precision = out.precision(17);
  for (const IterationRecord& r : result.history) {
    out << r.iteration << ',' << r.evals << ',' << r.lambda << ','
        << r.best_f << ',' << r.best_ever_f << ',' << r.restart_index << '\n';
  }
  out.precision(old_precision);
}

}  // namespace mmgtune
