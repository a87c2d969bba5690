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

// mmgtune command-line front end.
//
//   mmgtune simulate   --delta 35 --delta-sign both --np-rpm 106 --u0-knots 6
//   mmgtune gen-trials --out data --noise 0 --theta-true-perturb 0.15 --seed 7
//   mmgtune tune       --manifest data/manifest.json --ar 0.2 --out run
//   mmgtune evaluate   --manifest data/manifest.json --theta run/theta_star.json
//   mmgtune sweep      --manifest data/manifest.json --ar 0.2 --ar 0.3 ...
//
// Exit status is 0 only when every output file was written.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmgtune/dynamics.hpp"
#include "mmgtune/error.hpp"
#include "mmgtune/io.hpp"
#include "mmgtune/trial_data.hpp"
#include "mmgtune/tuning.hpp"

namespace fs = std::filesystem;
using mmgtune::io::json;

namespace mmgtune {
namespace {

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::kIoError, "cannot create directory " + dir.string());
  }
}

// ---------------------------------------------------------------------------
// Options shared by several verbs.

struct ModelOptions {
  std::string ship_file;
  std::string params_file;

  void add(CLI::App* app) {
    app->add_option("--ship", ship_file, "Ship particulars JSON");
    app->add_option("--params", params_file, "Base MMG parameter JSON");
  }
  ShipParticulars ship() const {
    if (ship_file.empty()) return {};
    return io::ship_from_json(io::read_json_file(ship_file));
  }
  MmgParams params() const {
    if (params_file.empty()) return {};
    return io::params_from_json(io::read_json_file(params_file));
  }
};

struct TuneOptions {
  std::string config_file;
  std::string manifest;
  std::string out_dir;
  std::vector<double> a_r;
  std::vector<std::string> select;
  std::vector<double> weights;
  std::uint64_t seed = 1;
  std::int64_t max_evals = 0;
  bool parallel = false;
  ModelOptions model;

  void add(CLI::App* app, const char* default_out) {
    out_dir = default_out;
    app->add_option("--config", config_file, "Run configuration JSON");
    app->add_option("--manifest", manifest, "Dataset manifest JSON");
    app->add_option("--ar", a_r, "Relative half-width of the search box");
    app->add_option("--select", select, "Coefficients to tune (default: 12)");
    app->add_option("--weights", weights, "Pose weights w_p1 w_p2 w_psi")
        ->expected(3);
    app->add_option("--seed", seed, "Optimizer seed");
    app->add_option("--max-evals", max_evals, "Evaluation budget");
    app->add_flag("--parallel", parallel, "Evaluate candidates with OpenMP");
    app->add_option("--out", out_dir, "Output directory");
    model.add(app);
  }

  // Flags override the configuration file.
  io::RunConfig resolve(const CLI::App& app) const {
    io::RunConfig c;
    if (!config_file.empty()) {
      c = io::run_config_from_json(io::read_json_file(config_file));
      c.resolve_paths(fs::path(config_file).parent_path());
    }
    if (!manifest.empty()) c.manifest = manifest;
    if (!model.ship_file.empty()) c.ship_file = model.ship_file;
    if (!model.params_file.empty()) c.params_file = model.params_file;
    if (!a_r.empty()) c.a_r = a_r;
    if (!select.empty()) c.selector = select;
    if (!weights.empty()) c.weights = PoseWeights{weights[0], weights[1], weights[2]};
    if (app.count("--seed") > 0 || config_file.empty()) {
      c.seed = seed;
      c.cma.seed = seed;
    }
    if (max_evals > 0) c.cma.max_evals = max_evals;
    if (parallel) c.cma.eval_mode = EvalMode::kOpenMP;
    if (app.count("--out") > 0 || config_file.empty()) c.output_dir = out_dir;
    if (!c.manifest) {
      throw Error(ErrorKind::kValidationError,
                  "a dataset manifest is required (--manifest or config)");
    }
    for (double a : c.a_r) {
      if (!(a > 0.0)) {
        throw Error(ErrorKind::kValidationError,
                    "a_r must be positive, got " + number(a));
      }
    }
    return c;
  }
};

ShipParticulars load_ship(const io::RunConfig& c) {
  return c.ship_file ? io::ship_from_json(io::read_json_file(*c.ship_file))
                     : ShipParticulars{};
}

MmgParams load_params(const io::RunConfig& c) {
  return c.params_file ? io::params_from_json(io::read_json_file(*c.params_file))
                       : MmgParams{};
}

TuningSpec build_spec(const io::RunConfig& c, const io::LoadedDataset& data,
                      const ShipParticulars& ship) {
  TuningSpec spec;
  if (!c.selector.empty()) spec.selector = ParamSelector(c.selector);
  spec.weights = c.weights ? *c.weights : default_pose_weights(ship);
  spec.tune_set = select_trials(data.trials, data.split.tune);
  spec.test_set = select_trials(data.trials, data.split.test);
  spec.cma = c.cma;
  spec.a_r = c.a_r.front();
  return spec;
}

void write_run(const TuneOutcome& run, const fs::path& dir) {
  ensure_dir(dir);
  io::write_json_file(io::params_to_json(run.theta_star), dir / "theta_star.json");
  json report = io::report_to_json(run.report);
  report["history_file"] = "history.csv";
  io::write_json_file(report, dir / "report.json");
  std::ofstream history(dir / "history.csv");
  write_history_csv(run.report.optimizer, history);
  if (!history) {
    throw Error(ErrorKind::kIoError, "cannot write " + (dir / "history.csv").string());
  }
}

std::string run_dir_name(double a_r) {
  std::ostringstream os;
  os << "ar_" << a_r;
  return os.str();
}

void write_sweep_table(std::span<const SweepRow> rows, const fs::path& path) {
  std::string text = "a_r,j_tune,j_test\n";
  for (const SweepRow& r : rows) {
    text += number(r.a_r) + "," + number(r.j_tune) + "," +
            (std::isnan(r.j_test) ? std::string() : number(r.j_test)) + "\n";
  }
  io::write_text_file(text, path);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  double delta_deg = 35.0;
  std::string delta_sign = "pos";
  double np_rpm = 106.0;
  double u0_knots = 0.0;  // unset: 3.086 m/s
  double u0_mps = 0.0;
  double dt = 1.0;
  double duration = 600.0;
  double rudder_rate = 0.0;
  std::string out_dir = "sim";
  ModelOptions model;
};

json track_summary(const Trajectory& t, double lpp) {
  const TurningMetrics m = analyze_turning(t);
  const AugmentedState& end = t.states.back();
  return {{"rows", t.size()},
          {"heading_change_deg", m.heading_change * 180.0 / std::numbers::pi},
          {"completed_circle", m.completed_circle},
          {"steady_diameter_m", m.steady_diameter},
          {"steady_diameter_over_lpp", m.steady_diameter / lpp},
          {"tactical_diameter_m", m.tactical_diameter},
          {"advance_m", m.advance},
          {"final_speed_mps", m.final_speed},
          {"final_yaw_rate_deg_s", m.final_yaw_rate * 180.0 / std::numbers::pi},
          {"end", {{"p1", end.p1}, {"p2", end.p2}, {"psi_rad", end.psi}}}};
}

int cmd_simulate(const SimulateOptions& o) {
  const ShipParticulars ship = o.model.ship();
  const MmgParams params = o.model.params();
  std::vector<double> angles;
  if (o.delta_sign == "pos" || o.delta_sign == "both") angles.push_back(std::abs(o.delta_deg));
  if (o.delta_sign == "neg" || o.delta_sign == "both") angles.push_back(-std::abs(o.delta_deg));
  if (o.delta_sign == "as-given") angles = {o.delta_deg};

  const fs::path out(o.out_dir);
  ensure_dir(out);
  json summary = {{"dt", o.dt}, {"np_rpm", o.np_rpm}, {"runs", json::array()}};
  std::vector<double> diameters;
  for (double angle : angles) {
    ManeuverSpec spec;
    spec.rudder_deg = angle;
    spec.rudder_rate_deg_s = o.rudder_rate;
    spec.n_p_rpm = o.np_rpm;
    if (o.u0_mps > 0.0) {
      spec.u0 = o.u0_mps;
    } else if (o.u0_knots > 0.0) {
      spec.u0 = knots_to_mps(o.u0_knots);
    }
    spec.duration = o.duration;
    spec.dt = o.dt;
    AugmentedState z0;
    z0.state.u = spec.u0;
    Trial trial;
    trial.label = spec.label();
    trial.data = simulate(z0, maneuver_controls(spec), params, ship, spec.dt);
    save_trial(trial, out / (trial.label + ".csv"));

    std::string track = "x_over_lpp,y_over_lpp\n";
    for (const AugmentedState& z : trial.data.states) {
      track += number(z.p1 / ship.lpp) + "," + number(z.p2 / ship.lpp) + "\n";
    }
    io::write_text_file(track, out / (trial.label + "_track.csv"));

    json run = track_summary(trial.data, ship.lpp);
    run["label"] = trial.label;
    run["trajectory"] = trial.label + ".csv";
    run["track"] = trial.label + "_track.csv";
    diameters.push_back(run["steady_diameter_m"].get<double>());
    summary["runs"].push_back(run);
    std::printf("%s: steady diameter %.1f m (%.3f L), heading change %.0f deg\n",
                trial.label.c_str(), run["steady_diameter_m"].get<double>(),
                run["steady_diameter_over_lpp"].get<double>(),
                run["heading_change_deg"].get<double>());
  }
  if (angles.size() == 2 && angles[0] != 0.0) {
    const bool larger = diameters[0] > diameters[1];
    summary["starboard_diameter_exceeds_port"] = larger;
    std::printf("starboard turning circle %s port turning circle\n",
                larger ? "is larger than" : "is NOT larger than");
  }
  io::write_json_file(summary, out / "summary.json");
  return 0;
}

// ---------------------------------------------------------------------------
// gen-trials

struct GenOptions {
  std::string out_dir = "data";
  double noise = 1.0;
  double perturb = 0.0;
  std::uint64_t seed = 1;
  double duration = 600.0;
  double dt = 1.0;
  double rudder_rate = 2.34;
  double np_rpm = 106.0;
  double u0_knots = 0.0;  // unset: 3.086 m/s
  int precision = 17;
  std::string units = "mariner";
  ModelOptions model;
};

std::vector<std::string> labels_of_manifest(const io::DatasetManifest& m) {
  std::vector<std::string> labels;
  for (const auto& entry : m.trials) labels.push_back(entry.first);
  return labels;
}

int cmd_gen_trials(const GenOptions& o) {
  const ShipParticulars ship = o.model.ship();
  MmgParams truth = o.model.params();
  if (o.perturb < 0.0 || o.noise < 0.0) {
    throw Error(ErrorKind::kValidationError,
                "--noise and --theta-true-perturb must be non-negative");
  }
  if (o.perturb > 0.0) {
    // Uniform relative perturbation of the default twelve coefficients.
    const ParamSelector sel;
    std::vector<double> x = sel.extract(truth);
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> rel(-o.perturb, o.perturb);
    for (double& xi : x) xi += rel(rng) * std::abs(xi);
    truth = apply_candidate(truth, sel, x);
    truth.validate();
  }

  const fs::path out(o.out_dir);
  ensure_dir(out);
  ManeuverSpec base;
  base.duration = o.duration;
  base.dt = o.dt;
  base.rudder_rate_deg_s = o.rudder_rate;
  base.n_p_rpm = o.np_rpm;
  if (o.u0_knots > 0.0) base.u0 = knots_to_mps(o.u0_knots);
  const NoiseModel noise = NoiseModel{}.scaled(o.noise);
  TrialWriteOptions write;
  write.precision = o.precision;
  write.units = o.units == "internal" ? UnitSystem::kInternal : UnitSystem::kMariner;

  io::DatasetManifest manifest;
  std::uint64_t k = 0;
  for (const ManeuverSpec& spec : standard_turning_suite(base)) {
    const Trial t = generate_synthetic_trial(truth, spec, ship, noise,
                                             o.seed * 1000 + k++);
    const std::string file = t.label + ".csv";
    save_trial(t, out / file, write);
    manifest.trials.emplace_back(t.label, file);
  }
  const DatasetSplit split = paper_split(labels_of_manifest(manifest));
  manifest.split.tune = split.tune;
  manifest.split.test = split.test;
  io::write_json_file(io::manifest_to_json(manifest), out / "manifest.json");
  io::write_json_file(io::params_to_json(truth), out / "theta_true.json");
  std::printf("wrote %zu trials, manifest.json and theta_true.json to %s\n",
              manifest.trials.size(), out.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// tune / sweep

int cmd_tune(const TuneOptions& o, const CLI::App& app) {
  const io::RunConfig c = o.resolve(app);
  const ShipParticulars ship = load_ship(c);
  const MmgParams base = load_params(c);
  const io::LoadedDataset data = io::load_dataset(*c.manifest);
  const TuningSpec spec = build_spec(c, data, ship);
  spec.validate(base);
  const fs::path out(c.output_dir);
  ensure_dir(out);

  if (c.a_r.size() == 1) {
    const TuneOutcome run = tune(spec, base, ship);
    write_run(run, out);
    std::printf("a_r %g: J_tune %.6g -> %.6g", c.a_r[0],
                run.report.pre_tune.total, run.report.star_tune.total);
    if (!run.report.tune_only) {
      std::printf(", J_test %.6g -> %.6g", run.report.pre_test.total,
                  run.report.star_test.total);
    }
    std::printf(" (%lld evals)\n",
                static_cast<long long>(run.report.optimizer.evals_used));
    return 0;
  }
  const SweepOutcome sw = sweep(spec, c.a_r, base, ship);
  for (std::size_t i = 0; i < sw.runs.size(); ++i) {
    write_run(sw.runs[i], out / run_dir_name(sw.rows[i].a_r));
  }
  write_sweep_table(sw.rows, out / "sweep.csv");
  for (const SweepRow& r : sw.rows) {
    std::printf("a_r %g: J_tune %.6g J_test %.6g\n", r.a_r, r.j_tune, r.j_test);
  }
  return 0;
}

int cmd_sweep(TuneOptions o, const CLI::App& app) {
  if (o.a_r.empty() && o.config_file.empty()) o.a_r = {0.2, 0.3, 0.4, 0.5, 0.6};
  io::RunConfig c = o.resolve(app);
  if (c.a_r.size() < 2 && o.a_r.empty()) c.a_r = {0.2, 0.3, 0.4, 0.5, 0.6};
  const ShipParticulars ship = load_ship(c);
  const MmgParams base = load_params(c);
  const io::LoadedDataset data = io::load_dataset(*c.manifest);
  const TuningSpec spec = build_spec(c, data, ship);
  spec.validate(base);
  const fs::path out(c.output_dir);
  ensure_dir(out);
  const SweepOutcome sw = sweep(spec, c.a_r, base, ship);
  for (std::size_t i = 0; i < sw.runs.size(); ++i) {
    write_run(sw.runs[i], out / run_dir_name(sw.rows[i].a_r));
  }
  write_sweep_table(sw.rows, out / "sweep.csv");
  std::printf("a_r,j_tune,j_test\n");
  for (const SweepRow& r : sw.rows) {
    std::printf("%g,%.6g,%.6g\n", r.a_r, r.j_tune, r.j_test);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string theta_file;
  std::string dataset = "test";
  std::string out_dir = "eval";
  std::string manifest;
  std::vector<double> weights;
  ModelOptions model;
};

int cmd_evaluate(const EvaluateOptions& o) {
  const ShipParticulars ship = o.model.ship();
  const MmgParams theta = o.theta_file.empty()
                              ? o.model.params()
                              : io::params_from_json(io::read_json_file(o.theta_file));
  const io::LoadedDataset data = io::load_dataset(o.manifest);
  std::vector<std::string> labels;
  if (o.dataset == "tune" || o.dataset == "all") {
    labels.insert(labels.end(), data.split.tune.begin(), data.split.tune.end());
  }
  if (o.dataset == "test" || o.dataset == "all") {
    labels.insert(labels.end(), data.split.test.begin(), data.split.test.end());
  }
  if (labels.empty()) {
    throw Error(ErrorKind::kValidationError,
                "evaluate: the " + o.dataset + " set is empty");
  }
  const std::vector<Trial> trials = select_trials(data.trials, labels);
  const PoseWeights w = o.weights.empty()
                            ? default_pose_weights(ship)
                            : PoseWeights{o.weights[0], o.weights[1], o.weights[2]};
  const Evaluation e = evaluate(theta, trials, w, ship);

  const fs::path out(o.out_dir);
  ensure_dir(out);
  json doc = io::evaluation_to_json(e);
  doc["dataset"] = o.dataset;
  doc["weights"] = {w[0], w[1], w[2]};
  io::write_json_file(doc, out / "evaluation.json");

  std::string table = "label,j\n";
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const TrialEvaluation& te = e.trials[k];
    table += te.label + "," + (te.aborted ? std::string("aborted") : number(te.j)) + "\n";
    std::string overlay = "t,p1_rec,p2_rec,psi_rec_deg,p1_sim,p2_sim,psi_sim_deg\n";
    const Trajectory& rec = trials[k].data;
    for (std::size_t i = 0; i < te.simulated.size(); ++i) {
      const AugmentedState& a = rec.states[i];
      const AugmentedState& b = te.simulated.states[i];
      overlay += number(static_cast<double>(i) * rec.dt) + "," + number(a.p1) +
                 "," + number(a.p2) + "," + number(a.psi * 180.0 / std::numbers::pi) +
                 "," + number(b.p1) + "," + number(b.p2) + "," +
                 number(b.psi * 180.0 / std::numbers::pi) + "\n";
    }
    io::write_text_file(overlay, out / (te.label + "_overlay.csv"));
  }
  table += "total," + (e.any_aborted ? std::string("aborted") : number(e.total)) + "\n";
  io::write_text_file(table, out / "j_table.csv");
  std::printf("%s", table.c_str());
  return 0;
}

}  // namespace
}  // namespace mmgtune

int main(int argc, char** argv) {
  using namespace mmgtune;
  CLI::App app{"MMG ship maneuvering simulation and CMA-ES parameter tuning"};
  app.require_subcommand(1);

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Run turning maneuvers");
  simulate->add_option("--delta", sim.delta_deg, "Rudder angle [deg]");
  simulate->add_option("--delta-sign", sim.delta_sign, "pos, neg, both or as-given")
      ->check(CLI::IsMember({"pos", "neg", "both", "as-given"}));
  simulate->add_option("--np-rpm", sim.np_rpm, "Propeller revolutions [rpm]");
  simulate->add_option("--u0-knots", sim.u0_knots, "Initial speed [kn] (default 3.086 m/s)");
  simulate->add_option("--u0", sim.u0_mps, "Initial speed [m/s]; overrides --u0-knots");
  simulate->add_option("--dt", sim.dt, "Time step [s]");
  simulate->add_option("--duration", sim.duration, "Duration [s]");
  simulate->add_option("--rudder-rate", sim.rudder_rate,
                       "Rudder rate [deg/s]; 0 gives a step command");
  simulate->add_option("--out", sim.out_dir, "Output directory");
  sim.model.add(simulate);

  GenOptions gen;
  CLI::App* gen_trials =
      app.add_subcommand("gen-trials", "Generate the synthetic turning suite");
  gen_trials->add_option("--out", gen.out_dir, "Output directory");
  gen_trials->add_option("--noise", gen.noise, "Noise scale; 0 gives noiseless data");
  gen_trials->add_option("--theta-true-perturb", gen.perturb,
                         "Relative perturbation of the twelve tuned coefficients");
  gen_trials->add_option("--seed", gen.seed, "Seed for truth and noise");
  gen_trials->add_option("--duration", gen.duration, "Duration per trial [s]");
  gen_trials->add_option("--dt", gen.dt, "Time step [s]");
  gen_trials->add_option("--rudder-rate", gen.rudder_rate, "Rudder rate [deg/s]");
  gen_trials->add_option("--np-rpm", gen.np_rpm, "Propeller revolutions [rpm]");
  gen_trials->add_option("--u0-knots", gen.u0_knots,
                         "Initial speed [kn] (default 3.086 m/s)");
  gen_trials->add_option("--precision", gen.precision, "Significant digits")
      ->check(CLI::Range(1, 17));
  gen_trials->add_option("--units", gen.units, "mariner or internal")
      ->check(CLI::IsMember({"mariner", "internal"}));
  gen.model.add(gen_trials);

  TuneOptions tune_opts;
  CLI::App* tune_cmd = app.add_subcommand("tune", "Fine-tune coefficients");
  tune_opts.add(tune_cmd, "tune_out");

  TuneOptions sweep_opts;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Tune over several a_r");
  sweep_opts.add(sweep_cmd, "sweep_out");

  EvaluateOptions eval;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Score parameters on a dataset");
  evaluate_cmd->add_option("--manifest", eval.manifest, "Dataset manifest JSON")->required();
  evaluate_cmd->add_option("--theta", eval.theta_file, "Parameter JSON to evaluate");
  evaluate_cmd->add_option("--dataset", eval.dataset, "tune, test or all")
      ->check(CLI::IsMember({"tune", "test", "all"}));
  evaluate_cmd->add_option("--weights", eval.weights, "Pose weights")->expected(3);
  evaluate_cmd->add_option("--out", eval.out_dir, "Output directory");
  eval.model.add(evaluate_cmd);

  CLI11_PARSE(app, argc, argv);

  const char* verb = app.get_subcommands().front()->get_name().c_str();
  try {
    if (*simulate) return cmd_simulate(sim);
    if (*gen_trials) return cmd_gen_trials(gen);
    if (*tune_cmd) return cmd_tune(tune_opts, *tune_cmd);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, *sweep_cmd);
    if (*evaluate_cmd) return cmd_evaluate(eval);
  } catch (const Error& e) {
    std::fprintf(stderr, "mmgtune %s: %s: %s\n", verb,
                 std::string(to_string(e.kind())).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mmgtune %s: error: %s\n", verb, e.what());
    return 2;
  }
  return 1;
}
