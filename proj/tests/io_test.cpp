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
#include <filesystem>
#include <limits>
#include <string>

#include "doctest.h"
#include "mmgtune/error.hpp"
#include "mmgtune/io.hpp"

namespace mmgtune::io {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST_CASE("ship documents round trip and reject unknown keys") {
  ShipParticulars s;
  s.rho = 1000.0;
  CHECK(ship_from_json(ship_to_json(s)) == s);

  json doc = ship_to_json(s);
  doc["displacement"] = 1.0;
  CHECK_THROWS_AS(ship_from_json(doc), Error);
  doc = ship_to_json(s);
  doc["schema"] = "mmgtune.ship/2";
  CHECK_THROWS_AS(ship_from_json(doc), Error);
  doc = ship_to_json(s);
  doc["lpp"] = -1.0;
  CHECK_THROWS_AS(ship_from_json(doc), Error);
  CHECK(ship_from_json(json{{"schema", kShipSchema}}) == ShipParticulars{});
}

TEST_CASE("parameter documents round trip") {
  MmgParams p;
  p.kappa = 0.4014;
  p.flap_map = FlapMap({{-0.6, -0.9}, {0.6, 0.9}});
  p.propeller_lateral_force = false;
  const MmgParams back = params_from_json(params_to_json(p));
  CHECK(back.kappa == p.kappa);
  CHECK(back.propeller_lateral_force == false);
  REQUIRE(back.flap_map.breakpoints().size() == 2);
  CHECK(back.flap_map.breakpoints()[1].second ==
        doctest::Approx(0.9).epsilon(1e-15));

  const json partial = {{"schema", kParamsSchema},
                        {"coefficients", {{"w_p0", 0.5}}}};
  const MmgParams q = params_from_json(partial);
  CHECK(q.w_p0 == 0.5);
  CHECK(q.r0 == 0.017);

  try {
    params_from_json(json{{"schema", kParamsSchema},
                          {"coefficients", {{"w_p", 0.5}}}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnknownParameter);
  }
  CHECK_THROWS_AS(params_from_json(json{{"schema", kParamsSchema},
                                        {"coefficients", {{"w_p0", "x"}}}}),
                  Error);
  CHECK_THROWS_AS(params_from_json(json{{"schema", kParamsSchema},
                                        {"coefficients", {{"w_p0", 1.5}}}}),
                  Error);
}

TEST_CASE("optimizer settings round trip") {
  CmaConfig c;
  c.lambda0 = 16;
  c.max_evals = 1234;
  c.eval_mode = EvalMode::kOpenMP;
  c.mean0 = {0.25, 0.75};
  const CmaConfig back = cma_from_json(cma_to_json(c));
  CHECK(back.lambda0 == 16);
  CHECK(back.max_evals == 1234);
  CHECK(back.eval_mode == EvalMode::kOpenMP);
  CHECK(back.mean0 == c.mean0);
  json doc = cma_to_json(c);
  doc["popsize"] = 3;
  CHECK_THROWS_AS(cma_from_json(doc), Error);
}

TEST_CASE("run configuration") {
  const json doc = {{"schema", kRunSchema},
                    {"ship", "ship.json"},
                    {"manifest", "/data/manifest.json"},
                    {"seed", 7},
                    {"tuning",
                     {{"selector", {"kappa", "epsilon"}},
                      {"a_r", {0.2, 0.3}},
                      {"weights", {1.0, 2.0, 3.0}},
                      {"cma", {{"max_evals", 1000}}}}}};
  RunConfig c = run_config_from_json(doc);
  CHECK(c.seed == 7);
  CHECK(c.cma.seed == 7);
  CHECK(c.cma.max_evals == 1000);
  CHECK(c.selector == std::vector<std::string>{"kappa", "epsilon"});
  CHECK(c.a_r == std::vector<double>{0.2, 0.3});
  REQUIRE(c.weights.has_value());
  CHECK((*c.weights)[2] == 3.0);
  CHECK(!c.params_file.has_value());

  c.resolve_paths("/work/cfg");
  CHECK(*c.ship_file == "/work/cfg/ship.json");
  CHECK(*c.manifest == "/data/manifest.json");
  CHECK(c.output_dir == "/work/cfg/out");

  const RunConfig again = run_config_from_json(run_config_to_json(c));
  CHECK(again.a_r == c.a_r);
  CHECK(again.selector == c.selector);

  json bad = doc;
  bad["tuning"]["a_r"] = -0.2;
  CHECK_THROWS_AS(run_config_from_json(bad), Error);
  bad = doc;
  bad["verbose"] = true;
  CHECK_THROWS_AS(run_config_from_json(bad), Error);
  bad = doc;
  bad["tuning"]["weights"] = {1.0, 2.0};
  CHECK_THROWS_AS(run_config_from_json(bad), Error);
}

TEST_CASE("manifest and dataset loading") {
  const fs::path dir = scratch("mmgtune_io_dataset");
  DatasetManifest m;
  for (const ManeuverSpec& spec : standard_turning_suite()) {
    ManeuverSpec s = spec;
    s.duration = 20.0;
    const Trial t = generate_synthetic_trial(MmgParams{}, s, ShipParticulars{},
                                             NoiseModel::none(), 1);
    save_trial(t, dir / (t.label + ".csv"));
    m.trials.emplace_back(t.label, t.label + ".csv");
  }
  write_json_file(manifest_to_json(m), dir / "manifest.json");
  const LoadedDataset d = load_dataset(dir / "manifest.json");
  CHECK(d.trials.size() == 8);
  CHECK(d.split.tune.front() == "turn+10");
  CHECK(d.split.test.back() == "turn+40");

  DatasetManifest custom = m;
  custom.split = {"custom", {"turn+35"}, {}};
  write_json_file(manifest_to_json(custom), dir / "custom.json");
  const LoadedDataset c = load_dataset(dir / "custom.json");
  CHECK(c.split.tune == std::vector<std::string>{"turn+35"});
  CHECK(c.split.test.empty());

  DatasetManifest wrong = m;
  wrong.trials[0].first = "turn+11";
  write_json_file(manifest_to_json(wrong), dir / "wrong.json");
  CHECK_THROWS_AS(load_dataset(dir / "wrong.json"), Error);

  DatasetManifest short_list = m;
  short_list.trials.pop_back();
  write_json_file(manifest_to_json(short_list), dir / "short.json");
  CHECK_THROWS_AS(load_dataset(dir / "short.json"), Error);

  json bad = manifest_to_json(m);
  bad["split"]["scheme"] = "random";
  CHECK_THROWS_AS(manifest_from_json(bad), Error);

  CHECK_THROWS_AS(read_json_file(dir / "absent.json"), Error);
  write_text_file("{not json", dir / "broken.json");
  try {
    read_json_file(dir / "broken.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParseError);
  }
  fs::remove_all(dir);
}

TEST_CASE("report layout") {
  TuneReport r;
  r.names = {"kappa"};
  r.a_r = 0.2;
  r.weights = {83.0, 83.0, 0.785};
  r.box = {{0.4}, {0.6}};
  r.theta_pre = {0.5};
  r.theta_star = {0.56};
  r.tune_labels = {"turn+35"};
  r.tune_only = true;
  r.pre_tune.total = 10.0;
  r.star_tune.total = std::numeric_limits<double>::infinity();
  r.star_tune.any_aborted = true;
  r.wall_clock_s = 1.5;
  const json doc = report_to_json(r);
  CHECK(doc["schema"] == kReportSchema);
  CHECK(doc["j"]["tune"]["star"]["total"].is_null());
  CHECK(!doc["j"].contains("test"));
  CHECK(doc["timing"]["wall_clock_s"] == 1.5);
  const json cmp = comparable_report(doc);
  CHECK(!cmp.contains("timing"));
  CHECK(cmp["theta_star"] == doc["theta_star"]);
}

}  // namespace
}  // namespace mmgtune::io
