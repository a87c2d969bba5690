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

#include "mmgtune/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "mmgtune/error.hpp"

namespace mmgtune::io {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorKind::kValidationError, what);
}

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string context)
      : doc_(doc), context_(std::move(context)) {
    if (!doc_.is_object()) fail(context_ + ": expected a JSON object");
  }

  void expect_schema(const char* schema) {
    const auto it = doc_.find("schema");
    if (it == doc_.end() || !it->is_string() || *it != schema) {
      fail(context_ + ": expected schema \"" + schema + "\"");
    }
    used_.insert("schema");
  }

  const json* get(const std::string& key) {
    used_.insert(key);
    const auto it = doc_.find(key);
    return it == doc_.end() || it->is_null() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = get(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception& e) {
        fail(context_ + "." + key + ": " + e.what());
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!used_.contains(key)) fail(context_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& doc_;
  std::string context_;
  std::set<std::string> used_;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  write_text_file(doc.dump(2) + "\n", path);
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

// ---------------------------------------------------------------------------

json ship_to_json(const ShipParticulars& s) {
  return {{"schema", kShipSchema}, {"lpp", s.lpp},   {"beam", s.beam},
          {"draft", s.draft},      {"cb", s.cb},     {"x_g", s.x_g},
          {"d_p", s.d_p},          {"h_r", s.h_r},   {"a_r_area", s.a_r_area},
          {"rho", s.rho},          {"kzz_ratio", s.kzz_ratio}};
}

ShipParticulars ship_from_json(const json& doc) {
  ObjectReader r(doc, "ship");
  r.expect_schema(kShipSchema);
  ShipParticulars s;
  r.read("lpp", s.lpp);
  r.read("beam", s.beam);
  r.read("draft", s.draft);
  r.read("cb", s.cb);
  r.read("x_g", s.x_g);
  r.read("d_p", s.d_p);
  r.read("h_r", s.h_r);
  r.read("a_r_area", s.a_r_area);
  r.read("rho", s.rho);
  r.read("kzz_ratio", s.kzz_ratio);
  r.finish();
  s.validate();
  return s;
}

json params_to_json(const MmgParams& p) {
  json coefficients = json::object();
  for (const ParamField& f : param_fields()) {
    coefficients[std::string(f.name)] = p.*(f.member);
  }
  json flap = json::array();
  for (const auto& [d, df] : p.flap_map.breakpoints()) {
    flap.push_back({d / kDegToRad, df / kDegToRad});
  }
  return {{"schema", kParamsSchema},
          {"coefficients", coefficients},
          {"flap_map_deg", flap},
          {"propeller_lateral_force", p.propeller_lateral_force}};
}

MmgParams params_from_json(const json& doc) {
  ObjectReader r(doc, "params");
  r.expect_schema(kParamsSchema);
  MmgParams p;
  if (const json* c = r.get("coefficients")) {
    if (!c->is_object()) fail("params.coefficients: expected an object");
    for (const auto& item : c->items()) {
      if (!find_param_field(item.key())) {
        throw Error(ErrorKind::kUnknownParameter,
                    "params.coefficients: unknown parameter '" + item.key() +
                        "'");
      }
    }
    ObjectReader cr(*c, "params.coefficients");
    for (const ParamField& f : param_fields()) {
      cr.read(std::string(f.name), p.*(f.member));
    }
    cr.finish();
  }
  if (const json* flap = r.get("flap_map_deg")) {
    std::vector<std::pair<double, double>> points;
    for (const json& pt : *flap) {
      if (!pt.is_array() || pt.size() != 2) {
        fail("params.flap_map_deg: entries must be [delta_deg, flap_deg]");
      }
      points.emplace_back(pt[0].get<double>() * kDegToRad,
                          pt[1].get<double>() * kDegToRad);
    }
    p.flap_map = FlapMap(std::move(points));
  }
  r.read("propeller_lateral_force", p.propeller_lateral_force);
  r.finish();
  p.validate();
  return p;
}

json cma_to_json(const CmaConfig& c) {
  return {{"lambda0", c.lambda0},
          {"lambda_max", c.lambda_max},
          {"sigma0", c.sigma0},
          {"mean0", c.mean0},
          {"max_evals", c.max_evals},
          {"tol_fun", c.tol_fun},
          {"tol_x", c.tol_x},
          {"seed", c.seed},
          {"penalty_coefficient", c.penalty_coefficient},
          {"parallel", c.eval_mode == EvalMode::kOpenMP}};
}

CmaConfig cma_from_json(const json& doc) {
  ObjectReader r(doc, "cma");
  CmaConfig c;
  r.read("lambda0", c.lambda0);
  r.read("lambda_max", c.lambda_max);
  r.read("sigma0", c.sigma0);
  r.read("mean0", c.mean0);
  r.read("max_evals", c.max_evals);
  r.read("tol_fun", c.tol_fun);
  r.read("tol_x", c.tol_x);
  r.read("seed", c.seed);
  r.read("penalty_coefficient", c.penalty_coefficient);
  bool parallel = false;
  r.read("parallel", parallel);
  c.eval_mode = parallel ? EvalMode::kOpenMP : EvalMode::kSerial;
  r.finish();
  return c;
}

// ---------------------------------------------------------------------------

json manifest_to_json(const DatasetManifest& m) {
  json trials = json::array();
  for (const auto& [label, path] : m.trials) {
    trials.push_back({{"label", label}, {"path", path}});
  }
  return {{"schema", kManifestSchema},
          {"trials", trials},
          {"split",
           {{"scheme", m.split.scheme},
            {"tune", m.split.tune},
            {"test", m.split.test}}}};
}

DatasetManifest manifest_from_json(const json& doc) {
  ObjectReader r(doc, "manifest");
  r.expect_schema(kManifestSchema);
  DatasetManifest m;
  const json* trials = r.get("trials");
  if (trials == nullptr || !trials->is_array() || trials->empty()) {
    fail("manifest: 'trials' must be a nonempty array");
  }
  for (const json& t : *trials) {
    ObjectReader tr(t, "manifest.trials[]");
    std::string label;
    std::string path;
    tr.read("label", label);
    tr.read("path", path);
    tr.finish();
    if (label.empty() || path.empty()) {
      fail("manifest: every trial needs a label and a path");
    }
    m.trials.emplace_back(label, path);
  }
  if (const json* split = r.get("split")) {
    ObjectReader sr(*split, "manifest.split");
    sr.read("scheme", m.split.scheme);
    sr.read("tune", m.split.tune);
    sr.read("test", m.split.test);
    sr.finish();
    if (m.split.scheme != "paper" && m.split.scheme != "custom") {
      fail("manifest.split: scheme must be 'paper' or 'custom'");
    }
  }
  r.finish();
  return m;
}

LoadedDataset load_dataset(const std::filesystem::path& manifest_path) {
  const DatasetManifest m = manifest_from_json(read_json_file(manifest_path));
  const std::filesystem::path dir = manifest_path.parent_path();
  LoadedDataset out;
  for (const auto& [label, path] : m.trials) {
    std::filesystem::path p(path);
    if (p.is_relative()) p = dir / p;
    Trial t = load_trial(p);
    if (t.label.empty()) t.label = label;
    if (t.label != label) {
      fail("manifest: trial file " + p.string() + " is labelled '" + t.label +
           "', manifest says '" + label + "'");
    }
    out.trials.push_back(std::move(t));
  }
  const std::vector<std::string> labels = labels_of(out.trials);
  if (m.split.scheme == "paper") {
    out.split = paper_split(labels);
  } else {
    out.split = custom_split(labels, m.split.tune, m.split.test);
  }
  return out;
}

// ---------------------------------------------------------------------------

void RunConfig::resolve_paths(const std::filesystem::path& base_dir) {
  auto resolve = [&](std::optional<std::string>& p) {
    if (p && std::filesystem::path(*p).is_relative()) {
      *p = (base_dir / *p).lexically_normal().string();
    }
  };
  resolve(ship_file);
  resolve(params_file);
  resolve(manifest);
  if (std::filesystem::path(output_dir).is_relative()) {
    output_dir = (base_dir / output_dir).lexically_normal().string();
  }
}

json run_config_to_json(const RunConfig& c) {
  json tuning = {{"selector", c.selector},
                 {"a_r", c.a_r},
                 {"cma", cma_to_json(c.cma)}};
  if (c.weights) {
    tuning["weights"] = {(*c.weights)[0], (*c.weights)[1], (*c.weights)[2]};
  }
  json doc = {{"schema", kRunSchema},
              {"output_dir", c.output_dir},
              {"seed", c.seed},
              {"tuning", tuning}};
  if (c.ship_file) doc["ship"] = *c.ship_file;
  if (c.params_file) doc["params"] = *c.params_file;
  if (c.manifest) doc["manifest"] = *c.manifest;
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  ObjectReader r(doc, "run");
  r.expect_schema(kRunSchema);
  RunConfig c;
  auto read_opt = [&](const char* key, std::optional<std::string>& out) {
    std::string value;
    r.read(key, value);
    if (!value.empty()) out = value;
  };
  read_opt("ship", c.ship_file);
  read_opt("params", c.params_file);
  read_opt("manifest", c.manifest);
  r.read("output_dir", c.output_dir);
  r.read("seed", c.seed);
  if (const json* t = r.get("tuning")) {
    ObjectReader tr(*t, "run.tuning");
    tr.read("selector", c.selector);
    if (const json* a = tr.get("a_r")) {
      c.a_r = a->is_array() ? a->get<std::vector<double>>()
                            : std::vector<double>{a->get<double>()};
    }
    if (const json* w = tr.get("weights")) {
      if (!w->is_array() || w->size() != 3) {
        fail("run.tuning.weights: expected three numbers");
      }
      c.weights = PoseWeights{(*w)[0].get<double>(), (*w)[1].get<double>(),
                              (*w)[2].get<double>()};
    }
    if (const json* cma = tr.get("cma")) c.cma = cma_from_json(*cma);
    tr.finish();
  }
  r.finish();
  c.cma.seed = c.seed;
  for (double a : c.a_r) {
    if (!(a > 0.0)) fail("run.tuning.a_r: values must be positive");
  }
  return c;
}

// ---------------------------------------------------------------------------

json evaluation_to_json(const Evaluation& e) {
  json trials = json::array();
  for (const TrialEvaluation& t : e.trials) {
    json item = {{"label", t.label}, {"j", finite_or_null(t.j)},
                 {"aborted", t.aborted}};
    if (t.aborted) item["error"] = t.error;
    trials.push_back(item);
  }
  return {{"total", finite_or_null(e.total)},
          {"any_aborted", e.any_aborted},
          {"trials", trials}};
}

json report_to_json(const TuneReport& r) {
  json runs = json::array();
  for (const RunRecord& run : r.optimizer.runs) {
    runs.push_back({{"restart_index", run.restart_index},
                    {"lambda", run.lambda},
                    {"iterations", run.iterations},
                    {"evals", run.evals},
                    {"best_f", finite_or_null(run.best_f)},
                    {"termination", std::string(to_string(run.termination))}});
  }
  json doc = {
      {"schema", kReportSchema},
      {"spec",
       {{"selector", r.names},
        {"a_r", r.a_r},
        {"weights", {r.weights[0], r.weights[1], r.weights[2]}},
        {"tune_set", r.tune_labels},
        {"test_set", r.test_labels},
        {"tune_only", r.tune_only},
        {"seed", r.seed}}},
      {"box", {{"lower", r.box.lower}, {"upper", r.box.upper}}},
      {"theta_pre", r.theta_pre},
      {"theta_star", r.theta_star},
      {"j",
       {{"tune", {{"pre", evaluation_to_json(r.pre_tune)},
                  {"star", evaluation_to_json(r.star_tune)}}}}},
      {"optimizer",
       {{"f_best", r.optimizer.f_best},
        {"evals_used", r.optimizer.evals_used},
        {"iterations", r.optimizer.history.size()},
        {"runs", runs}}},
      {"timing", {{"wall_clock_s", r.wall_clock_s}}},
  };
  if (!r.tune_only) {
    doc["j"]["test"] = {{"pre", evaluation_to_json(r.pre_test)},
                        {"star", evaluation_to_json(r.star_test)}};
  }
  return doc;
}

json comparable_report(const json& report) {
  json copy = report;
  copy.erase("timing");
  return copy;
}

}  // namespace mmgtune::io
