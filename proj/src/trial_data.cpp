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

#include "mmgtune/trial_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "mmgtune/error.hpp"

namespace mmgtune {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

[[noreturn]] void parse_error(std::string_view source, std::size_t line,
                              const std::string& what) {
  throw Error(ErrorKind::kParseError, std::string(source) + ":" +
                                          std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

std::string format_number(double v, int precision) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// Scale factors applied to (psi, r, n_p, delta) when reading mariner units.
struct ColumnScale {
  double angle = 1.0;
  double rate = 1.0;
  double revolutions = 1.0;
};

ColumnScale load_scale(UnitSystem units) {
  if (units == UnitSystem::kInternal) return {};
  return {kDegToRad, kDegToRad, 1.0 / 60.0};
}

// Nearest double to internal * save_factor that reads back as `internal`
// under load_factor, if one lies within a few ulps.
std::optional<double> exact_preimage(double internal, double save_factor,
                                     double load_factor) {
  const double nominal = internal * save_factor;
  if (nominal * load_factor == internal) return nominal;
  double up = nominal;
  double down = nominal;
  for (int step = 0; step < 4; ++step) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    if (up * load_factor == internal) return up;
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    if (down * load_factor == internal) return down;
  }
  return std::nullopt;
}

// File value for `internal`. Not every internal value has an exact file
// representation; those snap to the value they will read back as, so that
// save(load(save(x))) reproduces save(x) byte for byte.
double to_file_units(double internal, double save_factor, double load_factor) {
  if (save_factor == 1.0) return internal;
  if (auto d = exact_preimage(internal, save_factor, load_factor)) return *d;
  const double nominal = internal * save_factor;
  return exact_preimage(nominal * load_factor, save_factor, load_factor)
      .value_or(nominal);
}

}  // namespace

void Trial::validate() const {
  data.validate();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data.states[i].state.u > 0.0)) {
      throw Error(ErrorKind::kValidationError,
                  "trial " + label + ": u <= 0 at row " + std::to_string(i + 1));
    }
    if (!(data.controls[i].n_p > 0.0)) {
      throw Error(ErrorKind::kValidationError, "trial " + label +
                                                   ": n_p <= 0 at row " +
                                                   std::to_string(i + 1));
    }
  }
}

std::vector<double> unwrap_angles(std::span<const double> angles) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<double> out(angles.begin(), angles.end());
  double offset = 0.0;
  for (std::size_t i = 1; i < angles.size(); ++i) {
    const double jump = angles[i] - angles[i - 1];
    offset -= kTwoPi * std::round(jump / kTwoPi);
    out[i] = angles[i] + offset;
  }
  return out;
}

Trial parse_trial(std::istream& in, std::string_view source) {
  std::map<std::string, std::string, std::less<>> meta;
  static const std::set<std::string, std::less<>> kKnownKeys = {
      "mmgtune-trial", "ship", "maneuver", "dt", "T", "units", "precision"};

  std::string line;
  std::size_t line_no = 0;
  bool have_columns = false;
  std::vector<std::array<double, 8>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!have_columns) {
      if (view.front() == '#') {
        view.remove_prefix(1);
        const auto colon = view.find(':');
        if (colon == std::string_view::npos) {
          parse_error(source, line_no, "metadata line without ':'");
        }
        const std::string key(trim(view.substr(0, colon)));
        const std::string value(trim(view.substr(colon + 1)));
        if (!kKnownKeys.contains(key)) {
          parse_error(source, line_no, "unknown metadata key '" + key + "'");
        }
        meta[key] = value;
        continue;
      }
      if (view != kTrialColumns) {
        parse_error(source, line_no,
                    "expected column header '" + std::string(kTrialColumns) +
                        "'");
      }
      have_columns = true;
      continue;
    }

    std::array<double, 8> row{};
    std::size_t field = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      const std::string_view cell = view.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      if (field >= 8) {
        parse_error(source, line_no, "row " + std::to_string(rows.size() + 1) +
                                         " has more than 8 fields");
      }
      const auto value = parse_double(cell);
      if (!value) {
        parse_error(source, line_no,
                    "row " + std::to_string(rows.size() + 1) +
                        ": cannot parse '" + std::string(cell) + "'");
      }
      row[field++] = *value;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (field != 8) {
      parse_error(source, line_no,
                  "row " + std::to_string(rows.size() + 1) + " has " +
                      std::to_string(field) + " fields, expected 8");
    }
    rows.push_back(row);
  }

  if (!have_columns) parse_error(source, line_no, "missing column header");
  auto require_meta = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) {
      throw Error(ErrorKind::kValidationError,
                  std::string(source) + ": missing metadata '" + key + "'");
    }
    return it->second;
  };

  if (require_meta("mmgtune-trial") != "1") {
    throw Error(ErrorKind::kValidationError,
                std::string(source) + ": unsupported format version");
  }
  const std::string& units_text = require_meta("units");
  UnitSystem units;
  if (units_text == "mariner") {
    units = UnitSystem::kMariner;
  } else if (units_text == "internal") {
    units = UnitSystem::kInternal;
  } else {
    throw Error(ErrorKind::kValidationError,
                std::string(source) + ": unknown units '" + units_text + "'");
  }
  const auto dt = parse_double(require_meta("dt"));
  if (!dt || !(*dt > 0.0)) {
    throw Error(ErrorKind::kValidationError,
                std::string(source) + ": dt must be a positive number");
  }
  if (auto it = meta.find("T"); it != meta.end()) {
    const auto t = parse_double(it->second);
    if (!t || *t != static_cast<double>(rows.size())) {
      throw Error(ErrorKind::kValidationError,
                  std::string(source) + ": header T = " + it->second +
                      " but file has " + std::to_string(rows.size()) + " rows");
    }
  }

  Trial trial;
  if (auto it = meta.find("ship"); it != meta.end()) trial.ship_id = it->second;
  if (auto it = meta.find("maneuver"); it != meta.end()) trial.label = it->second;
  trial.data.dt = *dt;

  const ColumnScale scale = load_scale(units);
  std::vector<double> psi(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) psi[i] = rows[i][2] * scale.angle;
  psi = unwrap_angles(psi);

  trial.data.states.reserve(rows.size());
  trial.data.controls.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    AugmentedState z;
    z.p1 = r[0];
    z.p2 = r[1];
    z.psi = psi[i];
    z.state = {r[3], r[4], r[5] * scale.rate};
    trial.data.states.push_back(z);
    trial.data.controls.push_back({r[6] * scale.revolutions, r[7] * scale.angle});
  }
  trial.validate();
  return trial;
}

Trial load_trial(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  }
  return parse_trial(in, path.string());
}

void write_trial(const Trial& trial, std::ostream& out,
                 const TrialWriteOptions& options) {
  const bool mariner = options.units == UnitSystem::kMariner;
  const double angle = mariner ? kRadToDeg : 1.0;
  const double revs = mariner ? 60.0 : 1.0;
  const ColumnScale back = load_scale(options.units);
  const int p = options.precision;

  out << "# mmgtune-trial: 1\n";
  out << "# ship: " << trial.ship_id << '\n';
  out << "# maneuver: " << trial.label << '\n';
  out << "# dt: " << format_number(trial.data.dt, 17) << '\n';
  out << "# T: " << trial.size() << '\n';
  out << "# units: " << (mariner ? "mariner" : "internal") << '\n';
  out << "# precision: " << p << '\n';
  out << kTrialColumns << '\n';
  for (std::size_t i = 0; i < trial.size(); ++i) {
    const AugmentedState& z = trial.data.states[i];
    const ControlInput& c = trial.data.controls[i];
    out << format_number(z.p1, p) << ',' << format_number(z.p2, p) << ','
        << format_number(to_file_units(z.psi, angle, back.angle), p) << ','
        << format_number(z.state.u, p) << ','
        << format_number(z.state.v_m, p) << ','
        << format_number(to_file_units(z.state.r, angle, back.rate), p) << ','
        << format_number(to_file_units(c.n_p, revs, back.revolutions), p)
        << ','
        << format_number(to_file_units(c.delta, angle, back.angle), p)
        << '\n';
  }
}

void save_trial(const Trial& trial, const std::filesystem::path& path,
                const TrialWriteOptions& options) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  write_trial(trial, out, options);
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

// ---------------------------------------------------------------------------

void ManeuverSpec::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kValidationError, "maneuver: " + what);
  };
  if (!(duration > 0.0)) fail("duration must be positive");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(std::abs(rudder_deg) <= 45.0)) fail("|rudder| must not exceed 45 deg");
  if (!(n_p_rpm > 0.0)) fail("n_p must be positive");
  if (!(u0 > 0.0)) fail("initial speed must be positive");
  if (!std::isfinite(rudder_rate_deg_s)) fail("rudder rate must be finite");
  if (rows() < 2) fail("duration must span at least one step");
}

std::size_t ManeuverSpec::rows() const {
  return static_cast<std::size_t>(std::llround(duration / dt)) + 1;
}

std::string ManeuverSpec::label() const {
  std::ostringstream os;
  os << "turn" << (rudder_deg < 0.0 ? '-' : '+') << std::abs(rudder_deg);
  return os.str();
}

std::vector<ControlInput> maneuver_controls(const ManeuverSpec& spec) {
  spec.validate();
  const std::size_t n = spec.rows();
  const double n_p = rpm_to_rps(spec.n_p_rpm);
  const double target = spec.rudder_deg * kDegToRad;
  const double rate = spec.rudder_rate_deg_s * kDegToRad;
  std::vector<ControlInput> controls(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * spec.dt;
    double delta = target;
    if (rate > 0.0) {
      delta = std::copysign(std::min(rate * t, std::abs(target)), target);
    }
    controls[i] = {n_p, delta};
  }
  return controls;
}

NoiseModel NoiseModel::scaled(double f) const {
  return {p * f, psi_deg * f, u * f, v_m * f, r_deg_s * f};
}

bool NoiseModel::is_zero() const {
  return p == 0.0 && psi_deg == 0.0 && u == 0.0 && v_m == 0.0 && r_deg_s == 0.0;
}

Trial generate_synthetic_trial(const MmgParams& theta_true,
                               const ManeuverSpec& spec,
                               const ShipParticulars& ship,
                               const NoiseModel& noise, std::uint64_t seed) {
  const std::vector<ControlInput> controls = maneuver_controls(spec);
  AugmentedState zeta0;
  zeta0.state.u = spec.u0;

  Trial trial;
  trial.label = spec.label();
  trial.data = simulate(zeta0, controls, theta_true, ship, spec.dt);

  if (!noise.is_zero()) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Fixed draw order per row keeps files reproducible for a given seed.
    for (AugmentedState& z : trial.data.states) {
      z.p1 += noise.p * normal(rng);
      z.p2 += noise.p * normal(rng);
      z.psi += noise.psi_deg * kDegToRad * normal(rng);
      z.state.u += noise.u * normal(rng);
      z.state.v_m += noise.v_m * normal(rng);
      z.state.r += noise.r_deg_s * kDegToRad * normal(rng);
    }
  }
  trial.validate();
  return trial;
}

std::vector<ManeuverSpec> standard_turning_suite(const ManeuverSpec& base) {
  std::vector<ManeuverSpec> suite;
  for (double angle : {10.0, 20.0, 35.0, 40.0}) {
    for (double sign : {1.0, -1.0}) {
      ManeuverSpec m = base;
      m.rudder_deg = sign * angle;
      suite.push_back(m);
    }
  }
  return suite;
}

// ---------------------------------------------------------------------------

namespace {

void require_labels(std::span<const std::string> available,
                    std::span<const std::string> wanted) {
  for (const std::string& label : wanted) {
    if (std::find(available.begin(), available.end(), label) == available.end()) {
      throw Error(ErrorKind::kMissingManeuver,
                  "dataset has no trial labelled '" + label + "'");
    }
  }
}

}  // namespace

DatasetSplit paper_split(std::span<const std::string> available) {
  DatasetSplit split{{"turn+10", "turn-20", "turn+35", "turn-40"},
                     {"turn-10", "turn+20", "turn-35", "turn+40"}};
  require_labels(available, split.tune);
  require_labels(available, split.test);
  return split;
}

DatasetSplit custom_split(std::span<const std::string> available,
                          std::vector<std::string> tune,
                          std::vector<std::string> test) {
  if (tune.empty()) {
    throw Error(ErrorKind::kValidationError, "split: tune set is empty");
  }
  require_labels(available, tune);
  require_labels(available, test);
  std::set<std::string> seen;
  for (const auto* list : {&tune, &test}) {
    for (const std::string& label : *list) {
      if (!seen.insert(label).second) {
        throw Error(ErrorKind::kValidationError,
                    "split: trial '" + label + "' listed twice");
      }
    }
  }
  return {std::move(tune), std::move(test)};
}

std::vector<std::string> labels_of(std::span<const Trial> trials) {
  std::vector<std::string> labels;
  labels.reserve(trials.size());
  for (const Trial& t : trials) labels.push_back(t.label);
  return labels;
}

std::vector<Trial> select_trials(std::span<const Trial> trials,
                                 std::span<const std::string> labels) {
  std::vector<Trial> out;
  out.reserve(labels.size());
  for (const std::string& label : labels) {
    auto it = std::find_if(trials.begin(), trials.end(),
                           [&](const Trial& t) { return t.label == label; });
    if (it == trials.end()) {
      throw Error(ErrorKind::kMissingManeuver,
                  "dataset has no trial labelled '" + label + "'");
    }
    out.push_back(*it);
  }
  return out;
}

}  // namespace mmgtune
