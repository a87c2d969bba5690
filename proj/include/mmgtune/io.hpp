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

// JSON documents: ship particulars, parameter sets, run configuration,
// dataset manifests and tuning reports. Every document carries a "schema"
// field; unknown keys are rejected.

#ifndef MMGTUNE_IO_HPP_
#define MMGTUNE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mmgtune/cmaes.hpp"
#include "mmgtune/mmg.hpp"
#include "mmgtune/trial_data.hpp"
#include "mmgtune/tuning.hpp"

namespace mmgtune::io {

using nlohmann::json;

inline constexpr const char* kShipSchema = "mmgtune.ship/1";
inline constexpr const char* kParamsSchema = "mmgtune.params/1";
inline constexpr const char* kRunSchema = "mmgtune.run/1";
inline constexpr const char* kManifestSchema = "mmgtune.manifest/1";
inline constexpr const char* kReportSchema = "mmgtune.report/1";

json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& doc, const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

json ship_to_json(const ShipParticulars& ship);
ShipParticulars ship_from_json(const json& doc);

// Coefficients by name; missing ones keep their defaults. The flap map is
// given in degrees.
json params_to_json(const MmgParams& params);
MmgParams params_from_json(const json& doc);

json cma_to_json(const CmaConfig& cma);
CmaConfig cma_from_json(const json& doc);

// Split assignment as stored in a manifest.
struct ManifestSplit {
  std::string scheme = "paper";  // "paper" or "custom"
  std::vector<std::string> tune;
  std::vector<std::string> test;
};

struct DatasetManifest {
  std::vector<std::pair<std::string, std::string>> trials;  // label, path
  ManifestSplit split;
};

json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const json& doc);

struct LoadedDataset {
  std::vector<Trial> trials;
  DatasetSplit split;
};

// Relative trial paths resolve against the manifest's directory.
LoadedDataset load_dataset(const std::filesystem::path& manifest_path);

struct RunConfig {
  std::optional<std::string> ship_file;
  std::optional<std::string> params_file;
  std::optional<std::string> manifest;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::vector<std::string> selector;  // empty: default twelve
  std::vector<double> a_r{0.2};
  std::optional<PoseWeights> weights;  // default diag(lpp, lpp, pi/4)
  CmaConfig cma;

  // Relative file references resolve against `base_dir`.
  void resolve_paths(const std::filesystem::path& base_dir);
};

json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const json& doc);

// Deterministic content plus a separate "timing" object.
json report_to_json(const TuneReport& report);
// The report without its "timing" object, for reproducibility checks.
json comparable_report(const json& report);

json evaluation_to_json(const Evaluation& evaluation);

}  // namespace mmgtune::io

#endif  // MMGTUNE_IO_HPP_
