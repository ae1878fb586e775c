// Copyright 2026 The nmrpulse Authors
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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nmrpulse/grape.hpp"
#include "nmrpulse/linalg.hpp"
#include "nmrpulse/pulse_net.hpp"
#include "nmrpulse/sampler.hpp"

namespace nmrpulse {

using Json = nlohmann::json;

inline constexpr const char* kGrapeResultFormatVersion = "grape-result/1";

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);
/// sha256 of the canonical (sorted-key, compact) dump.
std::string json_hash(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

Json to_json(const SpinSystem& sys);
SpinSystem spin_system_from_json(const Json& j);

Json to_json(const PulseSequence& p);
PulseSequence pulse_from_json(const Json& j);

Json to_json(const AdamParams& p);
/// Missing keys keep the values already in `base`.
AdamParams adam_params_from_json(const Json& j, AdamParams base = {});

Json to_json(const GrapeConfig& c);
GrapeConfig grape_config_from_json(const Json& j, GrapeConfig base = {});

/// {format_version, pulse, fidelity_trace, final_fidelity, iterations_used,
///  converged, system, grape_config, system_hash, config_hash}
Json to_json(const GrapeResult& r, const SpinSystem& sys, const GrapeConfig& config);
GrapeResult grape_result_from_json(const Json& j);

Json to_json(const PulseDataset& ds);
PulseDataset dataset_from_json(const Json& j);

Json to_json(const MlpModel& m);
MlpModel model_from_json(const Json& j);
std::string model_hash(const MlpModel& m);

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});
Json to_json(const TrainReport& r);

/// Minimal CSV table: header row plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string str() const;
};

CsvTable features_table(const PulseDataset& ds);
CsvTable phases_table(const PulseDataset& ds);
CsvTable similarity_table(const SimilarityMatrix& m);
CsvTable histogram_table(const Histogram& h);

}  // namespace nmrpulse
