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

#include "nmrpulse/io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace nmrpulse {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw NmrError("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NmrError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NmrError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw NmrError("short write to '" + path.string() + "'");
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

std::string json_hash(const Json& j) { return sha256_hex(j.dump()); }

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw NmrError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(1) + "\n");
}

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw NmrError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw NmrError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw NmrError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void check_version(const Json& j, const std::string& expected) {
  const auto v = require<std::string>(j, "format_version");
  if (v != expected)
    throw NmrError("format_version '" + v + "' does not match expected '" + expected + "'");
}

}  // namespace

Json to_json(const SpinSystem& sys) {
  Json couplings = Json::array();
  for (const auto& c : sys.couplings()) couplings.push_back({{"i", c.i}, {"j", c.j}, {"value", c.value_hz}});
  return {{"n", sys.n()},
          {"offsets_hz", sys.offsets_hz()},
          {"couplings_hz", couplings},
          {"operator_convention", to_string(sys.convention())}};
}

SpinSystem spin_system_from_json(const Json& j) {
  std::vector<Coupling> couplings;
  for (const auto& c : get_or<Json>(j, "couplings_hz", Json::array()))
    couplings.push_back({require<int>(c, "i"), require<int>(c, "j"), require<double>(c, "value")});
  return SpinSystem(require<int>(j, "n"), require<std::vector<double>>(j, "offsets_hz"),
                    std::move(couplings),
                    convention_from_string(get_or<std::string>(j, "operator_convention", "pauli")));
}

Json to_json(const PulseSequence& p) {
  return {{"amplitude_hz", p.amplitude_hz}, {"dt_s", p.dt_s}, {"phases_rad", p.phases_rad}};
}

PulseSequence pulse_from_json(const Json& j) {
  PulseSequence p{require<double>(j, "amplitude_hz"), require<double>(j, "dt_s"),
                  require<std::vector<double>>(j, "phases_rad")};
  p.validate();
  return p;
}

Json to_json(const AdamParams& p) {
  return {{"lr", p.lr}, {"beta1", p.beta1}, {"beta2", p.beta2}, {"eps", p.eps}};
}

AdamParams adam_params_from_json(const Json& j, AdamParams base) {
  base.lr = get_or(j, "lr", base.lr);
  base.beta1 = get_or(j, "beta1", base.beta1);
  base.beta2 = get_or(j, "beta2", base.beta2);
  base.eps = get_or(j, "eps", base.eps);
  return base;
}

Json to_json(const GrapeConfig& c) {
  Json j = {{"N", c.steps},
            {"dt_s", c.dt_s},
            {"amplitude_hz", c.amplitude_hz},
            {"max_iterations", c.max_iterations},
            {"adam", to_json(c.adam)},
            {"target_fidelity", c.target_fidelity}};
  if (!c.initial_phases.empty()) j["initial_phases"] = c.initial_phases;
  return j;
}

GrapeConfig grape_config_from_json(const Json& j, GrapeConfig base) {
  if (!j.is_object()) throw NmrError("grape config must be a JSON object");
  base.steps = get_or(j, "N", base.steps);
  base.dt_s = get_or(j, "dt_s", base.dt_s);
  base.amplitude_hz = get_or(j, "amplitude_hz", base.amplitude_hz);
  base.max_iterations = get_or(j, "max_iterations", base.max_iterations);
  if (j.contains("adam")) base.adam = adam_params_from_json(j.at("adam"), base.adam);
  base.target_fidelity = get_or(j, "target_fidelity", base.target_fidelity);
  base.initial_phases = get_or(j, "initial_phases", base.initial_phases);
  if (!base.initial_phases.empty() && base.initial_phases.size() != static_cast<std::size_t>(base.steps))
    base.initial_phases.clear();
  base.validate();
  return base;
}

Json to_json(const GrapeResult& r, const SpinSystem& sys, const GrapeConfig& config) {
  const Json js = to_json(sys);
  const Json jc = to_json(config);
  return {{"format_version", kGrapeResultFormatVersion},
          {"pulse", to_json(r.pulse)},
          {"fidelity_trace", r.fidelity_trace},
          {"final_fidelity", r.final_fidelity},
          {"iterations_used", r.iterations_used},
          {"converged", r.converged},
          {"system", js},
          {"grape_config", jc},
          {"system_hash", json_hash(js)},
          {"config_hash", json_hash(jc)}};
}

GrapeResult grape_result_from_json(const Json& j) {
  check_version(j, kGrapeResultFormatVersion);
  GrapeResult r;
  r.pulse = pulse_from_json(require<Json>(j, "pulse"));
  r.fidelity_trace = require<std::vector<double>>(j, "fidelity_trace");
  r.final_fidelity = require<double>(j, "final_fidelity");
  r.iterations_used = require<int>(j, "iterations_used");
  r.converged = require<bool>(j, "converged");
  return r;
}

Json to_json(const PulseDataset& ds) {
  Json samples = Json::array();
  for (const auto& s : ds.samples)
    samples.push_back({{"features", s.features},
                       {"phases", s.phases},
                       {"fidelity", s.fidelity},
                       {"converged", s.converged},
                       {"iterations", s.iterations}});
  return {{"format_version", ds.format_version},
          {"system", to_json(ds.system)},
          {"grape_config", to_json(ds.grape_config)},
          {"seed", ds.seed},
          {"random_start", ds.random_start},
          {"N", ds.grape_config.steps},
          {"count", ds.samples.size()},
          {"samples", samples}};
}

PulseDataset dataset_from_json(const Json& j) {
  check_version(j, kDatasetFormatVersion);
  PulseDataset ds;
  ds.system = spin_system_from_json(require<Json>(j, "system"));
  ds.grape_config = grape_config_from_json(require<Json>(j, "grape_config"));
  ds.seed = require<std::uint64_t>(j, "seed");
  ds.random_start = get_or(j, "random_start", false);
  const auto& samples = require<Json>(j, "samples");
  const auto n = static_cast<std::size_t>(ds.grape_config.steps);
  for (const auto& s : samples) {
    PulseSample p{require<std::vector<double>>(s, "features"), require<std::vector<double>>(s, "phases"),
                  require<double>(s, "fidelity"), require<bool>(s, "converged"),
                  get_or(s, "iterations", 0)};
    if (p.features.size() != 8 || p.phases.size() != n)
      throw NmrError("dataset sample has wrong feature or phase length");
    ds.samples.push_back(std::move(p));
  }
  if (require<std::size_t>(j, "count") != ds.samples.size())
    throw NmrError("dataset count does not match the number of samples");
  return ds;
}

Json to_json(const MlpModel& m) {
  Json acts = Json::array();
  for (auto a : m.activations()) acts.push_back(to_string(a));
  Json layers = Json::array();
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const auto w0 = m.params().begin() + static_cast<long>(m.weight_offset(l));
    const auto b0 = m.params().begin() + static_cast<long>(m.bias_offset(l));
    const auto b1 = b0 + m.layer_dims()[l + 1];
    layers.push_back({{"weights", std::vector<double>(w0, b0)}, {"biases", std::vector<double>(b0, b1)}});
  }
  return {{"format_version", kModelFormatVersion},
          {"layer_dims", m.layer_dims()},
          {"activations", acts},
          {"dropout_rate", m.dropout_rate()},
          {"l2_lambda", m.l2_lambda()},
          {"dataset_format_version", m.dataset_format_version()},
          {"weight_layout", "column-major (out x in) per layer"},
          {"layers", layers},
          {"output_scale", m.output_scale()},
          {"output_offset", m.output_offset()}};
}

MlpModel model_from_json(const Json& j) {
  check_version(j, kModelFormatVersion);
  std::vector<Activation> acts;
  for (const auto& a : require<std::vector<std::string>>(j, "activations"))
    acts.push_back(activation_from_string(a));
  MlpModel m(require<std::vector<int>>(j, "layer_dims"), std::move(acts),
             require<double>(j, "dropout_rate"), require<double>(j, "l2_lambda"),
             require<std::string>(j, "dataset_format_version"));
  const auto& layers = require<Json>(j, "layers");
  if (layers.size() != m.layer_count()) throw NmrError("model: wrong number of parameter blocks");
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const auto w = require<std::vector<double>>(layers[l], "weights");
    const auto b = require<std::vector<double>>(layers[l], "biases");
    if (w.size() != m.bias_offset(l) - m.weight_offset(l) ||
        b.size() != static_cast<std::size_t>(m.layer_dims()[l + 1]))
      throw NmrError("model: parameter block " + std::to_string(l) + " has the wrong size");
    std::copy(w.begin(), w.end(), m.params().begin() + static_cast<long>(m.weight_offset(l)));
    std::copy(b.begin(), b.end(), m.params().begin() + static_cast<long>(m.bias_offset(l)));
  }
  const auto n = static_cast<std::size_t>(m.output_dim());
  m.output_scale() = get_or(j, "output_scale", std::vector<double>(n, 1.0));
  m.output_offset() = get_or(j, "output_offset", std::vector<double>(n, 0.0));
  if (m.output_scale().size() != n || m.output_offset().size() != n)
    throw NmrError("model: output affine map has the wrong size");
  return m;
}

std::string model_hash(const MlpModel& m) { return json_hash(to_json(m)); }

Json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"lr_schedule", to_string(c.lr_schedule)},
          {"dropout_rate", c.dropout_rate},
          {"l2_lambda", c.l2_lambda},
          {"train_fraction", c.train_fraction},
          {"seed", c.seed},
          {"fidelity_floor", c.fidelity_floor},
          {"hidden", c.hidden},
          {"time_limit_s", c.time_limit_s}};
}

TrainConfig train_config_from_json(const Json& j, TrainConfig base) {
  if (!j.is_object()) throw NmrError("train config must be a JSON object");
  base.epochs = get_or(j, "epochs", base.epochs);
  base.batch_size = get_or(j, "batch_size", base.batch_size);
  base.lr = get_or(j, "lr", base.lr);
  if (j.contains("lr_schedule")) base.lr_schedule = lr_schedule_from_string(require<std::string>(j, "lr_schedule"));
  base.dropout_rate = get_or(j, "dropout_rate", base.dropout_rate);
  base.l2_lambda = get_or(j, "l2_lambda", base.l2_lambda);
  base.train_fraction = get_or(j, "train_fraction", base.train_fraction);
  base.seed = get_or(j, "seed", base.seed);
  base.fidelity_floor = get_or(j, "fidelity_floor", base.fidelity_floor);
  base.hidden = get_or(j, "hidden", base.hidden);
  base.time_limit_s = get_or(j, "time_limit_s", base.time_limit_s);
  base.validate();
  return base;
}

Json to_json(const TrainReport& r) {
  return {{"architecture", r.architecture},
          {"train_mse", r.train_mse},
          {"validation_mse", r.validation_mse},
          {"initial_train_mse", r.initial_train_mse},
          {"final_test_mse", r.final_test_mse},
          {"wall_time_s", r.wall_time_s},
          {"model_hash", r.model_hash},
          {"samples_total", r.samples_total},
          {"samples_used", r.samples_used},
          {"train_count", r.train_count},
          {"test_count", r.test_count},
          {"test_indices", r.test_indices}};
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += "\n";
  char buf[32];
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      if (c) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

CsvTable features_table(const PulseDataset& ds) {
  CsvTable t{{"index", "re_u11", "re_u12", "re_u21", "re_u22", "im_u11", "im_u12", "im_u21",
              "im_u22", "fidelity", "converged"},
             {}};
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    std::vector<double> row{static_cast<double>(i)};
    row.insert(row.end(), s.features.begin(), s.features.end());
    row.push_back(s.fidelity);
    row.push_back(s.converged ? 1.0 : 0.0);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable phases_table(const PulseDataset& ds) {
  CsvTable t;
  t.header.push_back("index");
  for (std::size_t k = 0; k < ds.steps(); ++k) t.header.push_back("phi_" + std::to_string(k + 1));
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    std::vector<double> row{static_cast<double>(i)};
    row.insert(row.end(), ds.samples[i].phases.begin(), ds.samples[i].phases.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable similarity_table(const SimilarityMatrix& m) {
  CsvTable t;
  t.header.push_back("i");
  for (std::size_t j = 0; j < m.size; ++j) t.header.push_back("c_" + std::to_string(j));
  for (std::size_t i = 0; i < m.size; ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (std::size_t j = 0; j < m.size; ++j) row.push_back(m(i, j));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable histogram_table(const Histogram& h) {
  CsvTable t{{"bin_lo", "bin_hi", "center", "count"}, {}};
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double lo = h.lo + static_cast<double>(b) * h.bin_width();
    t.rows.push_back({lo, lo + h.bin_width(), h.bin_center(b), static_cast<double>(h.counts[b])});
  }
  return t;
}

}  // namespace nmrpulse
