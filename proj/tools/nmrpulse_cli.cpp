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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "nmrpulse/grape.hpp"
#include "nmrpulse/io.hpp"
#include "nmrpulse/linalg.hpp"
#include "nmrpulse/nmr.hpp"
#include "nmrpulse/pulse_net.hpp"
#include "nmrpulse/sampler.hpp"

namespace fs = std::filesystem;
using namespace nmrpulse;

namespace {

constexpr const char* kManifestVersion = "run-manifest/1";
constexpr int kExitBudget = 3;
constexpr double kPi = std::numbers::pi;

struct Common {
  std::string system_file;
  std::string config_file;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
};

struct GrapeOverrides {
  std::optional<int> steps;
  std::optional<double> dt;
  std::optional<double> amplitude;
  std::optional<int> max_iterations;
  std::optional<double> target;
};

struct GateChoice {
  std::string name = "hadamard";
  double theta = kPi / 4;
  double alpha = 0.0;
  int qubit = 1;
};

fs::path output_dir(const Common& c, const std::string& command) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("PULSE_DATA_DIR");
  return fs::path(root && *root ? root : "pulse_data") / command;
}

// Collects outputs and writes manifest.json on finish().
fs::path canonical_or_absolute(const fs::path& p) {
  std::error_code ec;
  fs::path c = fs::weakly_canonical(p, ec);
  return ec ? fs::absolute(p) : c;
}

class Run {
 public:
  Run(std::string command, const Common& common, Json config)
      : command_(std::move(command)), out_(output_dir(common, command_)), seed_(common.seed),
        config_(std::move(config)), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_);
  }

  const fs::path& dir() const { return out_; }

  void add_input(const fs::path& p) {
    inputs_[p.string()] = file_sha256(p);
    input_paths_.push_back(canonical_or_absolute(p));
  }

  fs::path target(const std::string& name) const {
    const fs::path p = out_ / name;
    for (const auto& in : input_paths_)
      if (canonical_or_absolute(p) == in) throw NmrError("refusing to overwrite input file " + in.string());
    return p;
  }

  void text(const std::string& name, const std::string& body, bool reproducible = true) {
    write_text_file(target(name), body);
    record(name, reproducible);
  }
  void json(const std::string& name, const Json& j, bool reproducible = true) {
    write_json_file(target(name), j);
    record(name, reproducible);
  }
  void csv(const std::string& name, const CsvTable& t) { text(name, t.str()); }

  Json& extra() { return extra_; }

  void finish() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    Json outs = Json::array();
    for (const auto& o : outputs_) outs.push_back(o);
    Json m = {{"format_version", kManifestVersion},
              {"command", command_},
              {"config", config_},
              {"config_hash", json_hash(config_)},
              {"inputs", inputs_},
              {"seed", seed_},
              {"tool_version", NMRPULSE_VERSION},
              {"wall_time_s", wall},
              {"outputs", outs}};
    if (!extra_.is_null()) m["summary"] = extra_;
    write_json_file(out_ / "manifest.json", m);
    std::cout << "wrote " << outputs_.size() << " files to " << out_.string() << "\n";
  }

 private:
  void record(const std::string& name, bool reproducible) {
    outputs_.push_back({{"path", name},
                        {"sha256", file_sha256(out_ / name)},
                        {"reproducible", reproducible}});
  }

  std::string command_;
  fs::path out_;
  std::uint64_t seed_;
  Json config_;
  std::chrono::steady_clock::time_point start_;
  Json inputs_ = Json::object();
  std::vector<fs::path> input_paths_;
  std::vector<Json> outputs_;
  Json extra_;
};

SpinSystem load_system(const Common& c) {
  if (c.system_file.empty()) return SpinSystem::c2f3i();
  return spin_system_from_json(read_json_file(c.system_file));
}

void add_file_inputs(Run& run, const Common& c) {
  if (!c.system_file.empty()) run.add_input(c.system_file);
  if (!c.config_file.empty()) run.add_input(c.config_file);
}

GrapeConfig grape_config(const Common& c, const GrapeOverrides& o) {
  GrapeConfig g;
  if (!c.config_file.empty()) g = grape_config_from_json(read_json_file(c.config_file));
  if (o.steps) g.steps = *o.steps;
  if (o.dt) g.dt_s = *o.dt;
  if (o.amplitude) g.amplitude_hz = *o.amplitude;
  if (o.max_iterations) g.max_iterations = *o.max_iterations;
  if (o.target) g.target_fidelity = *o.target;
  if (!g.initial_phases.empty() && g.initial_phases.size() != static_cast<std::size_t>(g.steps))
    g.initial_phases.clear();
  g.validate();
  return g;
}

ComplexMatrix make_gate(const GateChoice& g) {
  const auto& n = g.name;
  if (n == "hadamard") return hadamard();
  if (n == "identity") return identity(2);
  if (n == "x") return pauli(Axis::X);
  if (n == "y") return pauli(Axis::Y);
  if (n == "z") return pauli(Axis::Z);
  if (n == "theta-alpha") return theta_alpha_gate(g.theta, g.alpha);
  if (n == "ux") return family_gate(GateFamily::Ux, g.theta);
  if (n == "uy") return family_gate(GateFamily::Uy, g.theta);
  if (n == "uz") return family_gate(GateFamily::Uz, g.theta);
  throw NmrError("unknown gate '" + n + "'");
}

Json gate_json(const GateChoice& g) {
  return {{"name", g.name}, {"theta", g.theta}, {"alpha", g.alpha}, {"qubit", g.qubit}};
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--system", c.system_file, "Spin system JSON (default: C2F3I at 1 T)");
  app->add_option("--config", c.config_file, "Config JSON (partial overrides allowed)");
  app->add_option("--seed", c.seed, "Seed for all randomized behaviour");
  app->add_option("--workers", c.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app->add_option("--out", c.out, "Output directory (default: $PULSE_DATA_DIR/<command>)");
}

void add_grape_overrides(CLI::App* app, GrapeOverrides& o) {
  app->add_option("--steps", o.steps, "Pulse steps N");
  app->add_option("--dt", o.dt, "Step length in seconds");
  app->add_option("--amplitude", o.amplitude, "Pulse amplitude in Hz");
  app->add_option("--max-iterations", o.max_iterations, "GRAPE iteration cap");
  app->add_option("--target-fidelity", o.target, "GRAPE stopping fidelity");
}

void add_gate(CLI::App* app, GateChoice& g, bool with_default) {
  auto* opt = app->add_option("--gate", g.name,
                              "hadamard|identity|x|y|z|theta-alpha|ux|uy|uz");
  if (!with_default) opt->description("Fixed gate for every sample (default: uniform random gates)");
  app->add_option("--theta", g.theta, "Gate angle theta");
  app->add_option("--alpha", g.alpha, "Gate angle alpha (theta-alpha only)");
}

// --- grape -----------------------------------------------------------------

int cmd_grape(const Common& c, const GrapeOverrides& o, const GateChoice& gc, bool random_start) {
  Json cfg = {{"gate", gate_json(gc)}, {"random_start", random_start}};
  const SpinSystem sys = load_system(c);
  GrapeConfig g = grape_config(c, o);
  if (random_start) {
    Rng rng = make_stream(c.seed, 0);
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    g.initial_phases.resize(static_cast<std::size_t>(g.steps));
    for (auto& p : g.initial_phases) p = u(rng);
  }
  cfg["system"] = to_json(sys);
  cfg["grape_config"] = to_json(g);
  Run run("grape", c, cfg);
  add_file_inputs(run, c);

  const GrapeResult r = grape_optimize(sys, GateSpec{make_gate(gc), gc.qubit}, g);
  run.json("pulse.json", to_json(r, sys, g));
  CsvTable trace{{"iteration", "fidelity"}, {}};
  for (std::size_t i = 0; i < r.fidelity_trace.size(); ++i)
    trace.rows.push_back({static_cast<double>(i), r.fidelity_trace[i]});
  run.csv("trace.csv", trace);
  run.extra() = {{"final_fidelity", r.final_fidelity},
                 {"converged", r.converged},
                 {"iterations_used", r.iterations_used}};
  run.finish();
  std::printf("fidelity %.6f after %d iterations (%s)\n", r.final_fidelity, r.iterations_used,
              r.converged ? "converged" : "not converged");
  return 0;
}

// --- dataset ---------------------------------------------------------------

Json dataset_header_json(const SpinSystem& sys, const GrapeConfig& g, std::uint64_t seed,
                         bool random_start, const std::optional<GateChoice>& gate) {
  return {{"format_version", kDatasetFormatVersion},
          {"system", to_json(sys)},
          {"grape_config", to_json(g)},
          {"seed", seed},
          {"random_start", random_start},
          {"fixed_gate", gate ? gate_json(*gate) : Json()}};
}

Json sample_json(std::size_t index, const PulseSample& s) {
  return {{"index", index},
          {"features", s.features},
          {"phases", s.phases},
          {"fidelity", s.fidelity},
          {"converged", s.converged},
          {"iterations", s.iterations}};
}

// Reads a checkpoint written by an earlier run with the same header; a
// truncated trailing line (interrupted write) is ignored.
std::vector<std::optional<PulseSample>> load_checkpoint(const fs::path& path, const Json& header,
                                                        std::size_t count) {
  std::vector<std::optional<PulseSample>> have(count);
  std::ifstream in(path);
  if (!in) return have;
  std::string line;
  if (!std::getline(in, line)) return have;
  const Json h = Json::parse(line, nullptr, false);
  if (h.is_discarded() || h != header)
    throw NmrError("checkpoint " + path.string() + " belongs to a different run; remove it or use another --out");
  while (std::getline(in, line)) {
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) break;
    const auto i = j.at("index").get<std::size_t>();
    if (i >= count) continue;
    have[i] = PulseSample{j.at("features").get<std::vector<double>>(),
                          j.at("phases").get<std::vector<double>>(), j.at("fidelity").get<double>(),
                          j.at("converged").get<bool>(), j.at("iterations").get<int>()};
  }
  return have;
}

int cmd_dataset(const Common& c, const GrapeOverrides& o, const std::optional<GateChoice>& gate,
                int count, bool random_start, int chunk, int budget) {
  if (count < 1) throw NmrError("--count must be >= 1");
  const SpinSystem sys = load_system(c);
  const GrapeConfig g = grape_config(c, o);
  const Json header = dataset_header_json(sys, g, c.seed, random_start, gate);
  Json cfg = header;
  cfg["count"] = count;
  Run run("dataset", c, cfg);
  add_file_inputs(run, c);

  DatasetOptions opts;
  opts.random_start = random_start;
  opts.workers = c.workers;
  if (gate) opts.fixed_gate = make_gate(*gate);

  const auto n = static_cast<std::size_t>(count);
  const fs::path ckpt = run.target("dataset.partial.jsonl");
  auto have = load_checkpoint(ckpt, header, n);
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < n; ++i)
    if (!have[i]) missing.push_back(i);
  if (!fs::exists(ckpt)) {
    std::ofstream(ckpt) << header.dump() << "\n";
  }
  std::printf("%zu of %zu samples cached, generating %zu\n", n - missing.size(), n, missing.size());

  std::size_t generated = 0;
  const std::size_t step = static_cast<std::size_t>(std::max(chunk, 1));
  const int workers = c.workers > 0 ? c.workers : omp_get_max_threads();
  for (std::size_t pos = 0; pos < missing.size();) {
    if (budget > 0 && generated >= static_cast<std::size_t>(budget)) {
      std::printf("budget reached with %zu samples outstanding; re-run to resume\n",
                  missing.size() - pos);
      return kExitBudget;
    }
    std::size_t end = std::min(missing.size(), pos + step);
    if (budget > 0) end = std::min(end, pos + static_cast<std::size_t>(budget) - generated);
    std::vector<PulseSample> block(end - pos);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(block.size()); ++k)
      block[static_cast<std::size_t>(k)] =
          generate_sample(missing[pos + static_cast<std::size_t>(k)], sys, g, c.seed, opts);
    std::ofstream app(ckpt, std::ios::app);
    for (std::size_t k = 0; k < block.size(); ++k) {
      have[missing[pos + k]] = block[k];
      app << sample_json(missing[pos + k], block[k]).dump() << "\n";
    }
    app.flush();
    generated += block.size();
    pos = end;
  }

  PulseDataset ds;
  ds.system = sys;
  ds.grape_config = g;
  if (random_start) ds.grape_config.initial_phases.clear();
  ds.seed = c.seed;
  ds.random_start = random_start;
  for (auto& s : have) {
    if (!s) throw NmrError("internal: dataset sample missing after generation");
    ds.samples.push_back(std::move(*s));
  }

  run.json("dataset.json", to_json(ds));
  run.csv("features.csv", features_table(ds));
  run.csv("phases.csv", phases_table(ds));
  std::size_t converged = 0;
  double mean_fid = 0.0;
  for (const auto& s : ds.samples) {
    converged += s.converged ? 1 : 0;
    mean_fid += s.fidelity / static_cast<double>(n);
  }
  Json summary = {{"count", n}, {"converged", converged}, {"mean_fidelity", mean_fid}};
  if (n >= 2) {
    const SimilarityMatrix m = cosine_similarity_matrix(ds);
    const SimilaritySummary s = similarity_summary(m);
    run.json("similarity_summary.json",
             {{"mean_offdiag", s.mean_offdiag}, {"min", s.min}, {"count", n}});
    run.csv("similarity_histogram.csv", histogram_table(s.histogram));
    if (n <= 2000) run.csv("similarity.csv", similarity_table(m));
    summary["similarity_mean_offdiag"] = s.mean_offdiag;
  }
  run.extra() = summary;
  run.finish();
  fs::remove(ckpt);
  std::printf("%zu samples, %zu converged, mean fidelity %.4f\n", n, converged, mean_fid);
  return 0;
}

// --- train -----------------------------------------------------------------

struct TrainFlags {
  std::string dataset;
  std::optional<int> epochs;
  std::optional<double> time_limit;
};

int cmd_train(const Common& c, const TrainFlags& f) {
  if (f.dataset.empty()) throw NmrError("--dataset is required");
  TrainConfig tc;
  if (!c.config_file.empty()) tc = train_config_from_json(read_json_file(c.config_file));
  if (f.epochs) tc.epochs = *f.epochs;
  if (f.time_limit) tc.time_limit_s = *f.time_limit;
  tc.seed = c.seed;
  tc.validate();
  Run run("train", c, to_json(tc));
  run.add_input(f.dataset);
  if (!c.config_file.empty()) run.add_input(c.config_file);

  const PulseDataset ds = dataset_from_json(read_json_file(f.dataset));
  if (c.workers > 0) omp_set_num_threads(c.workers);
  const TrainResult r = train(ds, tc);

  run.json("model.json", to_json(r.model));
  Json report = to_json(r.report);
  report.erase("wall_time_s");
  run.json("report.json", report);
  CsvTable loss{{"epoch", "train_mse", "validation_mse"}, {}};
  for (std::size_t e = 0; e < r.report.train_mse.size(); ++e)
    loss.rows.push_back({static_cast<double>(e + 1), r.report.train_mse[e],
                         e < r.report.validation_mse.size() ? r.report.validation_mse[e] : NAN});
  run.csv("loss.csv", loss);
  run.extra() = {{"model_hash", r.report.model_hash},
                 {"architecture", r.report.architecture},
                 {"train_count", r.report.train_count},
                 {"test_count", r.report.test_count},
                 {"final_test_mse", r.report.final_test_mse},
                 {"train_wall_time_s", r.report.wall_time_s}};
  run.finish();
  std::printf("trained %s on %zu samples, test mse %.5f\n", r.report.architecture.c_str(),
              r.report.train_count, r.report.final_test_mse);
  return 0;
}

// --- eval ------------------------------------------------------------------

struct EvalFlags {
  std::string model;
  std::string dataset;
  std::string mode = "histogram";
  int count = 15000;
  int divisions = 50;
  std::optional<double> t2;
  int bins = 50;
};

Json describe_eval(const Evaluation& e) {
  return {{"mean", e.mean}, {"std", e.std}, {"above_0_9", e.fraction_above(0.9)},
          {"count", e.fidelities.size()}};
}

int cmd_eval(const Common& c, const GrapeOverrides& o, const EvalFlags& f) {
  if (f.model.empty()) throw NmrError("--model is required");
  Json cfg = {{"mode", f.mode}, {"count", f.count}, {"divisions", f.divisions}, {"bins", f.bins}};
  if (f.t2) cfg["t2_s"] = *f.t2;
  Run run("eval", c, cfg);
  run.add_input(f.model);
  const MlpModel model = model_from_json(read_json_file(f.model));

  SpinSystem sys = SpinSystem::c2f3i();
  GrapeConfig g;
  if (!f.dataset.empty()) {
    run.add_input(f.dataset);
    const PulseDataset ds = dataset_from_json(read_json_file(f.dataset));
    sys = ds.system;
    g = ds.grape_config;
    if (!c.system_file.empty() || !c.config_file.empty())
      throw NmrError("--dataset already fixes the system and timing; drop --system/--config");
  } else {
    sys = load_system(c);
    g = grape_config(c, o);
    add_file_inputs(run, c);
  }
  if (g.steps != model.output_dim())
    throw NmrError("model predicts " + std::to_string(model.output_dim()) +
                   " phases but the timing config has N=" + std::to_string(g.steps));
  if (model.dataset_format_version() != kDatasetFormatVersion)
    throw NmrError("model was trained on dataset format " + model.dataset_format_version());
  const PulseTiming timing{g.amplitude_hz, g.dt_s};
  if (c.workers > 0) omp_set_num_threads(c.workers);

  if (f.mode == "histogram") {
    if (f.count < 1) throw NmrError("--count must be >= 1");
    std::vector<ComplexMatrix> gates;
    std::vector<AxisAngle> params;
    for (int i = 0; i < f.count; ++i) {
      Rng rng = make_stream(c.seed, static_cast<std::uint64_t>(i));
      params.push_back(sample_axis_angle(rng));
      gates.push_back(axis_angle_unitary(params.back()));
    }
    const Evaluation e = evaluate_model(model, sys, timing, gates, c.workers);
    CsvTable fid{{"index", "axis_theta", "axis_phi", "gamma", "fidelity"}, {}};
    CsvTable lat{{"index", "latency_s"}, {}};
    for (std::size_t i = 0; i < gates.size(); ++i) {
      fid.rows.push_back({static_cast<double>(i), params[i].theta, params[i].phi, params[i].gamma,
                          e.fidelities[i]});
      lat.rows.push_back({static_cast<double>(i), e.latency_s[i]});
    }
    run.csv("fidelities.csv", fid);
    run.text("latency.csv", lat.str(), false);
    run.csv("histogram.csv", histogram_table(make_histogram(e.fidelities, 0.0, 1.0,
                                                            static_cast<std::size_t>(f.bins))));
    Json s = describe_eval(e);
    run.json("summary.json", s);
    s["mean_latency_s"] = e.mean_latency_s;
    run.extra() = s;
    std::printf("mean %.4f std %.4f above 0.9 %.3f latency %.3g s\n", e.mean, e.std,
                e.fraction_above(0.9), e.mean_latency_s);
  } else if (f.mode == "theta-sweep") {
    const auto grid = open_grid(kPi, f.divisions);
    CsvTable t{{"theta", "ux", "uy", "uz"}, {}};
    std::vector<ThetaCurve> curves;
    for (auto fam : {GateFamily::Ux, GateFamily::Uy, GateFamily::Uz})
      curves.push_back(sweep_theta(model, sys, timing, fam, grid));
    Json s = Json::object();
    for (std::size_t i = 0; i < grid.size(); ++i)
      t.rows.push_back({grid[i], curves[0].fidelity[i], curves[1].fidelity[i], curves[2].fidelity[i]});
    for (const auto& cv : curves) {
      double m = 0.0;
      for (double v : cv.fidelity) m += v / static_cast<double>(cv.fidelity.size());
      s[to_string(cv.family)] = {{"mean", m}};
    }
    run.csv("theta_sweep.csv", t);
    run.json("summary.json", s);
    run.extra() = s;
  } else if (f.mode == "theta-alpha") {
    const auto th = open_grid(kPi, f.divisions);
    const auto al = open_grid(2 * kPi, 2 * f.divisions);
    const ThetaAlphaSurface surf = sweep_theta_alpha(model, sys, timing, th, al);
    CsvTable t{{"theta", "alpha", "fidelity"}, {}};
    for (std::size_t i = 0; i < th.size(); ++i)
      for (std::size_t j = 0; j < al.size(); ++j) t.rows.push_back({th[i], al[j], surf.at(i, j)});
    run.csv("theta_alpha.csv", t);
    const Json s = {{"theta_points", th.size()},
                    {"alpha_points", al.size()},
                    {"mean", surf.mean},
                    {"std", surf.std},
                    {"reference_mean", 0.95},
                    {"reference_std", 0.08},
                    {"mean_minus_reference", surf.mean - 0.95}};
    run.json("summary.json", s);
    run.extra() = s;
    std::printf("surface %zux%zu mean %.4f std %.4f (reference 0.95 / 0.08)\n", th.size(),
                al.size(), surf.mean, surf.std);
  } else if (f.mode == "spectrum-phase") {
    ExperimentConfig ec;
    ec.acquisition.t2_s = f.t2.value_or(1.0);
    CsvTable t{{"k", "alpha", "expected", "phase_exact", "phase_pulse", "re_exact", "im_exact",
                "re_pulse", "im_pulse", "fidelity_pulse"},
               {}};
    Json records = Json::array();
    const Json ec_json = {{"duration_s", ec.acquisition.duration_s},
                          {"n_samples", ec.acquisition.n_samples},
                          {"t2_s", ec.acquisition.t2_s},
                          {"qubit", ec.qubit},
                          {"recentre", ec.recentre}};
    for (int k : {1, 2, 3, 4, 5, 6, 9, 10}) {
      const double alpha = k * kPi / 9;
      const ComplexMatrix gate = theta_alpha_gate(kPi / 4, alpha);
      const PulseSequence pulse = predict_pulse(model, gate, timing.amplitude_hz, timing.dt_s);
      const auto ex = run_experiment(gate, sys, ec, ExperimentMode::Exact);
      const auto pm = run_experiment(gate, sys, ec, ExperimentMode::Pulse, &pulse);
      const double expected = phase_observable(std::sin(alpha), -std::cos(alpha));
      const double fid =
          fidelity(kron_embed(GateSpec{gate, 1}, sys.n()), total_propagator(pulse, sys));
      t.rows.push_back({static_cast<double>(k), alpha, expected, ex.phase, pm.phase, ex.re, ex.im,
                        pm.re, pm.im, fid});
      for (const auto* r : {&ex, &pm})
        records.push_back({{"theta", kPi / 4},
                           {"alpha", alpha},
                           {"mode", r->mode == ExperimentMode::Exact ? "exact" : "pulse"},
                           {"re", r->re},
                           {"im", r->im},
                           {"phase", r->phase},
                           {"band", {r->band.f1, r->band.f2}},
                           {"config_hash", json_hash(ec_json)}});
    }
    run.csv("phase_table.csv", t);
    run.json("experiments.json", records);
  } else {
    throw NmrError("unknown --mode '" + f.mode + "'");
  }
  run.finish();
  return 0;
}

// --- spectrum --------------------------------------------------------------

struct SpectrumFlags {
  std::string state = "thermal";
  double t2 = 0.3;
  double duration = 1.0;
  int samples = 16384;
  double prominence = 0.2;
};

int cmd_spectrum(const Common& c, const GateChoice& gc, const SpectrumFlags& f) {
  Json cfg = {{"state", f.state},     {"t2_s", f.t2},
              {"duration_s", f.duration}, {"n_samples", f.samples},
              {"prominence", f.prominence}};
  if (f.state == "gate") cfg["gate"] = gate_json(gc);
  Run run("spectrum", c, cfg);
  const SpinSystem sys = load_system(c);
  add_file_inputs(run, c);
  DensityMatrix rho;
  if (f.state == "thermal") {
    rho = thermal_like_state(sys.n());
  } else if (f.state == "gate") {
    rho = apply_gate_to_state(kron_embed(GateSpec{make_gate(gc), gc.qubit}, sys.n()), pps_state(sys.n()));
  } else {
    throw NmrError("unknown --state '" + f.state + "'");
  }
  const AcquisitionConfig acq{f.duration, f.samples, f.t2};
  const FidSignal s = fid(rho, sys, acq);
  const Spectrum sp = spectrum(s);
  CsvTable ft{{"t_s", "mx"}, {}};
  for (std::size_t k = 0; k < s.samples.size(); ++k) ft.rows.push_back({s.time(k), s.samples[k]});
  CsvTable st{{"freq_hz", "re", "im"}, {}};
  for (std::size_t k = 0; k < sp.freqs.size(); ++k) st.rows.push_back({sp.freqs[k], sp.re[k], sp.im[k]});
  const auto peaks = find_peaks(sp, f.prominence);
  CsvTable pt{{"freq_hz", "height", "prominence"}, {}};
  for (const auto& p : peaks) pt.rows.push_back({p.freq, p.height, p.prominence});
  run.csv("fid.csv", ft);
  run.csv("spectrum.csv", st);
  run.csv("peaks.csv", pt);
  run.extra() = {{"peaks", peaks.size()}};
  run.finish();
  std::printf("%zu peaks\n", peaks.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse generation, training and NMR evaluation pipeline"};
  app.set_version_flag("--version", std::string(NMRPULSE_VERSION));
  app.require_subcommand(1);

  Common common;
  GrapeOverrides over;

  auto* grape = app.add_subcommand("grape", "Optimize one pulse with GRAPE");
  GateChoice grape_gate;
  bool grape_random = false;
  add_common(grape, common);
  add_grape_overrides(grape, over);
  add_gate(grape, grape_gate, true);
  grape->add_option("--qubit", grape_gate.qubit, "Target qubit (1-based)");
  grape->add_flag("--random-start", grape_random, "Start from seeded uniform random phases");

  auto* dataset = app.add_subcommand("dataset", "Generate a GRAPE pulse dataset (resumable)");
  GateChoice ds_gate;
  int count = 0;
  int chunk = 64;
  int budget = 0;
  bool ds_random = false;
  add_common(dataset, common);
  add_grape_overrides(dataset, over);
  add_gate(dataset, ds_gate, false);
  dataset->add_option("--count", count, "Number of samples")->required();
  dataset->add_flag("--random-start", ds_random, "Uniform random initial phases per sample");
  dataset->add_option("--chunk", chunk, "Samples per checkpoint flush");
  dataset->add_option("--budget", budget,
                      "Generate at most this many new samples, then stop with exit code 3");

  auto* trn = app.add_subcommand("train", "Train the pulse network on a dataset");
  TrainFlags tf;
  add_common(trn, common);
  trn->add_option("--dataset", tf.dataset, "Dataset JSON")->required();
  trn->add_option("--epochs", tf.epochs, "Epoch count");
  trn->add_option("--time-limit", tf.time_limit, "Stop after this many seconds");

  auto* ev = app.add_subcommand("eval", "Evaluate a trained model");
  EvalFlags ef;
  add_common(ev, common);
  add_grape_overrides(ev, over);
  ev->add_option("--model", ef.model, "Model JSON")->required();
  ev->add_option("--dataset", ef.dataset, "Take system and pulse timing from this dataset");
  ev->add_option("--mode", ef.mode, "histogram|theta-sweep|theta-alpha|spectrum-phase");
  ev->add_option("--count", ef.count, "Gates for histogram mode");
  ev->add_option("--divisions", ef.divisions, "Grid step is pi/divisions");
  ev->add_option("--bins", ef.bins, "Histogram bins");
  ev->add_option("--t2", ef.t2, "T2 in seconds for spectrum-phase (default 1)");

  auto* spc = app.add_subcommand("spectrum", "Simulate an FID and spectrum");
  SpectrumFlags sf;
  GateChoice sp_gate;
  sp_gate.name = "theta-alpha";
  add_common(spc, common);
  add_gate(spc, sp_gate, true);
  spc->add_option("--state", sf.state, "thermal|gate (gate applied to the pseudo-pure state)");
  spc->add_option("--t2", sf.t2, "T2 in seconds");
  spc->add_option("--duration", sf.duration, "Acquisition time in seconds");
  spc->add_option("--samples", sf.samples, "FID points");
  spc->add_option("--prominence", sf.prominence, "Relative peak prominence");

  CLI11_PARSE(app, argc, argv);

  try {
    if (common.workers > 0) omp_set_num_threads(common.workers);
    if (*grape) return cmd_grape(common, over, grape_gate, grape_random);
    if (*dataset) {
      std::optional<GateChoice> g;
      if (dataset->count("--gate")) g = ds_gate;
      return cmd_dataset(common, over, g, count, ds_random, chunk, budget);
    }
    if (*trn) return cmd_train(common, tf);
    if (*ev) return cmd_eval(common, over, ef);
    if (*spc) return cmd_spectrum(common, sp_gate, sf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
