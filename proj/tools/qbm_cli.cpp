// Copyright 2026 The qbm-pqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point. Exit status: 0 success, 1 domain error,
// 2 usage error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qbm/cnn.hpp"
#include "qbm/dataset.hpp"
#include "qbm/device.hpp"
#include "qbm/embedding.hpp"
#include "qbm/error.hpp"
#include "qbm/metrics.hpp"
#include "qbm/model.hpp"
#include "qbm/parallel.hpp"
#include "qbm/random.hpp"
#include "qbm/run_config.hpp"
#include "qbm/samplers.hpp"
#include "qbm/topology.hpp"
#include "qbm/trainer.hpp"

namespace fs = std::filesystem;
using qbm::RunConfig;

namespace {

constexpr const char* kOutputEnv = "QBM_OUTPUT_DIR";

// Flags bound to a scratch RunConfig; only flags given on the command line
// are copied over the loaded config file.
class Overrides {
 public:
  template <typename Access>
  CLI::Option* add(CLI::App* app, const std::string& name, Access access, const std::string& help) {
    auto& target = access(flags_);
    CLI::Option* opt = app->add_option(name, target, help)->capture_default_str();
    items_.push_back({opt, [access](RunConfig& dst, RunConfig& src) { access(dst) = access(src); }});
    return opt;
  }

  void apply(RunConfig& cfg) {
    for (auto& [opt, copy] : items_) {
      if (opt->count() > 0) copy(cfg, flags_);
    }
  }

 private:
  RunConfig flags_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, RunConfig&)>>> items_;
};

struct Common {
  std::string out;
  std::string config_path;
  unsigned threads = 0;
};

fs::path output_dir(const Common& common) {
  fs::path dir = common.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputEnv);
    dir = env && *env ? env : "qbm_out";
  }
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw qbm::Error("cannot write " + path.string());
  out << text;
}

RunConfig resolve_config(const Common& common, Overrides& ov) {
  RunConfig cfg = common.config_path.empty() ? RunConfig{} : qbm::load_run_config(common.config_path);
  ov.apply(cfg);
  cfg.validate();
  return cfg;
}

void add_sampler_flags(CLI::App* app, Overrides& ov) {
  ov.add(app, "--sampler", [](RunConfig& c) -> auto& { return c.sampler.kind; }, "exact, gibbs, sa or device");
  ov.add(app, "--temperature", [](RunConfig& c) -> auto& { return c.sampler.temperature; }, "effective temperature T");
  ov.add(app, "--reads", [](RunConfig& c) -> auto& { return c.sampler.reads; }, "samples per phase problem");
  ov.add(app, "--sweeps", [](RunConfig& c) -> auto& { return c.sampler.sweeps; }, "Gibbs sweeps per read");
  ov.add(app, "--beta-first", [](RunConfig& c) -> auto& { return c.sampler.beta_first; }, "first annealing beta");
  ov.add(app, "--beta-last", [](RunConfig& c) -> auto& { return c.sampler.beta_last; },
         "last annealing beta (0: 10/T)");
  ov.add(app, "--steps", [](RunConfig& c) -> auto& { return c.sampler.steps; }, "annealing sweeps per read");
}

void add_device_flags(CLI::App* app, Overrides& ov) {
  ov.add(app, "--pegasus-m", [](RunConfig& c) -> auto& { return c.device.m; }, "Pegasus size m for the device");
  ov.add(app, "--regions", [](RunConfig& c) -> auto& { return c.device.regions; }, "parallel regions");
  ov.add(app, "--chain-strength", [](RunConfig& c) -> auto& { return c.device.chain_strength; },
         "chain coupling magnitude (0: automatic)");
  ov.add(app, "--chain-strength-factor", [](RunConfig& c) -> auto& { return c.device.chain_strength_factor; },
         "automatic chain strength multiple of max |coefficient|");
  ov.add(app, "--reads-per-cycle", [](RunConfig& c) -> auto& { return c.device.reads_per_cycle; },
         "device reads per anneal cycle");
  ov.add(app, "--embed-attempts", [](RunConfig& c) -> auto& { return c.device.embed_attempts; },
         "embedding attempts per region");
  ov.add(app, "--partition-seed", [](RunConfig& c) -> auto& { return c.seeds.partition; }, "partition seed");
  ov.add(app, "--embed-seed", [](RunConfig& c) -> auto& { return c.seeds.embed; }, "embedding seed");
}

void add_data_flags(CLI::App* app, Overrides& ov) {
  ov.add(app, "--data", [](RunConfig& c) -> auto& { return c.data.path; }, "QBMD1 dataset file");
  ov.add(app, "--train-split", [](RunConfig& c) -> auto& { return c.data.train_split; }, "split to train on");
  ov.add(app, "--eval-splits", [](RunConfig& c) -> auto& { return c.data.eval_splits; },
         "splits evaluated after each epoch");
  ov.add(app, "--limit", [](RunConfig& c) -> auto& { return c.data.limit; },
         "use only the first N items of each split (0: all)");
}

void add_qbm_flags(CLI::App* app, Overrides& ov) {
  ov.add(app, "--hidden", [](RunConfig& c) -> auto& { return c.model.hidden; }, "hidden units");
  ov.add(app, "--lr", [](RunConfig& c) -> auto& { return c.train.learning_rate; }, "learning rate");
  ov.add(app, "--batch", [](RunConfig& c) -> auto& { return c.train.batch_size; }, "batch size");
  ov.add(app, "--epochs", [](RunConfig& c) -> auto& { return c.train.epochs; }, "training epochs");
  ov.add(app, "--record-nll", [](RunConfig& c) -> auto& { return c.train.record_nll; },
         "add the exact label NLL to the trace");
  ov.add(app, "--init-seed", [](RunConfig& c) -> auto& { return c.seeds.init; }, "parameter initialization seed");
  ov.add(app, "--seed", [](RunConfig& c) -> auto& { return c.seeds.train; }, "training and sampling seed");
}

void add_cnn_flags(CLI::App* app, Overrides& ov) {
  ov.add(app, "--kernel", [](RunConfig& c) -> auto& { return c.cnn.kernel; }, "convolution kernel size");
  ov.add(app, "--neurons1", [](RunConfig& c) -> auto& { return c.cnn.neurons1; }, "first dense layer width");
  ov.add(app, "--neurons2", [](RunConfig& c) -> auto& { return c.cnn.neurons2; }, "second dense layer width");
  ov.add(app, "--cnn-lr", [](RunConfig& c) -> auto& { return c.cnn.learning_rate; }, "Adam learning rate");
  ov.add(app, "--beta1", [](RunConfig& c) -> auto& { return c.cnn.beta1; }, "Adam beta1");
  ov.add(app, "--beta2", [](RunConfig& c) -> auto& { return c.cnn.beta2; }, "Adam beta2");
  ov.add(app, "--adam-epsilon", [](RunConfig& c) -> auto& { return c.cnn.epsilon; }, "Adam epsilon");
  ov.add(app, "--cnn-batch", [](RunConfig& c) -> auto& { return c.cnn.batch_size; }, "CNN batch size");
  ov.add(app, "--cnn-epochs", [](RunConfig& c) -> auto& { return c.cnn.epochs; }, "CNN epochs");
  ov.add(app, "--init-seed", [](RunConfig& c) -> auto& { return c.seeds.init; }, "weight initialization seed");
  ov.add(app, "--seed", [](RunConfig& c) -> auto& { return c.seeds.train; }, "shuffling seed");
}

struct LoadedData {
  qbm::Dataset dataset;
  std::vector<qbm::EncodedDataPoint> train;
  std::vector<std::pair<std::string, std::vector<qbm::EncodedDataPoint>>> eval;
};

std::vector<qbm::EncodedDataPoint> encode_split(const qbm::Dataset& ds, const std::string& name, std::size_t limit) {
  auto points = qbm::encode(ds.split(qbm::parse_split(name)));
  if (limit > 0 && points.size() > limit) points.resize(limit);
  return points;
}

LoadedData load_data(const RunConfig& cfg) {
  if (cfg.data.path.empty()) throw qbm::Error("no dataset given (--data or data.path)");
  LoadedData d;
  d.dataset = qbm::load_dataset(cfg.data.path);
  d.train = encode_split(d.dataset, cfg.data.train_split, cfg.data.limit);
  for (const auto& name : cfg.data.eval_splits) d.eval.emplace_back(name, encode_split(d.dataset, name, cfg.data.limit));
  return d;
}

std::vector<qbm::EvalSplit> eval_views(const LoadedData& d) {
  std::vector<qbm::EvalSplit> views;
  for (const auto& [name, points] : d.eval) views.push_back({name, points});
  return views;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s.precision(4);
  s << std::fixed << v;
  return s.str();
}

std::unique_ptr<qbm::PhaseSampler> make_sampler(const RunConfig& cfg, const fs::path* out_dir) {
  if (!cfg.uses_device()) return std::make_unique<qbm::ClassicalSampler>(cfg.sampler_config());
  qbm::HardwareGraph g = qbm::pegasus(cfg.device.m);
  const qbm::PartitionPlan plan =
      qbm::apply_buffer(g, qbm::partition(g, cfg.device.regions, cfg.seeds.partition));
  qbm::EmbedOptions eo;
  eo.attempts = cfg.device.embed_attempts;
  qbm::ParallelEmbedding pe = qbm::build_parallel(g, plan, cfg.model.hidden + cfg.model.labels, cfg.seeds.embed, eo);
  if (out_dir) {
    write_text(*out_dir / "plan.json", qbm::plan_to_json(plan));
    write_text(*out_dir / "embedding.json", qbm::parallel_to_json(pe));
  }
  return std::make_unique<qbm::DeviceSampler>(std::move(g), std::move(pe), cfg.device_config());
}

void print_record(const qbm::EpochRecord& r) {
  std::cerr << "epoch " << r.epoch << ' ' << r.split << " acc=" << fmt(r.acc) << " auc=" << fmt(r.auc) << '\n';
}

const qbm::EpochRecord* last_record(const std::vector<qbm::EpochRecord>& trace, const std::string& split) {
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    if (it->split == split) return &*it;
  }
  return nullptr;
}

std::string final_summary(const std::vector<qbm::EpochRecord>& trace) {
  std::string s;
  for (const char* split : {"val", "test"}) {
    if (const auto* r = last_record(trace, split)) {
      s += std::string(" ") + split + " acc=" + fmt(r->acc) + " auc=" + fmt(r->auc);
    }
  }
  return s;
}

// ---- commands ----

int cmd_partition(const RunConfig& cfg, const Common& common, bool buffer) {
  const int m = cfg.device.m;
  const std::size_t k = cfg.device.regions;
  const qbm::HardwareGraph g = qbm::pegasus(m);
  const qbm::PartitionPlan raw = qbm::partition(g, k, cfg.seeds.partition);
  const qbm::PartitionPlan plan = buffer ? qbm::apply_buffer(g, raw) : raw;
  const fs::path dir = output_dir(common);
  write_text(dir / "plan.json", qbm::plan_to_json(plan));
  std::ofstream edges(dir / "graph.edges");
  qbm::write_edge_list(edges, g);
  std::cout << "partition: m=" << m << " nodes=" << g.node_count() << " edges=" << g.edge_count() << " k=" << k
            << " balance=" << fmt(qbm::balance_ratio(raw)) << " buffer=" << plan.buffer.size()
            << " cross_edges=" << qbm::inter_region_edges(g, plan) << " -> " << (dir / "plan.json").string() << '\n';
  return 0;
}

int cmd_embed(const RunConfig& cfg, const Common& common, const std::string& plan_path, std::size_t k) {
  std::ifstream in(plan_path);
  if (!in) throw qbm::Error("cannot open plan " + plan_path);
  std::stringstream text;
  text << in.rdbuf();
  const qbm::HardwareGraph g = qbm::pegasus(cfg.device.m);
  const qbm::PartitionPlan plan = qbm::apply_buffer(g, qbm::plan_from_json(text.str()));
  qbm::EmbedOptions eo;
  eo.attempts = cfg.device.embed_attempts;
  const auto start = std::chrono::steady_clock::now();
  const qbm::ParallelEmbedding pe = qbm::build_parallel(g, plan, k, cfg.seeds.embed, eo);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t max_chain = 0;
  for (std::size_t r = 0; r < pe.size(); ++r) {
    const auto& [region, e] = pe.regions[r];
    const auto report = qbm::validate_embedding(e, k, g, plan.regions[region]);
    if (!report) throw qbm::Error("region " + std::to_string(region) + ": " + report.violation);
    max_chain = std::max(max_chain, e.max_chain_length());
  }
  const fs::path dir = output_dir(common);
  write_text(dir / "embedding.json", qbm::parallel_to_json(pe));
  std::cout << "embed: k=" << k << " regions=" << pe.size() << " max_chain=" << max_chain
            << " cross_edges=" << qbm::cross_embedding_edges(g, pe) << " seconds=" << fmt(seconds) << " -> "
            << (dir / "embedding.json").string() << '\n';
  return 0;
}

int cmd_train_qbm(const Common& common, Overrides& ov) {
  const RunConfig cfg = resolve_config(common, ov);
  const LoadedData data = load_data(cfg);
  if (data.train.empty()) throw qbm::Error("training split is empty");
  const qbm::UnitLayout layout = cfg.layout(data.train.front().inputs.size());
  const fs::path dir = output_dir(common);
  write_text(dir / "config.json", qbm::to_json(cfg));
  const auto sampler = make_sampler(cfg, &dir);
  const auto views = eval_views(data);
  const qbm::TrainResult result = qbm::train(qbm::init_params(layout, cfg.seeds.init), data.train,
                                             cfg.train_config(), *sampler, views, print_record);
  qbm::save_params((dir / "params.pbm").string(), result.params);
  std::ofstream trace(dir / "trace.csv");
  qbm::write_trace_csv(trace, result.trace);
  std::cout << "train-qbm: " << sampler->describe() << " hidden=" << cfg.model.hidden
            << " epochs=" << cfg.train.epochs << final_summary(result.trace) << " -> " << dir.string() << '\n';
  return 0;
}

int cmd_train_cnn(const Common& common, Overrides& ov) {
  const RunConfig cfg = resolve_config(common, ov);
  const LoadedData data = load_data(cfg);
  if (data.train.empty()) throw qbm::Error("training split is empty");
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(data.train.front().inputs.size())));
  const qbm::CnnArchitecture arch = cfg.cnn_architecture(side);
  const fs::path dir = output_dir(common);
  write_text(dir / "config.json", qbm::to_json(cfg));
  const auto views = eval_views(data);
  const qbm::CnnTrainResult result =
      qbm::train_cnn(qbm::init_cnn(arch, cfg.seeds.init), data.train, cfg.cnn_train_config(), views, print_record);
  qbm::save_cnn((dir / "cnn.qcnn").string(), result.model);
  std::ofstream trace(dir / "cnn_trace.csv");
  qbm::write_trace_csv(trace, result.trace);
  std::cout << "train-cnn: kernel=" << arch.kernel << " neurons=" << arch.neurons1 << '/' << arch.neurons2
            << " params=" << arch.parameter_count() << " epochs=" << cfg.cnn.epochs << final_summary(result.trace)
            << " -> " << dir.string() << '\n';
  return 0;
}

bool has_magic(const std::string& path, const std::string& magic) {
  std::ifstream in(path, std::ios::binary);
  std::string head(magic.size(), '\0');
  return in.read(head.data(), static_cast<std::streamsize>(head.size())) && head == magic;
}

int cmd_eval(const Common& common, Overrides& ov, const std::string& model_path, const std::string& split) {
  const RunConfig cfg = resolve_config(common, ov);
  if (cfg.data.path.empty()) throw qbm::Error("no dataset given (--data or data.path)");
  const qbm::Dataset ds = qbm::load_dataset(cfg.data.path);
  const auto points = encode_split(ds, split, cfg.data.limit);
  if (points.empty()) throw qbm::Error("split " + split + " is empty");
  std::vector<qbm::ScoredPrediction> preds;
  std::string kind;
  if (!model_path.empty() && has_magic(model_path, "QCNN1")) {
    kind = "cnn";
    preds = qbm::cnn_predict_all(qbm::load_cnn(model_path), points);
  } else {
    const qbm::BMParameters params = model_path.empty()
                                         ? qbm::init_params(cfg.layout(points.front().inputs.size()), cfg.seeds.init)
                                         : qbm::load_params(model_path);
    kind = model_path.empty() ? "qbm-random" : "qbm";
    const auto sampler = make_sampler(cfg, nullptr);
    preds = qbm::predict_all(params, points, *sampler, cfg.seeds.train);
  }
  std::size_t positives = 0;
  for (const auto& p : preds) positives += p.truth;
  const double acc = qbm::accuracy(preds);
  const double auc = positives == 0 || positives == preds.size() ? std::numeric_limits<double>::quiet_NaN()
                                                                 : qbm::auc(preds);
  const double prevalence = static_cast<double>(positives) / static_cast<double>(preds.size());
  const fs::path dir = output_dir(common);
  nlohmann::json j{{"model", kind}, {"split", split}, {"items", preds.size()}, {"acc", acc},
                   {"auc", std::isnan(auc) ? nlohmann::json(nullptr) : nlohmann::json(auc)},
                   {"prevalence", prevalence}};
  write_text(dir / "eval.json", j.dump(2));
  std::cout << "eval: " << kind << " split=" << split << " n=" << preds.size() << " acc=" << fmt(acc)
            << " auc=" << fmt(auc) << " prevalence=" << fmt(prevalence) << '\n';
  return 0;
}

int cmd_timing(const RunConfig& cfg, const Common& common, const std::string& mode, const qbm::Workload& w) {
  const std::size_t regions = cfg.device.regions;
  const qbm::TimingConstants& constants = cfg.device.timing;
  std::vector<qbm::TimingReport> reports;
  if (mode == "both" || mode == "sequential") {
    reports.push_back(qbm::timing_report(w, constants, regions, qbm::TimingMode::kSequential));
  }
  if (mode == "both" || mode == "parallel") {
    reports.push_back(qbm::timing_report(w, constants, regions, qbm::TimingMode::kParallel));
  }
  if (reports.empty()) throw qbm::Error("unknown timing mode '" + mode + "'");
  const fs::path dir = output_dir(common);
  write_text(dir / "timing.json", qbm::timing_to_json(reports));
  std::ofstream csv(dir / "timing.csv");
  qbm::write_timing_csv(csv, reports);
  std::cout << "timing-report: programming_us=" << constants.programming_us << " per_read_us=" << constants.per_read_us
            << " per_cycle_overhead_us=" << constants.per_cycle_overhead_us << " instances=" << w.instances()
            << " regions=" << regions;
  for (const auto& r : reports) {
    std::cout << ' ' << qbm::to_string(r.mode) << "_cycles=" << r.cycles << ' ' << qbm::to_string(r.mode)
              << "_us=" << r.total_time_us;
  }
  std::cout << " speedup=" << fmt(reports.back().speedup_vs_sequential) << '\n';
  return 0;
}

qbm::ReducedProblem random_problem(std::size_t units, std::uint64_t seed, double temperature) {
  qbm::Rng rng(seed);
  qbm::ReducedProblem rp(units, temperature);
  for (std::size_t i = 0; i < units; ++i) {
    rp.set_bias(i, 2.0 * qbm::uniform01(rng) - 1.0);
    for (std::size_t j = i + 1; j < units; ++j) rp.set_weight(i, j, 2.0 * qbm::uniform01(rng) - 1.0);
  }
  return rp;
}

int cmd_sample(const Common& common, Overrides& ov, std::size_t units, const std::string& params_path,
               std::size_t index, const std::string& split, const std::string& phase) {
  const RunConfig cfg = resolve_config(common, ov);
  qbm::ReducedProblem rp;
  if (params_path.empty()) {
    rp = random_problem(units, cfg.seeds.init, cfg.sampler.temperature);
  } else {
    if (cfg.data.path.empty()) throw qbm::Error("--params needs --data to pick a data point");
    const qbm::BMParameters params = qbm::load_params(params_path);
    const auto points = encode_split(qbm::load_dataset(cfg.data.path), split, 0);
    if (index >= points.size()) throw qbm::Error("index out of range for split " + split);
    const qbm::Phase ph = phase == "positive" ? qbm::Phase::kPositive : qbm::Phase::kNegative;
    if (phase != "positive" && phase != "negative") throw qbm::Error("phase must be positive or negative");
    rp = qbm::phase_problem(params, points[index], ph, cfg.sampler.temperature);
  }
  if (cfg.uses_device()) throw qbm::Error("sample supports exact, gibbs and sa");
  qbm::SamplerConfig sc = cfg.sampler_config();
  const qbm::SampleSet samples = qbm::sample(rp, sc).aggregated();
  const fs::path dir = output_dir(common);
  std::ofstream out(dir / "samples.txt");
  samples.write_text(out);
  std::cout << "sample: " << qbm::to_string(sc.kind) << " units=" << rp.size() << " reads=" << samples.total()
            << " distinct=" << samples.rows();
  if (rp.size() <= 20) {
    const auto table = qbm::exact_distribution(rp);
    std::cout << " tv_to_exact=" << fmt(qbm::total_variation(samples, table));
  }
  std::cout << " -> " << (dir / "samples.txt").string() << '\n';
  return 0;
}

// Random search (QBM) or architecture grid x random search (CNN), selected
// by the composite validation score.
int cmd_sweep(const Common& common, Overrides& ov, const std::string& model, std::size_t trials,
              std::uint64_t sweep_seed) {
  const RunConfig base = resolve_config(common, ov);
  const LoadedData data = load_data(base);
  if (data.train.empty()) throw qbm::Error("training split is empty");
  const auto val = std::find_if(data.eval.begin(), data.eval.end(), [](const auto& e) { return e.first == "val"; });
  if (val == data.eval.end()) throw qbm::Error("sweep needs the val split among the evaluation splits");
  const std::vector<qbm::EvalSplit> views{{"val", val->second}};
  qbm::Rng rng(sweep_seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * qbm::uniform01(rng); };
  auto log_uniform = [&](double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); };
  auto pick = [&](std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng() % (hi - lo + 1)); };

  std::vector<RunConfig> candidates;
  if (model == "qbm") {
    for (std::size_t t = 0; t < trials; ++t) {
      RunConfig c = base;
      c.model.hidden = pick(1, 20);
      c.train.epochs = pick(1, 20);
      c.train.batch_size = pick(1, 100);
      c.train.learning_rate = log_uniform(1e-5, 0.6);
      c.sampler.reads = pick(10, 1000);
      candidates.push_back(c);
    }
  } else if (model == "cnn") {
    for (std::size_t kernel : {3, 5}) {
      for (std::size_t n1 : {4, 8, 16, 24}) {
        for (std::size_t n2 : {2, 4, 8, 16}) {
          if (n2 > n1) continue;
          for (std::size_t t = 0; t < trials; ++t) {
            RunConfig c = base;
            c.cnn.kernel = kernel;
            c.cnn.neurons1 = n1;
            c.cnn.neurons2 = n2;
            c.cnn.learning_rate = log_uniform(0.0005, 0.05);
            c.cnn.beta1 = uniform(0.98, 0.999999);
            c.cnn.beta2 = uniform(0.998, 0.9999);
            c.cnn.batch_size = std::size_t{1} << pick(2, 10);
            candidates.push_back(c);
          }
        }
      }
    }
  } else {
    throw qbm::Error("sweep model must be qbm or cnn");
  }

  const fs::path dir = output_dir(common);
  std::ofstream csv(dir / "sweep.csv");
  csv << "trial,score,acc,auc,config\n";
  double best_score = -1.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const RunConfig& c = candidates[i];
    std::vector<qbm::EpochRecord> trace;
    if (model == "qbm") {
      const auto sampler = make_sampler(c, nullptr);
      trace = qbm::train(qbm::init_params(c.layout(data.train.front().inputs.size()), c.seeds.init), data.train,
                         c.train_config(), *sampler, views)
                  .trace;
    } else {
      const auto side = static_cast<std::size_t>(std::lround(std::sqrt(data.train.front().inputs.size())));
      trace = qbm::train_cnn(qbm::init_cnn(c.cnn_architecture(side), c.seeds.init), data.train,
                             c.cnn_train_config(), views)
                  .trace;
    }
    // QBM: final epoch; CNN: best epoch during training.
    double score = -1.0;
    double acc = 0.0;
    double auc = 0.0;
    for (const auto& r : trace) {
      const double s = qbm::composite(r.acc, std::isnan(r.auc) ? 0.5 : r.auc);
      if (model == "qbm" || s > score) {
        score = s;
        acc = r.acc;
        auc = r.auc;
      }
    }
    nlohmann::json compact = nlohmann::json::parse(qbm::to_json(c));
    std::string cell = compact.dump();
    // CSV quoting: embedded quotes are doubled.
    for (std::size_t q = cell.find('"'); q != std::string::npos; q = cell.find('"', q + 2)) cell.insert(q, 1, '"');
    csv << i << ',' << score << ',' << acc << ',' << auc << ",\"" << cell << "\"\n";
    if (score > best_score) {
      best_score = score;
      best = i;
    }
    std::cerr << "trial " << i << " score=" << fmt(score) << '\n';
  }
  write_text(dir / "best_config.json", qbm::to_json(candidates[best]));
  std::cout << "sweep: " << model << " trials=" << candidates.size() << " best=" << best
            << " score=" << fmt(best_score) << " -> " << (dir / "best_config.json").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boltzmann machine classifiers trained with simulated parallel annealing"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--out", common.out, std::string("output directory (default: $") + kOutputEnv + " or qbm_out)");
  app.add_option("--threads", common.threads, "worker thread cap (0: all cores)");

  // partition
  Overrides p_ov;
  bool p_no_buffer = false;
  auto* partition = app.add_subcommand("partition", "generate a Pegasus graph and split it into buffered regions");
  partition->add_option("--config", common.config_path, "JSON run configuration");
  p_ov.add(partition, "--m", [](RunConfig& c) -> auto& { return c.device.m; }, "Pegasus size");
  p_ov.add(partition, "--k", [](RunConfig& c) -> auto& { return c.device.regions; }, "number of regions");
  p_ov.add(partition, "--seed", [](RunConfig& c) -> auto& { return c.seeds.partition; }, "partition seed");
  partition->add_flag("--no-buffer", p_no_buffer, "write the plan before buffering");

  // embed
  Overrides e_ov;
  std::string e_plan;
  std::size_t e_k = qbm::kMaxCliqueSize;
  auto* embed = app.add_subcommand("embed", "embed a clique into every region of a plan");
  embed->add_option("--config", common.config_path, "JSON run configuration");
  embed->add_option("--plan", e_plan, "plan JSON from the partition command")->required();
  embed->add_option("--k", e_k, "clique size")->capture_default_str();
  e_ov.add(embed, "--m", [](RunConfig& c) -> auto& { return c.device.m; }, "Pegasus size the plan was built for");
  e_ov.add(embed, "--seed", [](RunConfig& c) -> auto& { return c.seeds.embed; }, "embedding seed");
  e_ov.add(embed, "--attempts", [](RunConfig& c) -> auto& { return c.device.embed_attempts; },
           "attempts per region");

  // train-qbm
  Overrides tq_ov;
  auto* train_qbm = app.add_subcommand("train-qbm", "train a Boltzmann machine classifier");
  train_qbm->add_option("--config", common.config_path, "JSON run configuration");
  add_qbm_flags(train_qbm, tq_ov);
  add_sampler_flags(train_qbm, tq_ov);
  add_device_flags(train_qbm, tq_ov);
  add_data_flags(train_qbm, tq_ov);

  // train-cnn
  Overrides tc_ov;
  auto* train_cnn = app.add_subcommand("train-cnn", "train the CNN baseline");
  train_cnn->add_option("--config", common.config_path, "JSON run configuration");
  add_cnn_flags(train_cnn, tc_ov);
  add_data_flags(train_cnn, tc_ov);

  // eval
  Overrides ev_ov;
  std::string ev_model;
  std::string ev_split = "test";
  auto* eval = app.add_subcommand("eval", "score a model (or a random QBM) on one split");
  eval->add_option("--config", common.config_path, "JSON run configuration");
  eval->add_option("--model", ev_model, "PBM1 parameters or QCNN1 checkpoint; omit for a random QBM");
  eval->add_option("--split", ev_split, "split to evaluate")->capture_default_str();
  add_qbm_flags(eval, ev_ov);
  add_sampler_flags(eval, ev_ov);
  add_device_flags(eval, ev_ov);
  add_data_flags(eval, ev_ov);

  // timing-report
  Overrides t_ov;
  std::string t_mode = "both";
  qbm::Workload t_work;
  auto* timing = app.add_subcommand("timing-report", "sequential vs parallel anneal-cycle accounting");
  timing->add_option("--config", common.config_path, "JSON run configuration");
  timing->add_option("--mode", t_mode, "sequential, parallel or both")->capture_default_str();
  timing->add_option("--batches", t_work.batches, "batches")->capture_default_str();
  timing->add_option("--points", t_work.points_per_batch, "data points per batch")->capture_default_str();
  timing->add_option("--reads", t_work.reads, "reads per instance")->capture_default_str();
  timing->add_option("--phases", t_work.phases, "phases per data point")->capture_default_str();
  t_ov.add(timing, "--regions", [](RunConfig& c) -> auto& { return c.device.regions; }, "parallel regions");
  t_ov.add(timing, "--programming-us", [](RunConfig& c) -> auto& { return c.device.timing.programming_us; },
           "programming time per cycle");
  t_ov.add(timing, "--per-read-us", [](RunConfig& c) -> auto& { return c.device.timing.per_read_us; },
           "time per read");
  t_ov.add(timing, "--overhead-us", [](RunConfig& c) -> auto& { return c.device.timing.per_cycle_overhead_us; },
           "extra time per cycle");

  // sample
  Overrides s_ov;
  std::size_t s_units = 6;
  std::string s_params;
  std::size_t s_index = 0;
  std::string s_split = "train";
  std::string s_phase = "negative";
  auto* sample = app.add_subcommand("sample", "draw samples from a random or data-derived reduced problem");
  sample->add_option("--config", common.config_path, "JSON run configuration");
  sample->add_option("--units", s_units, "units of the random problem")->capture_default_str();
  sample->add_option("--params", s_params, "PBM1 parameters; samples a phase problem of one data point");
  sample->add_option("--index", s_index, "data point index")->capture_default_str();
  sample->add_option("--split", s_split, "data split")->capture_default_str();
  sample->add_option("--phase", s_phase, "positive or negative")->capture_default_str();
  add_sampler_flags(sample, s_ov);
  add_data_flags(sample, s_ov);
  s_ov.add(sample, "--problem-seed", [](RunConfig& c) -> auto& { return c.seeds.init; }, "random problem seed");
  s_ov.add(sample, "--seed", [](RunConfig& c) -> auto& { return c.seeds.train; }, "sampler seed");

  // sweep
  Overrides w_ov;
  std::string w_model = "qbm";
  std::size_t w_trials = 10;
  std::uint64_t w_seed = 0;
  auto* sweep = app.add_subcommand("sweep", "hyperparameter search selected by the validation composite score");
  sweep->add_option("--config", common.config_path, "JSON run configuration");
  sweep->add_option("--model", w_model, "qbm or cnn")->capture_default_str();
  sweep->add_option("--trials", w_trials, "random trials (per architecture for cnn)")->capture_default_str();
  sweep->add_option("--sweep-seed", w_seed, "search seed")->capture_default_str();
  add_sampler_flags(sweep, w_ov);
  add_device_flags(sweep, w_ov);
  add_data_flags(sweep, w_ov);
  w_ov.add(sweep, "--init-seed", [](RunConfig& c) -> auto& { return c.seeds.init; }, "initialization seed");
  w_ov.add(sweep, "--seed", [](RunConfig& c) -> auto& { return c.seeds.train; }, "training seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    qbm::set_max_threads(common.threads);
    if (*partition) return cmd_partition(resolve_config(common, p_ov), common, !p_no_buffer);
    if (*embed) return cmd_embed(resolve_config(common, e_ov), common, e_plan, e_k);
    if (*train_qbm) return cmd_train_qbm(common, tq_ov);
    if (*train_cnn) return cmd_train_cnn(common, tc_ov);
    if (*eval) return cmd_eval(common, ev_ov, ev_model, ev_split);
    if (*timing) return cmd_timing(resolve_config(common, t_ov), common, t_mode, t_work);
    if (*sample) return cmd_sample(common, s_ov, s_units, s_params, s_index, s_split, s_phase);
    if (*sweep) return cmd_sweep(common, w_ov, w_model, w_trials, w_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
