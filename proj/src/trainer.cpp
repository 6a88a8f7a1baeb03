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

#include "qbm/trainer.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "qbm/dataset.hpp"
#include "qbm/error.hpp"
#include "qbm/parallel.hpp"
#include "qbm/random.hpp"

namespace qbm {
namespace {

constexpr std::uint64_t kEvalStream = 0x6576616cULL;

// Positive-phase moments live on hidden units only; lift them to all
// non-input units with the clamped label values.
Moments lift_positive(const UnitLayout& layout, std::span<const std::uint8_t> label, const Moments& hidden) {
  const std::size_t nl = layout.labels;
  const std::size_t nf = layout.free_units();
  Moments out{std::vector<double>(nf, 0.0), std::vector<double>(nf * nf, 0.0)};
  auto value = [&](std::size_t f) { return f < nl ? static_cast<double>(label[f]) : hidden.first[f - nl]; };
  for (std::size_t f = 0; f < nf; ++f) out.first[f] = value(f);
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t g = 0; g < nf; ++g) {
      double v;
      if (f >= nl && g >= nl) {
        v = hidden.pair(f - nl, g - nl);
      } else if (f == g) {
        v = value(f);
      } else {
        v = value(f) * value(g);
      }
      out.second[f * nf + g] = v;
    }
  }
  return out;
}

void check_point(const UnitLayout& layout, const EncodedDataPoint& p) {
  if (p.inputs.size() != layout.inputs) throw DimensionError("data point input length does not match layout");
  if (p.label.size() != layout.labels) throw DimensionError("data point label length does not match layout");
}

}  // namespace

ClassicalSampler::ClassicalSampler(SamplerConfig config) : config_(std::move(config)) { config_.validate(); }

std::vector<Moments> ClassicalSampler::sample_moments(std::span<const ReducedProblem> problems,
                                                      std::uint64_t seed) const {
  std::vector<Moments> out(problems.size());
  parallel_for(problems.size(), [&](std::size_t i) {
    if (config_.kind == SamplerKind::kExact) {
      out[i] = exact_moments(problems[i]);
      return;
    }
    SamplerConfig c = config_;
    c.seed = derive_seed(seed, i);
    out[i] = moments(sample(problems[i], c));
  });
  return out;
}

std::string ClassicalSampler::describe() const {
  std::ostringstream s;
  s << to_string(config_.kind) << "(T=" << config_.temperature;
  if (config_.kind != SamplerKind::kExact) s << ", reads=" << config_.reads;
  if (config_.kind == SamplerKind::kGibbs) s << ", sweeps=" << config_.sweeps;
  if (config_.kind == SamplerKind::kAnnealing) s << ", schedule=" << config_.effective_schedule().size();
  s << ")";
  return s.str();
}

ReducedProblem phase_problem(const BMParameters& params, const EncodedDataPoint& point, Phase phase,
                             double temperature) {
  check_point(params.layout(), point);
  return phase == Phase::kPositive ? clamp_inputs_and_label(params, point.inputs, point.label, temperature)
                                   : clamp_inputs(params, point.inputs, temperature);
}

Moments phase_moments(const BMParameters& params, const EncodedDataPoint& point, Phase phase,
                      const PhaseSampler& sampler, std::uint64_t seed) {
  const ReducedProblem rp = phase_problem(params, point, phase, sampler.temperature());
  Moments m = std::move(sampler.sample_moments(std::span(&rp, 1), seed).front());
  if (phase == Phase::kPositive) return lift_positive(params.layout(), point.label, m);
  return m;
}

Gradient compute_gradient(const BMParameters& params, std::span<const EncodedDataPoint> batch,
                          const PhaseSampler& sampler, std::uint64_t seed) {
  if (batch.empty()) throw Error("gradient of an empty batch");
  const UnitLayout& layout = params.layout();
  const double t = sampler.temperature();

  // Problems are ordered (positive, negative) per point.
  std::vector<ReducedProblem> problems;
  problems.reserve(2 * batch.size());
  for (const auto& p : batch) {
    problems.push_back(phase_problem(params, p, Phase::kPositive, t));
    problems.push_back(phase_problem(params, p, Phase::kNegative, t));
  }
  const std::vector<Moments> mo = sampler.sample_moments(problems, seed);

  const std::size_t nd = layout.inputs;
  const std::size_t nf = layout.free_units();
  Gradient g{layout, std::vector<double>(params.size(), 0.0)};
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Moments pos = lift_positive(layout, batch[b].label, mo[2 * b]);
    const Moments& neg = mo[2 * b + 1];
    const auto& v = batch[b].inputs;
    for (std::size_t f = 0; f < nf; ++f) {
      const double d = neg.first[f] - pos.first[f];
      g.values[params.bias_index(f)] += d;
      if (d != 0.0) {
        for (std::size_t k = 0; k < nd; ++k) g.values[params.input_weight_index(k, f)] += d * v[k];
      }
      for (std::size_t h = f + 1; h < nf; ++h) {
        g.values[params.coupling_index(f, h)] += pos.pair(f, h) - neg.pair(f, h);
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& x : g.values) x *= inv;
  return g;
}

BMParameters apply_update(const BMParameters& params, const Gradient& g, double learning_rate) {
  if (g.layout != params.layout() || g.values.size() != params.size()) {
    throw DimensionError("gradient shape does not match parameters");
  }
  BMParameters out = params;
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += learning_rate * g.values[i];
  return out;
}

double nll(const BMParameters& params, std::span<const EncodedDataPoint> points, double temperature) {
  const UnitLayout& layout = params.layout();
  if (layout.free_units() > kMaxExactUnits) throw Error("layout too large for exact NLL");
  double total = 0.0;
  for (const auto& p : points) {
    total += log_partition(phase_problem(params, p, Phase::kNegative, temperature)) -
             log_partition(phase_problem(params, p, Phase::kPositive, temperature));
  }
  return total;
}

std::vector<ScoredPrediction> predict_all(const BMParameters& params, std::span<const EncodedDataPoint> points,
                                          const PhaseSampler& sampler, std::uint64_t seed) {
  if (params.layout().labels != 1) throw Error("prediction requires exactly one label unit");
  std::vector<ReducedProblem> problems;
  problems.reserve(points.size());
  for (const auto& p : points) {
    if (p.inputs.size() != params.layout().inputs) throw DimensionError("input length does not match layout");
    problems.push_back(clamp_inputs(params, p.inputs, sampler.temperature()));
  }
  const std::vector<Moments> mo = sampler.sample_moments(problems, seed);
  std::vector<ScoredPrediction> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i].score = mo[i].first[0];
    out[i].predicted = threshold_label(out[i].score);
    out[i].truth = points[i].label.empty() ? 0 : points[i].label[0];
  }
  return out;
}

Prediction predict(const BMParameters& params, std::span<const double> inputs, const PhaseSampler& sampler,
                   std::uint64_t seed) {
  EncodedDataPoint p{std::vector<double>(inputs.begin(), inputs.end()), {0}};
  const auto scored = predict_all(params, std::span(&p, 1), sampler, seed);
  return {scored[0].predicted, scored[0].score};
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw Error("learning rate must be non-negative");
  if (batch_size < 1) throw Error("batch size must be positive");
}

SplitMetrics evaluate(const BMParameters& params, std::span<const EncodedDataPoint> points,
                      const PhaseSampler& sampler, std::uint64_t seed) {
  const auto preds = predict_all(params, points, sampler, seed);
  SplitMetrics m;
  m.acc = accuracy(preds);
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& p : preds) (p.truth ? has_pos : has_neg) = true;
  m.auc = (has_pos && has_neg) ? auc(preds) : std::numeric_limits<double>::quiet_NaN();
  return m;
}

TrainResult train(const BMParameters& initial, std::span<const EncodedDataPoint> data, const TrainConfig& config,
                  const PhaseSampler& sampler, std::span<const EvalSplit> eval_splits,
                  const std::function<void(const EpochRecord&)>& on_record) {
  config.validate();
  TrainResult result{initial, {}};
  if (config.epochs == 0 || data.empty()) return result;
  const bool nll_ok = config.record_nll && initial.layout().free_units() <= kMaxExactUnits;

  std::vector<EncodedDataPoint> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(config.seed, epoch);
    const auto order = batch_indices(data.size(), config.batch_size, epoch_seed);
    for (std::size_t b = 0; b < order.size(); ++b) {
      batch.clear();
      for (std::size_t idx : order[b]) batch.push_back(data[idx]);
      const Gradient g = compute_gradient(result.params, batch, sampler, derive_seed(epoch_seed, b + 1));
      result.params = apply_update(result.params, g, config.learning_rate);
    }
    if (!config.eval_each_epoch) continue;
    for (std::size_t s = 0; s < eval_splits.size(); ++s) {
      const EvalSplit& split = eval_splits[s];
      if (split.points.empty()) continue;
      EpochRecord rec;
      rec.epoch = epoch + 1;
      rec.split = split.name;
      const SplitMetrics m =
          evaluate(result.params, split.points, sampler, derive_seed(derive_seed(config.seed, kEvalStream + s), epoch));
      rec.acc = m.acc;
      rec.auc = m.auc;
      rec.nll = nll_ok ? nll(result.params, split.points, sampler.temperature())
                       : std::numeric_limits<double>::quiet_NaN();
      result.trace.push_back(rec);
      if (on_record) on_record(rec);
    }
  }
  return result;
}

void write_trace_csv(std::ostream& out, std::span<const EpochRecord> trace) {
  out << "epoch,split,acc,auc,nll\n";
  auto num = [&](double v) {
    if (std::isnan(v)) {
      out << "";
    } else {
      out << std::setprecision(10) << v;
    }
  };
  for (const auto& r : trace) {
    out << r.epoch << ',' << r.split << ',';
    num(r.acc);
    out << ',';
    num(r.auc);
    out << ',';
    num(r.nll);
    out << '\n';
  }
}

}  // namespace qbm
