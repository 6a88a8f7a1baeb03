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

#ifndef QBM_TRAINER_HPP
#define QBM_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qbm/metrics.hpp"
#include "qbm/model.hpp"
#include "qbm/samplers.hpp"

namespace qbm {

// Source of Boltzmann averages for a batch of reduced problems. Results must
// be a deterministic function of (problems, seed).
class PhaseSampler {
 public:
  virtual ~PhaseSampler() = default;
  virtual std::vector<Moments> sample_moments(std::span<const ReducedProblem> problems,
                                              std::uint64_t seed) const = 0;
  virtual double temperature() const = 0;
  virtual std::string describe() const = 0;
};

// exact: analytic averages over the enumerated distribution.
// gibbs / sa: averages over config.reads samples.
class ClassicalSampler final : public PhaseSampler {
 public:
  explicit ClassicalSampler(SamplerConfig config);

  std::vector<Moments> sample_moments(std::span<const ReducedProblem> problems,
                                      std::uint64_t seed) const override;
  double temperature() const override { return config_.temperature; }
  std::string describe() const override;
  const SamplerConfig& config() const { return config_; }

 private:
  SamplerConfig config_;
};

enum class Phase { kPositive, kNegative };

// Problem sampled in a phase: positive clamps inputs and label, negative
// clamps inputs only.
ReducedProblem phase_problem(const BMParameters& params, const EncodedDataPoint& point, Phase phase,
                             double temperature);

// Averages over all non-input units (free-index coordinates). In the
// positive phase the clamped labels contribute their fixed values.
Moments phase_moments(const BMParameters& params, const EncodedDataPoint& point, Phase phase,
                      const PhaseSampler& sampler, std::uint64_t seed);

struct Gradient {
  UnitLayout layout;
  std::vector<double> values;  // same indexing as BMParameters::values()
};

/// Batch-averaged likelihood-ascent direction, learning rate not applied.
///
/// Biases and input weights enter the energy with a plus sign, so their
/// component is <s_f>_neg - <s_f>_pos (times v_k for input weights);
/// couplings among non-input units get <s_f s_g>_pos - <s_f s_g>_neg. At
/// T = 1 this equals minus the gradient of the mean label NLL.
Gradient compute_gradient(const BMParameters& params, std::span<const EncodedDataPoint> batch,
                          const PhaseSampler& sampler, std::uint64_t seed);

// params + learning_rate * g
BMParameters apply_update(const BMParameters& params, const Gradient& g, double learning_rate);

// Sum over points of -log P(label | inputs), by enumeration.
double nll(const BMParameters& params, std::span<const EncodedDataPoint> points, double temperature);

struct Prediction {
  std::uint8_t label = 0;
  double score = 0.0;
};

// Score: frequency of label unit = 1 in the negative phase (exact: its
// marginal probability). Requires a single label unit.
Prediction predict(const BMParameters& params, std::span<const double> inputs, const PhaseSampler& sampler,
                   std::uint64_t seed);
std::vector<ScoredPrediction> predict_all(const BMParameters& params, std::span<const EncodedDataPoint> points,
                                          const PhaseSampler& sampler, std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 1;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  bool eval_each_epoch = true;
  // Adds the exact label NLL to each trace row when enumerable.
  bool record_nll = false;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::string split;
  double acc = 0.0;
  double auc = 0.0;  // NaN when the split has a single class
  double nll = 0.0;  // NaN when not recorded
};

struct EvalSplit {
  std::string name;
  std::span<const EncodedDataPoint> points;
};

struct TrainResult {
  BMParameters params;
  std::vector<EpochRecord> trace;
};

struct SplitMetrics {
  double acc = 0.0;
  double auc = 0.0;
};

// ACC and AUC (NaN when single-class) of predict_all on the points.
SplitMetrics evaluate(const BMParameters& params, std::span<const EncodedDataPoint> points,
                      const PhaseSampler& sampler, std::uint64_t seed);

TrainResult train(const BMParameters& initial, std::span<const EncodedDataPoint> data, const TrainConfig& config,
                  const PhaseSampler& sampler, std::span<const EvalSplit> eval_splits = {},
                  const std::function<void(const EpochRecord&)>& on_record = {});

// "epoch,split,acc,auc,nll" with one row per record.
void write_trace_csv(std::ostream& out, std::span<const EpochRecord> trace);

}  // namespace qbm

#endif  // QBM_TRAINER_HPP
