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

#ifndef QBM_CNN_HPP
#define QBM_CNN_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qbm/metrics.hpp"
#include "qbm/model.hpp"
#include "qbm/trainer.hpp"

namespace qbm {

/// conv(k x k, one channel, valid, stride 1) -> ReLU -> dense(neurons1)
/// -> ReLU -> dense(neurons2) -> dense(1) -> sigmoid.
struct CnnArchitecture {
  std::size_t image_side = 28;
  std::size_t kernel = 3;    // 3 or 5
  std::size_t neurons1 = 8;  // 4, 8, 16 or 24
  std::size_t neurons2 = 4;  // 2, 4, 8 or 16, at most neurons1

  void validate() const;
  std::size_t feature_side() const { return image_side - kernel + 1; }
  std::size_t parameter_count() const;
  friend bool operator==(const CnnArchitecture&, const CnnArchitecture&) = default;
};

/// Flat parameter vector. Blocks in order: conv weights (k*k, row-major),
/// conv bias, dense1 weights (neurons1 x features), dense1 biases, dense2
/// weights (neurons2 x neurons1), dense2 biases, output weights (neurons2),
/// output bias.
class CnnModel {
 public:
  CnnModel() = default;
  explicit CnnModel(const CnnArchitecture& arch);  // all zeros

  const CnnArchitecture& arch() const { return arch_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::size_t conv_w() const { return 0; }
  std::size_t conv_b() const { return conv_w() + arch_.kernel * arch_.kernel; }
  std::size_t w1() const { return conv_b() + 1; }
  std::size_t b1() const;
  std::size_t w2() const { return b1() + arch_.neurons1; }
  std::size_t b2() const { return w2() + arch_.neurons2 * arch_.neurons1; }
  std::size_t w3() const { return b2() + arch_.neurons2; }
  std::size_t b3() const { return w3() + arch_.neurons2; }

  friend bool operator==(const CnnModel&, const CnnModel&) = default;

 private:
  CnnArchitecture arch_;
  std::vector<double> values_;
};

// Uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, biases included.
CnnModel init_cnn(const CnnArchitecture& arch, std::uint64_t seed);

inline constexpr double kProbabilityClamp = 1e-7;

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
double sigmoid(double z);

// Output probability for an image of image_side^2 values in [0, 1].
double forward(const CnnModel& model, std::span<const double> image);

// Binary cross entropy with p clamped to [1e-7, 1 - 1e-7].
double bce(double p, std::uint8_t y);
// d bce / dp; zero where the clamp is active.
double bce_grad(double p, std::uint8_t y);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as CnnModel::values()
};
// Reverse-mode gradient of bce(forward(image), y).
LossAndGradient backward(const CnnModel& model, std::span<const double> image, std::uint8_t y);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon = 1e-8);
};

// Bias-corrected Adam update of params in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> gradient);

struct CnnTrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CnnTrainResult {
  CnnModel model;
  std::vector<EpochRecord> trace;  // nll column: summed BCE over the split
};

std::vector<ScoredPrediction> cnn_predict_all(const CnnModel& model, std::span<const EncodedDataPoint> points);
// Mean BCE over the points.
double cnn_loss(const CnnModel& model, std::span<const EncodedDataPoint> points);
// Batch-mean gradient; per-sample work may run in parallel.
LossAndGradient batch_gradient(const CnnModel& model, std::span<const EncodedDataPoint> batch);

/// Mini-batch Adam over seeded shuffles; ACC, AUC and summed BCE on each
/// evaluation split after every epoch.
CnnTrainResult train_cnn(const CnnModel& initial, std::span<const EncodedDataPoint> data,
                         const CnnTrainConfig& config, std::span<const EvalSplit> eval_splits = {},
                         const std::function<void(const EpochRecord&)>& on_record = {});

/// Checkpoint: "QCNN1", u32 LE image_side, kernel, neurons1, neurons2, then
/// parameter_count f64 LE values.
void write_cnn(std::ostream& out, const CnnModel& model);
CnnModel read_cnn(std::istream& in);
void save_cnn(const std::string& path, const CnnModel& model);
CnnModel load_cnn(const std::string& path);

}  // namespace qbm

#endif  // QBM_CNN_HPP
