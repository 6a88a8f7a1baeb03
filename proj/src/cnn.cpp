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

#include "qbm/cnn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "qbm/dataset.hpp"
#include "qbm/error.hpp"
#include "qbm/parallel.hpp"
#include "qbm/random.hpp"

namespace qbm {
namespace {

constexpr std::array<char, 5> kCnnMagic = {'Q', 'C', 'N', 'N', '1'};

bool one_of(std::size_t v, std::initializer_list<std::size_t> allowed) {
  return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
}

// Intermediate activations of one forward pass.
struct Activations {
  std::vector<double> conv;  // pre-ReLU feature map
  std::vector<double> z1;    // pre-ReLU dense1
  std::vector<double> z2;    // dense2 (linear)
  double z3 = 0.0;
  double p = 0.0;
};

Activations run_forward(const CnnModel& model, std::span<const double> image) {
  const CnnArchitecture& a = model.arch();
  if (image.size() != a.image_side * a.image_side) {
    throw DimensionError("image has " + std::to_string(image.size()) + " values, expected " +
                         std::to_string(a.image_side * a.image_side));
  }
  const auto v = model.values();
  const std::size_t side = a.image_side;
  const std::size_t k = a.kernel;
  const std::size_t fs = a.feature_side();
  const std::size_t nf = fs * fs;
  Activations act;
  act.conv.assign(nf, v[model.conv_b()]);
  for (std::size_t i = 0; i < fs; ++i) {
    for (std::size_t j = 0; j < fs; ++j) {
      double s = act.conv[i * fs + j];
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) s += v[model.conv_w() + r * k + c] * image[(i + r) * side + j + c];
      }
      act.conv[i * fs + j] = s;
    }
  }
  act.z1.assign(a.neurons1, 0.0);
  for (std::size_t n = 0; n < a.neurons1; ++n) {
    const double* w = v.data() + model.w1() + n * nf;
    double s = v[model.b1() + n];
    for (std::size_t f = 0; f < nf; ++f) s += w[f] * relu(act.conv[f]);
    act.z1[n] = s;
  }
  act.z2.assign(a.neurons2, 0.0);
  for (std::size_t n = 0; n < a.neurons2; ++n) {
    double s = v[model.b2() + n];
    for (std::size_t m = 0; m < a.neurons1; ++m) s += v[model.w2() + n * a.neurons1 + m] * relu(act.z1[m]);
    act.z2[n] = s;
  }
  act.z3 = v[model.b3()];
  for (std::size_t n = 0; n < a.neurons2; ++n) act.z3 += v[model.w3() + n] * act.z2[n];
  act.p = sigmoid(act.z3);
  return act;
}

double clamp_probability(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

}  // namespace

void CnnArchitecture::validate() const {
  if (!one_of(kernel, {3, 5})) throw Error("kernel size must be 3 or 5");
  if (!one_of(neurons1, {4, 8, 16, 24})) throw Error("first dense layer must have 4, 8, 16 or 24 neurons");
  if (!one_of(neurons2, {2, 4, 8, 16})) throw Error("second dense layer must have 2, 4, 8 or 16 neurons");
  if (neurons2 > neurons1) throw Error("second dense layer cannot be wider than the first");
  if (image_side < kernel) throw Error("image is smaller than the kernel");
}

std::size_t CnnArchitecture::parameter_count() const {
  const std::size_t nf = feature_side() * feature_side();
  return kernel * kernel + 1 + neurons1 * nf + neurons1 + neurons2 * neurons1 + neurons2 + neurons2 + 1;
}

CnnModel::CnnModel(const CnnArchitecture& arch) : arch_(arch) {
  arch_.validate();
  values_.assign(arch_.parameter_count(), 0.0);
}

std::size_t CnnModel::b1() const { return w1() + arch_.neurons1 * arch_.feature_side() * arch_.feature_side(); }

CnnModel init_cnn(const CnnArchitecture& arch, std::uint64_t seed) {
  CnnModel model(arch);
  Rng rng(seed);
  auto fill = [&](std::size_t first, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    auto vals = model.values();
    for (std::size_t i = first; i < first + count; ++i) vals[i] = bound * (2.0 * uniform01(rng) - 1.0);
  };
  const std::size_t nf = arch.feature_side() * arch.feature_side();
  fill(model.conv_w(), arch.kernel * arch.kernel + 1, arch.kernel * arch.kernel);
  fill(model.w1(), arch.neurons1 * nf + arch.neurons1, nf);
  fill(model.w2(), arch.neurons2 * arch.neurons1 + arch.neurons2, arch.neurons1);
  fill(model.w3(), arch.neurons2 + 1, arch.neurons2);
  return model;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double forward(const CnnModel& model, std::span<const double> image) { return run_forward(model, image).p; }

double bce(double p, std::uint8_t y) {
  const double q = clamp_probability(p);
  return y ? -std::log(q) : -std::log1p(-q);
}

double bce_grad(double p, std::uint8_t y) {
  if (p < kProbabilityClamp || p > 1.0 - kProbabilityClamp) return 0.0;
  return y ? -1.0 / p : 1.0 / (1.0 - p);
}

LossAndGradient backward(const CnnModel& model, std::span<const double> image, std::uint8_t y) {
  const Activations act = run_forward(model, image);
  const CnnArchitecture& a = model.arch();
  const auto v = model.values();
  const std::size_t side = a.image_side;
  const std::size_t k = a.kernel;
  const std::size_t fs = a.feature_side();
  const std::size_t nf = fs * fs;

  LossAndGradient out;
  out.loss = bce(act.p, y);
  out.gradient.assign(v.size(), 0.0);
  auto& g = out.gradient;

  // sigmoid + BCE: dL/dz3 = p - y inside the clamp, 0 outside.
  const bool clamped = act.p < kProbabilityClamp || act.p > 1.0 - kProbabilityClamp;
  const double dz3 = clamped ? 0.0 : act.p - static_cast<double>(y);
  g[model.b3()] = dz3;
  std::vector<double> dz2(a.neurons2);
  for (std::size_t n = 0; n < a.neurons2; ++n) {
    g[model.w3() + n] = dz3 * act.z2[n];
    dz2[n] = dz3 * v[model.w3() + n];
  }
  std::vector<double> dz1(a.neurons1, 0.0);
  for (std::size_t n = 0; n < a.neurons2; ++n) {
    g[model.b2() + n] = dz2[n];
    for (std::size_t m = 0; m < a.neurons1; ++m) {
      g[model.w2() + n * a.neurons1 + m] = dz2[n] * relu(act.z1[m]);
      dz1[m] += dz2[n] * v[model.w2() + n * a.neurons1 + m];
    }
  }
  std::vector<double> dconv(nf, 0.0);
  for (std::size_t m = 0; m < a.neurons1; ++m) {
    if (act.z1[m] <= 0.0) continue;
    const double d = dz1[m];
    g[model.b1() + m] = d;
    double* gw = g.data() + model.w1() + m * nf;
    const double* w = v.data() + model.w1() + m * nf;
    for (std::size_t f = 0; f < nf; ++f) {
      gw[f] = d * relu(act.conv[f]);
      dconv[f] += d * w[f];
    }
  }
  for (std::size_t i = 0; i < fs; ++i) {
    for (std::size_t j = 0; j < fs; ++j) {
      if (act.conv[i * fs + j] <= 0.0) continue;
      const double d = dconv[i * fs + j];
      g[model.conv_b()] += d;
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) g[model.conv_w() + r * k + c] += d * image[(i + r) * side + j + c];
      }
    }
  }
  return out;
}

AdamState::AdamState(std::size_t size, double learning_rate_, double beta1_, double beta2_, double epsilon_)
    : learning_rate(learning_rate_),
      beta1(beta1_),
      beta2(beta2_),
      epsilon(epsilon_),
      m(size, 0.0),
      v(size, 0.0) {}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> gradient) {
  if (params.size() != gradient.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("Adam state, parameters and gradient differ in size");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double gi = gradient[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * gi;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * gi * gi;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

void CnnTrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw Error("Adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw Error("Adam epsilon must be positive");
  if (batch_size == 0) throw Error("batch size must be positive");
}

std::vector<ScoredPrediction> cnn_predict_all(const CnnModel& model, std::span<const EncodedDataPoint> points) {
  std::vector<ScoredPrediction> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const double p = forward(model, points[i].inputs);
    out[i] = {p, threshold_label(p), points[i].label.at(0)};
  });
  return out;
}

double cnn_loss(const CnnModel& model, std::span<const EncodedDataPoint> points) {
  if (points.empty()) throw Error("loss of an empty set");
  double total = 0.0;
  for (const auto& pt : points) total += bce(forward(model, pt.inputs), pt.label.at(0));
  return total / static_cast<double>(points.size());
}

LossAndGradient batch_gradient(const CnnModel& model, std::span<const EncodedDataPoint> batch) {
  if (batch.empty()) throw Error("gradient of an empty batch");
  std::vector<LossAndGradient> parts(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) { parts[i] = backward(model, batch[i].inputs, batch[i].label.at(0)); });
  LossAndGradient out;
  out.gradient.assign(model.values().size(), 0.0);
  for (const auto& part : parts) {
    out.loss += part.loss;
    for (std::size_t j = 0; j < out.gradient.size(); ++j) out.gradient[j] += part.gradient[j];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (double& gj : out.gradient) gj *= inv;
  return out;
}

CnnTrainResult train_cnn(const CnnModel& initial, std::span<const EncodedDataPoint> data,
                         const CnnTrainConfig& config, std::span<const EvalSplit> eval_splits,
                         const std::function<void(const EpochRecord&)>& on_record) {
  config.validate();
  CnnTrainResult result{initial, {}};
  if (config.epochs == 0 || data.empty()) return result;
  AdamState adam(initial.values().size(), config.learning_rate, config.beta1, config.beta2, config.epsilon);
  std::vector<EncodedDataPoint> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& idx : batch_indices(data.size(), config.batch_size, derive_seed(config.seed, epoch))) {
      batch.clear();
      for (std::size_t i : idx) batch.push_back(data[i]);
      const LossAndGradient lg = batch_gradient(result.model, batch);
      adam_step(adam, result.model.values(), lg.gradient);
    }
    for (const auto& split : eval_splits) {
      if (split.points.empty()) continue;
      const auto preds = cnn_predict_all(result.model, split.points);
      EpochRecord rec;
      rec.epoch = epoch + 1;
      rec.split = split.name;
      rec.acc = accuracy(preds);
      const bool both = std::any_of(preds.begin(), preds.end(), [](const auto& p) { return p.truth == 1; }) &&
                        std::any_of(preds.begin(), preds.end(), [](const auto& p) { return p.truth == 0; });
      rec.auc = both ? auc(preds) : std::numeric_limits<double>::quiet_NaN();
      rec.nll = 0.0;
      for (const auto& p : preds) rec.nll += bce(p.score, p.truth);
      result.trace.push_back(rec);
      if (on_record) on_record(rec);
    }
  }
  return result;
}

void write_cnn(std::ostream& out, const CnnModel& model) {
  const CnnArchitecture& a = model.arch();
  out.write(kCnnMagic.data(), kCnnMagic.size());
  for (std::size_t v : {a.image_side, a.kernel, a.neurons1, a.neurons2}) {
    detail::write_u32(out, static_cast<std::uint32_t>(v));
  }
  for (double v : model.values()) detail::write_f64(out, v);
}

CnnModel read_cnn(std::istream& in) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCnnMagic) throw FormatError("not a QCNN1 checkpoint");
  CnnArchitecture a;
  a.image_side = detail::read_u32(in, "checkpoint");
  a.kernel = detail::read_u32(in, "checkpoint");
  a.neurons1 = detail::read_u32(in, "checkpoint");
  a.neurons2 = detail::read_u32(in, "checkpoint");
  CnnModel model(a);
  for (double& v : model.values()) v = detail::read_f64(in, "checkpoint");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in checkpoint");
  return model;
}

void save_cnn(const std::string& path, const CnnModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_cnn(out, model);
}

CnnModel load_cnn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_cnn(in);
}

}  // namespace qbm
