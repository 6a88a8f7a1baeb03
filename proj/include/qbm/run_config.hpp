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

#ifndef QBM_RUN_CONFIG_HPP
#define QBM_RUN_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qbm/cnn.hpp"
#include "qbm/device.hpp"
#include "qbm/model.hpp"
#include "qbm/samplers.hpp"
#include "qbm/trainer.hpp"

namespace qbm {

struct ModelSection {
  std::size_t hidden = 10;
  std::size_t labels = 1;
};

struct SamplerSection {
  std::string kind = "sa";  // exact, gibbs, sa or device
  double temperature = 1.0;
  std::size_t reads = 100;
  std::size_t sweeps = 200;
  // Geometric inverse-temperature schedule; beta_last = 0 means 10 / T.
  double beta_first = 0.1;
  double beta_last = 0.0;
  std::size_t steps = 1000;
};

struct TrainSection {
  double learning_rate = 0.1;
  std::size_t batch_size = 1;
  std::size_t epochs = 1;
  bool record_nll = false;
};

struct DeviceSection {
  int m = 16;
  std::size_t regions = 10;
  double chain_strength = 0.0;
  double chain_strength_factor = 1.5;
  std::size_t reads_per_cycle = 100;
  int embed_attempts = 64;
  TimingConstants timing;
};

struct DataSection {
  std::string path;
  std::string train_split = "train";
  std::vector<std::string> eval_splits = {"val", "test"};
  std::size_t limit = 0;  // per split; 0 keeps everything
};

struct SeedSection {
  std::uint64_t init = 0;
  std::uint64_t train = 0;
  std::uint64_t partition = 0;
  std::uint64_t embed = 0;
};

struct CnnSection {
  std::size_t kernel = 5;
  std::size_t neurons1 = 16;
  std::size_t neurons2 = 8;
  double learning_rate = 0.00384;
  double beta1 = 0.98428;
  double beta2 = 0.99925;
  double epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::size_t epochs = 50;
};

/// JSON run configuration with sections model, sampler, train, device,
/// data, seeds and cnn. Missing keys keep their defaults; unknown sections
/// or keys are rejected.
struct RunConfig {
  ModelSection model;
  SamplerSection sampler;
  TrainSection train;
  DeviceSection device;
  DataSection data;
  SeedSection seeds;
  CnnSection cnn;

  // Range and enum checks across all sections.
  void validate() const;

  UnitLayout layout(std::size_t inputs) const { return {inputs, model.hidden, model.labels}; }
  bool uses_device() const { return sampler.kind == "device"; }
  // Classical sampler settings; kind "device" maps to annealing.
  SamplerConfig sampler_config() const;
  TrainConfig train_config() const;
  DeviceConfig device_config() const;
  CnnArchitecture cnn_architecture(std::size_t image_side) const;
  CnnTrainConfig cnn_train_config() const;
};

std::string to_json(const RunConfig& config);
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace qbm

#endif  // QBM_RUN_CONFIG_HPP
