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

#include "qbm/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>
#include <variant>

#include "json.hpp"
#include "qbm/dataset.hpp"
#include "qbm/error.hpp"

namespace qbm {
namespace {

using Json = nlohmann::json;
// Seeds are stored through the std::size_t alternative.
static_assert(std::is_same_v<std::size_t, std::uint64_t>);
using FieldRef = std::variant<std::size_t*, int*, double*, bool*, std::string*, std::vector<std::string>*>;
using Fields = std::vector<std::pair<const char*, FieldRef>>;

// One table per section so reading and writing share the key names.
std::vector<std::pair<const char*, Fields>> sections(RunConfig& c) {
  return {
      {"model", {{"hidden", &c.model.hidden}, {"labels", &c.model.labels}}},
      {"sampler",
       {{"kind", &c.sampler.kind},
        {"temperature", &c.sampler.temperature},
        {"reads", &c.sampler.reads},
        {"sweeps", &c.sampler.sweeps},
        {"beta_first", &c.sampler.beta_first},
        {"beta_last", &c.sampler.beta_last},
        {"steps", &c.sampler.steps}}},
      {"train",
       {{"learning_rate", &c.train.learning_rate},
        {"batch_size", &c.train.batch_size},
        {"epochs", &c.train.epochs},
        {"record_nll", &c.train.record_nll}}},
      {"device",
       {{"m", &c.device.m},
        {"regions", &c.device.regions},
        {"chain_strength", &c.device.chain_strength},
        {"chain_strength_factor", &c.device.chain_strength_factor},
        {"reads_per_cycle", &c.device.reads_per_cycle},
        {"embed_attempts", &c.device.embed_attempts},
        {"programming_us", &c.device.timing.programming_us},
        {"per_read_us", &c.device.timing.per_read_us},
        {"per_cycle_overhead_us", &c.device.timing.per_cycle_overhead_us}}},
      {"data",
       {{"path", &c.data.path},
        {"train_split", &c.data.train_split},
        {"eval_splits", &c.data.eval_splits},
        {"limit", &c.data.limit}}},
      {"seeds",
       {{"init", &c.seeds.init},
        {"train", &c.seeds.train},
        {"partition", &c.seeds.partition},
        {"embed", &c.seeds.embed}}},
      {"cnn",
       {{"kernel", &c.cnn.kernel},
        {"neurons1", &c.cnn.neurons1},
        {"neurons2", &c.cnn.neurons2},
        {"learning_rate", &c.cnn.learning_rate},
        {"beta1", &c.cnn.beta1},
        {"beta2", &c.cnn.beta2},
        {"epsilon", &c.cnn.epsilon},
        {"batch_size", &c.cnn.batch_size},
        {"epochs", &c.cnn.epochs}}},
  };
}

void read_field(const Json& value, const std::string& where, FieldRef ref) {
  auto type_error = [&](const char* expected) {
    throw Error("config key '" + where + "' must be " + expected);
  };
  std::visit(
      [&](auto* target) {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, bool>) {
          if (!value.is_boolean()) type_error("a boolean");
          *target = value.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!value.is_string()) type_error("a string");
          *target = value.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
          if (!value.is_array()) type_error("an array of strings");
          target->clear();
          for (const auto& item : value) {
            if (!item.is_string()) type_error("an array of strings");
            target->push_back(item.get<std::string>());
          }
        } else if constexpr (std::is_same_v<T, double>) {
          if (!value.is_number()) type_error("a number");
          *target = value.get<double>();
        } else if constexpr (std::is_same_v<T, int>) {
          if (!value.is_number_integer()) type_error("an integer");
          *target = value.get<int>();
        } else {
          if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
            type_error("a non-negative integer");
          }
          *target = value.get<T>();
        }
      },
      ref);
}

}  // namespace

void RunConfig::validate() const {
  if (model.hidden < 1) throw Error("model.hidden must be at least 1");
  if (model.labels != 1) throw Error("model.labels must be 1 for binary classification");
  if (sampler.kind != "device") parse_sampler_kind(sampler.kind);
  sampler_config().validate();
  train_config().validate();
  if (uses_device()) {
    if (device.m < 2) throw Error("device.m must be at least 2");
    if (device.regions < 1) throw Error("device.regions must be at least 1");
    if (device.embed_attempts < 1) throw Error("device.embed_attempts must be positive");
    device_config().validate();
  }
  if (data.limit > 0 && data.limit > (std::size_t{1} << 31)) throw Error("data.limit is too large");
  cnn_train_config().validate();
  cnn_architecture(kImageSide);
}

SamplerConfig RunConfig::sampler_config() const {
  SamplerConfig c;
  c.kind = sampler.kind == "device" ? SamplerKind::kAnnealing : parse_sampler_kind(sampler.kind);
  c.temperature = sampler.temperature;
  c.reads = sampler.reads;
  c.sweeps = sampler.sweeps;
  if (!(sampler.temperature > 0.0)) throw Error("sampler.temperature must be positive");
  const double last = sampler.beta_last > 0.0 ? sampler.beta_last : 10.0 / sampler.temperature;
  c.schedule = geometric_schedule(sampler.beta_first, last, sampler.steps);
  c.seed = seeds.train;
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = train.learning_rate;
  t.batch_size = train.batch_size;
  t.epochs = train.epochs;
  t.seed = seeds.train;
  t.record_nll = train.record_nll;
  return t;
}

DeviceConfig RunConfig::device_config() const {
  DeviceConfig d;
  d.chain_strength = device.chain_strength;
  d.chain_strength_factor = device.chain_strength_factor;
  d.reads_per_cycle = device.reads_per_cycle;
  d.anneal = sampler_config();
  d.anneal.kind = SamplerKind::kAnnealing;
  d.timing = device.timing;
  return d;
}

CnnArchitecture RunConfig::cnn_architecture(std::size_t image_side) const {
  CnnArchitecture a{image_side, cnn.kernel, cnn.neurons1, cnn.neurons2};
  a.validate();
  return a;
}

CnnTrainConfig RunConfig::cnn_train_config() const {
  CnnTrainConfig t;
  t.learning_rate = cnn.learning_rate;
  t.beta1 = cnn.beta1;
  t.beta2 = cnn.beta2;
  t.epsilon = cnn.epsilon;
  t.batch_size = cnn.batch_size;
  t.epochs = cnn.epochs;
  t.seed = seeds.train;
  return t;
}

std::string to_json(const RunConfig& config) {
  RunConfig copy = config;
  Json j = Json::object();
  for (auto& [name, fields] : sections(copy)) {
    Json s = Json::object();
    for (auto& [key, ref] : fields) {
      std::visit([&](auto* target) { s[key] = *target; }, ref);
    }
    j[name] = std::move(s);
  }
  return j.dump(2);
}

RunConfig parse_run_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("config must be a JSON object");
  RunConfig c;
  auto table = sections(c);
  for (const auto& [name, value] : j.items()) {
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& s) { return name == s.first; });
    if (it == table.end()) throw Error("unknown config section '" + name + "'");
    if (!value.is_object()) throw Error("config section '" + name + "' must be an object");
    for (const auto& [key, field] : value.items()) {
      auto f = std::find_if(it->second.begin(), it->second.end(), [&](const auto& p) { return key == p.first; });
      if (f == it->second.end()) throw Error("unknown config key '" + name + "." + key + "'");
      read_field(field, name + "." + key, f->second);
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return parse_run_config(s.str());
}

}  // namespace qbm
