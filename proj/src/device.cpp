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

#include "qbm/device.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "qbm/error.hpp"
#include "qbm/random.hpp"

namespace qbm {
namespace {

// Columns of `s` restricted to the first m variables.
SampleSet leading_columns(const SampleSet& s, std::size_t m) {
  SampleSet out(m);
  for (std::size_t r = 0; r < s.rows(); ++r) out.add(s.state(r).first(m), s.multiplicity(r));
  return out;
}

}  // namespace

void TimingConstants::validate() const {
  if (!(programming_us >= 0.0) || !(per_read_us >= 0.0) || !(per_cycle_overhead_us >= 0.0)) {
    throw Error("timing constants must be non-negative");
  }
}

void DeviceConfig::validate() const {
  if (!(chain_strength >= 0.0)) throw Error("chain strength must be positive (or 0 for automatic)");
  if (!(chain_strength_factor > 0.0)) throw Error("chain strength factor must be positive");
  if (reads_per_cycle == 0) throw Error("reads per cycle must be positive");
  if (anneal.kind != SamplerKind::kAnnealing) throw Error("the device samples by annealing");
  SamplerConfig c = anneal;
  c.reads = reads_per_cycle;
  c.validate();
  timing.validate();
}

ComposedProblem compose(const HardwareGraph& g, const ParallelEmbedding& pe,
                        std::span<const IsingProblem> instances, const DeviceConfig& cfg) {
  cfg.validate();
  if (instances.size() > pe.size()) {
    throw DimensionError(std::to_string(instances.size()) + " instances for " + std::to_string(pe.size()) +
                         " regions");
  }
  double max_coef = 0.0;
  for (const auto& inst : instances) {
    for (const auto& [v, _] : inst.h) {
      if (v >= pe.k) throw DimensionError("instance variable " + std::to_string(v) + " exceeds embedding size");
    }
    for (const auto& [key, _] : inst.J) {
      if (key.second >= pe.k) throw DimensionError("instance coupling exceeds embedding size");
    }
    max_coef = std::max(max_coef, inst.max_abs_coefficient());
  }

  ComposedProblem cp;
  cp.instances = instances.size();
  cp.chain_strength = cfg.chain_strength > 0.0 ? cfg.chain_strength : cfg.chain_strength_factor * max_coef;
  // An all-zero cycle still needs aligned chains to decode cleanly.
  if (cp.chain_strength == 0.0) cp.chain_strength = 1.0;

  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Embedding& e = pe.regions[i].second;
    if (e.size() != pe.k) throw DimensionError("region embedding size does not match k");
    std::vector<int> unit_of(g.id_space(), -1);
    for (std::size_t v = 0; v < e.size(); ++v) {
      const double share = 1.0 / static_cast<double>(e.chains[v].size());
      const auto it = instances[i].h.find(v);
      const double hv = it == instances[i].h.end() ? 0.0 : it->second;
      for (NodeId x : e.chains[v]) {
        unit_of[x] = static_cast<int>(v);
        cp.ising.h[x] += hv * share;
        cp.instance_map.push_back({x, {i, v}});
      }
    }
    for (std::size_t v = 0; v < e.size(); ++v) {
      for (NodeId x : e.chains[v]) {
        for (NodeId y : g.neighbors(x)) {
          if (y > x && unit_of[y] == static_cast<int>(v)) cp.ising.add_coupling(x, y, -cp.chain_strength);
        }
      }
    }
    for (const auto& [key, jab] : instances[i].J) {
      if (jab == 0.0) continue;
      const auto& ca = e.chains[key.first];
      std::pair<NodeId, NodeId> best{std::numeric_limits<NodeId>::max(), std::numeric_limits<NodeId>::max()};
      for (NodeId x : ca) {
        for (NodeId y : g.neighbors(x)) {
          if (unit_of[y] != static_cast<int>(key.second)) continue;
          best = std::min(best, std::make_pair(std::min(x, y), std::max(x, y)));
        }
      }
      if (best.first == std::numeric_limits<NodeId>::max()) {
        throw Error("no physical edge between chains " + std::to_string(key.first) + " and " +
                    std::to_string(key.second) + " of region " + std::to_string(pe.regions[i].first));
      }
      cp.ising.add_coupling(best.first, best.second, jab);
    }
  }
  std::sort(cp.instance_map.begin(), cp.instance_map.end());
  return cp;
}

SampleSet run_cycle(const ComposedProblem& cp, const DeviceConfig& cfg, std::uint64_t seed) {
  SamplerConfig c = cfg.anneal;
  c.reads = cfg.reads_per_cycle;
  c.seed = seed;
  // Chains also move as a whole; single-qubit moves alone freeze strong
  // chains long before the logical couplings are resolved.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> chains;
  for (const auto& [node, owner] : cp.instance_map) chains[owner].push_back(node);
  std::vector<std::vector<std::size_t>> clusters;
  clusters.reserve(chains.size());
  for (auto& [_, nodes] : chains) clusters.push_back(std::move(nodes));
  return anneal_qubo(ising_to_qubo(cp.ising), c, clusters);
}

DecodeResult decode(const SampleSet& raw, const ParallelEmbedding& pe, std::size_t instances, std::uint64_t seed) {
  if (instances > pe.size()) throw DimensionError("more instances than region embeddings");
  std::vector<std::size_t> column(raw.num_variables() == 0 ? 0 : raw.variables().back() + 1,
                                  std::numeric_limits<std::size_t>::max());
  for (std::size_t c = 0; c < raw.num_variables(); ++c) column[raw.variables()[c]] = c;
  // chain member columns per (instance, unit)
  std::vector<std::vector<std::vector<std::size_t>>> members(instances);
  for (std::size_t i = 0; i < instances; ++i) {
    const Embedding& e = pe.regions[i].second;
    members[i].resize(e.size());
    for (std::size_t v = 0; v < e.size(); ++v) {
      for (NodeId x : e.chains[v]) {
        if (x >= column.size() || column[x] == std::numeric_limits<std::size_t>::max()) {
          throw DimensionError("raw samples do not cover node " + std::to_string(x));
        }
        members[i][v].push_back(column[x]);
      }
    }
  }

  DecodeResult out;
  out.instances.reserve(instances);
  for (std::size_t i = 0; i < instances; ++i) out.instances.emplace_back(pe.k);
  Rng coin(seed);
  std::uint64_t broken = 0;
  std::uint64_t chains = 0;
  std::vector<std::uint8_t> logical(pe.k);
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const auto bits = raw.state(r);
    const std::uint64_t mult = raw.multiplicity(r);
    for (std::size_t i = 0; i < instances; ++i) {
      std::vector<std::size_t> ties;
      for (std::size_t v = 0; v < pe.k; ++v) {
        std::size_t up = 0;
        for (std::size_t c : members[i][v]) up += bits[c];
        const std::size_t n = members[i][v].size();
        if (up != 0 && up != n) broken += mult;
        chains += mult;
        if (2 * up == n) {
          ties.push_back(v);
        } else {
          logical[v] = 2 * up > n ? 1 : 0;
        }
      }
      if (ties.empty()) {
        out.instances[i].add(logical, mult);
        continue;
      }
      for (std::uint64_t read = 0; read < mult; ++read) {
        for (std::size_t v : ties) logical[v] = static_cast<std::uint8_t>(coin() & 1U);
        out.instances[i].add(logical, 1);
      }
    }
  }
  out.chain_break_rate = chains == 0 ? 0.0 : static_cast<double>(broken) / static_cast<double>(chains);
  for (auto& s : out.instances) s = s.aggregated();
  return out;
}

std::size_t schedule(std::size_t m_instances, std::size_t regions) {
  if (m_instances < 1 || regions < 1) throw Error("schedule needs at least one instance and one region");
  return (m_instances + regions - 1) / regions;
}

void Workload::validate() const {
  if (batches == 0 || points_per_batch == 0 || reads == 0 || phases == 0) {
    throw Error("workload counts must be positive");
  }
}

std::string to_string(TimingMode mode) { return mode == TimingMode::kSequential ? "sequential" : "parallel"; }

TimingMode parse_timing_mode(const std::string& name) {
  if (name == "sequential") return TimingMode::kSequential;
  if (name == "parallel") return TimingMode::kParallel;
  throw Error("unknown timing mode '" + name + "' (expected sequential or parallel)");
}

TimingReport timing_report(const Workload& workload, const TimingConstants& constants, std::size_t regions,
                           TimingMode mode) {
  workload.validate();
  constants.validate();
  if (regions < 1) throw Error("at least one region is required");
  TimingReport r;
  r.mode = mode;
  r.workload = workload;
  r.constants = constants;
  r.regions = regions;
  const double per_cycle = constants.cycle_us(workload.reads);
  r.sequential_time_us = per_cycle * static_cast<double>(workload.instances());
  r.cycles = mode == TimingMode::kSequential
                 ? workload.instances()
                 : workload.batches * schedule(workload.points_per_batch * workload.phases, regions);
  r.total_time_us = per_cycle * static_cast<double>(r.cycles);
  r.speedup_vs_sequential = r.sequential_time_us > 0.0 ? 1.0 - r.total_time_us / r.sequential_time_us : 0.0;
  return r;
}

std::string timing_to_json(std::span<const TimingReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    arr.push_back({
        {"mode", to_string(r.mode)},
        {"regions", r.regions},
        {"instances", r.workload.instances()},
        {"cycles", r.cycles},
        {"total_time_us", r.total_time_us},
        {"sequential_time_us", r.sequential_time_us},
        {"speedup", r.speedup_vs_sequential},
        {"workload",
         {{"batches", r.workload.batches},
          {"points_per_batch", r.workload.points_per_batch},
          {"reads", r.workload.reads},
          {"phases", r.workload.phases}}},
        {"constants",
         {{"programming_us", r.constants.programming_us},
          {"per_read_us", r.constants.per_read_us},
          {"per_cycle_overhead_us", r.constants.per_cycle_overhead_us}}},
    });
  }
  return nlohmann::json{{"reports", arr}}.dump(2);
}

void write_timing_csv(std::ostream& out, std::span<const TimingReport> reports) {
  out << "mode,cycles,total_time_us,speedup\n";
  out << std::setprecision(15);
  for (const auto& r : reports) {
    out << to_string(r.mode) << ',' << r.cycles << ',' << r.total_time_us << ',' << r.speedup_vs_sequential << '\n';
  }
}

DeviceSampler::DeviceSampler(HardwareGraph graph, ParallelEmbedding embedding, DeviceConfig config)
    : graph_(std::move(graph)), embedding_(std::move(embedding)), config_(std::move(config)) {
  config_.validate();
  if (embedding_.size() == 0) throw Error("device sampler needs at least one region embedding");
}

std::vector<Moments> DeviceSampler::sample_moments(std::span<const ReducedProblem> problems,
                                                   std::uint64_t seed) const {
  const std::size_t k = embedding_.k;
  const std::size_t regions = embedding_.size();
  std::vector<Moments> out(problems.size());
  if (problems.empty()) return out;
  const std::size_t cycles = schedule(problems.size(), regions);
  for (std::size_t c = 0; c < cycles; ++c) {
    const std::size_t first = c * regions;
    const std::size_t count = std::min(regions, problems.size() - first);
    std::vector<IsingProblem> instances;
    instances.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const ReducedProblem& rp = problems[first + i];
      if (rp.size() > k) {
        throw DimensionError("problem of " + std::to_string(rp.size()) + " units exceeds embedding size " +
                             std::to_string(k));
      }
      instances.push_back(qubo_to_ising(to_qubo(rp)));
    }
    const std::uint64_t cycle_seed = derive_seed(seed, c);
    DeviceConfig cfg = config_;
    cfg.anneal.temperature = problems[first].temperature();
    const ComposedProblem cp = compose(graph_, embedding_, instances, cfg);
    const SampleSet raw = run_cycle(cp, cfg, derive_seed(cycle_seed, 0));
    const DecodeResult decoded = decode(raw, embedding_, count, derive_seed(cycle_seed, 1));
    for (std::size_t i = 0; i < count; ++i) {
      out[first + i] = moments(leading_columns(decoded.instances[i], problems[first + i].size()));
    }
    cycles_.fetch_add(1);
    break_rate_micros_.fetch_add(static_cast<std::uint64_t>(std::llround(decoded.chain_break_rate * 1e6)));
  }
  return out;
}

std::string DeviceSampler::describe() const {
  std::ostringstream s;
  s << "device(T=" << config_.anneal.temperature << ", regions=" << embedding_.size() << ", k=" << embedding_.k
    << ", reads=" << config_.reads_per_cycle << ")";
  return s.str();
}

double DeviceSampler::mean_chain_break_rate() const {
  const std::size_t c = cycles_.load();
  return c == 0 ? 0.0 : static_cast<double>(break_rate_micros_.load()) * 1e-6 / static_cast<double>(c);
}

}  // namespace qbm
