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

#ifndef QBM_DEVICE_HPP
#define QBM_DEVICE_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbm/embedding.hpp"
#include "qbm/model.hpp"
#include "qbm/samplers.hpp"
#include "qbm/trainer.hpp"

namespace qbm {

// Cost of one anneal cycle: programming + reads * per_read + overhead.
struct TimingConstants {
  double programming_us = 15000.0;
  double per_read_us = 300.0;
  double per_cycle_overhead_us = 0.0;

  void validate() const;
  double cycle_us(std::size_t reads) const { return programming_us + per_read_us * reads + per_cycle_overhead_us; }
};

inline SamplerConfig annealing_defaults() {
  SamplerConfig c;
  c.kind = SamplerKind::kAnnealing;
  return c;
}

struct DeviceConfig {
  // Ferromagnetic coupling magnitude inside chains. 0 selects
  // chain_strength_factor * (max |logical coefficient| of the cycle).
  double chain_strength = 0.0;
  double chain_strength_factor = 1.5;
  std::size_t reads_per_cycle = 100;
  // Annealing schedule and temperature for the physical problem; `reads`
  // and `seed` are taken from reads_per_cycle and the cycle seed.
  SamplerConfig anneal = annealing_defaults();
  TimingConstants timing;

  void validate() const;
};

struct ComposedProblem {
  IsingProblem ising;  // over physical node ids
  // physical node -> (instance index, logical unit), sorted by node
  std::vector<std::pair<NodeId, std::pair<std::size_t, std::size_t>>> instance_map;
  double chain_strength = 0.0;
  std::size_t instances = 0;
};

/// Places instance i on region embedding i. Logical h is spread evenly over
/// the chain, each logical J goes to the smallest physical edge joining the
/// two chains, and every edge inside a chain gets -chain_strength.
/// Instance variables must be labelled 0..k-1.
ComposedProblem compose(const HardwareGraph& g, const ParallelEmbedding& pe,
                        std::span<const IsingProblem> instances, const DeviceConfig& cfg);

// reads_per_cycle physical samples; bit 1 means spin +1. Columns follow
// cp.ising.variables(). Annealing adds a whole-chain flip move per sweep.
SampleSet run_cycle(const ComposedProblem& cp, const DeviceConfig& cfg, std::uint64_t seed);

struct DecodeResult {
  std::vector<SampleSet> instances;  // over logical units 0..k-1
  double chain_break_rate = 0.0;     // non-unanimous chains / all chains, per read
};

// Majority vote per chain; ties are broken by a coin seeded with `seed`.
DecodeResult decode(const SampleSet& raw, const ParallelEmbedding& pe, std::size_t instances, std::uint64_t seed);

// Number of anneal cycles for m instances on `regions` regions.
std::size_t schedule(std::size_t m_instances, std::size_t regions);

struct Workload {
  std::size_t batches = 3;
  std::size_t points_per_batch = 5;
  std::size_t reads = 1000;
  std::size_t phases = 2;

  void validate() const;
  std::size_t instances() const { return batches * points_per_batch * phases; }
};

enum class TimingMode { kSequential, kParallel };
std::string to_string(TimingMode mode);
TimingMode parse_timing_mode(const std::string& name);

struct TimingReport {
  TimingMode mode = TimingMode::kSequential;
  Workload workload;
  TimingConstants constants;
  std::size_t regions = 1;
  std::size_t cycles = 0;
  double total_time_us = 0.0;
  double sequential_time_us = 0.0;
  double speedup_vs_sequential = 0.0;  // 1 - total / sequential
};

/// Sequential mode runs one instance per cycle. Parallel mode packs the
/// instances of each batch into schedule(points * phases, regions) cycles;
/// parameters change between batches, so batches never share a cycle.
TimingReport timing_report(const Workload& workload, const TimingConstants& constants, std::size_t regions,
                           TimingMode mode);

std::string timing_to_json(std::span<const TimingReport> reports);
// "mode,cycles,total_time_us" for a two-bar plot.
void write_timing_csv(std::ostream& out, std::span<const TimingReport> reports);

/// Phase sampler backed by the simulated device: each batch of reduced
/// problems is packed R at a time into composed problems, annealed, and
/// decoded. Problems are padded to the embedding's logical size.
class DeviceSampler final : public PhaseSampler {
 public:
  DeviceSampler(HardwareGraph graph, ParallelEmbedding embedding, DeviceConfig config);

  std::vector<Moments> sample_moments(std::span<const ReducedProblem> problems,
                                      std::uint64_t seed) const override;
  double temperature() const override { return config_.anneal.temperature; }
  std::string describe() const override;

  std::size_t cycles_run() const { return cycles_.load(); }
  double mean_chain_break_rate() const;
  const ParallelEmbedding& embedding() const { return embedding_; }

 private:
  HardwareGraph graph_;
  ParallelEmbedding embedding_;
  DeviceConfig config_;
  mutable std::atomic<std::size_t> cycles_{0};
  mutable std::atomic<std::uint64_t> break_rate_micros_{0};
};

}  // namespace qbm

#endif  // QBM_DEVICE_HPP
