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

#ifndef QBM_SAMPLERS_HPP
#define QBM_SAMPLERS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qbm/model.hpp"

namespace qbm {

enum class SamplerKind { kExact, kGibbs, kAnnealing };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kExact;
  double temperature = 1.0;
  std::size_t reads = 100;
  // Gibbs: full passes per read.
  std::size_t sweeps = 200;
  // Annealing: inverse temperatures, one Metropolis sweep each. Empty means
  // default_schedule(temperature).
  std::vector<double> schedule;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<double> effective_schedule() const;
};

std::vector<double> geometric_schedule(double beta_first, double beta_last, std::size_t steps);
// Geometric from 0.1 to 10 / T over 1000 sweeps.
std::vector<double> default_schedule(double temperature);

/// Multiset of binary configurations. Columns are labelled by variables();
/// rows carry a positive multiplicity.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::size_t num_variables);
  explicit SampleSet(std::vector<std::size_t> variables);

  std::size_t num_variables() const { return variables_.size(); }
  const std::vector<std::size_t>& variables() const { return variables_; }
  std::size_t rows() const { return multiplicity_.size(); }
  std::uint64_t total() const { return total_; }

  std::span<const std::uint8_t> state(std::size_t row) const {
    return {bits_.data() + row * num_variables(), num_variables()};
  }
  std::uint64_t multiplicity(std::size_t row) const { return multiplicity_[row]; }

  void add(std::span<const std::uint8_t> state, std::uint64_t count = 1);
  // Identical states merged, rows in lexicographic order.
  SampleSet aggregated() const;
  // Index of the row with the largest multiplicity (first on ties).
  std::size_t modal_row() const;

  // One line per row: "<bitstring> <multiplicity>".
  void write_text(std::ostream& out) const;
  static SampleSet read_text(std::istream& in);

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

 private:
  std::vector<std::size_t> variables_;
  std::vector<std::uint8_t> bits_;
  std::vector<std::uint64_t> multiplicity_;
  std::uint64_t total_ = 0;
};

// First and second Boltzmann averages. second is a dense symmetric m x m
// matrix whose diagonal equals first.
struct Moments {
  std::vector<double> first;
  std::vector<double> second;

  std::size_t size() const { return first.size(); }
  double pair(std::size_t i, std::size_t j) const { return second[i * size() + j]; }
};

inline constexpr std::size_t kMaxExactUnits = 24;

// Probability of every state; bit i of the index is unit i.
std::vector<double> exact_distribution(const ReducedProblem& rp);
// log sum_x exp(-E(x) / T), including the problem offset.
double log_partition(const ReducedProblem& rp);
Moments exact_moments(const ReducedProblem& rp);

SampleSet exact_sample(const ReducedProblem& rp, const SamplerConfig& config);
SampleSet gibbs_sample(const ReducedProblem& rp, const SamplerConfig& config);
SampleSet sa_sample(const ReducedProblem& rp, const SamplerConfig& config);
SampleSet sample(const ReducedProblem& rp, const SamplerConfig& config);

// Simulated annealing over an arbitrary QUBO; columns follow q.variables().
// Each cluster (disjoint sets of variable labels) additionally gets one
// collective flip attempt per sweep; clusters of size < 2 are ignored.
SampleSet anneal_qubo(const QuboProblem& q, const SamplerConfig& config,
                      std::span<const std::vector<std::size_t>> clusters = {});

Moments moments(const SampleSet& samples);

// Total-variation distance between an empirical sample set over m units and
// a probability table indexed as in exact_distribution.
double total_variation(const SampleSet& samples, std::span<const double> table);

}  // namespace qbm

#endif  // QBM_SAMPLERS_HPP
