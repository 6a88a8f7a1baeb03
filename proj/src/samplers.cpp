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

#include "qbm/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "qbm/error.hpp"
#include "qbm/parallel.hpp"
#include "qbm/random.hpp"

namespace qbm {
namespace {

// E(x) = sum linear_i x_i + sum_{i<j} q_ij x_i x_j, neighbours stored in
// both directions.
struct SparseModel {
  std::vector<double> linear;
  std::vector<std::size_t> start;
  std::vector<std::uint32_t> neighbor;
  std::vector<double> coupling;

  std::size_t size() const { return linear.size(); }
};

SparseModel sparse_from_reduced(const ReducedProblem& rp) {
  const std::size_t m = rp.size();
  SparseModel model;
  model.linear.assign(rp.biases().begin(), rp.biases().end());
  model.start.push_back(0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double w = rp.weight(i, j);
      if (i == j || w == 0.0) continue;
      model.neighbor.push_back(static_cast<std::uint32_t>(j));
      model.coupling.push_back(-w);
    }
    model.start.push_back(model.neighbor.size());
  }
  return model;
}

SparseModel sparse_from_qubo(const QuboProblem& q, const std::vector<std::size_t>& vars) {
  std::map<std::size_t, std::uint32_t> index;
  for (std::size_t i = 0; i < vars.size(); ++i) index[vars[i]] = static_cast<std::uint32_t>(i);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(vars.size());
  for (const auto& [key, b] : q.quadratic) {
    if (b == 0.0) continue;
    const auto a = index.at(key.first);
    const auto c = index.at(key.second);
    adj[a].emplace_back(c, b);
    adj[c].emplace_back(a, b);
  }
  SparseModel model;
  model.linear.reserve(vars.size());
  for (std::size_t v : vars) model.linear.push_back(q.linear.at(v));
  model.start.push_back(0);
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    for (const auto& [j, b] : row) {
      model.neighbor.push_back(j);
      model.coupling.push_back(b);
    }
    model.start.push_back(model.neighbor.size());
  }
  return model;
}

// field_i = E(x_i = 1) - E(x_i = 0)
void init_fields(const SparseModel& model, std::span<const std::uint8_t> x, std::vector<double>& field) {
  const std::size_t n = model.size();
  field.assign(model.linear.begin(), model.linear.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = model.start[i]; e < model.start[i + 1]; ++e) {
      if (x[model.neighbor[e]]) field[i] += model.coupling[e];
    }
  }
}

void set_unit(const SparseModel& model, std::size_t i, std::uint8_t value, std::span<std::uint8_t> x,
              std::vector<double>& field) {
  const double delta = value ? 1.0 : -1.0;
  x[i] = value;
  for (std::size_t e = model.start[i]; e < model.start[i + 1]; ++e) {
    field[model.neighbor[e]] += model.coupling[e] * delta;
  }
}

void random_state(Rng& rng, std::span<std::uint8_t> x) {
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i % 64 == 0) word = rng();
    x[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
  }
}

using Clusters = std::vector<std::vector<std::uint32_t>>;

// Each sweep is one Metropolis pass over single units followed by one
// whole-cluster flip attempt per cluster. The cluster move's energy change is
// the sum of sequential single-flip changes, so it is exact.
void anneal_read(const SparseModel& model, std::span<const double> schedule, const Clusters& clusters, Rng& rng,
                 std::span<std::uint8_t> x, std::vector<double>& field) {
  random_state(rng, x);
  init_fields(model, x, field);
  const std::size_t n = model.size();
  for (double beta : schedule) {
    for (std::size_t i = 0; i < n; ++i) {
      const double delta_e = x[i] ? -field[i] : field[i];
      if (delta_e <= 0.0 || uniform01(rng) < std::exp(-beta * delta_e)) {
        set_unit(model, i, x[i] ^ 1u, x, field);
      }
    }
    for (const auto& cluster : clusters) {
      double delta_e = 0.0;
      for (std::uint32_t i : cluster) {
        delta_e += x[i] ? -field[i] : field[i];
        set_unit(model, i, x[i] ^ 1u, x, field);
      }
      if (delta_e <= 0.0 || uniform01(rng) < std::exp(-beta * delta_e)) continue;
      for (std::uint32_t i : cluster) set_unit(model, i, x[i] ^ 1u, x, field);
    }
  }
}

void gibbs_read(const SparseModel& model, double temperature, std::size_t sweeps, Rng& rng,
                std::span<std::uint8_t> x, std::vector<double>& field) {
  random_state(rng, x);
  init_fields(model, x, field);
  const std::size_t n = model.size();
  for (std::size_t s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p_one = 1.0 / (1.0 + std::exp(field[i] / temperature));
      const std::uint8_t v = uniform01(rng) < p_one ? 1 : 0;
      if (v != x[i]) set_unit(model, i, v, x, field);
    }
  }
}

// Runs `reads` independent reads; read r uses its own derived seed.
template <typename ReadFn>
SampleSet run_reads(std::vector<std::size_t> variables, std::size_t reads, std::uint64_t seed,
                    ReadFn&& read) {
  const std::size_t n = variables.size();
  std::vector<std::uint8_t> buffer(reads * n);
  parallel_for(reads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    std::vector<double> field;
    read(rng, std::span<std::uint8_t>(buffer.data() + r * n, n), field);
  });
  SampleSet raw(std::move(variables));
  for (std::size_t r = 0; r < reads; ++r) raw.add({buffer.data() + r * n, n});
  return raw.aggregated();
}

std::vector<std::size_t> iota_labels(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

void check_enumerable(const ReducedProblem& rp) {
  if (rp.size() > kMaxExactUnits) {
    throw Error("problem with " + std::to_string(rp.size()) + " free units is too large for enumeration (max " +
                std::to_string(kMaxExactUnits) + ")");
  }
}

// -E(x)/T for every state, Gray-code order internally, stored by state index.
std::vector<double> log_weights(const ReducedProblem& rp) {
  check_enumerable(rp);
  const std::size_t m = rp.size();
  const std::size_t count = std::size_t{1} << m;
  std::vector<double> out(count);
  std::vector<std::uint8_t> x(m, 0);
  std::vector<double> field(rp.biases().begin(), rp.biases().end());
  double e = rp.offset();
  const double inv_t = 1.0 / rp.temperature();
  out[0] = -e * inv_t;
  std::size_t code = 0;
  for (std::size_t step = 1; step < count; ++step) {
    const std::size_t bit = static_cast<std::size_t>(std::countr_zero(step));
    const std::uint8_t v = x[bit] ^ 1u;
    e += v ? field[bit] : -field[bit];
    x[bit] = v;
    const double delta = v ? 1.0 : -1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != bit) field[j] -= rp.weight(bit, j) * delta;
    }
    code ^= std::size_t{1} << bit;
    out[code] = -e * inv_t;
  }
  return out;
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double a : v) s += std::exp(a - mx);
  return mx + std::log(s);
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kExact:
      return "exact";
    case SamplerKind::kGibbs:
      return "gibbs";
    case SamplerKind::kAnnealing:
      return "sa";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "exact") return SamplerKind::kExact;
  if (name == "gibbs") return SamplerKind::kGibbs;
  if (name == "sa") return SamplerKind::kAnnealing;
  throw Error("unknown sampler kind '" + name + "' (expected exact, gibbs or sa)");
}

void SamplerConfig::validate() const {
  if (!(temperature > 0.0)) throw Error("sampler temperature must be positive");
  if (reads < 1) throw Error("sampler reads must be positive");
  if (kind == SamplerKind::kGibbs && sweeps < 1) throw Error("gibbs sweeps must be positive");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0)) throw Error("annealing schedule entries must be positive");
    if (i > 0 && schedule[i] < schedule[i - 1]) throw Error("annealing schedule must be non-decreasing");
  }
}

std::vector<double> SamplerConfig::effective_schedule() const {
  return schedule.empty() ? default_schedule(temperature) : schedule;
}

std::vector<double> geometric_schedule(double beta_first, double beta_last, std::size_t steps) {
  if (steps < 1 || !(beta_first > 0.0) || !(beta_last >= beta_first)) {
    throw Error("invalid geometric schedule");
  }
  std::vector<double> s(steps);
  if (steps == 1) {
    s[0] = beta_last;
    return s;
  }
  const double ratio = std::log(beta_last / beta_first) / static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) s[i] = beta_first * std::exp(ratio * static_cast<double>(i));
  s.back() = beta_last;
  return s;
}

std::vector<double> default_schedule(double temperature) {
  return geometric_schedule(0.1, std::max(0.1, 10.0 / temperature), 1000);
}

SampleSet::SampleSet(std::size_t num_variables) : variables_(iota_labels(num_variables)) {}

SampleSet::SampleSet(std::vector<std::size_t> variables) : variables_(std::move(variables)) {}

void SampleSet::add(std::span<const std::uint8_t> state, std::uint64_t count) {
  if (state.size() != num_variables()) throw DimensionError("sample length does not match sample set");
  if (count == 0) throw Error("multiplicity must be positive");
  bits_.insert(bits_.end(), state.begin(), state.end());
  multiplicity_.push_back(count);
  total_ += count;
}

SampleSet SampleSet::aggregated() const {
  std::map<std::vector<std::uint8_t>, std::uint64_t> counts;
  for (std::size_t r = 0; r < rows(); ++r) {
    const auto s = state(r);
    counts[std::vector<std::uint8_t>(s.begin(), s.end())] += multiplicity_[r];
  }
  SampleSet out(variables_);
  for (const auto& [s, c] : counts) out.add(s, c);
  return out;
}

std::size_t SampleSet::modal_row() const {
  if (rows() == 0) throw Error("empty sample set");
  return static_cast<std::size_t>(std::max_element(multiplicity_.begin(), multiplicity_.end()) -
                                  multiplicity_.begin());
}

void SampleSet::write_text(std::ostream& out) const {
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::uint8_t b : state(r)) out << (b ? '1' : '0');
    out << ' ' << multiplicity_[r] << '\n';
  }
}

SampleSet SampleSet::read_text(std::istream& in) {
  std::string line;
  std::vector<std::pair<std::string, std::uint64_t>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string bits;
    std::uint64_t count = 0;
    if (!(ls >> bits >> count) || count == 0) throw FormatError("malformed sample line: " + line);
    rows.emplace_back(bits, count);
  }
  if (rows.empty()) throw FormatError("no samples");
  SampleSet out(rows.front().first.size());
  std::vector<std::uint8_t> s;
  for (const auto& [bits, count] : rows) {
    s.clear();
    for (char c : bits) {
      if (c != '0' && c != '1') throw FormatError("invalid bit '" + std::string(1, c) + "'");
      s.push_back(c == '1');
    }
    out.add(s, count);
  }
  return out;
}

std::vector<double> exact_distribution(const ReducedProblem& rp) {
  std::vector<double> w = log_weights(rp);
  const double log_z = log_sum_exp(w);
  for (double& v : w) v = std::exp(v - log_z);
  return w;
}

double log_partition(const ReducedProblem& rp) { return log_sum_exp(log_weights(rp)); }

Moments exact_moments(const ReducedProblem& rp) {
  const std::vector<double> p = exact_distribution(rp);
  const std::size_t m = rp.size();
  Moments mo{std::vector<double>(m, 0.0), std::vector<double>(m * m, 0.0)};
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    const double w = p[idx];
    for (std::size_t i = 0; i < m; ++i) {
      if (!((idx >> i) & 1u)) continue;
      for (std::size_t j = i; j < m; ++j) {
        if ((idx >> j) & 1u) mo.second[i * m + j] += w;
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    mo.first[i] = mo.second[i * m + i];
    for (std::size_t j = i + 1; j < m; ++j) mo.second[j * m + i] = mo.second[i * m + j];
  }
  return mo;
}

SampleSet exact_sample(const ReducedProblem& rp, const SamplerConfig& config) {
  config.validate();
  const std::vector<double> p = exact_distribution(rp);
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = acc += p[i];
  const std::size_t m = rp.size();
  return run_reads(iota_labels(m), config.reads, config.seed,
                   [&](Rng& rng, std::span<std::uint8_t> x, std::vector<double>&) {
                     const double u = uniform01(rng) * acc;
                     auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
                     if (it == cdf.end()) --it;
                     const auto idx = static_cast<std::size_t>(it - cdf.begin());
                     for (std::size_t i = 0; i < m; ++i) x[i] = (idx >> i) & 1u;
                   });
}

SampleSet gibbs_sample(const ReducedProblem& rp, const SamplerConfig& config) {
  config.validate();
  const SparseModel model = sparse_from_reduced(rp);
  return run_reads(iota_labels(rp.size()), config.reads, config.seed,
                   [&](Rng& rng, std::span<std::uint8_t> x, std::vector<double>& field) {
                     gibbs_read(model, rp.temperature(), config.sweeps, rng, x, field);
                   });
}

SampleSet sa_sample(const ReducedProblem& rp, const SamplerConfig& config) {
  config.validate();
  const std::vector<double> schedule = config.effective_schedule();
  const SparseModel model = sparse_from_reduced(rp);
  return run_reads(iota_labels(rp.size()), config.reads, config.seed,
                   [&](Rng& rng, std::span<std::uint8_t> x, std::vector<double>& field) {
                     anneal_read(model, schedule, {}, rng, x, field);
                   });
}

SampleSet sample(const ReducedProblem& rp, const SamplerConfig& config) {
  switch (config.kind) {
    case SamplerKind::kExact:
      return exact_sample(rp, config);
    case SamplerKind::kGibbs:
      return gibbs_sample(rp, config);
    case SamplerKind::kAnnealing:
      return sa_sample(rp, config);
  }
  throw Error("unknown sampler kind");
}

SampleSet anneal_qubo(const QuboProblem& q, const SamplerConfig& config,
                      std::span<const std::vector<std::size_t>> clusters) {
  config.validate();
  const std::vector<double> schedule = config.effective_schedule();
  std::vector<std::size_t> vars = q.variables();
  const SparseModel model = sparse_from_qubo(q, vars);
  Clusters columns;
  std::vector<bool> claimed(vars.size(), false);
  for (const auto& cluster : clusters) {
    if (cluster.size() < 2) continue;
    auto& c = columns.emplace_back();
    for (std::size_t v : cluster) {
      const auto it = std::lower_bound(vars.begin(), vars.end(), v);
      if (it == vars.end() || *it != v) {
        throw DimensionError("cluster variable " + std::to_string(v) + " is not a problem variable");
      }
      const auto col = static_cast<std::size_t>(it - vars.begin());
      if (claimed[col]) throw DimensionError("variable " + std::to_string(v) + " appears in two clusters");
      claimed[col] = true;
      c.push_back(static_cast<std::uint32_t>(col));
    }
  }
  return run_reads(std::move(vars), config.reads, config.seed,
                   [&](Rng& rng, std::span<std::uint8_t> x, std::vector<double>& field) {
                     anneal_read(model, schedule, columns, rng, x, field);
                   });
}

Moments moments(const SampleSet& samples) {
  if (samples.total() == 0) throw Error("cannot take moments of an empty sample set");
  const std::size_t m = samples.num_variables();
  Moments mo{std::vector<double>(m, 0.0), std::vector<double>(m * m, 0.0)};
  std::vector<std::size_t> on;
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    const auto s = samples.state(r);
    const double w = static_cast<double>(samples.multiplicity(r));
    on.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (s[i]) on.push_back(i);
    }
    for (std::size_t a = 0; a < on.size(); ++a) {
      for (std::size_t b = a; b < on.size(); ++b) mo.second[on[a] * m + on[b]] += w;
    }
  }
  const double inv_total = 1.0 / static_cast<double>(samples.total());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      mo.second[i * m + j] *= inv_total;
      mo.second[j * m + i] = mo.second[i * m + j];
    }
    mo.first[i] = mo.second[i * m + i];
  }
  return mo;
}

double total_variation(const SampleSet& samples, std::span<const double> table) {
  const std::size_t m = samples.num_variables();
  if (m >= 64 || table.size() != (std::size_t{1} << m)) throw DimensionError("table size does not match sample width");
  std::vector<double> empirical(table.size(), 0.0);
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    std::size_t idx = 0;
    const auto s = samples.state(r);
    for (std::size_t i = 0; i < m; ++i) idx |= static_cast<std::size_t>(s[i]) << i;
    empirical[idx] += static_cast<double>(samples.multiplicity(r));
  }
  double tv = 0.0;
  const double inv_total = 1.0 / static_cast<double>(samples.total());
  for (std::size_t i = 0; i < table.size(); ++i) tv += std::abs(empirical[i] * inv_total - table[i]);
  return 0.5 * tv;
}

}  // namespace qbm
