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

#include "qbm/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "binary_io.hpp"
#include "qbm/error.hpp"
#include "qbm/random.hpp"

namespace qbm {
namespace {

constexpr std::array<char, 4> kParamsMagic = {'P', 'B', 'M', '1'};

using detail::write_f64;
using detail::write_u32;

std::uint32_t read_u32(std::istream& in) { return detail::read_u32(in, "parameter file"); }
double read_f64(std::istream& in) { return detail::read_f64(in, "parameter file"); }

std::size_t packed_pairs(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

void UnitLayout::validate() const {
  if (hidden < 1) throw DimensionError("layout needs at least one hidden unit");
  if (labels < 1) throw DimensionError("layout needs at least one label unit");
}

std::size_t parameter_count(const UnitLayout& layout) {
  layout.validate();
  const std::size_t f = layout.free_units();
  return f + layout.inputs * f + packed_pairs(f);
}

BMParameters::BMParameters(const UnitLayout& layout)
    : layout_(layout), values_(parameter_count(layout), 0.0) {}

std::size_t BMParameters::bias_index(std::size_t f) const { return f; }

std::size_t BMParameters::input_weight_index(std::size_t k, std::size_t f) const {
  const std::size_t nf = layout_.free_units();
  return nf + k * nf + f;
}

std::size_t BMParameters::coupling_index(std::size_t f, std::size_t g) const {
  if (f == g) throw DimensionError("no self-coupling");
  if (f > g) std::swap(f, g);
  const std::size_t nf = layout_.free_units();
  const std::size_t base = nf + layout_.inputs * nf;
  return base + f * nf - f * (f + 1) / 2 + (g - f - 1);
}

double BMParameters::coupling(std::size_t f, std::size_t g) const {
  if (f == g) return 0.0;
  return values_[coupling_index(f, g)];
}

double BMParameters::weight(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  const std::size_t nd = layout_.inputs;
  if (j < nd) return 0.0;
  if (i < nd) return input_weight(i, j - nd);
  return coupling(i - nd, j - nd);
}

BMParameters init_params(const UnitLayout& layout, std::uint64_t seed) {
  BMParameters params(layout);
  Rng rng(seed);
  for (double& v : params.values()) v = 2.0 * uniform01(rng) - 1.0;
  return params;
}

void write_params(std::ostream& out, const BMParameters& params) {
  out.write(kParamsMagic.data(), kParamsMagic.size());
  const UnitLayout& l = params.layout();
  write_u32(out, static_cast<std::uint32_t>(l.inputs));
  write_u32(out, static_cast<std::uint32_t>(l.hidden));
  write_u32(out, static_cast<std::uint32_t>(l.labels));
  for (double v : params.values()) write_f64(out, v);
}

BMParameters read_params(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kParamsMagic) {
    throw FormatError("not a PBM1 parameter file");
  }
  UnitLayout layout;
  layout.inputs = read_u32(in);
  layout.hidden = read_u32(in);
  layout.labels = read_u32(in);
  BMParameters params(layout);
  for (double& v : params.values()) v = read_f64(in);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in parameter file");
  return params;
}

void save_params(const std::string& path, const BMParameters& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_params(out, params);
}

BMParameters load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_params(in);
}

double energy(const BMParameters& params, std::span<const double> state) {
  const UnitLayout& l = params.layout();
  if (state.size() != l.total()) throw DimensionError("state length does not match layout");
  const std::size_t nd = l.inputs;
  const std::size_t nf = l.free_units();
  double e = 0.0;
  for (std::size_t f = 0; f < nf; ++f) {
    const double sf = state[nd + f];
    if (sf == 0.0) continue;
    double field = params.bias(f);
    for (std::size_t k = 0; k < nd; ++k) field += params.input_weight(k, f) * state[k];
    e += field * sf;
    for (std::size_t g = f + 1; g < nf; ++g) e -= params.coupling(f, g) * sf * state[nd + g];
  }
  return e;
}

ReducedProblem::ReducedProblem(std::size_t size, double temperature)
    : bias_(size, 0.0), weight_(size * size, 0.0), temperature_(temperature) {
  if (!(temperature > 0.0)) throw Error("temperature must be positive");
}

void ReducedProblem::set_weight(std::size_t i, std::size_t j, double v) {
  if (i == j) throw DimensionError("no self-coupling");
  weight_[i * size() + j] = v;
  weight_[j * size() + i] = v;
}

double ReducedProblem::energy(std::span<const std::uint8_t> x) const {
  const std::size_t m = size();
  if (x.size() != m) throw DimensionError("state length does not match problem size");
  double e = offset_;
  for (std::size_t i = 0; i < m; ++i) {
    if (!x[i]) continue;
    e += bias_[i];
    const double* row = &weight_[i * m];
    for (std::size_t j = i + 1; j < m; ++j) {
      if (x[j]) e -= row[j];
    }
  }
  return e;
}

double ReducedProblem::flip_cost(std::size_t i, std::span<const std::uint8_t> x) const {
  const std::size_t m = size();
  double c = bias_[i];
  const double* row = &weight_[i * m];
  for (std::size_t j = 0; j < m; ++j) {
    if (x[j]) c -= row[j];
  }
  return c;
}

ReducedProblem clamp_inputs(const BMParameters& params, std::span<const double> inputs,
                            double temperature) {
  const UnitLayout& l = params.layout();
  if (inputs.size() != l.inputs) throw DimensionError("input vector length does not match layout");
  const std::size_t nf = l.free_units();
  ReducedProblem rp(nf, temperature);
  for (std::size_t f = 0; f < nf; ++f) {
    double b = params.bias(f);
    for (std::size_t k = 0; k < l.inputs; ++k) b += params.input_weight(k, f) * inputs[k];
    rp.set_bias(f, b);
    for (std::size_t g = f + 1; g < nf; ++g) rp.set_weight(f, g, params.coupling(f, g));
  }
  return rp;
}

ReducedProblem clamp_inputs_and_label(const BMParameters& params,
                                      std::span<const double> inputs,
                                      std::span<const std::uint8_t> label,
                                      double temperature) {
  const UnitLayout& l = params.layout();
  if (label.size() != l.labels) throw DimensionError("label vector length does not match layout");
  const ReducedProblem full = clamp_inputs(params, inputs, temperature);
  const std::size_t nl = l.labels;
  const std::size_t nh = l.hidden;

  ReducedProblem rp(nh, temperature);
  double offset = full.offset();
  for (std::size_t a = 0; a < nl; ++a) {
    if (!label[a]) continue;
    offset += full.bias(a);
    for (std::size_t c = a + 1; c < nl; ++c) {
      if (label[c]) offset -= full.weight(a, c);
    }
  }
  rp.set_offset(offset);
  for (std::size_t h = 0; h < nh; ++h) {
    double b = full.bias(nl + h);
    for (std::size_t a = 0; a < nl; ++a) {
      if (label[a]) b -= full.weight(nl + h, a);
    }
    rp.set_bias(h, b);
    for (std::size_t g = h + 1; g < nh; ++g) rp.set_weight(h, g, full.weight(nl + h, nl + g));
  }
  return rp;
}

void QuboProblem::add_quadratic(std::size_t i, std::size_t j, double v) {
  if (i == j) {
    linear[i] += v;
    return;
  }
  if (i > j) std::swap(i, j);
  linear.try_emplace(i, 0.0);
  linear.try_emplace(j, 0.0);
  quadratic[{i, j}] += v;
}

std::vector<std::size_t> QuboProblem::variables() const {
  std::vector<std::size_t> vars;
  vars.reserve(linear.size());
  for (const auto& [v, _] : linear) vars.push_back(v);
  return vars;
}

double QuboProblem::energy(const std::map<std::size_t, std::uint8_t>& x) const {
  double e = offset;
  for (const auto& [i, a] : linear) {
    if (x.at(i)) e += a;
  }
  for (const auto& [key, b] : quadratic) {
    if (x.at(key.first) && x.at(key.second)) e += b;
  }
  return e;
}

void IsingProblem::add_coupling(std::size_t i, std::size_t j, double v) {
  if (i == j) throw DimensionError("no self-coupling in an Ising problem");
  if (i > j) std::swap(i, j);
  h.try_emplace(i, 0.0);
  h.try_emplace(j, 0.0);
  J[{i, j}] += v;
}

std::vector<std::size_t> IsingProblem::variables() const {
  std::vector<std::size_t> vars;
  vars.reserve(h.size());
  for (const auto& [v, _] : h) vars.push_back(v);
  return vars;
}

double IsingProblem::energy(const std::map<std::size_t, int>& s) const {
  double e = offset;
  for (const auto& [i, hi] : h) e += hi * s.at(i);
  for (const auto& [key, jij] : J) e += jij * s.at(key.first) * s.at(key.second);
  return e;
}

double IsingProblem::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [_, v] : h) m = std::max(m, std::abs(v));
  for (const auto& [_, v] : J) m = std::max(m, std::abs(v));
  return m;
}

QuboProblem to_qubo(const ReducedProblem& rp) {
  QuboProblem q;
  q.offset = rp.offset();
  const std::size_t m = rp.size();
  for (std::size_t i = 0; i < m; ++i) q.linear[i] = rp.bias(i);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double w = rp.weight(i, j);
      if (w != 0.0) q.quadratic[{i, j}] = -w;
    }
  }
  return q;
}

// x = (s + 1) / 2
IsingProblem qubo_to_ising(const QuboProblem& q) {
  IsingProblem ising;
  ising.offset = q.offset;
  for (const auto& [i, a] : q.linear) {
    ising.h[i] += a / 2.0;
    ising.offset += a / 2.0;
  }
  for (const auto& [key, b] : q.quadratic) {
    ising.J[key] += b / 4.0;
    ising.h[key.first] += b / 4.0;
    ising.h[key.second] += b / 4.0;
    ising.offset += b / 4.0;
  }
  return ising;
}

// s = 2x - 1
QuboProblem ising_to_qubo(const IsingProblem& ising) {
  QuboProblem q;
  q.offset = ising.offset;
  for (const auto& [i, hi] : ising.h) {
    q.linear[i] += 2.0 * hi;
    q.offset -= hi;
  }
  for (const auto& [key, jij] : ising.J) {
    q.quadratic[key] += 4.0 * jij;
    q.linear[key.first] -= 2.0 * jij;
    q.linear[key.second] -= 2.0 * jij;
    q.offset += jij;
  }
  return q;
}

}  // namespace qbm
