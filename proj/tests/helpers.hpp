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

// Shared fixtures and brute-force oracles for the test binaries. The oracles
// enumerate states directly from the full-state energy and never call the
// samplers they are used to check.

#ifndef QBM_TESTS_HELPERS_HPP
#define QBM_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "qbm/model.hpp"
#include "qbm/random.hpp"

namespace qbm::test {

inline BMParameters random_params(const UnitLayout& layout, std::uint64_t seed, double scale = 1.0) {
  BMParameters p(layout);
  Rng rng(seed);
  for (double& v : p.values()) v = scale * (2.0 * uniform01(rng) - 1.0);
  return p;
}

inline ReducedProblem random_problem(std::size_t n, std::uint64_t seed, double scale = 1.0, double t = 1.0) {
  ReducedProblem rp(n, t);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    rp.set_bias(i, scale * (2.0 * uniform01(rng) - 1.0));
    for (std::size_t j = i + 1; j < n; ++j) rp.set_weight(i, j, scale * (2.0 * uniform01(rng) - 1.0));
  }
  return rp;
}

inline std::vector<double> random_inputs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = uniform01(rng);
  return v;
}

// Bit i of `code` is free unit i.
inline std::vector<std::uint8_t> bits_of(std::size_t code, std::size_t n) {
  std::vector<std::uint8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (code >> i) & 1u;
  return x;
}

// Direct double sum over i<j of the reduced energy, written independently of
// ReducedProblem::energy.
inline double reduced_energy(const ReducedProblem& rp, const std::vector<std::uint8_t>& x) {
  double e = rp.offset();
  for (std::size_t i = 0; i < rp.size(); ++i) {
    if (!x[i]) continue;
    e += rp.bias(i);
    for (std::size_t j = i + 1; j < rp.size(); ++j) {
      if (x[j]) e -= rp.weight(i, j);
    }
  }
  return e;
}

inline std::vector<double> boltzmann_table(const ReducedProblem& rp) {
  const std::size_t n = rp.size();
  std::vector<double> p(std::size_t{1} << n);
  double emin = INFINITY;
  std::vector<double> e(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    e[c] = reduced_energy(rp, bits_of(c, n));
    emin = std::min(emin, e[c]);
  }
  double z = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) z += p[c] = std::exp(-(e[c] - emin) / rp.temperature());
  for (double& v : p) v /= z;
  return p;
}

// Full-state distribution over the free units (labels then hidden) given
// clamped inputs, from BMParameters energy directly.
inline std::vector<double> free_distribution(const BMParameters& params, const std::vector<double>& inputs,
                                             double t = 1.0) {
  const UnitLayout& l = params.layout();
  const std::size_t nf = l.free_units();
  std::vector<double> e(std::size_t{1} << nf);
  std::vector<double> state(l.total());
  for (std::size_t k = 0; k < l.inputs; ++k) state[k] = inputs[k];
  double emin = INFINITY;
  for (std::size_t c = 0; c < e.size(); ++c) {
    for (std::size_t f = 0; f < nf; ++f) state[l.inputs + f] = static_cast<double>((c >> f) & 1u);
    e[c] = energy(params, state);
    emin = std::min(emin, e[c]);
  }
  double z = 0.0;
  for (double& v : e) z += v = std::exp(-(v - emin) / t);
  for (double& v : e) v /= z;
  return e;
}

// -log p(label | inputs) for a single label unit, by full enumeration.
inline double label_nll(const BMParameters& params, const std::vector<double>& inputs, std::uint8_t label) {
  const std::vector<double> p = free_distribution(params, inputs);
  double mass = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if ((c & 1u) == label) mass += p[c];
  }
  return -std::log(mass);
}

// 4x4 stripes (label 1: constant rows) and bars (label 0: constant
// columns); the all-off and all-on images are ambiguous and left out.
inline std::vector<EncodedDataPoint> bars_and_stripes() {
  std::vector<EncodedDataPoint> out;
  for (std::uint8_t label : {std::uint8_t{1}, std::uint8_t{0}}) {
    for (std::size_t code = 1; code + 1 < 16; ++code) {
      EncodedDataPoint p;
      p.inputs.resize(16);
      for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
          const std::size_t line = label ? r : c;
          p.inputs[r * 4 + c] = static_cast<double>((code >> line) & 1u);
        }
      }
      p.label = {label};
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace qbm::test

#endif  // QBM_TESTS_HELPERS_HPP
