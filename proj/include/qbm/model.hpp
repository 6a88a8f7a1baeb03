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

#ifndef QBM_MODEL_HPP
#define QBM_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qbm {

// Unit ordering of the full machine is s = (inputs, labels, hidden).
// "Free index" f in [0, free_units()) enumerates the non-input units:
// labels first, then hidden units.
struct UnitLayout {
  std::size_t inputs = 0;
  std::size_t hidden = 1;
  std::size_t labels = 1;

  std::size_t free_units() const { return hidden + labels; }
  std::size_t total() const { return inputs + hidden + labels; }
  void validate() const;

  friend bool operator==(const UnitLayout&, const UnitLayout&) = default;
};

std::size_t parameter_count(const UnitLayout& layout);

/// Trainable parameters of a fully connected Boltzmann machine.
///
/// Only trainable reals are stored, in the order used by the PBM1 file
/// format: biases of the non-input units, then the weights of the strictly
/// upper triangular weight matrix in row-major order with input-input pairs
/// omitted (input rows first, then non-input rows).
///
/// Energy convention: biases and input weights enter the energy with a plus
/// sign (input weights act as biases once inputs are clamped), couplings among
/// non-input units with a minus sign:
///
///   E(s) = sum_f b_f s_f + sum_{k,f} W_kf v_k s_f - sum_{f<g} W_fg s_f s_g
class BMParameters {
 public:
  BMParameters() = default;
  explicit BMParameters(const UnitLayout& layout);

  const UnitLayout& layout() const { return layout_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  // Offsets into values().
  std::size_t bias_index(std::size_t f) const;
  std::size_t input_weight_index(std::size_t k, std::size_t f) const;
  std::size_t coupling_index(std::size_t f, std::size_t g) const;

  double bias(std::size_t f) const { return values_[bias_index(f)]; }
  double input_weight(std::size_t k, std::size_t f) const {
    return values_[input_weight_index(k, f)];
  }
  // Symmetric; zero on the diagonal.
  double coupling(std::size_t f, std::size_t g) const;

  void set_bias(std::size_t f, double v) { values_[bias_index(f)] = v; }
  void set_input_weight(std::size_t k, std::size_t f, double v) {
    values_[input_weight_index(k, f)] = v;
  }
  void set_coupling(std::size_t f, std::size_t g, double v) {
    values_[coupling_index(f, g)] = v;
  }

  // Weight between full unit indices i and j (symmetric). Returns 0 for
  // i == j and for pairs of input units, which carry no weight.
  double weight(std::size_t i, std::size_t j) const;

  friend bool operator==(const BMParameters&, const BMParameters&) = default;

 private:
  UnitLayout layout_;
  std::vector<double> values_;
};

BMParameters init_params(const UnitLayout& layout, std::uint64_t seed);

// Binary PBM1 record: "PBM1", (inputs, hidden, labels) as u32 LE, then
// values() as f64 LE.
void write_params(std::ostream& out, const BMParameters& params);
BMParameters read_params(std::istream& in);
void save_params(const std::string& path, const BMParameters& params);
BMParameters load_params(const std::string& path);

struct EncodedDataPoint {
  std::vector<double> inputs;        // each in [0, 1]
  std::vector<std::uint8_t> label;   // each in {0, 1}
};

// Energy of a full state (inputs, labels, hidden). Input entries may be
// real-valued; non-input entries are expected to be 0 or 1.
double energy(const BMParameters& params, std::span<const double> state);

/// Energy over the free units left after clamping:
///   E(x) = offset + sum_i bias_i x_i - sum_{i<j} W_ij x_i x_j
/// sampled at temperature T.
class ReducedProblem {
 public:
  ReducedProblem() = default;
  ReducedProblem(std::size_t size, double temperature);

  std::size_t size() const { return bias_.size(); }
  double temperature() const { return temperature_; }
  double offset() const { return offset_; }
  void set_offset(double v) { offset_ = v; }

  double bias(std::size_t i) const { return bias_[i]; }
  void set_bias(std::size_t i, double v) { bias_[i] = v; }
  std::span<const double> biases() const { return bias_; }

  double weight(std::size_t i, std::size_t j) const { return weight_[i * size() + j]; }
  void set_weight(std::size_t i, std::size_t j, double v);
  // Dense symmetric m x m matrix with zero diagonal.
  std::span<const double> weight_matrix() const { return weight_; }

  double energy(std::span<const std::uint8_t> x) const;
  // E(x with x_i = 1) - E(x with x_i = 0).
  double flip_cost(std::size_t i, std::span<const std::uint8_t> x) const;

 private:
  std::vector<double> bias_;
  std::vector<double> weight_;
  double offset_ = 0.0;
  double temperature_ = 1.0;
};

// Free units: all non-input units, in free-index order.
ReducedProblem clamp_inputs(const BMParameters& params, std::span<const double> inputs,
                            double temperature = 1.0);
// Free units: hidden units only, in order.
ReducedProblem clamp_inputs_and_label(const BMParameters& params,
                                      std::span<const double> inputs,
                                      std::span<const std::uint8_t> label,
                                      double temperature = 1.0);

// Quadratic pseudo-Boolean model over x in {0,1}:
//   E(x) = offset + sum linear_i x_i + sum_{i<j} quadratic_ij x_i x_j
struct QuboProblem {
  std::map<std::size_t, double> linear;
  std::map<std::pair<std::size_t, std::size_t>, double> quadratic;
  double offset = 0.0;

  // Accumulates into the canonical (min, max) key.
  void add_quadratic(std::size_t i, std::size_t j, double v);
  std::vector<std::size_t> variables() const;
  // x indexed by variable label.
  double energy(const std::map<std::size_t, std::uint8_t>& x) const;
};

// Ising model over s in {-1,+1}:
//   E(s) = offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j
struct IsingProblem {
  std::map<std::size_t, double> h;
  std::map<std::pair<std::size_t, std::size_t>, double> J;
  double offset = 0.0;

  void add_coupling(std::size_t i, std::size_t j, double v);
  std::vector<std::size_t> variables() const;
  double energy(const std::map<std::size_t, int>& s) const;
  double max_abs_coefficient() const;
};

QuboProblem to_qubo(const ReducedProblem& rp);
IsingProblem qubo_to_ising(const QuboProblem& q);
QuboProblem ising_to_qubo(const IsingProblem& ising);

}  // namespace qbm

#endif  // QBM_MODEL_HPP
