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

#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "qbm/error.hpp"
#include "qbm/trainer.hpp"

using namespace qbm;

namespace {

ClassicalSampler exact_sampler() {
  SamplerConfig c;
  c.kind = SamplerKind::kExact;
  return ClassicalSampler(c);
}

std::vector<EncodedDataPoint> random_points(std::size_t n, std::size_t inputs, std::uint64_t seed) {
  std::vector<EncodedDataPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({test::random_inputs(inputs, seed * 1000 + i), {static_cast<std::uint8_t>((seed + i) % 2)}});
  }
  return pts;
}

double oracle_nll(const BMParameters& p, const std::vector<EncodedDataPoint>& pts) {
  double total = 0.0;
  for (const auto& x : pts) total += test::label_nll(p, x.inputs, x.label[0]);
  return total;
}

}  // namespace

TEST_CASE("nll matches the enumeration oracle and zero-parameter value") {
  const auto pts = random_points(4, 3, 1);
  CHECK(nll(BMParameters(UnitLayout{3, 2, 1}), pts, 1.0) == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
  for (std::uint64_t s = 0; s < 4; ++s) {
    const BMParameters p = test::random_params({3, 2, 1}, s);
    CHECK(nll(p, pts, 1.0) == doctest::Approx(oracle_nll(p, pts)).epsilon(1e-12));
  }
  // Hand-solvable: one label-hidden coupling w, everything else zero.
  BMParameters h(UnitLayout{1, 1, 1});
  const double w = 0.7;
  h.set_coupling(0, 1, w);
  // Free states (l, h): energies 0, 0, 0, -w. P(l=1) = (1 + e^w) / (3 + e^w).
  const std::vector<EncodedDataPoint> one{{{0.4}, {1}}};
  CHECK(nll(h, one, 1.0) == doctest::Approx(-std::log((1.0 + std::exp(w)) / (3.0 + std::exp(w)))).epsilon(1e-12));
  CHECK_THROWS_AS(nll(BMParameters(UnitLayout{1, kMaxExactUnits, 1}), one, 1.0), Error);
}

TEST_CASE("exact phase moments equal analytic conditional expectations") {
  const BMParameters p = test::random_params({2, 2, 1}, 5);
  const EncodedDataPoint x{{0.25, 0.75}, {1}};
  const auto full = test::free_distribution(p, x.inputs);
  const Moments neg = phase_moments(p, x, Phase::kNegative, exact_sampler(), 0);
  const Moments pos = phase_moments(p, x, Phase::kPositive, exact_sampler(), 0);
  double mass = 0.0;
  for (std::size_t c = 0; c < 8; ++c) mass += (c & 1u) ? full[c] : 0.0;
  for (std::size_t f = 0; f < 3; ++f) {
    double en = 0.0;
    double ep = 0.0;
    for (std::size_t c = 0; c < 8; ++c) {
      en += full[c] * ((c >> f) & 1u);
      if (c & 1u) ep += full[c] / mass * ((c >> f) & 1u);
    }
    CHECK(neg.first[f] == doctest::Approx(en).epsilon(1e-12));
    CHECK(pos.first[f] == doctest::Approx(ep).epsilon(1e-12));
  }
  CHECK(pos.first[0] == 1.0);

  const Moments zero = phase_moments(BMParameters(UnitLayout{2, 2, 1}), x, Phase::kNegative, exact_sampler(), 0);
  for (double v : zero.first) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("exact gradient matches central finite differences of the NLL") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BMParameters p = test::random_params({4, 3, 1}, seed);
    const auto pts = random_points(3, 4, seed);
    const Gradient g = compute_gradient(p, pts, exact_sampler(), 0);
    REQUIRE(g.values.size() == p.size());
    const double h = 1e-4;
    for (std::size_t i = 0; i < p.size(); ++i) {
      BMParameters a = p;
      BMParameters b = p;
      a.values()[i] += h;
      b.values()[i] -= h;
      const double fd = -(oracle_nll(a, pts) - oracle_nll(b, pts)) / (2.0 * h) / 3.0;
      CHECK(std::abs(g.values[i] - fd) <= 1e-5);
    }
  }
}

TEST_CASE("gradient special cases") {
  const BMParameters p = test::random_params({3, 2, 1}, 1);
  const std::vector<EncodedDataPoint> zero_input{{{0.0, 0.0, 0.0}, {1}}};
  const Gradient g = compute_gradient(p, zero_input, exact_sampler(), 0);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t f = 0; f < 3; ++f) CHECK(g.values[p.input_weight_index(k, f)] == 0.0);
  }
  CHECK_THROWS_AS(compute_gradient(p, std::vector<EncodedDataPoint>{}, exact_sampler(), 0), Error);
  // Parameters that make the label certain give identical phases.
  BMParameters sure(UnitLayout{1, 1, 1});
  sure.set_bias(0, -60.0);
  const Gradient z = compute_gradient(sure, std::vector<EncodedDataPoint>{{{0.5}, {1}}}, exact_sampler(), 0);
  for (double v : z.values) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("apply_update: zero rate, NLL decrease, linearity") {
  const BMParameters p = test::random_params({4, 3, 1}, 9);
  const auto pts = random_points(4, 4, 9);
  const Gradient g = compute_gradient(p, pts, exact_sampler(), 0);
  CHECK(apply_update(p, g, 0.0) == p);
  CHECK(nll(apply_update(p, g, 0.01), pts, 1.0) < nll(p, pts, 1.0));

  const double eta = 1e-3;
  const BMParameters two = apply_update(apply_update(p, g, eta), g, eta);
  const BMParameters once = apply_update(p, g, 2.0 * eta);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(two.values()[i] - once.values()[i]) <= eta * eta);

  Gradient wrong{UnitLayout{4, 2, 1}, std::vector<double>(parameter_count({4, 2, 1}), 0.0)};
  CHECK_THROWS_AS(apply_update(p, wrong, 0.1), DimensionError);
}

TEST_CASE("NLL is non-increasing over 50 exact full-batch steps") {
  BMParameters p = test::random_params({3, 2, 1}, 4);
  const auto pts = random_points(4, 3, 4);
  double prev = nll(p, pts, 1.0);
  for (int step = 0; step < 50; ++step) {
    p = apply_update(p, compute_gradient(p, pts, exact_sampler(), 0), 0.1);
    const double cur = nll(p, pts, 1.0);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("predict: zero parameters, forced label, exact conditional") {
  const auto x = test::random_inputs(3, 2);
  CHECK(predict(BMParameters(UnitLayout{3, 2, 1}), x, exact_sampler(), 0).score == doctest::Approx(0.5));

  SamplerConfig sc;
  sc.kind = SamplerKind::kGibbs;
  sc.reads = 2000;
  sc.sweeps = 20;
  const Prediction z = predict(BMParameters(UnitLayout{3, 2, 1}), x, ClassicalSampler(sc), 1);
  CHECK(std::abs(z.score - 0.5) <= 3.0 * 0.5 / std::sqrt(2000.0));

  BMParameters forced(UnitLayout{3, 2, 1});
  forced.set_bias(0, -10.0);
  const Prediction f = predict(forced, x, exact_sampler(), 0);
  CHECK(f.score >= 0.99);
  CHECK(f.label == 1);

  for (std::uint64_t s = 0; s < 5; ++s) {
    const BMParameters p = test::random_params({3, 2, 1}, s);
    const double want = std::exp(-test::label_nll(p, x, 1));
    CHECK(std::abs(predict(p, x, exact_sampler(), 0).score - want) <= 1e-12);
  }
}

TEST_CASE("train: zero epochs, trace shape, determinism") {
  const auto data = test::bars_and_stripes();
  const BMParameters p0 = test::random_params({16, 4, 1}, 1, 0.1);
  TrainConfig c;
  c.epochs = 0;
  const TrainResult none = train(p0, data, c, exact_sampler());
  CHECK(none.params == p0);
  CHECK(none.trace.empty());

  c.epochs = 3;
  c.batch_size = 4;
  c.learning_rate = 0.2;
  c.seed = 5;
  c.record_nll = true;
  const std::vector<EvalSplit> splits{{"train", data}};
  const TrainResult a = train(p0, data, c, exact_sampler(), splits);
  const TrainResult b = train(p0, data, c, exact_sampler(), splits);
  CHECK(a.params == b.params);
  REQUIRE(a.trace.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(a.trace[e].epoch == e + 1);
    CHECK(a.trace[e].acc >= 0.0);
    CHECK(a.trace[e].acc <= 1.0);
    CHECK(a.trace[e].auc >= 0.0);
    CHECK(a.trace[e].auc <= 1.0);
    CHECK(std::isfinite(a.trace[e].nll));
  }
  std::ostringstream csv;
  write_trace_csv(csv, a.trace);
  const std::string text = csv.str();
  CHECK(text.rfind("epoch,split,acc,auc,nll\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("bars and stripes reach full train accuracy with the exact sampler") {
  const auto data = test::bars_and_stripes();
  REQUIRE(data.size() == 28);
  TrainConfig c;
  c.epochs = 20;
  c.batch_size = 1;
  c.learning_rate = 1.0;
  c.seed = 0;
  const std::vector<EvalSplit> splits{{"train", data}};
  const TrainResult r = train(init_params({16, 4, 1}, 0), data, c, exact_sampler(), splits);
  double best = 0.0;
  for (const auto& rec : r.trace) best = std::max(best, rec.acc);
  CHECK(best == 1.0);
}
