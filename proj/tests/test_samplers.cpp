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
#include <map>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "qbm/error.hpp"
#include "qbm/samplers.hpp"

using namespace qbm;

namespace {

SamplerConfig config(SamplerKind kind, std::size_t reads, std::uint64_t seed) {
  SamplerConfig c;
  c.kind = kind;
  c.reads = reads;
  c.seed = seed;
  return c;
}

std::vector<double> marginals(const SampleSet& s) { return moments(s).first; }

}  // namespace

TEST_CASE("exact_distribution examples") {
  const auto uniform = exact_distribution(ReducedProblem(3, 1.0));
  for (double p : uniform) CHECK(p == doctest::Approx(0.125).epsilon(1e-15));

  for (double t : {0.5, 1.0, 2.0}) {
    ReducedProblem one(1, t);
    one.set_bias(0, std::log(3.0) * t);
    const auto p = exact_distribution(one);
    CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-12));
  }

  const ReducedProblem rp = test::random_problem(6, 4, 1.0, 1.0);
  ReducedProblem scaled(6, 3.0);
  for (std::size_t i = 0; i < 6; ++i) {
    scaled.set_bias(i, 3.0 * rp.bias(i));
    for (std::size_t j = i + 1; j < 6; ++j) scaled.set_weight(i, j, 3.0 * rp.weight(i, j));
  }
  const auto a = exact_distribution(rp);
  const auto b = exact_distribution(scaled);
  const auto oracle = test::boltzmann_table(rp);
  CHECK(std::abs(std::accumulate(a.begin(), a.end(), 0.0) - 1.0) <= 1e-12);
  for (std::size_t c = 0; c < a.size(); ++c) {
    CHECK(a[c] >= 0.0);
    CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
    CHECK(a[c] == doctest::Approx(oracle[c]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(exact_distribution(ReducedProblem(kMaxExactUnits + 1, 1.0)), Error);
}

TEST_CASE("log_partition and exact_moments agree with enumeration") {
  const ReducedProblem rp = test::random_problem(5, 8);
  double z = 0.0;
  for (std::size_t c = 0; c < 32; ++c) z += std::exp(-test::reduced_energy(rp, test::bits_of(c, 5)));
  CHECK(log_partition(rp) == doctest::Approx(std::log(z)).epsilon(1e-12));

  const auto p = test::boltzmann_table(rp);
  const Moments m = exact_moments(rp);
  for (std::size_t i = 0; i < 5; ++i) {
    double e = 0.0;
    for (std::size_t c = 0; c < 32; ++c) e += p[c] * ((c >> i) & 1u);
    CHECK(m.first[i] == doctest::Approx(e).epsilon(1e-12));
    for (std::size_t j = 0; j < 5; ++j) {
      double ej = 0.0;
      for (std::size_t c = 0; c < 32; ++c) ej += p[c] * (((c >> i) & (c >> j)) & 1u);
      CHECK(m.pair(i, j) == doctest::Approx(ej).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact_sample binomial bounds, single read and determinism") {
  const SampleSet s = exact_sample(ReducedProblem(2, 1.0), config(SamplerKind::kExact, 1000, 3)).aggregated();
  CHECK(s.total() == 1000);
  REQUIRE(s.rows() == 4);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(s.multiplicity(r) >= 200);
    CHECK(s.multiplicity(r) <= 300);
  }
  CHECK(exact_sample(ReducedProblem(2, 1.0), config(SamplerKind::kExact, 1, 0)).total() == 1);
  const ReducedProblem rp = test::random_problem(4, 1);
  CHECK(exact_sample(rp, config(SamplerKind::kExact, 500, 9)) == exact_sample(rp, config(SamplerKind::kExact, 500, 9)));
}

TEST_CASE("moments hand examples") {
  SampleSet one(3);
  one.add(std::vector<std::uint8_t>{1, 0, 1});
  const Moments a = moments(one);
  CHECK(a.first == std::vector<double>{1, 0, 1});
  CHECK(a.pair(0, 2) == 1.0);
  CHECK(a.pair(0, 1) == 0.0);
  CHECK(a.pair(1, 2) == 0.0);

  SampleSet two(2);
  two.add(std::vector<std::uint8_t>{1, 1}, 5);
  two.add(std::vector<std::uint8_t>{0, 0}, 5);
  const Moments b = moments(two);
  CHECK(b.first[0] == 0.5);
  CHECK(b.first[1] == 0.5);
  CHECK(b.pair(0, 1) == 0.5);
  CHECK_THROWS(moments(SampleSet(2)));
}

TEST_CASE("Gibbs update probability is one half at zero flip cost") {
  // A single free unit with zero bias is a fair coin under every sweep.
  SamplerConfig c = config(SamplerKind::kGibbs, 100000, 5);
  c.sweeps = 1;
  const SampleSet s = gibbs_sample(ReducedProblem(1, 1.0), c);
  CHECK(std::abs(marginals(s)[0] - 0.5) <= 3.0 * 0.5 / std::sqrt(100000.0));
}

TEST_CASE("all samplers give uniform marginals on zero parameters") {
  const ReducedProblem zero(5, 1.0);
  const double sigma = 0.5 / std::sqrt(100000.0);
  for (SamplerKind k : {SamplerKind::kExact, SamplerKind::kGibbs, SamplerKind::kAnnealing}) {
    SamplerConfig c = config(k, 100000, 2);
    c.sweeps = 5;
    c.schedule = geometric_schedule(0.1, 10.0, 20);
    const auto m = marginals(sample(zero, c));
    for (double v : m) CHECK(std::abs(v - 0.5) <= 3.0 * sigma);
  }
}

TEST_CASE("Gibbs reaches the Boltzmann table") {
  const ReducedProblem rp = test::random_problem(6, 21);
  SamplerConfig c = config(SamplerKind::kGibbs, 100000, 1);
  c.sweeps = 200;
  CHECK(total_variation(gibbs_sample(rp, c), test::boltzmann_table(rp)) <= 0.02);
}

TEST_CASE("SA with a constant schedule at beta = 1/T reaches the Boltzmann table") {
  const ReducedProblem rp = test::random_problem(6, 22, 1.0, 1.5);
  SamplerConfig c = config(SamplerKind::kAnnealing, 100000, 1);
  c.temperature = 1.5;
  c.schedule.assign(100, 1.0 / 1.5);
  CHECK(total_variation(sa_sample(rp, c), test::boltzmann_table(rp)) <= 0.05);
}

TEST_CASE("SA ending at large beta finds the unique argmin") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ReducedProblem rp = test::random_problem(8, 300 + seed, 2.0);
    std::size_t best = 0;
    double emin = INFINITY;
    for (std::size_t c = 0; c < 256; ++c) {
      const double e = test::reduced_energy(rp, test::bits_of(c, 8));
      if (e < emin) {
        emin = e;
        best = c;
      }
    }
    SamplerConfig c = config(SamplerKind::kAnnealing, 200, seed);
    c.schedule = geometric_schedule(0.1, 50.0, 500);
    const SampleSet s = sa_sample(rp, c).aggregated();
    const auto modal = s.state(s.modal_row());
    CHECK(std::vector<std::uint8_t>(modal.begin(), modal.end()) == test::bits_of(best, 8));
  }
}

TEST_CASE("anneal_qubo with cluster moves keeps the Boltzmann table") {
  Rng rng(77);
  const std::vector<std::size_t> labels{3, 5, 8, 9, 12, 20};
  QuboProblem q;
  for (std::size_t v : labels) q.linear[v] = 2.0 * uniform01(rng) - 1.0;
  for (std::size_t a = 0; a < labels.size(); ++a)
    for (std::size_t b = a + 1; b < labels.size(); ++b) q.add_quadratic(labels[a], labels[b], uniform01(rng) - 0.5);
  q.add_quadratic(3, 5, -2.5);
  q.add_quadratic(8, 9, -2.5);
  q.add_quadratic(9, 12, -2.5);
  std::vector<double> table(64);
  double z = 0.0;
  for (std::size_t c = 0; c < 64; ++c) {
    std::map<std::size_t, std::uint8_t> x;
    for (std::size_t i = 0; i < 6; ++i) x[labels[i]] = (c >> i) & 1u;
    z += table[c] = std::exp(-q.energy(x));
  }
  for (double& p : table) p /= z;
  SamplerConfig c = config(SamplerKind::kAnnealing, 100000, 3);
  c.schedule.assign(100, 1.0);
  const std::vector<std::vector<std::size_t>> clusters{{3, 5}, {8, 9, 12}, {20}};
  const SampleSet s = anneal_qubo(q, c, clusters);
  CHECK(s.variables() == labels);
  CHECK(total_variation(s, table) <= 0.03);

  CHECK_THROWS_AS(anneal_qubo(q, c, std::vector<std::vector<std::size_t>>{{3, 4}}), DimensionError);
  CHECK_THROWS_AS(anneal_qubo(q, c, std::vector<std::vector<std::size_t>>{{3, 5}, {5, 8}}), DimensionError);
}

TEST_CASE("sampler determinism per seed") {
  const ReducedProblem rp = test::random_problem(6, 3);
  for (SamplerKind k : {SamplerKind::kExact, SamplerKind::kGibbs, SamplerKind::kAnnealing}) {
    SamplerConfig c = config(k, 300, 77);
    c.sweeps = 10;
    c.schedule = geometric_schedule(0.1, 3.0, 30);
    CHECK(sample(rp, c) == sample(rp, c));
    SamplerConfig d = c;
    d.seed = 78;
    CHECK_FALSE(sample(rp, c) == sample(rp, d));
  }
}

TEST_CASE("schedule helpers and config validation") {
  const auto g = geometric_schedule(0.1, 10.0, 1000);
  REQUIRE(g.size() == 1000);
  CHECK(g.front() == doctest::Approx(0.1));
  CHECK(g.back() == doctest::Approx(10.0));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] >= g[i - 1]);
  const auto d = default_schedule(2.0);
  CHECK(d.size() == 1000);
  CHECK(d.back() == doctest::Approx(5.0));

  SamplerConfig bad;
  bad.kind = SamplerKind::kAnnealing;
  bad.schedule = {1.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.schedule = {};
  bad.temperature = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(parse_sampler_kind("sa") == SamplerKind::kAnnealing);
  CHECK(to_string(SamplerKind::kGibbs) == "gibbs");
  CHECK_THROWS_AS(parse_sampler_kind("qpu"), Error);
}

TEST_CASE("SampleSet text round trip") {
  const SampleSet s = exact_sample(test::random_problem(4, 2), config(SamplerKind::kExact, 400, 1)).aggregated();
  std::stringstream out;
  s.write_text(out);
  std::istringstream in(out.str());
  CHECK(SampleSet::read_text(in) == s);
  std::istringstream bad("01x 3\n");
  CHECK_THROWS_AS(SampleSet::read_text(bad), FormatError);
}
