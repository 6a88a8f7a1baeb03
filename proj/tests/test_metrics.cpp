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
#include <vector>

#include "doctest.h"
#include "qbm/error.hpp"
#include "qbm/metrics.hpp"
#include "qbm/random.hpp"

using namespace qbm;

namespace {

ScoredPrediction sp(double score, std::uint8_t truth) { return {score, threshold_label(score), truth}; }

double pair_count_auc(const std::vector<ScoredPrediction>& p) {
  double good = 0.0;
  double pairs = 0.0;
  for (const auto& a : p) {
    if (!a.truth) continue;
    for (const auto& b : p) {
      if (b.truth) continue;
      pairs += 1.0;
      good += a.score > b.score ? 1.0 : (a.score == b.score ? 0.5 : 0.0);
    }
  }
  return good / pairs;
}

}  // namespace

TEST_CASE("accuracy examples") {
  CHECK(accuracy(std::vector<ScoredPrediction>{sp(0.9, 1), sp(0.1, 0)}) == 1.0);
  CHECK(accuracy(std::vector<ScoredPrediction>{sp(0.9, 1), sp(0.9, 0)}) == 0.5);
  CHECK_THROWS_AS(accuracy(std::vector<ScoredPrediction>{}), Error);
}

TEST_CASE("constant-positive accuracy equals prevalence exactly") {
  std::vector<ScoredPrediction> p;
  for (int i = 0; i < 100; ++i) p.push_back(sp(1.0, i < 73 ? 1 : 0));
  CHECK(accuracy(p) == 0.73);
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<ScoredPrediction> q;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t t = rng() % 2;
      pos += t;
      q.push_back(sp(1.0, t));
    }
    CHECK(accuracy(q) == static_cast<double>(pos) / static_cast<double>(n));
  }
}

TEST_CASE("auc examples") {
  CHECK(auc(std::vector<ScoredPrediction>{sp(0.9, 1), sp(0.4, 1), sp(0.6, 0), sp(0.1, 0)}) == 0.75);
  CHECK(auc(std::vector<ScoredPrediction>{sp(0.9, 1), sp(0.8, 1), sp(0.2, 0)}) == 1.0);
  CHECK(auc(std::vector<ScoredPrediction>{sp(0.5, 1), sp(0.5, 0), sp(0.5, 0)}) == 0.5);
  CHECK_THROWS_AS(auc(std::vector<ScoredPrediction>{sp(0.5, 1), sp(0.2, 1)}), Error);
}

TEST_CASE("auc equals brute-force pair counting and is invariant under monotone transforms") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    std::vector<ScoredPrediction> p;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse scores so ties are common.
      const double s = static_cast<double>(rng() % 20) / 19.0;
      p.push_back(sp(s, i < 1 ? 1 : (i < 2 ? 0 : rng() % 2)));
    }
    const double a = auc(p);
    CHECK(std::abs(a - pair_count_auc(p)) <= 1e-12);
    std::vector<ScoredPrediction> t = p;
    for (auto& x : t) x.score = std::exp(3.0 * x.score) - 7.0;
    CHECK(std::abs(auc(t) - a) <= 1e-12);
  }
}

TEST_CASE("composite examples") {
  CHECK(composite(1.0, 1.0) == 1.0);
  CHECK(composite(0.8, 0.6) == doctest::Approx(0.7));
  CHECK(std::abs(composite(0.8510, 0.8208) - 0.8359) <= 1e-12);
}
