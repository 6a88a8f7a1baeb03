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

#include <algorithm>

#include "doctest.h"
#include "qbm/embedding.hpp"
#include "qbm/error.hpp"
#include "qbm/random.hpp"
#include "qbm/topology.hpp"

using namespace qbm;

namespace {

HardwareGraph cycle(NodeId n) {
  HardwareGraph g(n);
  for (NodeId i = 0; i < n; ++i) g.add_node(i);
  for (NodeId i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

std::vector<NodeId> all(const HardwareGraph& g) { return g.nodes(); }

}  // namespace

TEST_CASE("hand-built K3 on a 6-cycle validates") {
  const HardwareGraph g = cycle(6);
  const Embedding e{{{0, 1}, {2, 3}, {4, 5}}};
  CHECK(validate_embedding(e, 3, g, all(g)).ok);
  CHECK(e.qubit_count() == 6);
  CHECK(e.max_chain_length() == 2);
  const ChainStats s = chain_stats(e);
  CHECK(s.min == 2);
  CHECK(s.mean == 2.0);
}

TEST_CASE("validation reports each violation kind") {
  const HardwareGraph g = cycle(6);
  const auto region = all(g);
  const auto shared = validate_embedding(Embedding{{{0, 1}, {1, 2}, {3, 4, 5}}}, 3, g, region);
  CHECK_FALSE(shared.ok);
  CHECK(shared.violation.find("disjoint") != std::string::npos);

  const auto split = validate_embedding(Embedding{{{0, 3}, {1, 2}, {4, 5}}}, 3, g, region);
  CHECK_FALSE(split.ok);
  CHECK(split.violation.find("connectivity") != std::string::npos);

  const auto missing = validate_embedding(Embedding{{{0}, {1}, {3}}}, 3, g, region);
  CHECK_FALSE(missing.ok);
  CHECK(missing.violation.find("edge") != std::string::npos);

  const auto outside = validate_embedding(Embedding{{{0, 1}, {2, 3}, {4, 5}}}, 3, g, std::vector<NodeId>{0, 1, 2, 3});
  CHECK_FALSE(outside.ok);
  CHECK(outside.violation.find("containment") != std::string::npos);

  CHECK_FALSE(validate_embedding(Embedding{{{0, 1}, {2, 3}}}, 3, g, region).ok);
  CHECK_FALSE(validate_embedding(Embedding{{{0, 1}, {}, {2, 3}}}, 3, g, region).ok);
}

TEST_CASE("trivial clique sizes") {
  const HardwareGraph g = pegasus(3);
  const auto region = all(g);
  const Embedding one = embed_clique(g, region, 1, 0);
  REQUIRE(one.size() == 1);
  CHECK(one.chains[0].size() == 1);
  const Embedding two = embed_clique(g, region, 2, 0);
  REQUIRE(two.size() == 2);
  CHECK(two.chains[0].size() == 1);
  CHECK(two.chains[1].size() == 1);
  CHECK(g.has_edge(two.chains[0][0], two.chains[1][0]));
  CHECK_THROWS_AS(embed_clique(g, region, 0, 0), Error);
  CHECK_THROWS_AS(embed_clique(g, region, kMaxCliqueSize + 1, 0), Error);
  CHECK_THROWS_AS(embed_clique(g, std::vector<NodeId>{}, 2, 0), Error);
}

TEST_CASE("cliques of growing size embed into a small Pegasus graph") {
  const HardwareGraph g = pegasus(4);
  const auto region = all(g);
  for (std::size_t k : {3, 5, 8, 12, 16}) {
    const Embedding e = embed_clique(g, region, k, k);
    CHECK(validate_embedding(e, k, g, region).ok);
    CHECK(e == embed_clique(g, region, k, k));
  }
}

TEST_CASE("impossible embeddings raise EmbeddingNotFound with context") {
  const HardwareGraph g = cycle(6);
  EmbedOptions o;
  o.attempts = 3;
  try {
    (void)embed_clique(g, all(g), 4, 0, o);
    FAIL("expected EmbeddingNotFound");
  } catch (const EmbeddingNotFound& e) {
    CHECK(e.k() == 4);
    CHECK(e.region_size() == 6);
    CHECK(e.attempts() == 3);
  }
}

TEST_CASE("build_parallel: degenerate plan and buffered regions") {
  const HardwareGraph g = pegasus(4);
  const PartitionPlan one = partition(g, 1, 0);
  const ParallelEmbedding single = build_parallel(g, one, 6, 2);
  REQUIRE(single.size() == 1);
  CHECK(single.regions[0].second == embed_clique(g, one.regions[0], 6, derive_seed(2, 0)));

  const HardwareGraph big = pegasus(6);
  const PartitionPlan plan = apply_buffer(big, partition(big, 4, 1));
  const ParallelEmbedding pe = build_parallel(big, plan, 6, 3);
  REQUIRE(pe.size() == 4);
  std::vector<NodeId> used;
  for (const auto& [r, e] : pe.regions) {
    CHECK(validate_embedding(e, 6, big, plan.regions[r]).ok);
    const auto u = e.used_nodes();
    used.insert(used.end(), u.begin(), u.end());
  }
  std::sort(used.begin(), used.end());
  CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
  CHECK(cross_embedding_edges(big, pe) == 0);
  CHECK(pe == build_parallel(big, plan, 6, 3));
}

TEST_CASE("build_parallel names the failing region") {
  const HardwareGraph g = pegasus(3);
  const PartitionPlan plan = apply_buffer(g, partition(g, 6, 0));
  EmbedOptions o;
  o.attempts = 1;
  o.rounds = 2;
  try {
    (void)build_parallel(g, plan, kMaxCliqueSize, 0, o);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("region") != std::string::npos);
  }
}

TEST_CASE("embedding JSON round trips") {
  const Embedding e{{{4, 7}, {9}, {1, 2, 3}}};
  const std::string text = embedding_to_json(e);
  CHECK(text.find("\"chains\"") != std::string::npos);
  CHECK(embedding_from_json(text) == e);
  CHECK_THROWS_AS(embedding_from_json("{\"chains\": {\"1\": [3]}}"), FormatError);

  const HardwareGraph g = pegasus(4);
  const PartitionPlan plan = apply_buffer(g, partition(g, 2, 0));
  const ParallelEmbedding pe = build_parallel(g, plan, 4, 1);
  CHECK(parallel_from_json(parallel_to_json(pe)) == pe);
}
