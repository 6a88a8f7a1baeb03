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
#include <array>
#include <set>
#include <sstream>

#include "doctest.h"
#include "qbm/error.hpp"
#include "qbm/topology.hpp"

using namespace qbm;

namespace {

constexpr std::array<int, 12> kVert = {2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6};
constexpr std::array<int, 12> kHoriz = {6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10};

bool fabric(int m, const PegasusCoord& c) { return !(c.w == 0 && c.k < 2) && !(c.w == m - 1 && c.k >= 10); }

// Geometric recount. A vertical qubit (u=0) is the segment at column
// 12w+k covering rows [12z+kVert[k], +12); a horizontal qubit (u=1) is the
// segment at row 12w+k covering columns [12z+kHoriz[k], +12). Internal
// couplers join crossing segments, odd couplers join k=2j with k=2j+1 on
// the same segment slot, external couplers join consecutive z.
std::set<std::pair<std::array<int, 4>, std::array<int, 4>>> pegasus_oracle(int m) {
  std::vector<PegasusCoord> nodes;
  for (int u = 0; u < 2; ++u)
    for (int w = 0; w < m; ++w)
      for (int k = 0; k < 12; ++k)
        for (int z = 0; z < m - 1; ++z)
          if (fabric(m, {u, w, k, z})) nodes.push_back({u, w, k, z});
  auto key = [](const PegasusCoord& c) { return std::array<int, 4>{c.u, c.w, c.k, c.z}; };
  std::set<std::pair<std::array<int, 4>, std::array<int, 4>>> edges;
  auto add = [&](const PegasusCoord& a, const PegasusCoord& b) {
    auto ka = key(a);
    auto kb = key(b);
    if (kb < ka) std::swap(ka, kb);
    edges.insert({ka, kb});
  };
  for (const auto& a : nodes) {
    for (const auto& b : nodes) {
      if (key(b) <= key(a)) continue;
      if (a.u == b.u) {
        if (a.w == b.w && a.z == b.z && a.k / 2 == b.k / 2) add(a, b);
        if (a.w == b.w && a.k == b.k && std::abs(a.z - b.z) == 1) add(a, b);
      } else {
        const PegasusCoord& v = a.u == 0 ? a : b;
        const PegasusCoord& h = a.u == 0 ? b : a;
        const int col = 12 * v.w + v.k;
        const int row = 12 * h.w + h.k;
        const int v0 = 12 * v.z + kVert[v.k];
        const int h0 = 12 * h.z + kHoriz[h.k];
        if (col >= h0 && col < h0 + 12 && row >= v0 && row < v0 + 12) add(a, b);
      }
    }
  }
  return edges;
}

HardwareGraph path4() {
  HardwareGraph g(4);
  for (NodeId i = 0; i < 4; ++i) g.add_node(i);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  return g;
}

void check_partition_invariants(const HardwareGraph& g, const PartitionPlan& plan, std::size_t k) {
  REQUIRE(plan.region_count() == k);
  CHECK(plan.buffer.empty());
  std::vector<int> owner(g.id_space(), -1);
  std::size_t covered = 0;
  for (std::size_t r = 0; r < k; ++r) {
    CHECK_FALSE(plan.regions[r].empty());
    CHECK(std::is_sorted(plan.regions[r].begin(), plan.regions[r].end()));
    CHECK(is_connected_subset(g, plan.regions[r]));
    for (NodeId n : plan.regions[r]) {
      CHECK(owner[n] == -1);
      owner[n] = static_cast<int>(r);
      ++covered;
    }
  }
  CHECK(covered == g.node_count());
  CHECK(balance_ratio(plan) <= 1.3);
}

std::size_t cross_scan(const HardwareGraph& g, const PartitionPlan& plan) {
  std::vector<int> owner(g.id_space(), -1);
  for (std::size_t r = 0; r < plan.region_count(); ++r)
    for (NodeId n : plan.regions[r]) owner[n] = static_cast<int>(r);
  std::size_t cross = 0;
  for (const auto& [a, b] : g.edges())
    if (owner[a] >= 0 && owner[b] >= 0 && owner[a] != owner[b]) ++cross;
  return cross;
}

}  // namespace

TEST_CASE("pegasus edge sets match the geometric recount") {
  for (int m : {2, 3, 4, 5}) {
    const HardwareGraph g = pegasus(m);
    const auto oracle = pegasus_oracle(m);
    std::set<std::pair<std::array<int, 4>, std::array<int, 4>>> got;
    for (const auto& [a, b] : g.edges()) {
      const PegasusCoord ca = *g.coord(a);
      const PegasusCoord cb = *g.coord(b);
      auto ka = std::array<int, 4>{ca.u, ca.w, ca.k, ca.z};
      auto kb = std::array<int, 4>{cb.u, cb.w, cb.k, cb.z};
      if (kb < ka) std::swap(ka, kb);
      got.insert({ka, kb});
    }
    CHECK(got == oracle);
    CHECK(g.edge_count() == oracle.size());
  }
}

TEST_CASE("pegasus regression sizes and degree bound") {
  const std::array<std::array<std::size_t, 3>, 5> expected = {
      {{2, 40, 164}, {3, 128, 704}, {4, 264, 1604}, {6, 680, 4484}, {16, 5640, 40484}}};
  for (const auto& [m, nodes, edges] : expected) {
    const HardwareGraph g = pegasus(static_cast<int>(m));
    CHECK(g.node_count() == nodes);
    CHECK(g.edge_count() == edges);
    CHECK(g.max_degree() <= 15);
    if (m >= 4) CHECK(g.max_degree() == 15);
  }
}

TEST_CASE("pegasus interior nodes have degree exactly 15") {
  const int m = 8;
  const HardwareGraph g = pegasus(m);
  std::size_t interior = 0;
  for (NodeId n : g.nodes()) {
    const PegasusCoord c = *g.coord(n);
    if (c.w >= 2 && c.w <= m - 3 && c.z >= 1 && c.z <= m - 3) {
      CHECK(g.degree(n) == 15);
      ++interior;
    }
  }
  CHECK(interior > 0);
}

TEST_CASE("pegasus coordinates round-trip and errors") {
  const int m = 5;
  for (int u = 0; u < 2; ++u)
    for (int w = 0; w < m; ++w)
      for (int k = 0; k < 12; ++k)
        for (int z = 0; z < m - 1; ++z) {
          const PegasusCoord c{u, w, k, z};
          CHECK(pegasus_coordinate(m, pegasus_linear(m, c)) == c);
        }
  CHECK_THROWS_AS(pegasus(1), Error);
  const HardwareGraph g = pegasus(3);
  for (const auto& [a, b] : g.edges()) {
    CHECK(a != b);
    CHECK(g.has_edge(b, a));
  }
}

TEST_CASE("disabled qubits are removed with their couplers") {
  const HardwareGraph full = pegasus(3);
  const std::vector<NodeId> nodes = full.nodes();
  const std::vector<NodeId> disabled{nodes[3], nodes[40]};
  const HardwareGraph g = pegasus(3, disabled);
  CHECK(g.node_count() == full.node_count() - 2);
  CHECK(g.edge_count() == full.edge_count() - full.degree(nodes[3]) - full.degree(nodes[40]) +
                              (full.has_edge(nodes[3], nodes[40]) ? 1 : 0));
  CHECK_FALSE(g.has_node(nodes[3]));
}

TEST_CASE("partition with K=1 and on a toy path") {
  const HardwareGraph g = pegasus(3);
  const PartitionPlan one = partition(g, 1, 0);
  REQUIRE(one.region_count() == 1);
  CHECK(one.regions[0] == g.nodes());
  CHECK(apply_buffer(g, one).buffer.empty());

  const HardwareGraph p = path4();
  const PartitionPlan split{{{0, 1}, {2, 3}}, {}};
  const PartitionPlan buffered = apply_buffer(p, split);
  CHECK(buffered.buffer == std::vector<NodeId>{1, 2});
  CHECK(buffered.regions[0] == std::vector<NodeId>{0});
  CHECK(buffered.regions[1] == std::vector<NodeId>{3});
  CHECK(inter_region_edges(p, split) == 1);
  CHECK(inter_region_edges(p, buffered) == 0);
  CHECK_THROWS_AS(partition(p, 5, 0), Error);
  CHECK_THROWS_AS(partition(p, 0, 0), Error);
}

TEST_CASE("partition invariants across sizes and seeds") {
  const HardwareGraph g = pegasus(6);
  for (std::size_t k : {2, 3, 5, 8}) {
    for (std::uint64_t seed : {0, 1}) {
      const PartitionPlan plan = partition(g, k, seed);
      check_partition_invariants(g, plan, k);
      CHECK(plan == partition(g, k, seed));
      const PartitionPlan b = apply_buffer(g, plan);
      CHECK(cross_scan(g, b) == 0);
      CHECK(apply_buffer(g, b) == b);
    }
  }
}

TEST_CASE("P16 split into ten buffered regions") {
  const HardwareGraph g = pegasus(16);
  const PartitionPlan plan = partition(g, 10, 7);
  check_partition_invariants(g, plan, 10);
  const PartitionPlan b = apply_buffer(g, plan);
  CHECK(cross_scan(g, b) == 0);
  CHECK(inter_region_edges(g, b) == 0);
  CHECK(apply_buffer(g, b) == b);
  std::size_t total = b.buffer.size();
  for (const auto& r : b.regions) total += r.size();
  CHECK(total == g.node_count());
}

TEST_CASE("plan JSON round trip, edge list, and schema errors") {
  const HardwareGraph g = pegasus(3);
  const PartitionPlan plan = apply_buffer(g, partition(g, 3, 1));
  CHECK(plan_from_json(plan_to_json(plan)) == plan);
  CHECK_THROWS_AS(plan_from_json("{\"regions\": [[1,2]], \"buffer\": [], \"extra\": 1}"), FormatError);
  CHECK_THROWS_AS(plan_from_json("{\"regions\": [[1,\"x\"]], \"buffer\": []}"), FormatError);
  CHECK_THROWS_AS(plan_from_json("not json"), FormatError);

  std::ostringstream out;
  write_edge_list(out, path4());
  CHECK(out.str() == "0 1\n1 2\n2 3\n");
}
