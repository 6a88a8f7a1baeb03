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

#ifndef QBM_TOPOLOGY_HPP
#define QBM_TOPOLOGY_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qbm {

using NodeId = std::uint32_t;

// Pegasus coordinate: orientation u (0 vertical, 1 horizontal), perpendicular
// offset w in [0, m), qubit index k in [0, 12), parallel offset z in [0, m-1).
struct PegasusCoord {
  int u = 0;
  int w = 0;
  int k = 0;
  int z = 0;

  friend bool operator==(const PegasusCoord&, const PegasusCoord&) = default;
};

// Undirected simple graph over integer ids in [0, id_space).
class HardwareGraph {
 public:
  HardwareGraph() = default;
  explicit HardwareGraph(std::size_t id_space);

  std::size_t id_space() const { return adjacency_.size(); }
  void add_node(NodeId id);
  void remove_node(NodeId id);
  // Both endpoints must exist. Duplicate edges are ignored.
  void add_edge(NodeId a, NodeId b);

  bool has_node(NodeId id) const { return id < present_.size() && present_[id]; }
  bool has_edge(NodeId a, NodeId b) const;
  // Sorted ascending.
  const std::vector<NodeId>& neighbors(NodeId id) const { return adjacency_[id]; }
  std::size_t degree(NodeId id) const { return adjacency_[id].size(); }

  std::vector<NodeId> nodes() const;
  // Pairs (a, b) with a < b in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t max_degree() const;

  void set_coord(NodeId id, const PegasusCoord& c);
  std::optional<PegasusCoord> coord(NodeId id) const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<char> present_;
  std::vector<std::optional<PegasusCoord>> coords_;
  std::size_t node_count_ = 0;
  std::size_t edge_count_ = 0;
};

// Linear index of a Pegasus coordinate: z + (m-1) * (k + 12 * (w + m * u)).
NodeId pegasus_linear(int m, const PegasusCoord& c);
PegasusCoord pegasus_coordinate(int m, NodeId id);

/// Pegasus P_m fabric: 24 m (m-1) qubits minus the 8 (m-1) boundary qubits
/// without internal couplers, with internal, odd and external couplers.
/// `disabled` removes qubits (device yield maps).
HardwareGraph pegasus(int m, std::span<const NodeId> disabled = {});

struct PartitionPlan {
  std::vector<std::vector<NodeId>> regions;  // each sorted
  std::vector<NodeId> buffer;                // sorted

  std::size_t region_count() const { return regions.size(); }
  friend bool operator==(const PartitionPlan&, const PartitionPlan&) = default;
};

struct PartitionOptions {
  double max_balance = 1.3;
  // Balancing continues towards this ratio after max_balance is reached.
  double target_balance = 1.05;
};

/// Splits the graph into `k` connected, size-balanced regions by
/// simultaneous BFS growth from spread-out seeds, followed by boundary
/// moves from the largest region. Nodes unreachable from every seed go to
/// the buffer.
PartitionPlan partition(const HardwareGraph& g, std::size_t k, std::uint64_t seed,
                        const PartitionOptions& options = {});

// Moves every region node with an edge into a different region to the
// buffer. Idempotent.
PartitionPlan apply_buffer(const HardwareGraph& g, const PartitionPlan& plan);

// max region size / min region size.
double balance_ratio(const PartitionPlan& plan);
// Edges whose endpoints lie in two different regions.
std::size_t inter_region_edges(const HardwareGraph& g, const PartitionPlan& plan);
bool is_connected_subset(const HardwareGraph& g, std::span<const NodeId> subset);

void write_edge_list(std::ostream& out, const HardwareGraph& g);
// {"regions": [[ids]...], "buffer": [ids]}
std::string plan_to_json(const PartitionPlan& plan);
PartitionPlan plan_from_json(const std::string& text);

}  // namespace qbm

#endif  // QBM_TOPOLOGY_HPP
