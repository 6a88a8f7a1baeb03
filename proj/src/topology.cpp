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

#include "qbm/topology.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "qbm/error.hpp"
#include "qbm/random.hpp"

namespace qbm {
namespace {

// Per-k start offsets (in half cells) of vertical and horizontal qubits.
constexpr std::array<int, 12> kVerticalOffsets = {2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6};
constexpr std::array<int, 12> kHorizontalOffsets = {6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10};

bool in_fabric(int m, const PegasusCoord& c) {
  if (c.w == 0 && c.k < 2) return false;
  if (c.w == m - 1 && c.k >= 10) return false;
  return true;
}

std::vector<std::size_t> bfs_distances(const HardwareGraph& g, std::span<const NodeId> sources,
                                       const std::vector<int>* allowed = nullptr, int allowed_value = 0) {
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.id_space(), kInf);
  std::deque<NodeId> queue;
  for (NodeId s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const NodeId a = queue.front();
    queue.pop_front();
    for (NodeId b : g.neighbors(a)) {
      if (dist[b] != kInf) continue;
      if (allowed && (*allowed)[b] != allowed_value) continue;
      dist[b] = dist[a] + 1;
      queue.push_back(b);
    }
  }
  return dist;
}

// Whether region r stays connected after removing `removed`.
bool connected_without(const HardwareGraph& g, const std::vector<int>& owner, int r, std::size_t region_size,
                       NodeId removed) {
  if (region_size <= 1) return false;
  NodeId start = removed;
  for (NodeId b : g.neighbors(removed)) {
    if (owner[b] == r) {
      start = b;
      break;
    }
  }
  if (start == removed) return false;
  std::vector<char> seen(g.id_space(), 0);
  seen[removed] = 1;
  seen[start] = 1;
  std::deque<NodeId> queue{start};
  std::size_t reached = 1;
  while (!queue.empty()) {
    const NodeId a = queue.front();
    queue.pop_front();
    for (NodeId b : g.neighbors(a)) {
      if (seen[b] || owner[b] != r) continue;
      seen[b] = 1;
      ++reached;
      queue.push_back(b);
    }
  }
  return reached == region_size - 1;
}

}  // namespace

HardwareGraph::HardwareGraph(std::size_t id_space)
    : adjacency_(id_space), present_(id_space, 0), coords_(id_space) {}

void HardwareGraph::add_node(NodeId id) {
  if (id >= present_.size()) {
    adjacency_.resize(id + 1);
    present_.resize(id + 1, 0);
    coords_.resize(id + 1);
  }
  if (!present_[id]) {
    present_[id] = 1;
    ++node_count_;
  }
}

void HardwareGraph::remove_node(NodeId id) {
  if (!has_node(id)) return;
  for (NodeId b : adjacency_[id]) {
    auto& nb = adjacency_[b];
    nb.erase(std::lower_bound(nb.begin(), nb.end(), id));
    --edge_count_;
  }
  adjacency_[id].clear();
  present_[id] = 0;
  coords_[id].reset();
  --node_count_;
}

void HardwareGraph::add_edge(NodeId a, NodeId b) {
  if (a == b) throw Error("self-loops are not allowed");
  if (!has_node(a) || !has_node(b)) throw Error("edge endpoint is not a node");
  auto& na = adjacency_[a];
  auto it = std::lower_bound(na.begin(), na.end(), b);
  if (it != na.end() && *it == b) return;
  na.insert(it, b);
  auto& nb = adjacency_[b];
  nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  ++edge_count_;
}

bool HardwareGraph::has_edge(NodeId a, NodeId b) const {
  if (!has_node(a) || !has_node(b)) return false;
  return std::binary_search(adjacency_[a].begin(), adjacency_[a].end(), b);
}

std::vector<NodeId> HardwareGraph::nodes() const {
  std::vector<NodeId> out;
  out.reserve(node_count_);
  for (std::size_t i = 0; i < present_.size(); ++i) {
    if (present_[i]) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::vector<std::pair<NodeId, NodeId>> HardwareGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count_);
  for (std::size_t a = 0; a < adjacency_.size(); ++a) {
    for (NodeId b : adjacency_[a]) {
      if (b > a) out.emplace_back(static_cast<NodeId>(a), b);
    }
  }
  return out;
}

std::size_t HardwareGraph::max_degree() const {
  std::size_t d = 0;
  for (const auto& n : adjacency_) d = std::max(d, n.size());
  return d;
}

void HardwareGraph::set_coord(NodeId id, const PegasusCoord& c) {
  if (!has_node(id)) throw Error("coordinate for a missing node");
  coords_[id] = c;
}

std::optional<PegasusCoord> HardwareGraph::coord(NodeId id) const {
  if (id >= coords_.size()) return std::nullopt;
  return coords_[id];
}

NodeId pegasus_linear(int m, const PegasusCoord& c) {
  return static_cast<NodeId>(c.z + (m - 1) * (c.k + 12 * (c.w + m * c.u)));
}

PegasusCoord pegasus_coordinate(int m, NodeId id) {
  PegasusCoord c;
  int q = static_cast<int>(id);
  c.z = q % (m - 1);
  q /= (m - 1);
  c.k = q % 12;
  q /= 12;
  c.w = q % m;
  c.u = q / m;
  return c;
}

HardwareGraph pegasus(int m, std::span<const NodeId> disabled) {
  if (m < 2) throw Error("pegasus requires m >= 2");
  const int m1 = m - 1;
  HardwareGraph g(static_cast<std::size_t>(24 * m * m1));
  for (int u = 0; u < 2; ++u) {
    for (int w = 0; w < m; ++w) {
      for (int k = 0; k < 12; ++k) {
        for (int z = 0; z < m1; ++z) {
          const PegasusCoord c{u, w, k, z};
          if (!in_fabric(m, c)) continue;
          const NodeId id = pegasus_linear(m, c);
          g.add_node(id);
          g.set_coord(id, c);
        }
      }
    }
  }
  auto link = [&](const PegasusCoord& a, const PegasusCoord& b) {
    if (!in_fabric(m, a) || !in_fabric(m, b)) return;
    g.add_edge(pegasus_linear(m, a), pegasus_linear(m, b));
  };
  for (int u = 0; u < 2; ++u) {
    for (int w = 0; w < m; ++w) {
      for (int k = 0; k < 12; ++k) {
        // external couplers: consecutive qubits along a line
        for (int z = 0; z + 1 < m1; ++z) link({u, w, k, z}, {u, w, k, z + 1});
        // odd couplers: the two qubits sharing a line segment
        if (k % 2 == 0) {
          for (int z = 0; z < m1; ++z) link({u, w, k, z}, {u, w, k + 1, z});
        }
      }
    }
  }
  // internal couplers between crossing vertical and horizontal qubits
  for (int w = 0; w < m; ++w) {
    for (int k = 0; k < 12; ++k) {
      for (int kk = 0; kk < 12; ++kk) {
        for (int z = 0; z < m1; ++z) {
          const int hw = z + (kk < kVerticalOffsets[k] ? 1 : 0);
          const int hz = w - (k < kHorizontalOffsets[kk] ? 1 : 0);
          if (hw < 0 || hw >= m || hz < 0 || hz >= m1) continue;
          link({0, w, k, z}, {1, hw, kk, hz});
        }
      }
    }
  }
  for (NodeId d : disabled) g.remove_node(d);
  return g;
}

PartitionPlan partition(const HardwareGraph& g, std::size_t k, std::uint64_t seed, const PartitionOptions& options) {
  const std::vector<NodeId> all = g.nodes();
  if (k < 1 || k > all.size()) {
    throw Error("cannot partition " + std::to_string(all.size()) + " nodes into " + std::to_string(k) + " regions");
  }
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  Rng rng(seed);

  // Farthest-point seeds; the first one is random.
  std::vector<NodeId> seeds{all[rng() % all.size()]};
  std::vector<std::size_t> nearest = bfs_distances(g, seeds);
  while (seeds.size() < k) {
    std::size_t best = 0;
    std::vector<NodeId> candidates;
    for (NodeId v : all) {
      const std::size_t d = nearest[v] == kInf ? std::numeric_limits<std::size_t>::max() - 1 : nearest[v];
      if (d == 0) continue;
      if (d > best) {
        best = d;
        candidates.clear();
      }
      if (d == best) candidates.push_back(v);
    }
    if (candidates.empty()) throw Error("not enough distinct seed nodes");
    const NodeId next = candidates[rng() % candidates.size()];
    seeds.push_back(next);
    const std::vector<std::size_t> d = bfs_distances(g, std::span(&next, 1));
    for (NodeId v : all) nearest[v] = std::min(nearest[v], d[v]);
  }

  // Simultaneous BFS growth, always extending the smallest live region.
  std::vector<int> owner(g.id_space(), -1);
  std::vector<std::deque<NodeId>> frontier(k);
  std::vector<std::size_t> size(k, 0);
  for (std::size_t r = 0; r < k; ++r) {
    owner[seeds[r]] = static_cast<int>(r);
    size[r] = 1;
    for (NodeId b : g.neighbors(seeds[r])) frontier[r].push_back(b);
  }
  for (;;) {
    std::size_t pick = k;
    for (std::size_t r = 0; r < k; ++r) {
      while (!frontier[r].empty() && owner[frontier[r].front()] != -1) frontier[r].pop_front();
      if (frontier[r].empty()) continue;
      if (pick == k || size[r] < size[pick]) pick = r;
    }
    if (pick == k) break;
    const NodeId v = frontier[pick].front();
    frontier[pick].pop_front();
    owner[v] = static_cast<int>(pick);
    ++size[pick];
    for (NodeId b : g.neighbors(v)) {
      if (owner[b] == -1) frontier[pick].push_back(b);
    }
  }

  // Balancing: shift one node along each hop of a shortest path in the
  // region adjacency graph from the largest to the smallest region. Sizes of
  // intermediate regions are unchanged; every donor stays connected.
  auto ratio = [&] {
    const auto [mn, mx] = std::minmax_element(size.begin(), size.end());
    return static_cast<double>(*mx) / static_cast<double>(*mn);
  };
  auto move_one = [&](std::size_t from, std::size_t to) {
    NodeId best = 0;
    std::size_t best_links = 0;
    std::vector<std::pair<std::size_t, NodeId>> candidates;
    for (NodeId v : all) {
      if (owner[v] != static_cast<int>(from)) continue;
      std::size_t links = 0;
      for (NodeId b : g.neighbors(v)) links += owner[b] == static_cast<int>(to) ? 1 : 0;
      if (links > 0) candidates.emplace_back(links, v);
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (const auto& [links, v] : candidates) {
      if (connected_without(g, owner, static_cast<int>(from), size[from], v)) {
        best = v;
        best_links = links;
        break;
      }
    }
    if (best_links == 0) return false;
    owner[best] = static_cast<int>(to);
    --size[from];
    ++size[to];
    return true;
  };
  for (std::size_t guard = 0; guard < all.size() && ratio() > options.target_balance; ++guard) {
    const auto big = static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());
    const auto small = static_cast<std::size_t>(std::min_element(size.begin(), size.end()) - size.begin());
    std::vector<std::vector<char>> adjacent(k, std::vector<char>(k, 0));
    for (const auto& [a, b] : g.edges()) {
      if (owner[a] >= 0 && owner[b] >= 0 && owner[a] != owner[b]) {
        adjacent[static_cast<std::size_t>(owner[a])][static_cast<std::size_t>(owner[b])] = 1;
        adjacent[static_cast<std::size_t>(owner[b])][static_cast<std::size_t>(owner[a])] = 1;
      }
    }
    std::vector<std::size_t> parent(k, k);
    parent[big] = big;
    std::deque<std::size_t> queue{big};
    while (!queue.empty()) {
      const std::size_t r = queue.front();
      queue.pop_front();
      for (std::size_t q = 0; q < k; ++q) {
        if (adjacent[r][q] && parent[q] == k) {
          parent[q] = r;
          queue.push_back(q);
        }
      }
    }
    if (parent[small] == k) break;
    std::vector<std::size_t> path{small};
    while (path.back() != big) path.push_back(parent[path.back()]);
    // path runs small -> big; shift starting next to the receiver so each
    // donor is refilled only after it has given a node away.
    bool moved = true;
    for (std::size_t i = 0; i + 1 < path.size() && moved; ++i) moved = move_one(path[i + 1], path[i]);
    if (!moved) break;
  }

  PartitionPlan plan;
  plan.regions.resize(k);
  for (NodeId v : all) {
    if (owner[v] < 0) {
      plan.buffer.push_back(v);
    } else {
      plan.regions[static_cast<std::size_t>(owner[v])].push_back(v);
    }
  }
  if (ratio() > options.max_balance) {
    std::ostringstream msg;
    msg << "partition balance " << ratio() << " exceeds " << options.max_balance;
    throw Error(msg.str());
  }
  return plan;
}

PartitionPlan apply_buffer(const HardwareGraph& g, const PartitionPlan& plan) {
  std::vector<int> owner(g.id_space(), -1);
  for (std::size_t r = 0; r < plan.regions.size(); ++r) {
    for (NodeId v : plan.regions[r]) owner[v] = static_cast<int>(r);
  }
  PartitionPlan out;
  out.regions.resize(plan.regions.size());
  out.buffer = plan.buffer;
  for (std::size_t r = 0; r < plan.regions.size(); ++r) {
    for (NodeId v : plan.regions[r]) {
      bool crossing = false;
      for (NodeId b : g.neighbors(v)) {
        if (owner[b] >= 0 && owner[b] != static_cast<int>(r)) {
          crossing = true;
          break;
        }
      }
      (crossing ? out.buffer : out.regions[r]).push_back(v);
    }
  }
  std::sort(out.buffer.begin(), out.buffer.end());
  return out;
}

double balance_ratio(const PartitionPlan& plan) {
  if (plan.regions.empty()) return 1.0;
  std::size_t mn = std::numeric_limits<std::size_t>::max();
  std::size_t mx = 0;
  for (const auto& r : plan.regions) {
    mn = std::min(mn, r.size());
    mx = std::max(mx, r.size());
  }
  if (mn == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(mx) / static_cast<double>(mn);
}

std::size_t inter_region_edges(const HardwareGraph& g, const PartitionPlan& plan) {
  std::vector<int> owner(g.id_space(), -1);
  for (std::size_t r = 0; r < plan.regions.size(); ++r) {
    for (NodeId v : plan.regions[r]) owner[v] = static_cast<int>(r);
  }
  std::size_t count = 0;
  for (const auto& [a, b] : g.edges()) {
    if (owner[a] >= 0 && owner[b] >= 0 && owner[a] != owner[b]) ++count;
  }
  return count;
}

bool is_connected_subset(const HardwareGraph& g, std::span<const NodeId> subset) {
  if (subset.empty()) return false;
  std::vector<int> allowed(g.id_space(), 0);
  for (NodeId v : subset) allowed[v] = 1;
  const auto dist = bfs_distances(g, subset.first(1), &allowed, 1);
  for (NodeId v : subset) {
    if (dist[v] == std::numeric_limits<std::size_t>::max()) return false;
  }
  return true;
}

void write_edge_list(std::ostream& out, const HardwareGraph& g) {
  for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

std::string plan_to_json(const PartitionPlan& plan) {
  nlohmann::json j;
  j["regions"] = plan.regions;
  j["buffer"] = plan.buffer;
  return j.dump();
}

PartitionPlan plan_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, _] : j.items()) {
      if (key != "regions" && key != "buffer") throw FormatError("unknown key '" + key + "' in region map");
    }
    PartitionPlan plan;
    plan.regions = j.at("regions").get<std::vector<std::vector<NodeId>>>();
    plan.buffer = j.at("buffer").get<std::vector<NodeId>>();
    for (auto& r : plan.regions) std::sort(r.begin(), r.end());
    std::sort(plan.buffer.begin(), plan.buffer.end());
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid region map: ") + e.what());
  }
}

}  // namespace qbm
