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

#include "qbm/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "json.hpp"
#include "qbm/parallel.hpp"
#include "qbm/random.hpp"

namespace qbm {
namespace {

using Json = nlohmann::json;

// Induced subgraph on a region with local indices 0..n-1.
struct LocalGraph {
  std::vector<NodeId> global;
  std::vector<std::vector<int>> adj;

  LocalGraph(const HardwareGraph& g, std::span<const NodeId> region) {
    global.assign(region.begin(), region.end());
    std::sort(global.begin(), global.end());
    global.erase(std::unique(global.begin(), global.end()), global.end());
    std::unordered_map<NodeId, int> local;
    for (std::size_t i = 0; i < global.size(); ++i) local.emplace(global[i], static_cast<int>(i));
    adj.resize(global.size());
    for (std::size_t i = 0; i < global.size(); ++i) {
      if (!g.has_node(global[i])) continue;
      for (NodeId b : g.neighbors(global[i])) {
        auto it = local.find(b);
        if (it != local.end()) adj[i].push_back(it->second);
      }
    }
  }
  std::size_t size() const { return global.size(); }

  // Restricts to the largest connected component; a clique minor with
  // k >= 2 always lives in a single component.
  void keep_largest_component() {
    const std::size_t n = global.size();
    std::vector<int> comp(n, -1);
    std::vector<std::size_t> sizes;
    for (std::size_t s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      const int c = static_cast<int>(sizes.size());
      sizes.push_back(0);
      std::deque<int> queue{static_cast<int>(s)};
      comp[s] = c;
      while (!queue.empty()) {
        const int a = queue.front();
        queue.pop_front();
        ++sizes.back();
        for (int b : adj[static_cast<std::size_t>(a)]) {
          if (comp[static_cast<std::size_t>(b)] < 0) {
            comp[static_cast<std::size_t>(b)] = c;
            queue.push_back(b);
          }
        }
      }
    }
    const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<int> remap(n, -1);
    std::vector<NodeId> kept;
    for (std::size_t i = 0; i < n; ++i) {
      if (comp[i] == keep) {
        remap[i] = static_cast<int>(kept.size());
        kept.push_back(global[i]);
      }
    }
    std::vector<std::vector<int>> kept_adj(kept.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (remap[i] < 0) continue;
      for (int b : adj[i]) kept_adj[static_cast<std::size_t>(remap[i])].push_back(remap[static_cast<std::size_t>(b)]);
    }
    global = std::move(kept);
    adj = std::move(kept_adj);
  }
};

constexpr double kAlphaStart = 2.0;
constexpr double kAlphaGrowth = 1.5;
constexpr int kStallRounds = 4;

class CliqueEmbedder {
 public:
  CliqueEmbedder(const LocalGraph& lg, std::size_t k, std::uint64_t seed)
      : lg_(lg), k_(k), rng_(seed), chains_(k), usage_(lg.size(), 0), owner_mark_(lg.size(), 0) {
    order_.resize(lg.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::shuffle(order_.begin(), order_.end(), rng_);
  }

  bool run(int rounds) {
    std::vector<std::size_t> vars(k_);
    std::iota(vars.begin(), vars.end(), 0);
    std::shuffle(vars.begin(), vars.end(), rng_);
    alpha_ = kAlphaStart;
    for (std::size_t v : vars) place(v);
    std::size_t best = overlap_count();
    int stall = 0;
    for (int round = 0; round < rounds && best > 0; ++round) {
      alpha_ = std::min(static_cast<double>(lg_.size()), alpha_ * kAlphaGrowth);
      std::shuffle(vars.begin(), vars.end(), rng_);
      for (std::size_t v : vars) {
        release(v);
        place(v);
      }
      const std::size_t now = overlap_count();
      if (now < best) {
        best = now;
        stall = 0;
      } else if (++stall >= kStallRounds) {
        // Stuck in a cycle: relax the overlap penalty so chains can move.
        alpha_ = kAlphaStart;
        stall = 0;
      }
    }
    if (overlap_count() > 0) return false;
    prune();
    return true;
  }

  Embedding result() const {
    Embedding e;
    e.chains.resize(k_);
    for (std::size_t v = 0; v < k_; ++v) {
      for (int x : chains_[v]) e.chains[v].push_back(lg_.global[static_cast<std::size_t>(x)]);
      std::sort(e.chains[v].begin(), e.chains[v].end());
    }
    return e;
  }

 private:
  double weight(int x) const { return std::pow(alpha_, static_cast<double>(usage_[static_cast<std::size_t>(x)])); }

  std::size_t overlap_count() const {
    return static_cast<std::size_t>(std::count_if(usage_.begin(), usage_.end(), [](int u) { return u > 1; }));
  }

  void release(std::size_t v) {
    for (int x : chains_[v]) --usage_[static_cast<std::size_t>(x)];
    chains_[v].clear();
  }

  void claim(std::size_t v, std::vector<int> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (int x : nodes) ++usage_[static_cast<std::size_t>(x)];
    chains_[v] = std::move(nodes);
  }

  // Multi-source Dijkstra from chain `src`. dist excludes source nodes and
  // includes the target node's weight.
  void dijkstra(const std::vector<int>& src, std::vector<double>& dist, std::vector<int>& parent) {
    const std::size_t n = lg_.size();
    dist.assign(n, std::numeric_limits<double>::infinity());
    parent.assign(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (int s : src) {
      dist[static_cast<std::size_t>(s)] = 0.0;
      heap.emplace(0.0, s);
    }
    while (!heap.empty()) {
      const auto [d, a] = heap.top();
      heap.pop();
      if (d > dist[static_cast<std::size_t>(a)]) continue;
      for (int b : lg_.adj[static_cast<std::size_t>(a)]) {
        const double nd = d + weight(b);
        if (nd < dist[static_cast<std::size_t>(b)]) {
          dist[static_cast<std::size_t>(b)] = nd;
          parent[static_cast<std::size_t>(b)] = a;
          heap.emplace(nd, b);
        }
      }
    }
  }

  void place(std::size_t v) {
    std::vector<std::size_t> placed;
    for (std::size_t u = 0; u < k_; ++u) {
      if (u != v && !chains_[u].empty()) placed.push_back(u);
    }
    if (placed.empty()) {
      int best = order_.front();
      for (int x : order_) {
        if (usage_[static_cast<std::size_t>(x)] < usage_[static_cast<std::size_t>(best)]) best = x;
      }
      claim(v, {best});
      return;
    }
    // Fresh tie-breaking per placement; a fixed order lets the reroute loop
    // settle into a cycle.
    std::shuffle(order_.begin(), order_.end(), rng_);
    std::vector<std::vector<double>> dist(placed.size());
    std::vector<std::vector<int>> parent(placed.size());
    for (std::size_t i = 0; i < placed.size(); ++i) dijkstra(chains_[placed[i]], dist[i], parent[i]);

    const bool have_free = std::any_of(usage_.begin(), usage_.end(), [](int u) { return u == 0; });
    int root = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int x : order_) {
      // Roots on occupied nodes get enclosed by the chains around them.
      if (have_free && usage_[static_cast<std::size_t>(x)] > 0) continue;
      const double w = weight(x);
      double cost = w;
      for (std::size_t i = 0; i < placed.size(); ++i) {
        const double d = dist[i][static_cast<std::size_t>(x)];
        if (d > 0.0) cost += d - w;
      }
      if (cost < best) {
        best = cost;
        root = x;
      }
    }
    if (root < 0) {
      // Region is disconnected from some chain; fall back to a lone node.
      claim(v, {order_.front()});
      return;
    }
    std::vector<int> nodes{root};
    for (std::size_t i = 0; i < placed.size(); ++i) {
      int x = root;
      while (dist[i][static_cast<std::size_t>(x)] > 0.0) {
        nodes.push_back(x);
        x = parent[i][static_cast<std::size_t>(x)];
      }
    }
    claim(v, std::move(nodes));
  }

  bool chain_connected(const std::vector<int>& chain, int skip) {
    ++mark_epoch_;
    int start = -1;
    std::size_t members = 0;
    for (int x : chain) {
      if (x == skip) continue;
      owner_mark_[static_cast<std::size_t>(x)] = mark_epoch_;
      ++members;
      if (start < 0) start = x;
    }
    if (start < 0) return false;
    ++mark_epoch_;
    std::deque<int> queue{start};
    owner_mark_[static_cast<std::size_t>(start)] = mark_epoch_;
    std::size_t reached = 1;
    while (!queue.empty()) {
      const int a = queue.front();
      queue.pop_front();
      for (int b : lg_.adj[static_cast<std::size_t>(a)]) {
        if (owner_mark_[static_cast<std::size_t>(b)] == mark_epoch_ - 1) {
          owner_mark_[static_cast<std::size_t>(b)] = mark_epoch_;
          ++reached;
          queue.push_back(b);
        }
      }
    }
    return reached == members;
  }

  bool covers_all(std::size_t v, int skip) const {
    std::vector<char> touched(k_, 0);
    std::vector<int> chain_of(lg_.size(), -1);
    for (std::size_t u = 0; u < k_; ++u) {
      for (int x : chains_[u]) chain_of[static_cast<std::size_t>(x)] = static_cast<int>(u);
    }
    for (int x : chains_[v]) {
      if (x == skip) continue;
      for (int b : lg_.adj[static_cast<std::size_t>(x)]) {
        const int u = chain_of[static_cast<std::size_t>(b)];
        if (u >= 0 && u != static_cast<int>(v)) touched[static_cast<std::size_t>(u)] = 1;
      }
    }
    for (std::size_t u = 0; u < k_; ++u) {
      if (u != v && !touched[u]) return false;
    }
    return true;
  }

  // Drops chain nodes that are not needed for connectivity or coverage.
  void prune() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t v = 0; v < k_; ++v) {
        for (std::size_t i = 0; i < chains_[v].size() && chains_[v].size() > 1;) {
          const int x = chains_[v][i];
          if (chain_connected(chains_[v], x) && covers_all(v, x)) {
            chains_[v].erase(chains_[v].begin() + static_cast<std::ptrdiff_t>(i));
            --usage_[static_cast<std::size_t>(x)];
            changed = true;
          } else {
            ++i;
          }
        }
      }
    }
  }

  const LocalGraph& lg_;
  std::size_t k_;
  Rng rng_;
  std::vector<std::vector<int>> chains_;
  std::vector<int> usage_;
  std::vector<int> owner_mark_;
  int mark_epoch_ = 0;
  std::vector<int> order_;
  double alpha_ = 2.0;
};

Json chains_json(const Embedding& e) {
  Json chains = Json::object();
  for (std::size_t v = 0; v < e.chains.size(); ++v) chains[std::to_string(v)] = e.chains[v];
  return chains;
}

Embedding chains_from_json(const Json& chains) {
  Embedding e;
  e.chains.resize(chains.size());
  for (const auto& [key, value] : chains.items()) {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(key, &pos);
    if (pos != key.size() || v >= chains.size()) throw FormatError("bad logical unit key '" + key + "'");
    e.chains[v] = value.get<std::vector<NodeId>>();
    std::sort(e.chains[v].begin(), e.chains[v].end());
  }
  return e;
}

}  // namespace

std::size_t Embedding::qubit_count() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.size();
  return n;
}

std::size_t Embedding::max_chain_length() const {
  std::size_t n = 0;
  for (const auto& c : chains) n = std::max(n, c.size());
  return n;
}

std::vector<NodeId> Embedding::used_nodes() const {
  std::vector<NodeId> out;
  for (const auto& c : chains) out.insert(out.end(), c.begin(), c.end());
  std::sort(out.begin(), out.end());
  return out;
}

ChainStats chain_stats(const Embedding& e) {
  ChainStats s;
  if (e.chains.empty()) return s;
  s.min = std::numeric_limits<std::size_t>::max();
  for (const auto& c : e.chains) {
    s.min = std::min(s.min, c.size());
    s.max = std::max(s.max, c.size());
    s.qubits += c.size();
  }
  s.mean = static_cast<double>(s.qubits) / static_cast<double>(e.chains.size());
  return s;
}

EmbeddingNotFound::EmbeddingNotFound(std::size_t k, std::size_t region_size, int attempts)
    : Error("no embedding of K_" + std::to_string(k) + " into a region of " + std::to_string(region_size) +
            " nodes after " + std::to_string(attempts) + " attempts"),
      k_(k),
      region_size_(region_size),
      attempts_(attempts) {}

Embedding embed_clique(const HardwareGraph& g, std::span<const NodeId> region, std::size_t k, std::uint64_t seed,
                       const EmbedOptions& options) {
  if (k < 1 || k > kMaxCliqueSize) {
    throw Error("clique size must be in [1, " + std::to_string(kMaxCliqueSize) + "], got " + std::to_string(k));
  }
  if (region.empty()) throw Error("cannot embed into an empty region");
  LocalGraph lg(g, region);
  const std::size_t region_size = lg.size();
  lg.keep_largest_component();
  for (int attempt = 0; attempt < options.attempts; ++attempt) {
    CliqueEmbedder embedder(lg, k, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (!embedder.run(options.rounds)) continue;
    Embedding e = embedder.result();
    if (validate_embedding(e, k, g, region)) return e;
  }
  throw EmbeddingNotFound(k, region_size, options.attempts);
}

ValidationReport validate_embedding(const Embedding& e, std::size_t k, const HardwareGraph& g,
                                    std::span<const NodeId> region) {
  auto fail = [](std::string why) { return ValidationReport{false, std::move(why)}; };
  if (e.chains.size() != k) {
    return fail("size: " + std::to_string(e.chains.size()) + " chains for " + std::to_string(k) + " units");
  }
  std::vector<NodeId> allowed(region.begin(), region.end());
  std::sort(allowed.begin(), allowed.end());
  std::unordered_map<NodeId, std::size_t> chain_of;
  for (std::size_t v = 0; v < k; ++v) {
    if (e.chains[v].empty()) return fail("empty chain for unit " + std::to_string(v));
    for (NodeId x : e.chains[v]) {
      if (!std::binary_search(allowed.begin(), allowed.end(), x) || !g.has_node(x)) {
        return fail("containment: node " + std::to_string(x) + " of unit " + std::to_string(v) +
                    " is outside the region");
      }
    }
  }
  for (std::size_t v = 0; v < k; ++v) {
    for (NodeId x : e.chains[v]) {
      auto [it, inserted] = chain_of.emplace(x, v);
      if (!inserted && it->second != v) {
        return fail("disjointness: node " + std::to_string(x) + " is shared by units " +
                    std::to_string(it->second) + " and " + std::to_string(v));
      }
    }
  }
  for (std::size_t v = 0; v < k; ++v) {
    if (!is_connected_subset(g, e.chains[v])) return fail("connectivity: chain of unit " + std::to_string(v));
  }
  std::vector<std::vector<char>> joined(k, std::vector<char>(k, 0));
  for (std::size_t v = 0; v < k; ++v) {
    for (NodeId x : e.chains[v]) {
      for (NodeId b : g.neighbors(x)) {
        auto it = chain_of.find(b);
        if (it != chain_of.end()) joined[v][it->second] = 1;
      }
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (!joined[a][b]) {
        return fail("coverage: no edge between units " + std::to_string(a) + " and " + std::to_string(b));
      }
    }
  }
  return {};
}

ParallelEmbedding build_parallel(const HardwareGraph& g, const PartitionPlan& plan, std::size_t k,
                                 std::uint64_t seed, const EmbedOptions& options) {
  ParallelEmbedding pe;
  pe.k = k;
  pe.regions.resize(plan.regions.size());
  parallel_for(plan.regions.size(), [&](std::size_t r) {
    try {
      pe.regions[r] = {r, embed_clique(g, plan.regions[r], k, derive_seed(seed, r), options)};
    } catch (const Error& e) {
      throw Error("region " + std::to_string(r) + ": " + e.what());
    }
  });
  return pe;
}

std::size_t cross_embedding_edges(const HardwareGraph& g, const ParallelEmbedding& pe) {
  std::unordered_map<NodeId, std::size_t> user;
  for (std::size_t i = 0; i < pe.regions.size(); ++i) {
    for (NodeId x : pe.regions[i].second.used_nodes()) user.emplace(x, i);
  }
  std::size_t count = 0;
  for (const auto& [x, i] : user) {
    for (NodeId b : g.neighbors(x)) {
      auto it = user.find(b);
      if (it != user.end() && it->second != i && x < b) ++count;
    }
  }
  return count;
}

std::string embedding_to_json(const Embedding& e) {
  Json j;
  j["chains"] = chains_json(e);
  return j.dump();
}

Embedding embedding_from_json(const std::string& text) {
  try {
    return chains_from_json(Json::parse(text).at("chains"));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("invalid embedding: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("invalid embedding: ") + e.what());
  }
}

std::string parallel_to_json(const ParallelEmbedding& pe) {
  Json regions = Json::array();
  for (const auto& [r, e] : pe.regions) {
    regions.push_back({{"region", r}, {"chains", chains_json(e)}, {"max_chain", e.max_chain_length()}});
  }
  return Json{{"k", pe.k}, {"regions", regions}}.dump();
}

ParallelEmbedding parallel_from_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    ParallelEmbedding pe;
    pe.k = j.at("k").get<std::size_t>();
    for (const auto& item : j.at("regions")) {
      pe.regions.emplace_back(item.at("region").get<std::size_t>(), chains_from_json(item.at("chains")));
    }
    return pe;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("invalid parallel embedding: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("invalid parallel embedding: ") + e.what());
  }
}

}  // namespace qbm
