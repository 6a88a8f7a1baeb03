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

#ifndef QBM_EMBEDDING_HPP
#define QBM_EMBEDDING_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbm/error.hpp"
#include "qbm/topology.hpp"

namespace qbm {

// chains[v] holds the sorted physical nodes representing logical unit v.
struct Embedding {
  std::vector<std::vector<NodeId>> chains;

  std::size_t size() const { return chains.size(); }
  std::size_t qubit_count() const;
  std::size_t max_chain_length() const;
  std::vector<NodeId> used_nodes() const;  // sorted
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

struct ChainStats {
  std::size_t min = 0;
  std::size_t max = 0;
  double mean = 0.0;
  std::size_t qubits = 0;
};
ChainStats chain_stats(const Embedding& e);

struct ValidationReport {
  bool ok = true;
  std::string violation;  // first violation found; empty when ok

  explicit operator bool() const { return ok; }
};

class EmbeddingNotFound : public Error {
 public:
  EmbeddingNotFound(std::size_t k, std::size_t region_size, int attempts);

  std::size_t k() const { return k_; }
  std::size_t region_size() const { return region_size_; }
  int attempts() const { return attempts_; }

 private:
  std::size_t k_;
  std::size_t region_size_;
  int attempts_;
};

struct EmbedOptions {
  int attempts = 64;
  // Rip-up-and-reroute rounds per attempt.
  int rounds = 48;
};

inline constexpr std::size_t kMaxCliqueSize = 21;

/// Minor-embeds the complete graph K_k into the subgraph induced by
/// `region`. Chains are grown along weighted shortest paths; overlapping
/// chains are ripped up and rerouted with increasing overlap penalties until
/// they are disjoint. Deterministic for a given seed.
Embedding embed_clique(const HardwareGraph& g, std::span<const NodeId> region, std::size_t k, std::uint64_t seed,
                       const EmbedOptions& options = {});

// Checks size, containment, disjointness, chain connectivity and coverage of
// every logical pair, in that order.
ValidationReport validate_embedding(const Embedding& e, std::size_t k, const HardwareGraph& g,
                                    std::span<const NodeId> region);

struct ParallelEmbedding {
  std::size_t k = 0;
  std::vector<std::pair<std::size_t, Embedding>> regions;  // (region index, embedding)

  std::size_t size() const { return regions.size(); }
  friend bool operator==(const ParallelEmbedding&, const ParallelEmbedding&) = default;
};

/// Embeds K_k once per region of a buffered plan, region r using seed
/// derive_seed(seed, r). Regions are embedded concurrently.
ParallelEmbedding build_parallel(const HardwareGraph& g, const PartitionPlan& plan, std::size_t k,
                                 std::uint64_t seed, const EmbedOptions& options = {});

// Physical edges joining nodes used by two different region embeddings.
std::size_t cross_embedding_edges(const HardwareGraph& g, const ParallelEmbedding& pe);

// {"chains": {"0": [ids], ...}}
std::string embedding_to_json(const Embedding& e);
Embedding embedding_from_json(const std::string& text);
// {"k": k, "regions": [{"region": r, "chains": {...}, "max_chain": n}, ...]}
std::string parallel_to_json(const ParallelEmbedding& pe);
ParallelEmbedding parallel_from_json(const std::string& text);

}  // namespace qbm

#endif  // QBM_EMBEDDING_HPP
