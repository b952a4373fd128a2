#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetsim/hetgraph.hpp"

namespace hetsim {

// One bipartite block: rows are the destination frontier of a relation at a
// given hop, columns (per row) the sampled src neighbors.
struct Block {
  int rel_index = -1;
  int hop = 0;  // 1..k, 1 = seeds' direct neighbors
  std::vector<NodeId> dst_ids;
  std::vector<std::uint32_t> indptr;  // size dst_ids.size() + 1
  std::vector<NodeId> src_ids;        // sampled order (deterministic per seed)
};

struct SampledBlocks {
  int k = 0;
  std::vector<NodeId> seeds;
  std::uint64_t rng_seed = 0;
  // hops[h-1] holds blocks for hop h, ascending relation index.
  std::vector<std::vector<Block>> hops;
  // frontier[h][type]: sorted unique node ids reachable at hop h (frontier[0]
  // holds only the seeds under the target type).
  std::vector<std::vector<std::vector<NodeId>>> frontier;
};

// Deterministic per-(rng_seed, hop, relation, dst) neighbor sample:
// min(fanout, degree) sources without replacement.
std::vector<NodeId> sample_neighbors(const Csr& adj, NodeId dst, int fanout,
                                     std::uint64_t rng_seed, int hop, int rel_index);

SampledBlocks sample_khop(const HetGraph& g, std::span<const NodeId> seeds,
                          const std::vector<int>& fanouts, std::uint64_t rng_seed);

// Same sampling restricted to the given relation subset per hop
// (hop_relations[h-1] = allowed relation indices at hop h). With the
// per-destination derived RNG this yields rows bit-identical to the full
// sample, which is what lets workers sample their own relations locally.
SampledBlocks sample_khop_restricted(const HetGraph& g, std::span<const NodeId> seeds,
                                     const std::vector<int>& fanouts, std::uint64_t rng_seed,
                                     const std::vector<std::vector<int>>& hop_relations);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace hetsim
