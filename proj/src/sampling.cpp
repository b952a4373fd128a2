#include "hetsim/sampling.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace hetsim {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined state
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<NodeId> sample_neighbors(const Csr& adj, NodeId dst, int fanout,
                                     std::uint64_t rng_seed, int hop, int rel_index) {
  const std::uint64_t lo = adj.indptr[dst];
  const std::uint64_t deg = adj.indptr[dst + 1] - lo;
  std::vector<NodeId> out;
  if (deg <= static_cast<std::uint64_t>(fanout)) {
    out.assign(adj.src.begin() + lo, adj.src.begin() + lo + deg);
    return out;
  }
  // partial Fisher-Yates over the neighbor index range
  std::uint64_t s = mix_seed(rng_seed, mix_seed(static_cast<std::uint64_t>(hop) << 32 | rel_index, dst));
  std::mt19937_64 rng(s);
  std::vector<std::uint32_t> idx(deg);
  for (std::uint64_t i = 0; i < deg; ++i) idx[i] = static_cast<std::uint32_t>(i);
  out.reserve(fanout);
  for (int i = 0; i < fanout; ++i) {
    std::uniform_int_distribution<std::uint64_t> pick(i, deg - 1);
    std::uint64_t j = pick(rng);
    std::swap(idx[i], idx[j]);
    out.push_back(adj.src[lo + idx[i]]);
  }
  return out;
}

static SampledBlocks sample_impl(const HetGraph& g, std::span<const NodeId> seeds,
                                 const std::vector<int>& fanouts, std::uint64_t rng_seed,
                                 const std::vector<std::vector<int>>* hop_relations) {
  if (fanouts.empty()) throw std::invalid_argument("fanouts must be non-empty");
  for (NodeId s : seeds)
    if (s >= g.node_counts[g.target])
      throw std::invalid_argument("seed node id out of range: " + std::to_string(s));

  SampledBlocks b;
  b.k = static_cast<int>(fanouts.size());
  b.seeds.assign(seeds.begin(), seeds.end());
  b.rng_seed = rng_seed;
  const int nt = g.reg.num_node_types();
  b.frontier.assign(b.k + 1, std::vector<std::vector<NodeId>>(nt));

  std::vector<NodeId> seed_sorted(seeds.begin(), seeds.end());
  std::sort(seed_sorted.begin(), seed_sorted.end());
  seed_sorted.erase(std::unique(seed_sorted.begin(), seed_sorted.end()), seed_sorted.end());
  b.frontier[0][g.target] = std::move(seed_sorted);

  b.hops.resize(b.k);
  for (int hop = 1; hop <= b.k; ++hop) {
    std::vector<std::vector<NodeId>> next(nt);
    for (std::size_t r = 0; r < g.relations.size(); ++r) {
      if (hop_relations) {
        const auto& allowed = (*hop_relations)[hop - 1];
        if (std::find(allowed.begin(), allowed.end(), static_cast<int>(r)) == allowed.end()) continue;
      }
      const Relation& rel = g.relations[r];
      const auto& front = b.frontier[hop - 1][rel.dst];
      if (front.empty()) continue;
      Block blk;
      blk.rel_index = static_cast<int>(r);
      blk.hop = hop;
      blk.dst_ids = front;
      blk.indptr.push_back(0);
      for (NodeId d : front) {
        auto srcs = sample_neighbors(g.adj[r], d, fanouts[hop - 1], rng_seed, hop, static_cast<int>(r));
        for (NodeId s : srcs) blk.src_ids.push_back(s);
        blk.indptr.push_back(static_cast<std::uint32_t>(blk.src_ids.size()));
      }
      next[rel.src].insert(next[rel.src].end(), blk.src_ids.begin(), blk.src_ids.end());
      b.hops[hop - 1].push_back(std::move(blk));
    }
    for (int t = 0; t < nt; ++t) {
      std::sort(next[t].begin(), next[t].end());
      next[t].erase(std::unique(next[t].begin(), next[t].end()), next[t].end());
      b.frontier[hop][t] = std::move(next[t]);
    }
  }
  return b;
}

SampledBlocks sample_khop(const HetGraph& g, std::span<const NodeId> seeds,
                          const std::vector<int>& fanouts, std::uint64_t rng_seed) {
  return sample_impl(g, seeds, fanouts, rng_seed, nullptr);
}

SampledBlocks sample_khop_restricted(const HetGraph& g, std::span<const NodeId> seeds,
                                     const std::vector<int>& fanouts, std::uint64_t rng_seed,
                                     const std::vector<std::vector<int>>& hop_relations) {
  return sample_impl(g, seeds, fanouts, rng_seed, &hop_relations);
}

}  // namespace hetsim
