#pragma once

#include <cstdint>
#include <vector>

#include "hetsim/hetgraph.hpp"
#include "hetsim/metapartition.hpp"
#include "hetsim/sampling.hpp"

namespace hetsim {

// Synthetic transfer-cost model; the simulator reproduces ordering claims,
// not hardware microseconds.
struct CostModel {
  double read_ns_per_byte = 1.0;
  double write_ns_per_byte = 1.0;
  double fixed_overhead_ns = 1000.0;  // per transfer
  int elem_bytes = 4;
};

struct TypePenalty {
  bool learnable = false;
  std::uint64_t record_bytes = 0;  // feature row, plus Adam m and v rows if learnable
  double transfer_ns = 0.0;        // full cost of one miss
  double ratio = 0.0;              // o_a = transfer_ns / record_bytes
};

struct MissPenaltyProfile {
  std::vector<TypePenalty> types;  // indexed by node type
};

// A learnable record misses as three reads (feature, m, v) and three write
// backs; a read-only record is a single read. Each transfer pays the fixed
// overhead, which is what makes small dims and learnable types cost more per
// cached byte.
MissPenaltyProfile profile_miss_penalty(const HetGraph& g, const CostModel& cm);

struct HotnessTable {
  std::vector<std::vector<std::uint64_t>> counts;  // [type][node]
  std::uint64_t total(int type) const;
};

// Visit counts over `epochs` full passes of the target nodes in fixed-size
// batches; every appearance of a node in the sampled blocks (seeds included)
// counts once.
HotnessTable presample_hotness(const HetGraph& g, const Metatree& tree,
                               const std::vector<int>& fanouts, int epochs, std::uint64_t seed,
                               std::size_t batch_size = 512);

struct CacheAllocation {
  std::uint64_t budget = 0;
  std::vector<std::uint64_t> bytes;     // floored to whole records
  std::vector<std::uint64_t> capacity;  // records
};

// budget * (count_a * o_a) / sum(count * o), floored to whole records.
CacheAllocation allocate_cache(std::uint64_t budget, const HotnessTable& hot,
                               const MissPenaltyProfile& profile);

struct CacheState {
  struct TypeCache {
    std::vector<NodeId> cached;  // sorted
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    double penalty_ns = 0.0;
  };
  std::vector<TypeCache> types;
  MissPenaltyProfile profile;
  int num_workers = 1;

  bool contains(int type, NodeId id) const;
  // read access: accrues the miss penalty when absent
  bool lookup(int type, NodeId id);
  // learnable write back: in-place on hit, read+write penalty on miss
  void update(int type, NodeId id);
  int placement_rank(NodeId id) const { return static_cast<int>(id) % num_workers; }
  double hit_rate(int type) const;
};

// Static top-k fill by visit count, ties broken by ascending node id.
CacheState fill_and_serve(const CacheAllocation& alloc, const HotnessTable& hot,
                          const MissPenaltyProfile& profile, int num_workers = 1);

// Types the worker actually caches: the leaf types of the partition's
// deduplicated sub-metatree forest (the types whose raw features it loads).
std::vector<NodeTypeId> cacheable_types(const PartitionPlan& plan, int part);
// Permission check: cache space is confined to the local partition, so any
// type present in the partition may be cached and foreign types are rejected.
bool partition_aware_space(const PartitionPlan& plan, int part, NodeTypeId type);

}  // namespace hetsim
