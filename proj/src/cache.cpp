#include "hetsim/cache.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "hetsim/hgnn.hpp"

namespace hetsim {

MissPenaltyProfile profile_miss_penalty(const HetGraph& g, const CostModel& cm) {
  MissPenaltyProfile prof;
  prof.types.resize(g.reg.num_node_types());
  for (int t = 0; t < g.reg.num_node_types(); ++t) {
    const TypeFeatures& f = g.features[t];
    if (f.kind == StorageKind::Absent) continue;
    TypePenalty& tp = prof.types[t];
    tp.learnable = f.kind == StorageKind::Learnable;
    const std::uint64_t row = static_cast<std::uint64_t>(f.dim) * cm.elem_bytes;
    if (row == 0) throw std::invalid_argument("zero record size for node type " +
                                              g.reg.node_type_names[t]);
    if (tp.learnable) {
      tp.record_bytes = 3 * row;  // feature + Adam m + Adam v
      tp.transfer_ns = 3.0 * (cm.fixed_overhead_ns + cm.read_ns_per_byte * row) +
                       3.0 * (cm.fixed_overhead_ns + cm.write_ns_per_byte * row);
    } else {
      tp.record_bytes = row;
      tp.transfer_ns = cm.fixed_overhead_ns + cm.read_ns_per_byte * row;
    }
    tp.ratio = tp.transfer_ns / static_cast<double>(tp.record_bytes);
  }
  return prof;
}

std::uint64_t HotnessTable::total(int type) const {
  return std::accumulate(counts[type].begin(), counts[type].end(), std::uint64_t{0});
}

HotnessTable presample_hotness(const HetGraph& g, const Metatree& tree,
                               const std::vector<int>& fanouts, int epochs, std::uint64_t seed,
                               std::size_t batch_size) {
  HotnessTable hot;
  hot.counts.resize(g.reg.num_node_types());
  for (int t = 0; t < g.reg.num_node_types(); ++t) hot.counts[t].assign(g.node_counts[t], 0);

  const auto hop_rels = hop_relation_sets(tree, static_cast<int>(fanouts.size()));
  const NodeId n_target = g.node_counts[g.target];
  for (int e = 0; e < epochs; ++e) {
    for (NodeId lo = 0; lo < n_target; lo += static_cast<NodeId>(batch_size)) {
      std::vector<NodeId> batch;
      for (NodeId v = lo; v < std::min<NodeId>(lo + batch_size, n_target); ++v) batch.push_back(v);
      const SampledBlocks blocks =
          sample_khop_restricted(g, batch, fanouts, mix_seed(seed, e), hop_rels);
      for (NodeId v : batch) hot.counts[g.target][v] += 1;
      for (const auto& hop : blocks.hops)
        for (const Block& blk : hop) {
          const NodeTypeId src_t = g.relations[blk.rel_index].src;
          for (NodeId s : blk.src_ids) hot.counts[src_t][s] += 1;
        }
    }
  }
  return hot;
}

CacheAllocation allocate_cache(std::uint64_t budget, const HotnessTable& hot,
                               const MissPenaltyProfile& profile) {
  CacheAllocation alloc;
  alloc.budget = budget;
  alloc.bytes.assign(profile.types.size(), 0);
  alloc.capacity.assign(profile.types.size(), 0);
  double denom = 0.0;
  for (std::size_t t = 0; t < profile.types.size(); ++t)
    if (profile.types[t].record_bytes > 0)
      denom += static_cast<double>(hot.total(static_cast<int>(t))) * profile.types[t].ratio;
  if (denom <= 0.0) throw std::invalid_argument("nothing to cache: all count*ratio products are zero");
  for (std::size_t t = 0; t < profile.types.size(); ++t) {
    const TypePenalty& tp = profile.types[t];
    if (tp.record_bytes == 0) continue;
    const double share = static_cast<double>(budget) *
                         (static_cast<double>(hot.total(static_cast<int>(t))) * tp.ratio) / denom;
    alloc.capacity[t] = static_cast<std::uint64_t>(share) / tp.record_bytes;
    alloc.bytes[t] = alloc.capacity[t] * tp.record_bytes;
  }
  return alloc;
}

bool CacheState::contains(int type, NodeId id) const {
  const auto& c = types[type].cached;
  return std::binary_search(c.begin(), c.end(), id);
}

bool CacheState::lookup(int type, NodeId id) {
  TypeCache& tc = types[type];
  if (contains(type, id)) {
    tc.hits += 1;
    return true;
  }
  tc.misses += 1;
  tc.penalty_ns += profile.types[type].transfer_ns;
  return false;
}

void CacheState::update(int type, NodeId id) {
  if (!profile.types[type].learnable)
    throw std::invalid_argument("update on read-only node type " + std::to_string(type));
  TypeCache& tc = types[type];
  if (contains(type, id)) {
    tc.hits += 1;  // mutated in place, no transfer
    return;
  }
  tc.misses += 1;
  tc.penalty_ns += profile.types[type].transfer_ns;
}

double CacheState::hit_rate(int type) const {
  const TypeCache& tc = types[type];
  const std::uint64_t n = tc.hits + tc.misses;
  return n == 0 ? 0.0 : static_cast<double>(tc.hits) / static_cast<double>(n);
}

CacheState fill_and_serve(const CacheAllocation& alloc, const HotnessTable& hot,
                          const MissPenaltyProfile& profile, int num_workers) {
  CacheState st;
  st.profile = profile;
  st.num_workers = num_workers;
  st.types.resize(profile.types.size());
  for (std::size_t t = 0; t < profile.types.size(); ++t) {
    const std::uint64_t cap = alloc.capacity[t];
    if (cap == 0) continue;
    const auto& counts = hot.counts[t];
    std::vector<NodeId> order(counts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return counts[a] != counts[b] ? counts[a] > counts[b] : a < b;
    });
    if (order.size() > cap) order.resize(cap);
    std::sort(order.begin(), order.end());
    st.types[t].cached = std::move(order);
  }
  return st;
}

std::vector<NodeTypeId> cacheable_types(const PartitionPlan& plan, int part) {
  // Replay per-partition dedup (first relation occurrence wins, subs in id
  // order, DFS within a sub) and collect the leaf types of what remains.
  const Metatree& tree = plan.tree;
  std::vector<NodeTypeId> out;
  std::vector<int> seen;
  auto add = [&](NodeTypeId t) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  };
  struct Walker {
    const Metatree& tree;
    std::vector<int>& seen;
    decltype(add)& leaf;
    void walk(int pos) {
      bool any_kept = false;
      for (int c : tree.pos[pos].children) {
        const int r = tree.pos[c].rel_index;
        if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
        seen.push_back(r);
        any_kept = true;
        walk(c);
      }
      if (!any_kept && tree.pos[pos].depth > 0) leaf(tree.pos[pos].type);
    }
  } walker{tree, seen, add};
  for (int sid : plan.parts.at(part).sub_ids) {
    const SubMetatree& s = plan.subs[sid];
    const int r = tree.pos[s.child_pos].rel_index;
    if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
    seen.push_back(r);
    walker.walk(s.child_pos);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool partition_aware_space(const PartitionPlan& plan, int part, NodeTypeId type) {
  const auto& types = plan.parts.at(part).node_types;
  return std::find(types.begin(), types.end(), type) != types.end();
}

}  // namespace hetsim
