#include "hetsim/metapartition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hetsim {

std::vector<int> Metatree::unique_relations() const {
  std::vector<int> out;
  for (const auto& p : pos)
    if (p.rel_index >= 0) out.push_back(p.rel_index);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int Metatree::root_child_ancestor(int p) const {
  if (p <= 0) return -1;
  while (pos[p].parent != 0) p = pos[p].parent;
  return p;
}

std::vector<int> PartitionPlan::owners_of_sub(int sub_id) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (std::find(parts[i].sub_ids.begin(), parts[i].sub_ids.end(), sub_id) != parts[i].sub_ids.end())
      out.push_back(static_cast<int>(i));
  return out;
}

Metatree build_metatree(const Metagraph& m, NodeTypeId root, int k) {
  if (root < 0 || root >= m.reg.num_node_types())
    throw std::invalid_argument("metatree root not in metagraph");
  Metatree t;
  t.k = k;
  t.root_type = root;
  t.pos.push_back({root, 0, -1, -1, {}});
  // breadth-first expansion: nearest hops first
  std::size_t begin = 0;
  for (int depth = 1; depth <= k; ++depth) {
    const std::size_t end = t.pos.size();
    for (std::size_t p = begin; p < end; ++p) {
      for (int l : m.links_into(t.pos[p].type)) {
        const int child = static_cast<int>(t.pos.size());
        t.pos.push_back({m.links[l].rel.src, depth, static_cast<int>(p), m.links[l].rel_index, {}});
        t.pos[p].children.push_back(child);
      }
    }
    begin = end;
  }
  return t;
}

Metatree build_metatree(const Metagraph& m, NodeTypeId root,
                        const std::vector<std::vector<int>>& metapaths) {
  if (root < 0 || root >= m.reg.num_node_types())
    throw std::invalid_argument("metatree root not in metagraph");
  Metatree t;
  t.root_type = root;
  t.pos.push_back({root, 0, -1, -1, {}});
  for (const auto& path : metapaths) {
    int cur = 0;
    NodeTypeId cur_type = root;
    for (int rel_index : path) {
      const MetagraphLink* link = nullptr;
      for (const auto& l : m.links)
        if (l.rel_index == rel_index) link = &l;
      if (!link || link->rel.dst != cur_type)
        throw std::invalid_argument("invalid metapath step: relation " + std::to_string(rel_index) +
                                    " does not leave node type " + m.reg.node_type_names[cur_type]);
      // merge by path prefix
      int next = -1;
      for (int c : t.pos[cur].children)
        if (t.pos[c].rel_index == rel_index) next = c;
      if (next < 0) {
        next = static_cast<int>(t.pos.size());
        t.pos.push_back({link->rel.src, t.pos[cur].depth + 1, cur, rel_index, {}});
        t.pos[cur].children.push_back(next);
      }
      cur = next;
      cur_type = link->rel.src;
      t.k = std::max(t.k, t.pos[cur].depth);
    }
  }
  return t;
}

std::vector<SubMetatree> split_metatree(const Metatree& t, const Metagraph& m,
                                        WeightDupPolicy policy) {
  if (t.pos.empty()) throw std::invalid_argument("empty metatree");
  std::vector<SubMetatree> subs;
  for (std::size_t i = 0; i < t.pos[0].children.size(); ++i) {
    SubMetatree s;
    s.id = static_cast<int>(i);
    s.child_pos = t.pos[0].children[i];
    s.positions.push_back(0);
    std::vector<int> stack{s.child_pos};
    while (!stack.empty()) {
      int p = stack.back();
      stack.pop_back();
      s.positions.push_back(p);
      s.relation_multiset.push_back(t.pos[p].rel_index);
      for (auto it = t.pos[p].children.rbegin(); it != t.pos[p].children.rend(); ++it)
        stack.push_back(*it);
    }
    for (int p : s.positions) s.vertex_types_unique.push_back(t.pos[p].type);
    std::sort(s.vertex_types_unique.begin(), s.vertex_types_unique.end());
    s.vertex_types_unique.erase(
        std::unique(s.vertex_types_unique.begin(), s.vertex_types_unique.end()),
        s.vertex_types_unique.end());
    s.relations_unique = s.relation_multiset;
    std::sort(s.relations_unique.begin(), s.relations_unique.end());
    s.relations_unique.erase(std::unique(s.relations_unique.begin(), s.relations_unique.end()),
                             s.relations_unique.end());

    auto link_weight = [&](int rel_index) -> std::uint64_t {
      for (const auto& l : m.links)
        if (l.rel_index == rel_index) return l.weight;
      throw std::invalid_argument("relation not in metagraph: " + std::to_string(rel_index));
    };
    s.weight = 0;
    if (policy == WeightDupPolicy::Unique) {
      for (NodeTypeId v : s.vertex_types_unique) s.weight += m.vertex_weight(v);
      for (int r : s.relations_unique) s.weight += link_weight(r);
    } else {
      for (int p : s.positions) s.weight += m.vertex_weight(t.pos[p].type);
      for (int r : s.relation_multiset) s.weight += link_weight(r);
    }
    subs.push_back(std::move(s));
  }
  return subs;
}

std::vector<int> lpt_assign(const std::vector<std::uint64_t>& weights, int p) {
  if (p <= 0) throw std::invalid_argument("partition count must be positive");
  std::vector<int> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weights[a] > weights[b]; });
  std::vector<std::uint64_t> sums(p, 0);
  std::vector<int> assignment(weights.size(), -1);
  for (int item : order) {
    int best = 0;
    for (int i = 1; i < p; ++i)
      if (sums[i] < sums[best]) best = i;
    assignment[item] = best;
    sums[best] += weights[item];
  }
  return assignment;
}

static void refresh_partition(PlanPartition& part, const std::vector<SubMetatree>& subs,
                              NodeTypeId target, const Metagraph& m, bool dedup) {
  part.relations.clear();
  for (int sid : part.sub_ids)
    for (int r : subs[sid].relation_multiset) {
      if (dedup && std::find(part.relations.begin(), part.relations.end(), r) != part.relations.end())
        continue;
      part.relations.push_back(r);
    }
  part.node_types.clear();
  part.node_types.push_back(target);
  for (int r : part.relations)
    for (const auto& l : m.links)
      if (l.rel_index == r) {
        part.node_types.push_back(l.rel.src);
        part.node_types.push_back(l.rel.dst);
      }
  std::sort(part.node_types.begin(), part.node_types.end());
  part.node_types.erase(std::unique(part.node_types.begin(), part.node_types.end()),
                        part.node_types.end());
  part.weight = 0;
  for (int sid : part.sub_ids) part.weight += subs[sid].weight;
}

PartitionPlan make_plan(Metatree tree, std::vector<SubMetatree> subs, int p,
                        const std::vector<int>& assignment) {
  PartitionPlan plan;
  plan.p = p;
  plan.tree = std::move(tree);
  plan.subs = std::move(subs);
  plan.parts.resize(p);
  for (std::size_t s = 0; s < assignment.size(); ++s)
    plan.parts[assignment[s]].sub_ids.push_back(static_cast<int>(s));
  return plan;
}

PartitionPlan deduplicate(PartitionPlan plan) {
  // metagraph link info is reconstructible from the tree; build a minimal
  // lookup for endpoint types
  Metagraph m;
  for (const auto& pos : plan.tree.pos)
    if (pos.rel_index >= 0) {
      bool seen = false;
      for (const auto& l : m.links) seen = seen || l.rel_index == pos.rel_index;
      if (!seen)
        m.links.push_back({pos.rel_index,
                           {pos.type, pos.rel_index, plan.tree.pos[pos.parent].type},
                           0});
    }
  for (auto& part : plan.parts) refresh_partition(part, plan.subs, plan.tree.root_type, m, true);
  plan.deduplicated = true;
  return plan;
}

PartitionPlan replicate_for_excess_workers(PartitionPlan plan, int p) {
  const int n_subs = static_cast<int>(plan.subs.size());
  if (p <= n_subs || n_subs == 0) return plan;  // identity below the threshold
  // heaviest sub-metatrees first (ties by ascending id), round-robin into the
  // empty partitions
  std::vector<int> order(n_subs);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return plan.subs[a].weight > plan.subs[b].weight; });
  if (static_cast<int>(plan.parts.size()) < p) plan.parts.resize(p);
  std::size_t next = 0;
  for (auto& part : plan.parts) {
    if (!part.sub_ids.empty()) continue;
    part.sub_ids.push_back(order[next % order.size()]);
    ++next;
  }
  for (int s = 0; s < n_subs; ++s) {
    auto owners = plan.owners_of_sub(s);
    if (owners.size() <= 1) continue;
    for (std::size_t i = 0; i < owners.size(); ++i) {
      plan.parts[owners[i]].replica = true;
      plan.parts[owners[i]].replica_index = static_cast<int>(i);
      plan.parts[owners[i]].replica_count = static_cast<int>(owners.size());
    }
  }
  if (plan.deduplicated) {
    plan.deduplicated = false;
    plan = deduplicate(std::move(plan));
  }
  return plan;
}

std::vector<HetPartition> materialize_partitions(const HetGraph& g, const PartitionPlan& plan) {
  if (!plan.deduplicated) throw std::invalid_argument("plan must be deduplicated before materialization");
  std::vector<HetPartition> out;
  for (std::size_t i = 0; i < plan.parts.size(); ++i) {
    const PlanPartition& part = plan.parts[i];
    HetPartition hp;
    hp.id = static_cast<int>(i);
    hp.owned_relations = part.relations;
    HetGraph& sg = hp.graph;
    sg.reg = g.reg;
    sg.node_counts = g.node_counts;
    sg.target = g.target;
    sg.num_classes = g.num_classes;
    sg.labels = g.labels;  // full copy of all target nodes and labels
    sg.features.resize(g.reg.num_node_types());
    for (NodeTypeId t : part.node_types) sg.features[t] = g.features[t];
    for (int r : part.relations) {
      if (r < 0 || r >= static_cast<int>(g.relations.size()))
        throw std::invalid_argument("plan relation absent from graph: " + std::to_string(r));
      sg.relations.push_back(g.relations[r]);
      sg.is_reverse.push_back(g.is_reverse[r]);
      sg.adj.push_back(g.adj[r]);  // complete mono-relation subgraph
    }
    out.push_back(std::move(hp));
  }
  return out;
}

std::vector<NodeId> boundary_nodes(const HetGraph& g, const PartitionPlan& plan, int part) {
  std::vector<char> mark(g.node_counts[g.target], 0);
  for (const auto& s : plan.subs) {
    auto owners = plan.owners_of_sub(s.id);
    if (std::find(owners.begin(), owners.end(), part) != owners.end()) continue;
    if (owners.empty()) continue;
    const int rel = plan.tree.pos[s.child_pos].rel_index;
    const Csr& a = g.adj[rel];
    for (NodeId v = 0; v < g.node_counts[g.target]; ++v)
      if (a.degree(v) > 0) mark[v] = 1;
  }
  std::vector<NodeId> out;
  for (NodeId v = 0; v < mark.size(); ++v)
    if (mark[v]) out.push_back(v);
  return out;
}

PartitionPlan meta_partition(const Metagraph& m, NodeTypeId root, int k, int p,
                             const std::optional<std::vector<std::vector<int>>>& metapaths,
                             WeightDupPolicy policy) {
  Metatree tree = metapaths ? build_metatree(m, root, *metapaths) : build_metatree(m, root, k);
  auto subs = split_metatree(tree, m, policy);
  std::vector<std::uint64_t> weights;
  for (const auto& s : subs) weights.push_back(s.weight);
  auto assignment = lpt_assign(weights, p);
  PartitionPlan plan = make_plan(std::move(tree), std::move(subs), p, assignment);
  plan = deduplicate(std::move(plan));
  plan = replicate_for_excess_workers(std::move(plan), p);
  return plan;
}

}  // namespace hetsim
