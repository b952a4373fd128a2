#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hetsim/hetgraph.hpp"

namespace hetsim {

// Unrolled computation-dependency tree over the metagraph, rooted at the
// target node type. A tree edge (parent -> child) carries the relation whose
// destination type is the parent's type; child positions are created in
// ascending relation-index order. Duplicate (type, relation) occurrences are
// expected before deduplication.
struct MetatreePos {
  NodeTypeId type = -1;
  int depth = 0;
  int parent = -1;
  int rel_index = -1;  // relation on the edge above; -1 at the root
  std::vector<int> children;
};

struct Metatree {
  std::vector<MetatreePos> pos;  // pos[0] is the root
  int k = 0;
  NodeTypeId root_type = -1;

  // Unique relation indices appearing anywhere in the tree, ascending.
  std::vector<int> unique_relations() const;
  // Index of the root-child ancestor of a position (-1 for the root itself).
  int root_child_ancestor(int p) const;
};

enum class WeightDupPolicy { Unique, Multiset };

struct SubMetatree {
  int id = -1;
  int child_pos = -1;  // the child-of-root position this subtree hangs from
  std::vector<int> positions;          // includes the root position 0
  std::vector<int> relation_multiset;  // relations on edges, tree order
  std::vector<int> relations_unique;   // ascending
  std::vector<NodeTypeId> vertex_types_unique;  // ascending, includes root type
  std::uint64_t weight = 0;
};

struct PlanPartition {
  std::vector<int> sub_ids;
  std::vector<int> relations;          // deduplicated, first occurrence in sub id order
  std::vector<NodeTypeId> node_types;  // union of relation endpoints + target
  std::uint64_t weight = 0;
  bool replica = false;
  int replica_index = 0;
  int replica_count = 1;
};

struct PartitionPlan {
  int p = 0;
  Metatree tree;
  std::vector<SubMetatree> subs;
  std::vector<PlanPartition> parts;
  bool deduplicated = false;

  // Partitions whose sub list contains the sub-metatree.
  std::vector<int> owners_of_sub(int sub_id) const;
};

struct HetPartition {
  int id = -1;
  // Sub-HetGraph: per owned relation the complete mono-relation subgraph, all
  // target nodes and labels, features for owned node types only. Node and
  // relation indices keep the parent graph's numbering.
  HetGraph graph;
  std::vector<int> owned_relations;  // relation indices in the parent graph
};

Metatree build_metatree(const Metagraph& m, NodeTypeId root, int k);
// Metapath mode: each path is a sequence of relation indices; path step i's
// destination type must equal the previous step's source type (starting at
// the root). The tree is exactly the union of the paths.
Metatree build_metatree(const Metagraph& m, NodeTypeId root,
                        const std::vector<std::vector<int>>& metapaths);

std::vector<SubMetatree> split_metatree(const Metatree& t, const Metagraph& m,
                                        WeightDupPolicy policy = WeightDupPolicy::Unique);

// Longest-processing-time-first: items in descending weight (ties by
// ascending index) go to the partition with the smallest current sum (ties by
// smallest partition index). Returns the partition index per item.
std::vector<int> lpt_assign(const std::vector<std::uint64_t>& weights, int p);

PartitionPlan make_plan(Metatree tree, std::vector<SubMetatree> subs, int p,
                        const std::vector<int>& assignment);
PartitionPlan deduplicate(PartitionPlan plan);
PartitionPlan replicate_for_excess_workers(PartitionPlan plan, int p);

std::vector<HetPartition> materialize_partitions(const HetGraph& g, const PartitionPlan& plan);

// Nodes of partition `part` whose cross-relation combination depends on a
// root-child slot owned by a different partition; always a subset of the
// target nodes for meta plans.
std::vector<NodeId> boundary_nodes(const HetGraph& g, const PartitionPlan& plan, int part);

// End-to-end pipeline: metagraph -> metatree -> sub-metatrees -> LPT ->
// deduplicated plan (with replication when p exceeds the sub count).
PartitionPlan meta_partition(const Metagraph& m, NodeTypeId root, int k, int p,
                             const std::optional<std::vector<std::vector<int>>>& metapaths =
                                 std::nullopt,
                             WeightDupPolicy policy = WeightDupPolicy::Unique);

}  // namespace hetsim
