#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hetsim/hgnn.hpp"
#include "hetsim/metapartition.hpp"

namespace hetsim {

enum class MsgKind { PartialAgg, PartialGrad, FeatureFetchRequest, FeatureFetchReply };

struct AccountingModel {
  int header_bytes = 32;
  int id_bytes = 8;
  int elem_bytes = 4;  // payload element width: 2, 4 or 8
};

struct Message {
  MsgKind kind = MsgKind::PartialAgg;
  int layer = 0;
  int sender = -1;
  int receiver = -1;
  NodeTypeId node_type = -1;
  std::vector<NodeId> node_ids;
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::uint64_t bytes = 0;
};

struct CommStats {
  struct Entry {
    std::uint64_t count = 0;
    std::uint64_t bytes = 0;
  };
  // (sender, receiver, kind) -> totals; additive across batches
  std::map<std::tuple<int, int, int>, Entry> per_direction;

  void record(const Message& m);
  void merge(const CommStats& o);
  std::uint64_t total_bytes() const;
  std::uint64_t bytes_of(MsgKind k) const;
  Entry direction_kind(int from, int to, MsgKind k) const;
};

// Ownership view the RAF engine executes against. Meta plans own whole
// sub-metatrees (replicas split the batch); relation-random plans own each
// relation's slots wherever they appear in the tree.
struct RafPlanView {
  Metatree tree;
  int p = 1;
  // per root-child position (tree order): owning worker list
  std::vector<std::vector<int>> top_owners;
  // per relation: owner worker for non-top slots; empty = inherit the top
  // owner of the enclosing subtree (meta behaviour)
  std::vector<int> rel_owner;
  bool meta = true;
};

RafPlanView raf_view_from_plan(const PartitionPlan& plan);
RafPlanView raf_view_random_relations(const Metatree& tree, int num_relations, int p,
                                      std::uint64_t seed);

struct ExecutionReport {
  Matrix logits;                  // rows aligned with sorted unique batch ids
  std::vector<NodeId> logit_ids;
  double loss = 0.0;
  GradientSet grads;
  CommStats stats;
  std::vector<Message> trace;
  std::uint64_t sync_bytes = 0;   // gradient synchronisation (ring model)
  std::vector<std::uint64_t> boundary_counts;  // structural, per worker
  std::uint64_t boundary_cut_edges = 0;        // edges under cross-owned slots
  bool cross_ids_target_only = true;
};

ExecutionReport run_raf_batch(const HetGraph& g, const RafPlanView& view, const HGNNModel& model,
                              const LearnableStore& store, std::span<const NodeId> batch,
                              const std::vector<int>& fanouts, std::uint64_t rng_seed,
                              int designated, const AccountingModel& acct = {});

// Data-parallel baseline: identical numerics to the flat pass, plus remote
// feature/topology fetch accounting against a random per-type node ownership
// and ring all-reduce bytes for the full model.
ExecutionReport run_vanilla_batch(const HetGraph& g, const Metatree& tree, const HGNNModel& model,
                                  const LearnableStore& store, std::span<const NodeId> batch,
                                  const std::vector<int>& fanouts, std::uint64_t rng_seed, int p,
                                  std::uint64_t owner_seed, const AccountingModel& acct = {});

struct EquivalenceResult {
  double logit_diff = 0.0;
  double grad_diff = 0.0;
  double max_diff() const { return logit_diff > grad_diff ? logit_diff : grad_diff; }
};

// Runs both engines on shared sampling blocks and compares logits and every
// gradient; the flat pass is the oracle.
EquivalenceResult check_equivalence(const HetGraph& g, const RafPlanView& view,
                                    const HGNNModel& model, const LearnableStore& store,
                                    std::span<const NodeId> batch, const std::vector<int>& fanouts,
                                    std::uint64_t rng_seed, int designated);

struct CommBoundVerdict {
  bool message_bound_ok = true;    // per direction: PartialAgg count <= k_rel * |B(sender)|
  bool target_only_ok = true;      // meta plans: cross-worker ids are target-typed
};

CommBoundVerdict check_comm_bounds(const ExecutionReport& report, int num_relations, bool meta_plan);

// Classic bipartition quantities for a node 2-coloring of the flattened
// graph: boundary node counts of both sides and the cross-partition edge
// count. side[type][node] in {0, 1}.
struct BipartitionCut {
  std::uint64_t boundary[2] = {0, 0};
  std::uint64_t cut_edges = 0;
};
BipartitionCut bipartition_cut(const HetGraph& g, const std::vector<std::vector<int>>& side);

}  // namespace hetsim
