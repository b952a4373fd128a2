#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "hetsim/hetgraph.hpp"
#include "hetsim/matrix.hpp"
#include "hetsim/metapartition.hpp"
#include "hetsim/sampling.hpp"

namespace hetsim {

struct AdamHyper {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One weight matrix per (relation, layer) slot present in the metatree.
struct SlotKey {
  int rel_index = -1;
  int layer = 0;  // 1..k
  bool operator<(const SlotKey& o) const {
    return rel_index != o.rel_index ? rel_index < o.rel_index : layer < o.layer;
  }
  bool operator==(const SlotKey& o) const { return rel_index == o.rel_index && layer == o.layer; }
};

struct HGNNModel {
  int k = 1;
  int hidden = 16;
  int num_classes = 2;
  std::vector<int> input_dims;        // per node type (feature or learnable dim)
  std::map<SlotKey, Matrix> weights;  // W_r^{(l)}, [d_{l-1} x d_l]

  int out_dim(int layer) const { return layer == k ? num_classes : hidden; }
  std::uint64_t param_count() const;
};

// Creates a weight matrix for every (relation, layer) slot the metatree uses.
// Layer l applies to tree edges at depth k - l + 1.
HGNNModel init_model(const HetGraph& g, const Metatree& tree, int hidden, std::uint64_t seed);

struct LearnableFeatureTable {
  Matrix w;  // [n x d0]
  Matrix m;  // Adam first moment, same shape
  Matrix v;  // Adam second moment, same shape
  std::int64_t step = 0;
  AdamHyper hp;
};

struct LearnableStore {
  std::map<int, LearnableFeatureTable> tables;  // keyed by node type
};

// Uniform init in [-1/sqrt(d0), +1/sqrt(d0)] for every featureless node type.
LearnableStore init_learnable(const HetGraph& g, std::uint64_t seed, const AdamHyper& hp = {});

struct GradientSet {
  std::map<SlotKey, Matrix> weight_grads;
  // per learnable type: touched row ids (sorted) and their gradient rows
  std::map<int, std::pair<std::vector<NodeId>, Matrix>> feature_grads;

  void accumulate(const GradientSet& other);
  double max_abs_diff_vs(const GradientSet& other) const;
};

// --- Eq.-style primitives -------------------------------------------------

// Mean over each destination's sampled neighbors; zero row for empty
// neighborhoods. h_src rows align with the sorted src_frontier ids.
Matrix mean_aggregate(const Block& blk, const Matrix& h_src, const std::vector<NodeId>& src_frontier);

// Relation-specific aggregation: mean then linear map.
Matrix agg_relation(const Block& blk, const Matrix& h_src, const std::vector<NodeId>& src_frontier,
                    const Matrix& w);

// Cross-relation aggregation: elementwise sum, fixed input order.
Matrix agg_all(const std::vector<const Matrix*>& partials);

// --- Full forward/backward ------------------------------------------------

struct TapeEntry {
  int layer = 0;
  int rel_index = -1;
  int hop = 0;        // tree depth of the edge = blocks hop index
  int block_idx = -1;  // index into blocks.hops[hop-1]
  NodeTypeId dst_type = -1;
  Matrix mean;  // post-mean pre-linear activations, rows = block dst rows
};

struct ForwardTape {
  const SampledBlocks* blocks = nullptr;
  // H[d][type] = h^{(k-d)} rows aligned with blocks->frontier[d][type]
  std::vector<std::map<int, Matrix>> H;
  std::vector<TapeEntry> entries;
};

// Layer-by-layer aggregation over the sampled blocks with ReLU between
// layers and none at the output. Returns logits aligned with
// blocks.frontier[0][target] and a tape sufficient for gradients.
std::pair<Matrix, ForwardTape> forward_flat(const HetGraph& g, const Metatree& tree,
                                            const SampledBlocks& blocks, const HGNNModel& model,
                                            const LearnableStore& store);

// Mean softmax cross-entropy over the batch. logit rows are looked up via
// row_ids (sorted); dlogits, if non-null, receives dL/dlogits per row.
double cross_entropy(const Matrix& logits, const std::vector<NodeId>& row_ids,
                     std::span<const NodeId> batch, std::span<const std::int32_t> labels,
                     int num_classes, Matrix* dlogits);

GradientSet backward_flat(const HetGraph& g, const Metatree& tree, const HGNNModel& model,
                          const ForwardTape& tape, const Matrix& dlogits);

// --- Optimizer ------------------------------------------------------------

struct ModelAdamState {
  std::map<SlotKey, Matrix> m, v;
  std::int64_t step = 0;
  AdamHyper hp;
};

void adam_update_model(HGNNModel& model, ModelAdamState& state, const GradientSet& grads);
// Sparse update: only the listed rows change; step counter advances once.
void adam_update_rows(LearnableFeatureTable& table, const std::vector<NodeId>& rows,
                      const Matrix& row_grads);

// Unique tree-edge relations at each depth with the given destination type.
std::map<int, std::vector<int>> rels_by_dst_at_depth(const Metatree& tree, int depth);
// For sampling: allowed relations per hop.
std::vector<std::vector<int>> hop_relation_sets(const Metatree& tree, int k);

}  // namespace hetsim
