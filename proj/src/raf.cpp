#include "hetsim/raf.hpp"

#include <algorithm>
#include <memory>
#include <random>
#include <set>
#include <stdexcept>

namespace hetsim {

void CommStats::record(const Message& m) {
  auto& e = per_direction[{m.sender, m.receiver, static_cast<int>(m.kind)}];
  e.count += 1;
  e.bytes += m.bytes;
}

void CommStats::merge(const CommStats& o) {
  for (const auto& [k, e] : o.per_direction) {
    auto& mine = per_direction[k];
    mine.count += e.count;
    mine.bytes += e.bytes;
  }
}

std::uint64_t CommStats::total_bytes() const {
  std::uint64_t b = 0;
  for (const auto& [k, e] : per_direction) b += e.bytes;
  return b;
}

std::uint64_t CommStats::bytes_of(MsgKind k) const {
  std::uint64_t b = 0;
  for (const auto& [key, e] : per_direction)
    if (std::get<2>(key) == static_cast<int>(k)) b += e.bytes;
  return b;
}

CommStats::Entry CommStats::direction_kind(int from, int to, MsgKind k) const {
  auto it = per_direction.find({from, to, static_cast<int>(k)});
  return it == per_direction.end() ? Entry{} : it->second;
}

RafPlanView raf_view_from_plan(const PartitionPlan& plan) {
  RafPlanView v;
  v.tree = plan.tree;
  v.p = plan.p;
  v.meta = true;
  std::map<int, int> sub_of_child;
  for (const SubMetatree& s : plan.subs) sub_of_child[s.child_pos] = s.id;
  for (int c : v.tree.pos[0].children) {
    auto it = sub_of_child.find(c);
    if (it == sub_of_child.end())
      throw std::invalid_argument("plan has no sub-metatree for a root child");
    v.top_owners.push_back(plan.owners_of_sub(it->second));
  }
  return v;
}

RafPlanView raf_view_random_relations(const Metatree& tree, int num_relations, int p,
                                      std::uint64_t seed) {
  RafPlanView v;
  v.tree = tree;
  v.p = p;
  v.meta = false;
  v.rel_owner.resize(num_relations);
  std::mt19937_64 rng(mix_seed(seed, 0x5e1ec7ULL));
  std::uniform_int_distribution<int> pick(0, p - 1);
  for (int r = 0; r < num_relations; ++r) v.rel_owner[r] = pick(rng);
  for (int c : v.tree.pos[0].children)
    v.top_owners.push_back({v.rel_owner[v.tree.pos[c].rel_index]});
  return v;
}

namespace {

std::size_t row_of(const std::vector<NodeId>& sorted_ids, NodeId id) {
  auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
  if (it == sorted_ids.end() || *it != id)
    throw std::runtime_error("node id missing from frontier: " + std::to_string(id));
  return static_cast<std::size_t>(it - sorted_ids.begin());
}

const Block* global_block(const SampledBlocks& blocks, int hop, int rel) {
  for (const Block& b : blocks.hops[hop - 1])
    if (b.rel_index == rel) return &b;
  return nullptr;
}

Block slice_block(const Block* global, int rel, int hop, const std::vector<NodeId>& dsts) {
  Block b;
  b.rel_index = rel;
  b.hop = hop;
  b.dst_ids = dsts;
  b.indptr.assign(1, 0);
  for (NodeId d : dsts) {
    if (global) {
      const std::size_t i = row_of(global->dst_ids, d);
      for (std::uint32_t e = global->indptr[i]; e < global->indptr[i + 1]; ++e)
        b.src_ids.push_back(global->src_ids[e]);
    }
    b.indptr.push_back(static_cast<std::uint32_t>(b.src_ids.size()));
  }
  return b;
}

std::vector<NodeId> sorted_unique_srcs(const Block& b) {
  std::vector<NodeId> out(b.src_ids);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t payload_bytes(const AccountingModel& a, std::size_t rows, std::size_t dim) {
  return static_cast<std::uint64_t>(a.header_bytes) + rows * dim * a.elem_bytes;
}

struct PosEval {
  int pos = -1;
  NodeTypeId type = -1;
  int depth = 0;
  std::vector<NodeId> F;
  Matrix h;  // post-activation output rows aligned with F
  struct ChildRec {
    int pos = -1;
    int rel = -1;
    Block blk;  // sliced to the parent's frontier
    std::vector<NodeId> F_c;
    Matrix mean;
    std::unique_ptr<PosEval> eval;
  };
  std::vector<ChildRec> kids;
  // cross-worker aggregation messages emitted at this position, for the
  // backward mirror: (sender worker, active node ids)
  std::vector<std::pair<int, std::vector<NodeId>>> cross;
};

struct RafContext {
  const HetGraph& g;
  const RafPlanView& view;
  const HGNNModel& model;
  const LearnableStore& store;
  const SampledBlocks& blocks;
  int designated;
  AccountingModel acct;

  CommStats stats;
  std::vector<Message> trace;
  GradientSet grads;
  std::map<SlotKey, std::set<int>> slot_contributors;
  std::map<int, std::set<int>> feat_contributors;

  int edge_owner(int pos, int top_owner) const {
    if (view.meta) return top_owner;
    return view.rel_owner[view.tree.pos[pos].rel_index];
  }

  int dim_at_depth(int d, NodeTypeId t) const {
    return d == model.k ? model.input_dims[t] : model.out_dim(model.k - d);
  }

  void emit(Message m) {
    stats.record(m);
    trace.push_back(std::move(m));
  }
};

std::unique_ptr<PosEval> eval_position(RafContext& ctx, int pos, std::vector<NodeId> F,
                                       int top_owner) {
  const Metatree& tree = ctx.view.tree;
  auto pe = std::make_unique<PosEval>();
  pe->pos = pos;
  pe->type = tree.pos[pos].type;
  pe->depth = tree.pos[pos].depth;
  pe->F = std::move(F);
  const int k = ctx.model.k;
  const int d = pe->depth;

  if (d == k) {
    const TypeFeatures& f = ctx.g.features[pe->type];
    Matrix h(pe->F.size(), static_cast<std::size_t>(f.dim));
    if (f.kind == StorageKind::Dense) {
      for (std::size_t i = 0; i < pe->F.size(); ++i)
        for (int j = 0; j < f.dim; ++j) h.at(i, j) = f.values.at(pe->F[i], j);
    } else if (f.kind == StorageKind::Learnable) {
      const auto& table = ctx.store.tables.at(pe->type);
      for (std::size_t i = 0; i < pe->F.size(); ++i)
        for (int j = 0; j < f.dim; ++j) h.at(i, j) = table.w.at(pe->F[i], j);
    } else {
      throw std::runtime_error("missing features for node type " +
                               ctx.g.reg.node_type_names[pe->type]);
    }
    pe->h = std::move(h);
    return pe;
  }

  if (tree.pos[pos].children.empty()) {
    pe->h = Matrix(pe->F.size(), static_cast<std::size_t>(ctx.dim_at_depth(d, pe->type)));
    return pe;
  }

  const int l = k - d;  // layer producing this position's embedding
  Matrix out(pe->F.size(), static_cast<std::size_t>(ctx.model.out_dim(l)));
  const int combine_owner = ctx.edge_owner(pos, top_owner);
  std::map<int, std::set<std::size_t>> sender_active;

  for (int cpos : tree.pos[pos].children) {
    PosEval::ChildRec rec;
    rec.pos = cpos;
    rec.rel = tree.pos[cpos].rel_index;
    rec.blk = slice_block(global_block(ctx.blocks, d + 1, rec.rel), rec.rel, d + 1, pe->F);
    rec.F_c = sorted_unique_srcs(rec.blk);
    rec.eval = eval_position(ctx, cpos, rec.F_c, top_owner);
    rec.mean = mean_aggregate(rec.blk, rec.eval->h, rec.F_c);
    const Matrix& w = ctx.model.weights.at(SlotKey{rec.rel, l});
    Matrix partial = matmul(rec.mean, w);
    const int producer = ctx.edge_owner(cpos, top_owner);
    ctx.slot_contributors[SlotKey{rec.rel, l}].insert(producer);
    if (producer != combine_owner) {
      auto& act = sender_active[producer];
      for (std::size_t i = 0; i < pe->F.size(); ++i)
        if (rec.blk.indptr[i] < rec.blk.indptr[i + 1]) act.insert(i);
    }
    add_inplace(out, partial);
    pe->kids.push_back(std::move(rec));
  }

  for (const auto& [sender, act] : sender_active) {
    if (act.empty()) continue;  // nothing aggregated, nothing to ship
    std::vector<NodeId> ids;
    for (std::size_t i : act) ids.push_back(pe->F[i]);
    Message m;
    m.kind = MsgKind::PartialAgg;
    m.layer = l;
    m.sender = sender;
    m.receiver = combine_owner;
    m.node_type = pe->type;
    m.rows = ids.size();
    m.dim = static_cast<std::size_t>(ctx.model.out_dim(l));
    m.bytes = payload_bytes(ctx.acct, m.rows, m.dim);
    m.node_ids = ids;
    ctx.emit(std::move(m));
    pe->cross.push_back({sender, std::move(ids)});
  }

  for (double& x : out.data) x = x > 0.0 ? x : 0.0;
  pe->h = std::move(out);
  return pe;
}

void backward_position(RafContext& ctx, PosEval& pe, const Matrix& dH, int top_owner) {
  const int k = ctx.model.k;
  if (pe.depth == k) {
    if (ctx.g.features[pe.type].kind == StorageKind::Learnable && !pe.F.empty()) {
      GradientSet one;
      one.feature_grads.emplace(pe.type, std::make_pair(pe.F, dH));
      ctx.grads.accumulate(one);
      ctx.feat_contributors[pe.type].insert(ctx.edge_owner(pe.pos, top_owner));
    }
    return;
  }
  if (pe.kids.empty()) return;

  const int l = k - pe.depth;
  Matrix dpre = dH;
  for (std::size_t i = 0; i < dpre.data.size(); ++i)
    if (pe.h.data[i] <= 0.0) dpre.data[i] = 0.0;

  const int combine_owner = ctx.edge_owner(pe.pos, top_owner);
  for (const auto& [sender, ids] : pe.cross) {
    Message m;
    m.kind = MsgKind::PartialGrad;
    m.layer = l;
    m.sender = combine_owner;
    m.receiver = sender;
    m.node_type = pe.type;
    m.node_ids = ids;
    m.rows = ids.size();
    m.dim = static_cast<std::size_t>(ctx.model.out_dim(l));
    m.bytes = payload_bytes(ctx.acct, m.rows, m.dim);
    ctx.emit(std::move(m));
  }

  for (PosEval::ChildRec& rec : pe.kids) {
    const Matrix& w = ctx.model.weights.at(SlotKey{rec.rel, l});
    auto git = ctx.grads.weight_grads.find(SlotKey{rec.rel, l});
    if (git == ctx.grads.weight_grads.end())
      git = ctx.grads.weight_grads.emplace(SlotKey{rec.rel, l}, Matrix(w.rows, w.cols)).first;
    matmul_tn_acc(rec.mean, dpre, git->second);

    Matrix dmean = matmul_nt(dpre, w);
    Matrix dF_c(rec.F_c.size(), dmean.cols);
    for (std::size_t i = 0; i < rec.blk.dst_ids.size(); ++i) {
      const std::uint32_t lo = rec.blk.indptr[i], hi = rec.blk.indptr[i + 1];
      if (lo == hi) continue;
      const double inv = 1.0 / static_cast<double>(hi - lo);
      const double* di = dmean.row(i);
      for (std::uint32_t x = lo; x < hi; ++x) {
        double* s = dF_c.row(row_of(rec.F_c, rec.blk.src_ids[x]));
        for (std::size_t j = 0; j < dmean.cols; ++j) s[j] += di[j] * inv;
      }
    }
    backward_position(ctx, *rec.eval, dF_c, top_owner);
  }
}

std::vector<std::uint64_t> structural_boundaries(const HetGraph& g, const RafPlanView& view) {
  const Metatree& tree = view.tree;
  std::vector<std::set<std::pair<NodeTypeId, NodeId>>> bound(view.p);
  auto owners_of_edge = [&](int pos) -> std::vector<int> {
    if (view.meta) {
      const int anc = tree.root_child_ancestor(pos);
      for (std::size_t ci = 0; ci < tree.pos[0].children.size(); ++ci)
        if (tree.pos[0].children[ci] == anc) return view.top_owners[ci];
      throw std::logic_error("position outside every root subtree");
    }
    return {view.rel_owner[tree.pos[pos].rel_index]};
  };
  for (std::size_t pos = 1; pos < tree.pos.size(); ++pos) {
    const MetatreePos& mp = tree.pos[pos];
    bool crossing;
    if (mp.depth == 1) {
      crossing = true;  // combined at the designated worker
    } else if (view.meta) {
      crossing = false;
    } else {
      crossing = view.rel_owner[mp.rel_index] != view.rel_owner[tree.pos[mp.parent].rel_index];
    }
    if (!crossing) continue;
    const std::vector<int> owners = owners_of_edge(static_cast<int>(pos));
    const NodeTypeId parent_type = tree.pos[mp.parent].type;
    const Csr& adj = g.adj[mp.rel_index];
    // sender-side boundary: the nodes a slot owner may have to ship partials for
    for (int i : owners)
      for (NodeId v = 0; v < g.node_counts[parent_type]; ++v)
        if (adj.indptr[v + 1] > adj.indptr[v]) bound[i].insert({parent_type, v});
  }
  std::vector<std::uint64_t> out(view.p);
  for (int i = 0; i < view.p; ++i) out[i] = bound[i].size();
  return out;
}

}  // namespace

ExecutionReport run_raf_batch(const HetGraph& g, const RafPlanView& view, const HGNNModel& model,
                              const LearnableStore& store, std::span<const NodeId> batch,
                              const std::vector<int>& fanouts, std::uint64_t rng_seed,
                              int designated, const AccountingModel& acct) {
  if (static_cast<int>(fanouts.size()) != model.k)
    throw std::invalid_argument("fanout count must equal the model depth");
  if (designated < 0 || designated >= view.p)
    throw std::invalid_argument("designated worker out of range");

  std::vector<NodeId> batch_ids(batch.begin(), batch.end());
  std::sort(batch_ids.begin(), batch_ids.end());
  batch_ids.erase(std::unique(batch_ids.begin(), batch_ids.end()), batch_ids.end());

  const SampledBlocks blocks = sample_khop_restricted(g, batch_ids, fanouts, rng_seed,
                                                      hop_relation_sets(view.tree, model.k));
  RafContext ctx{g, view, model, store, blocks, designated, acct, {}, {}, {}, {}, {}};

  struct TopRec {
    int rel = -1;
    int owner = -1;
    std::vector<NodeId> shard;
    Block blk;
    std::vector<NodeId> F_c;
    Matrix mean;
    std::unique_ptr<PosEval> child;
    std::size_t bucket = 0;
  };
  struct Bucket {
    int owner = -1;
    std::vector<NodeId> shard;
    Matrix payload;
    std::set<std::size_t> active;
  };
  std::vector<TopRec> tops;
  std::vector<Bucket> buckets;
  std::map<std::tuple<int, int, int>, std::size_t> bucket_of;  // (owner, n_owners, idx)

  const Metatree& tree = view.tree;
  for (std::size_t ci = 0; ci < tree.pos[0].children.size(); ++ci) {
    const int cpos = tree.pos[0].children[ci];
    const int rel = tree.pos[cpos].rel_index;
    const std::vector<int>& owners = view.top_owners[ci];
    for (std::size_t oi = 0; oi < owners.size(); ++oi) {
      TopRec tr;
      tr.rel = rel;
      tr.owner = owners[oi];
      for (std::size_t i = oi; i < batch_ids.size(); i += owners.size())
        tr.shard.push_back(batch_ids[i]);

      const auto bkey = std::make_tuple(tr.owner, static_cast<int>(owners.size()),
                                        static_cast<int>(oi));
      auto bit = bucket_of.find(bkey);
      if (bit == bucket_of.end()) {
        Bucket b;
        b.owner = tr.owner;
        b.shard = tr.shard;
        b.payload = Matrix(tr.shard.size(), static_cast<std::size_t>(model.num_classes));
        bucket_of.emplace(bkey, buckets.size());
        tr.bucket = buckets.size();
        buckets.push_back(std::move(b));
      } else {
        tr.bucket = bit->second;
      }

      tr.blk = slice_block(global_block(blocks, 1, rel), rel, 1, tr.shard);
      tr.F_c = sorted_unique_srcs(tr.blk);
      tr.child = eval_position(ctx, cpos, tr.F_c, tr.owner);
      tr.mean = mean_aggregate(tr.blk, tr.child->h, tr.F_c);
      const Matrix& w = model.weights.at(SlotKey{rel, model.k});
      Matrix partial = matmul(tr.mean, w);
      ctx.slot_contributors[SlotKey{rel, model.k}].insert(tr.owner);

      Bucket& b = buckets[tr.bucket];
      add_inplace(b.payload, partial);
      for (std::size_t i = 0; i < tr.shard.size(); ++i)
        if (tr.blk.indptr[i] < tr.blk.indptr[i + 1]) b.active.insert(i);
      tops.push_back(std::move(tr));
    }
  }

  ExecutionReport rep;
  rep.logit_ids = batch_ids;
  rep.logits = Matrix(batch_ids.size(), static_cast<std::size_t>(model.num_classes));
  for (Bucket& b : buckets) {
    if (b.owner != designated && !b.active.empty()) {
      Message m;
      m.kind = MsgKind::PartialAgg;
      m.layer = model.k;
      m.sender = b.owner;
      m.receiver = designated;
      m.node_type = g.target;
      for (std::size_t i : b.active) m.node_ids.push_back(b.shard[i]);
      m.rows = m.node_ids.size();
      m.dim = static_cast<std::size_t>(model.num_classes);
      m.bytes = payload_bytes(acct, m.rows, m.dim);
      ctx.emit(std::move(m));
    }
    for (std::size_t i = 0; i < b.shard.size(); ++i) {
      double* dst = rep.logits.row(row_of(batch_ids, b.shard[i]));
      const double* src = b.payload.row(i);
      for (int c = 0; c < model.num_classes; ++c) dst[c] += src[c];
    }
  }

  Matrix dlogits;
  rep.loss = cross_entropy(rep.logits, batch_ids, batch,
                           std::span<const std::int32_t>(g.labels), model.num_classes, &dlogits);

  for (Bucket& b : buckets) {
    if (b.owner != designated && !b.active.empty()) {
      Message m;
      m.kind = MsgKind::PartialGrad;
      m.layer = model.k;
      m.sender = designated;
      m.receiver = b.owner;
      m.node_type = g.target;
      for (std::size_t i : b.active) m.node_ids.push_back(b.shard[i]);
      m.rows = m.node_ids.size();
      m.dim = static_cast<std::size_t>(model.num_classes);
      m.bytes = payload_bytes(acct, m.rows, m.dim);
      ctx.emit(std::move(m));
    }
  }

  for (TopRec& tr : tops) {
    Matrix dP(tr.shard.size(), static_cast<std::size_t>(model.num_classes));
    for (std::size_t i = 0; i < tr.shard.size(); ++i) {
      const double* src = dlogits.row(row_of(batch_ids, tr.shard[i]));
      double* dst = dP.row(i);
      for (int c = 0; c < model.num_classes; ++c) dst[c] = src[c];
    }
    const Matrix& w = model.weights.at(SlotKey{tr.rel, model.k});
    auto git = ctx.grads.weight_grads.find(SlotKey{tr.rel, model.k});
    if (git == ctx.grads.weight_grads.end())
      git = ctx.grads.weight_grads.emplace(SlotKey{tr.rel, model.k}, Matrix(w.rows, w.cols)).first;
    matmul_tn_acc(tr.mean, dP, git->second);

    Matrix dmean = matmul_nt(dP, w);
    Matrix dF_c(tr.F_c.size(), dmean.cols);
    for (std::size_t i = 0; i < tr.blk.dst_ids.size(); ++i) {
      const std::uint32_t lo = tr.blk.indptr[i], hi = tr.blk.indptr[i + 1];
      if (lo == hi) continue;
      const double inv = 1.0 / static_cast<double>(hi - lo);
      const double* di = dmean.row(i);
      for (std::uint32_t x = lo; x < hi; ++x) {
        double* s = dF_c.row(row_of(tr.F_c, tr.blk.src_ids[x]));
        for (std::size_t j = 0; j < dmean.cols; ++j) s[j] += di[j] * inv;
      }
    }
    backward_position(ctx, *tr.child, dF_c, tr.owner);
  }

  // gradient synchronisation: slots touched by several workers pay a ring
  // all-reduce over exactly those workers
  for (const auto& [key, who] : ctx.slot_contributors) {
    const std::size_t s = who.size();
    if (s < 2) continue;
    const Matrix& w = model.weights.at(key);
    rep.sync_bytes += 2ULL * w.data.size() * acct.elem_bytes * (s - 1) / s;
  }
  for (const auto& [type, who] : ctx.feat_contributors) {
    const std::size_t s = who.size();
    if (s < 2) continue;
    auto it = ctx.grads.feature_grads.find(type);
    if (it == ctx.grads.feature_grads.end()) continue;
    rep.sync_bytes += 2ULL * it->second.second.data.size() * acct.elem_bytes * (s - 1) / s;
  }

  rep.grads = std::move(ctx.grads);
  rep.stats = std::move(ctx.stats);
  rep.trace = std::move(ctx.trace);
  rep.boundary_counts = structural_boundaries(g, view);
  for (const Message& m : rep.trace)
    if ((m.kind == MsgKind::PartialAgg || m.kind == MsgKind::PartialGrad) &&
        m.node_type != g.target)
      rep.cross_ids_target_only = false;

  const Metatree& t2 = view.tree;
  for (std::size_t pos = 1; pos < t2.pos.size(); ++pos) {
    bool crossing = t2.pos[pos].depth == 1;
    if (!crossing && !view.meta)
      crossing = view.rel_owner[t2.pos[pos].rel_index] !=
                 view.rel_owner[t2.pos[t2.pos[pos].parent].rel_index];
    if (crossing) rep.boundary_cut_edges += g.adj[t2.pos[pos].rel_index].src.size();
  }
  return rep;
}

ExecutionReport run_vanilla_batch(const HetGraph& g, const Metatree& tree, const HGNNModel& model,
                                  const LearnableStore& store, std::span<const NodeId> batch,
                                  const std::vector<int>& fanouts, std::uint64_t rng_seed, int p,
                                  std::uint64_t owner_seed, const AccountingModel& acct) {
  if (static_cast<int>(fanouts.size()) != model.k)
    throw std::invalid_argument("fanout count must equal the model depth");

  std::vector<NodeId> batch_ids(batch.begin(), batch.end());
  std::sort(batch_ids.begin(), batch_ids.end());
  batch_ids.erase(std::unique(batch_ids.begin(), batch_ids.end()), batch_ids.end());

  const auto hop_rels = hop_relation_sets(tree, model.k);
  const SampledBlocks blocks = sample_khop_restricted(g, batch_ids, fanouts, rng_seed, hop_rels);

  ExecutionReport rep;
  auto [logits, tape] = forward_flat(g, tree, blocks, model, store);
  Matrix dlogits;
  rep.loss = cross_entropy(logits, blocks.frontier[0][g.target], batch,
                           std::span<const std::int32_t>(g.labels), model.num_classes, &dlogits);
  rep.grads = backward_flat(g, tree, model, tape, dlogits);
  rep.logits = std::move(logits);
  rep.logit_ids = batch_ids;

  auto owner_of = [&](NodeTypeId t, NodeId v) {
    return static_cast<int>(mix_seed(owner_seed, mix_seed(static_cast<std::uint64_t>(t), v)) % p);
  };

  for (int w = 0; w < p; ++w) {
    std::vector<NodeId> shard;
    for (std::size_t i = w; i < batch_ids.size(); i += p) shard.push_back(batch_ids[i]);
    if (shard.empty()) continue;
    const SampledBlocks local = sample_khop_restricted(g, shard, fanouts, rng_seed, hop_rels);

    // per-hop topology pulls: each remote destination's sampled adjacency list
    for (int hop = 1; hop <= model.k; ++hop) {
      for (const Block& blk : local.hops[hop - 1]) {
        const NodeTypeId dst_t = g.relations[blk.rel_index].dst;
        std::map<int, std::pair<std::uint64_t, std::uint64_t>> per_owner;  // dsts, src ids
        for (std::size_t i = 0; i < blk.dst_ids.size(); ++i) {
          const int o = owner_of(dst_t, blk.dst_ids[i]);
          if (o == w) continue;
          auto& [nd, ns] = per_owner[o];
          nd += 1;
          ns += blk.indptr[i + 1] - blk.indptr[i];
        }
        for (const auto& [o, cnt] : per_owner) {
          Message req;
          req.kind = MsgKind::FeatureFetchRequest;
          req.layer = hop;
          req.sender = w;
          req.receiver = o;
          req.node_type = dst_t;
          req.rows = cnt.first;
          req.bytes = static_cast<std::uint64_t>(acct.header_bytes) + cnt.first * acct.id_bytes;
          rep.stats.record(req);
          Message rpl;
          rpl.kind = MsgKind::FeatureFetchReply;
          rpl.layer = hop;
          rpl.sender = o;
          rpl.receiver = w;
          rpl.node_type = dst_t;
          rpl.rows = cnt.second;
          rpl.bytes = static_cast<std::uint64_t>(acct.header_bytes) + cnt.second * acct.id_bytes;
          rep.stats.record(rpl);
        }
      }
    }

    // input feature pulls for the outermost frontier
    for (int t = 0; t < g.reg.num_node_types(); ++t) {
      const auto& front = local.frontier[model.k][t];
      if (front.empty()) continue;
      std::map<int, std::uint64_t> per_owner;
      for (NodeId v : front) {
        const int o = owner_of(t, v);
        if (o != w) per_owner[o] += 1;
      }
      const std::size_t dim = static_cast<std::size_t>(model.input_dims[t]);
      for (const auto& [o, n] : per_owner) {
        Message req;
        req.kind = MsgKind::FeatureFetchRequest;
        req.layer = 0;
        req.sender = w;
        req.receiver = o;
        req.node_type = t;
        req.rows = n;
        req.bytes = static_cast<std::uint64_t>(acct.header_bytes) + n * acct.id_bytes;
        rep.stats.record(req);
        Message rpl;
        rpl.kind = MsgKind::FeatureFetchReply;
        rpl.layer = 0;
        rpl.sender = o;
        rpl.receiver = w;
        rpl.node_type = t;
        rpl.rows = n;
        rpl.dim = dim;
        rpl.bytes = static_cast<std::uint64_t>(acct.header_bytes) + n * dim * acct.elem_bytes;
        rep.stats.record(rpl);
      }
    }
  }

  if (p > 1)
    rep.sync_bytes = 2ULL * model.param_count() * acct.elem_bytes * (p - 1) / p;
  return rep;
}

EquivalenceResult check_equivalence(const HetGraph& g, const RafPlanView& view,
                                    const HGNNModel& model, const LearnableStore& store,
                                    std::span<const NodeId> batch, const std::vector<int>& fanouts,
                                    std::uint64_t rng_seed, int designated) {
  ExecutionReport raf = run_raf_batch(g, view, model, store, batch, fanouts, rng_seed, designated);

  std::vector<NodeId> batch_ids(batch.begin(), batch.end());
  std::sort(batch_ids.begin(), batch_ids.end());
  batch_ids.erase(std::unique(batch_ids.begin(), batch_ids.end()), batch_ids.end());
  const SampledBlocks blocks = sample_khop_restricted(g, batch_ids, fanouts, rng_seed,
                                                      hop_relation_sets(view.tree, model.k));
  auto [logits, tape] = forward_flat(g, view.tree, blocks, model, store);
  Matrix dlogits;
  cross_entropy(logits, batch_ids, batch, std::span<const std::int32_t>(g.labels),
                model.num_classes, &dlogits);
  GradientSet flat_grads = backward_flat(g, view.tree, model, tape, dlogits);

  EquivalenceResult res;
  res.logit_diff = max_abs_diff(raf.logits, logits);
  res.grad_diff = raf.grads.max_abs_diff_vs(flat_grads);
  return res;
}

CommBoundVerdict check_comm_bounds(const ExecutionReport& report, int num_relations,
                                   bool meta_plan) {
  CommBoundVerdict v;
  std::map<std::pair<int, int>, std::uint64_t> agg_count;
  for (const auto& [key, e] : report.stats.per_direction)
    if (std::get<2>(key) == static_cast<int>(MsgKind::PartialAgg))
      agg_count[{std::get<0>(key), std::get<1>(key)}] += e.count;
  for (const auto& [dir, n] : agg_count) {
    const int sender = dir.first;
    const std::uint64_t bound =
        static_cast<std::uint64_t>(num_relations) * report.boundary_counts.at(sender);
    if (n > bound) v.message_bound_ok = false;
  }
  if (meta_plan) v.target_only_ok = report.cross_ids_target_only;
  return v;
}

BipartitionCut bipartition_cut(const HetGraph& g, const std::vector<std::vector<int>>& side) {
  BipartitionCut cut;
  std::vector<std::set<std::pair<NodeTypeId, NodeId>>> bound(2);
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    const Relation& rel = g.relations[r];
    const Csr& adj = g.adj[r];
    for (NodeId d = 0; d < g.node_counts[rel.dst]; ++d) {
      const int sd = side[rel.dst][d];
      for (std::uint32_t e = adj.indptr[d]; e < adj.indptr[d + 1]; ++e) {
        const NodeId s = adj.src[e];
        const int ss = side[rel.src][s];
        if (ss == sd) continue;
        cut.cut_edges += 1;
        bound[sd].insert({rel.dst, d});
        bound[ss].insert({rel.src, s});
      }
    }
  }
  cut.boundary[0] = bound[0].size();
  cut.boundary[1] = bound[1].size();
  return cut;
}

}  // namespace hetsim
