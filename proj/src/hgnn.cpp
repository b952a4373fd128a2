#include "hetsim/hgnn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hetsim {

std::uint64_t HGNNModel::param_count() const {
  std::uint64_t n = 0;
  for (const auto& [key, w] : weights) n += w.data.size();
  return n;
}

std::map<int, std::vector<int>> rels_by_dst_at_depth(const Metatree& tree, int depth) {
  std::map<int, std::vector<int>> out;
  for (const auto& p : tree.pos) {
    if (p.depth != depth || p.rel_index < 0) continue;
    const NodeTypeId dst = tree.pos[p.parent].type;
    auto& v = out[dst];
    if (std::find(v.begin(), v.end(), p.rel_index) == v.end()) v.push_back(p.rel_index);
  }
  for (auto& [t, v] : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<std::vector<int>> hop_relation_sets(const Metatree& tree, int k) {
  std::vector<std::vector<int>> out(k);
  for (const auto& p : tree.pos) {
    if (p.rel_index < 0 || p.depth < 1 || p.depth > k) continue;
    auto& v = out[p.depth - 1];
    if (std::find(v.begin(), v.end(), p.rel_index) == v.end()) v.push_back(p.rel_index);
  }
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

HGNNModel init_model(const HetGraph& g, const Metatree& tree, int hidden, std::uint64_t seed) {
  HGNNModel model;
  model.k = std::max(tree.k, 1);
  model.hidden = hidden;
  model.num_classes = g.num_classes;
  model.input_dims.resize(g.reg.num_node_types(), 0);
  for (int t = 0; t < g.reg.num_node_types(); ++t) model.input_dims[t] = g.features[t].dim;

  for (const auto& p : tree.pos) {
    if (p.rel_index < 0) continue;
    const int layer = model.k - p.depth + 1;
    const SlotKey key{p.rel_index, layer};
    if (model.weights.count(key)) continue;
    const int in_dim = layer == 1 ? model.input_dims[p.type] : hidden;
    const int out_dim = model.out_dim(layer);
    Matrix w(static_cast<std::size_t>(in_dim), static_cast<std::size_t>(out_dim));
    const double scale = in_dim > 0 ? 1.0 / std::sqrt(static_cast<double>(in_dim)) : 0.0;
    std::mt19937_64 rng(mix_seed(seed, (static_cast<std::uint64_t>(p.rel_index) << 8) | layer));
    std::uniform_real_distribution<double> u(-scale, scale);
    for (double& x : w.data) x = u(rng);
    model.weights.emplace(key, std::move(w));
  }
  return model;
}

LearnableStore init_learnable(const HetGraph& g, std::uint64_t seed, const AdamHyper& hp) {
  LearnableStore store;
  for (int t = 0; t < g.reg.num_node_types(); ++t) {
    if (g.features[t].kind != StorageKind::Learnable) continue;
    const int d = g.features[t].dim;
    LearnableFeatureTable table;
    table.hp = hp;
    table.w = Matrix(g.node_counts[t], static_cast<std::size_t>(d));
    table.m = Matrix(g.node_counts[t], static_cast<std::size_t>(d));
    table.v = Matrix(g.node_counts[t], static_cast<std::size_t>(d));
    const double scale = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
    std::mt19937_64 rng(mix_seed(seed, 0xfeedULL + t));
    std::uniform_real_distribution<double> u(-scale, scale);
    for (double& x : table.w.data) x = u(rng);
    store.tables.emplace(t, std::move(table));
  }
  return store;
}

void GradientSet::accumulate(const GradientSet& other) {
  for (const auto& [key, g] : other.weight_grads) {
    auto it = weight_grads.find(key);
    if (it == weight_grads.end())
      weight_grads.emplace(key, g);
    else
      add_inplace(it->second, g);
  }
  for (const auto& [type, rows] : other.feature_grads) {
    auto it = feature_grads.find(type);
    if (it == feature_grads.end()) {
      feature_grads.emplace(type, rows);
      continue;
    }
    auto& [ids, mat] = it->second;
    std::vector<NodeId> merged(ids);
    merged.insert(merged.end(), rows.first.begin(), rows.first.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    Matrix out(merged.size(), mat.cols);
    auto scatter = [&](const std::vector<NodeId>& src_ids, const Matrix& src) {
      for (std::size_t i = 0; i < src_ids.size(); ++i) {
        const auto at = std::lower_bound(merged.begin(), merged.end(), src_ids[i]) - merged.begin();
        for (std::size_t j = 0; j < src.cols; ++j) out.at(at, j) += src.at(i, j);
      }
    };
    scatter(ids, mat);
    scatter(rows.first, rows.second);
    it->second = {std::move(merged), std::move(out)};
  }
}

double GradientSet::max_abs_diff_vs(const GradientSet& other) const {
  double m = 0.0;
  auto upd = [&](double d) {
    if (d < 0) d = -d;
    if (d > m) m = d;
  };
  auto keys = [&] {
    std::vector<SlotKey> ks;
    for (const auto& [k, v] : weight_grads) ks.push_back(k);
    for (const auto& [k, v] : other.weight_grads)
      if (!weight_grads.count(k)) ks.push_back(k);
    return ks;
  }();
  for (const SlotKey& k : keys) {
    const Matrix* a = weight_grads.count(k) ? &weight_grads.at(k) : nullptr;
    const Matrix* b = other.weight_grads.count(k) ? &other.weight_grads.at(k) : nullptr;
    if (a && b) {
      upd(max_abs_diff(*a, *b));
    } else {
      const Matrix* one = a ? a : b;
      for (double x : one->data) upd(x);
    }
  }
  std::vector<int> types;
  for (const auto& [t, v] : feature_grads) types.push_back(t);
  for (const auto& [t, v] : other.feature_grads)
    if (!feature_grads.count(t)) types.push_back(t);
  for (int t : types) {
    auto row_of = [](const std::pair<std::vector<NodeId>, Matrix>& fg, NodeId id) -> const double* {
      auto it = std::lower_bound(fg.first.begin(), fg.first.end(), id);
      if (it == fg.first.end() || *it != id) return nullptr;
      return fg.second.row(it - fg.first.begin());
    };
    std::vector<NodeId> ids;
    if (feature_grads.count(t)) ids = feature_grads.at(t).first;
    if (other.feature_grads.count(t))
      ids.insert(ids.end(), other.feature_grads.at(t).first.begin(),
                 other.feature_grads.at(t).first.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (NodeId id : ids) {
      const double* a = feature_grads.count(t) ? row_of(feature_grads.at(t), id) : nullptr;
      const double* b = other.feature_grads.count(t) ? row_of(other.feature_grads.at(t), id) : nullptr;
      std::size_t cols = feature_grads.count(t) ? feature_grads.at(t).second.cols
                                                : other.feature_grads.at(t).second.cols;
      for (std::size_t j = 0; j < cols; ++j) upd((a ? a[j] : 0.0) - (b ? b[j] : 0.0));
    }
  }
  return m;
}

static std::size_t row_index(const std::vector<NodeId>& sorted_ids, NodeId id) {
  auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
  if (it == sorted_ids.end() || *it != id)
    throw std::invalid_argument("node id not in frontier: " + std::to_string(id));
  return static_cast<std::size_t>(it - sorted_ids.begin());
}

Matrix mean_aggregate(const Block& blk, const Matrix& h_src, const std::vector<NodeId>& src_frontier) {
  Matrix out(blk.dst_ids.size(), h_src.cols);
  for (std::size_t i = 0; i < blk.dst_ids.size(); ++i) {
    const std::uint32_t lo = blk.indptr[i], hi = blk.indptr[i + 1];
    if (lo == hi) continue;  // empty neighborhood -> zero row
    double* oi = out.row(i);
    for (std::uint32_t e = lo; e < hi; ++e) {
      const double* s = h_src.row(row_index(src_frontier, blk.src_ids[e]));
      for (std::size_t j = 0; j < h_src.cols; ++j) oi[j] += s[j];
    }
    const double inv = 1.0 / static_cast<double>(hi - lo);
    for (std::size_t j = 0; j < h_src.cols; ++j) oi[j] *= inv;
  }
  return out;
}

Matrix agg_relation(const Block& blk, const Matrix& h_src, const std::vector<NodeId>& src_frontier,
                    const Matrix& w) {
  return matmul(mean_aggregate(blk, h_src, src_frontier), w);
}

Matrix agg_all(const std::vector<const Matrix*>& partials) {
  if (partials.empty()) throw std::invalid_argument("agg_all needs at least one partial");
  Matrix out = *partials[0];
  for (std::size_t i = 1; i < partials.size(); ++i) {
    if (!out.same_shape(*partials[i]))
      throw std::invalid_argument("agg_all partials have mismatched shapes");
    add_inplace(out, *partials[i]);
  }
  return out;
}

static const Block* find_block(const SampledBlocks& blocks, int hop, int rel_index, int* idx) {
  const auto& list = blocks.hops[hop - 1];
  for (std::size_t i = 0; i < list.size(); ++i)
    if (list[i].rel_index == rel_index) {
      if (idx) *idx = static_cast<int>(i);
      return &list[i];
    }
  return nullptr;
}

std::pair<Matrix, ForwardTape> forward_flat(const HetGraph& g, const Metatree& tree,
                                            const SampledBlocks& blocks, const HGNNModel& model,
                                            const LearnableStore& store) {
  const int k = blocks.k;
  ForwardTape tape;
  tape.blocks = &blocks;
  tape.H.resize(k + 1);

  // layer-0 inputs: features of the outermost frontier
  for (int t = 0; t < g.reg.num_node_types(); ++t) {
    const auto& front = blocks.frontier[k][t];
    if (front.empty()) continue;
    const TypeFeatures& f = g.features[t];
    Matrix h(front.size(), static_cast<std::size_t>(f.dim));
    if (f.kind == StorageKind::Dense) {
      for (std::size_t i = 0; i < front.size(); ++i)
        for (int j = 0; j < f.dim; ++j) h.at(i, j) = f.values.at(front[i], j);
    } else if (f.kind == StorageKind::Learnable) {
      auto it = store.tables.find(t);
      if (it == store.tables.end())
        throw std::runtime_error("no learnable table for node type " + g.reg.node_type_names[t]);
      for (std::size_t i = 0; i < front.size(); ++i)
        for (int j = 0; j < f.dim; ++j) h.at(i, j) = it->second.w.at(front[i], j);
    } else {
      throw std::runtime_error("missing features for node type " + g.reg.node_type_names[t]);
    }
    tape.H[k].emplace(t, std::move(h));
  }

  for (int l = 1; l <= k; ++l) {
    const int d = k - l + 1;  // blocks hop consumed by this layer
    const auto rels = rels_by_dst_at_depth(tree, d);
    for (int t = 0; t < g.reg.num_node_types(); ++t) {
      const auto& front = blocks.frontier[d - 1][t];
      if (front.empty()) continue;
      Matrix out(front.size(), static_cast<std::size_t>(model.out_dim(l)));
      auto it = rels.find(t);
      if (it != rels.end()) {
        for (int r : it->second) {
          int bidx = -1;
          const Block* blk = find_block(blocks, d, r, &bidx);
          if (!blk) continue;  // relation had an empty frontier
          const NodeTypeId src_t = g.relations[r].src;
          const Matrix* h_src = nullptr;
          auto hit = tape.H[d].find(src_t);
          if (hit != tape.H[d].end()) h_src = &hit->second;
          Matrix mean = h_src ? mean_aggregate(*blk, *h_src, blocks.frontier[d][src_t])
                              : Matrix(blk->dst_ids.size(),
                                       l == 1 ? model.input_dims[src_t] : model.hidden);
          const Matrix& w = model.weights.at(SlotKey{r, l});
          if (w.rows != mean.cols)
            throw std::invalid_argument("weight/input dim mismatch for relation " + std::to_string(r));
          add_inplace(out, matmul(mean, w));
          tape.entries.push_back({l, r, d, bidx, t, std::move(mean)});
        }
      }
      if (l < k)
        for (double& x : out.data) x = x > 0.0 ? x : 0.0;
      tape.H[d - 1].emplace(t, std::move(out));
    }
  }

  Matrix logits = tape.H[0].at(g.target);
  return {std::move(logits), std::move(tape)};
}

double cross_entropy(const Matrix& logits, const std::vector<NodeId>& row_ids,
                     std::span<const NodeId> batch, std::span<const std::int32_t> labels,
                     int num_classes, Matrix* dlogits) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (dlogits) *dlogits = Matrix(logits.rows, logits.cols);
  double loss = 0.0;
  const double invb = 1.0 / static_cast<double>(batch.size());
  for (NodeId v : batch) {
    const std::int32_t y = labels[v];
    if (y < 0 || y >= num_classes)
      throw std::invalid_argument("label out of range for node " + std::to_string(v));
    const std::size_t row = row_index(row_ids, v);
    const double* z = logits.row(row);
    double zmax = z[0];
    for (int c = 1; c < num_classes; ++c) zmax = std::max(zmax, z[c]);
    double sum = 0.0;
    for (int c = 0; c < num_classes; ++c) sum += std::exp(z[c] - zmax);
    const double lse = zmax + std::log(sum);
    loss += (lse - z[y]) * invb;
    if (dlogits) {
      double* dz = dlogits->row(row);
      for (int c = 0; c < num_classes; ++c)
        dz[c] += (std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0)) * invb;
    }
  }
  return loss;
}

GradientSet backward_flat(const HetGraph& g, const Metatree& tree, const HGNNModel& model,
                          const ForwardTape& tape, const Matrix& dlogits) {
  const SampledBlocks& blocks = *tape.blocks;
  const int k = blocks.k;
  GradientSet grads;
  // dH[d][type], same row layout as tape.H
  std::vector<std::map<int, Matrix>> dH(k + 1);
  dH[0].emplace(g.target, dlogits);

  for (int l = k; l >= 1; --l) {
    const int d = k - l + 1;
    for (const TapeEntry& e : tape.entries) {
      if (e.layer != l) continue;
      auto dit = dH[d - 1].find(e.dst_type);
      if (dit == dH[d - 1].end()) continue;  // no downstream gradient
      const Matrix& h_post = tape.H[d - 1].at(e.dst_type);
      Matrix dpre = dit->second;
      if (l < k)
        for (std::size_t i = 0; i < dpre.data.size(); ++i)
          if (h_post.data[i] <= 0.0) dpre.data[i] = 0.0;

      const Matrix& w = model.weights.at(SlotKey{e.rel_index, l});
      auto git = grads.weight_grads.find(SlotKey{e.rel_index, l});
      if (git == grads.weight_grads.end())
        git = grads.weight_grads.emplace(SlotKey{e.rel_index, l}, Matrix(w.rows, w.cols)).first;
      matmul_tn_acc(e.mean, dpre, git->second);

      // distribute dMean back to the source frontier
      Matrix dmean = matmul_nt(dpre, w);
      const Block& blk = blocks.hops[d - 1][e.block_idx];
      const NodeTypeId src_t = g.relations[e.rel_index].src;
      const auto& src_front = blocks.frontier[d][src_t];
      auto sit = dH[d].find(src_t);
      if (sit == dH[d].end())
        sit = dH[d].emplace(src_t, Matrix(src_front.size(), dmean.cols)).first;
      for (std::size_t i = 0; i < blk.dst_ids.size(); ++i) {
        const std::uint32_t lo = blk.indptr[i], hi = blk.indptr[i + 1];
        if (lo == hi) continue;
        const double inv = 1.0 / static_cast<double>(hi - lo);
        const double* di = dmean.row(i);
        for (std::uint32_t x = lo; x < hi; ++x) {
          double* s = sit->second.row(row_index(src_front, blk.src_ids[x]));
          for (std::size_t j = 0; j < dmean.cols; ++j) s[j] += di[j] * inv;
        }
      }
    }
  }

  for (const auto& [t, dmat] : dH[k]) {
    if (g.features[t].kind != StorageKind::Learnable) continue;
    grads.feature_grads.emplace(t, std::make_pair(blocks.frontier[k][t], dmat));
  }
  return grads;
}

static void adam_step(Matrix& w, Matrix& m, Matrix& v, const Matrix& g, const AdamHyper& hp,
                      std::int64_t t) {
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    const double gi = g.data[i];
    if (!std::isfinite(gi)) throw std::runtime_error("non-finite gradient");
    m.data[i] = hp.beta1 * m.data[i] + (1.0 - hp.beta1) * gi;
    v.data[i] = hp.beta2 * v.data[i] + (1.0 - hp.beta2) * gi * gi;
    const double mhat = m.data[i] / bc1;
    const double vhat = v.data[i] / bc2;
    w.data[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

void adam_update_model(HGNNModel& model, ModelAdamState& state, const GradientSet& grads) {
  state.step += 1;
  for (auto& [key, w] : model.weights) {
    auto git = grads.weight_grads.find(key);
    if (!state.m.count(key)) {
      state.m.emplace(key, Matrix(w.rows, w.cols));
      state.v.emplace(key, Matrix(w.rows, w.cols));
    }
    if (git == grads.weight_grads.end()) continue;  // untouched slot
    adam_step(w, state.m.at(key), state.v.at(key), git->second, state.hp, state.step);
  }
}

void adam_update_rows(LearnableFeatureTable& table, const std::vector<NodeId>& rows,
                      const Matrix& row_grads) {
  table.step += 1;
  const AdamHyper& hp = table.hp;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(table.step));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(table.step));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const NodeId r = rows[i];
    for (std::size_t j = 0; j < table.w.cols; ++j) {
      const double gi = row_grads.at(i, j);
      if (!std::isfinite(gi)) throw std::runtime_error("non-finite gradient");
      double& m = table.m.at(r, j);
      double& v = table.v.at(r, j);
      m = hp.beta1 * m + (1.0 - hp.beta1) * gi;
      v = hp.beta2 * v + (1.0 - hp.beta2) * gi * gi;
      table.w.at(r, j) -= hp.lr * (m / bc1) / (std::sqrt(v / bc2) + hp.eps);
    }
  }
}

}  // namespace hetsim
