#pragma once

#include <random>
#include <vector>

#include "hetsim/hetgraph.hpp"
#include "hetsim/sampling.hpp"

namespace testutil {

using namespace hetsim;

// Small random typed multigraph for property tests: up to `max_types` node
// types, up to `max_rels` relations, at most `max_nodes` nodes in total.
// Every relation gets at least one edge and at least one relation points into
// the target type.
inline HetGraph random_hetgraph(std::uint64_t seed, int max_types = 5, int max_rels = 8,
                                NodeId max_nodes = 200) {
  std::mt19937_64 rng(mix_seed(seed, 0x7e57ULL));
  auto randint = [&](int lo, int hi) {
    return static_cast<int>(lo + rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };

  TypeRegistry reg;
  const int nt = randint(2, max_types);
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  for (int t = 0; t < nt; ++t) {
    reg.add_node_type("t" + std::to_string(t));
    const std::uint64_t c = randint(3, static_cast<int>(max_nodes) / nt);
    counts.push_back(c);
    total += c;
  }
  const NodeTypeId target = 0;

  const int nr = randint(1, max_rels);
  std::vector<Relation> relations;
  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges;
  for (int r = 0; r < nr; ++r) {
    Relation rel;
    rel.src = randint(0, nt - 1);
    rel.dst = r == 0 ? target : randint(0, nt - 1);  // guarantee an in-target relation
    rel.etype = reg.add_edge_type("e" + std::to_string(r));
    const int ne = randint(1, static_cast<int>(counts[rel.dst]) * 3);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (int e = 0; e < ne; ++e)
      pairs.push_back({static_cast<NodeId>(rng() % counts[rel.src]),
                       static_cast<NodeId>(rng() % counts[rel.dst])});
    relations.push_back(rel);
    edges.push_back(std::move(pairs));
  }

  const int num_classes = randint(2, 4);
  HetGraph g = build_hetgraph(std::move(reg), counts, std::move(relations), edges, target,
                              num_classes);

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < nt; ++t) {
    TypeFeatures& f = g.features[t];
    f.dim = randint(2, 6);
    if (rng() % 3 == 0) {
      f.kind = StorageKind::Learnable;
    } else {
      f.kind = StorageKind::Dense;
      f.values = Matrix(counts[t], static_cast<std::size_t>(f.dim));
      for (double& x : f.values.data) x = u(rng);
    }
  }
  g.labels.resize(counts[target]);
  for (auto& l : g.labels) l = static_cast<std::int32_t>(rng() % num_classes);
  g.validate();
  return g;
}

// The four-type citation-network schema with hand-picked link weights: the
// three sub-metatrees at depth 2 weigh exactly 16, 17 and 27 (millions).
inline Metagraph citation_metagraph() {
  Metagraph m;
  const NodeTypeId P = m.reg.add_node_type("P");
  const NodeTypeId A = m.reg.add_node_type("A");
  const NodeTypeId I = m.reg.add_node_type("I");
  const NodeTypeId F = m.reg.add_node_type("F");
  m.vertices = {{P, 1}, {A, 2}, {I, 3}, {F, 4}};
  const EdgeTypeId writes = m.reg.add_edge_type("writes");
  const EdgeTypeId affiliated = m.reg.add_edge_type("affiliated");
  const EdgeTypeId cites = m.reg.add_edge_type("cites");
  const EdgeTypeId has_topic = m.reg.add_edge_type("has_topic");
  const EdgeTypeId rev_writes = m.reg.add_edge_type("rev_writes");
  const EdgeTypeId rev_affiliated = m.reg.add_edge_type("rev_affiliated");
  const EdgeTypeId rev_has_topic = m.reg.add_edge_type("rev_has_topic");
  m.links = {{0, {A, writes, P}, 4},          {1, {A, affiliated, I}, 5},
             {2, {P, cites, P}, 10},          {3, {P, has_topic, F}, 6},
             {4, {P, rev_writes, A}, 3},      {5, {I, rev_affiliated, A}, 3},
             {6, {F, rev_has_topic, P}, 6}};
  return m;
}

}  // namespace testutil
