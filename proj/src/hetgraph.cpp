#include "hetsim/hetgraph.hpp"

#include <algorithm>
#include <stdexcept>

namespace hetsim {

NodeTypeId TypeRegistry::add_node_type(const std::string& name) {
  if (find_node_type(name)) throw std::invalid_argument("duplicate node type name: " + name);
  node_type_names.push_back(name);
  return static_cast<NodeTypeId>(node_type_names.size() - 1);
}

EdgeTypeId TypeRegistry::add_edge_type(const std::string& name) {
  if (find_edge_type(name)) throw std::invalid_argument("duplicate edge type name: " + name);
  edge_type_names.push_back(name);
  return static_cast<EdgeTypeId>(edge_type_names.size() - 1);
}

std::optional<NodeTypeId> TypeRegistry::find_node_type(const std::string& name) const {
  for (std::size_t i = 0; i < node_type_names.size(); ++i)
    if (node_type_names[i] == name) return static_cast<NodeTypeId>(i);
  return std::nullopt;
}

std::optional<EdgeTypeId> TypeRegistry::find_edge_type(const std::string& name) const {
  for (std::size_t i = 0; i < edge_type_names.size(); ++i)
    if (edge_type_names[i] == name) return static_cast<EdgeTypeId>(i);
  return std::nullopt;
}

std::uint64_t HetGraph::total_edges() const {
  std::uint64_t n = 0;
  for (const auto& a : adj) n += a.num_edges();
  return n;
}

std::vector<int> HetGraph::relations_into(NodeTypeId dst_type) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < relations.size(); ++i)
    if (relations[i].dst == dst_type) out.push_back(static_cast<int>(i));
  return out;
}

void HetGraph::validate() const {
  if (target < 0 || target >= reg.num_node_types())
    throw std::invalid_argument("target node type out of range");
  if (relations.size() != adj.size()) throw std::invalid_argument("relation/adjacency size mismatch");
  for (std::size_t r = 0; r < relations.size(); ++r) {
    const Relation& rel = relations[r];
    const Csr& a = adj[r];
    if (a.indptr.size() != node_counts[rel.dst] + 1)
      throw std::invalid_argument("adjacency indptr size mismatch for relation " + std::to_string(r));
    for (std::size_t i = 1; i < a.indptr.size(); ++i)
      if (a.indptr[i] < a.indptr[i - 1]) throw std::invalid_argument("adjacency offsets not monotone");
    for (NodeId s : a.src)
      if (s >= node_counts[rel.src]) throw std::invalid_argument("edge endpoint out of range");
    // uniqueness of the relation triple
    for (std::size_t q = r + 1; q < relations.size(); ++q)
      if (relations[q] == rel) throw std::invalid_argument("duplicate relation triple");
  }
}

std::vector<int> Metagraph::links_into(NodeTypeId dst_type) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < links.size(); ++i)
    if (links[i].rel.dst == dst_type) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<MonoRelationSubgraph> decompose_relations(const HetGraph& g) {
  std::vector<MonoRelationSubgraph> out;
  out.reserve(g.relations.size());
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    MonoRelationSubgraph s;
    s.rel_index = static_cast<int>(r);
    s.rel = g.relations[r];
    s.n_src = g.node_counts[s.rel.src];
    s.n_dst = g.node_counts[s.rel.dst];
    s.adj = g.adj[r];
    out.push_back(std::move(s));
  }
  return out;
}

Metagraph build_metagraph(const HetGraph& g) {
  Metagraph m;
  m.reg = g.reg;
  for (int t = 0; t < g.reg.num_node_types(); ++t)
    m.vertices.push_back({t, g.node_counts[t]});
  for (std::size_t r = 0; r < g.relations.size(); ++r)
    m.links.push_back({static_cast<int>(r), g.relations[r], g.edge_count(static_cast<int>(r))});
  return m;
}

HetGraph add_reverse_relations(const HetGraph& g, const std::vector<int>& self_paired) {
  for (bool rev : g.is_reverse)
    if (rev) throw std::invalid_argument("graph already contains reverse relations");
  HetGraph out = g;
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    if (std::find(self_paired.begin(), self_paired.end(), static_cast<int>(r)) != self_paired.end())
      continue;
    const Relation& rel = g.relations[r];
    const std::string rev_name = "rev_" + g.reg.edge_type_names[rel.etype];
    if (out.reg.find_edge_type(rev_name))
      throw std::invalid_argument("reverse edge type name already exists: " + rev_name);
    EdgeTypeId re = out.reg.add_edge_type(rev_name);
    // transpose: new dst = old src
    const Csr& a = g.adj[r];
    Csr t;
    t.indptr.assign(g.node_counts[rel.src] + 1, 0);
    for (NodeId s : a.src) t.indptr[s + 1]++;
    for (std::size_t i = 1; i < t.indptr.size(); ++i) t.indptr[i] += t.indptr[i - 1];
    t.src.resize(a.src.size());
    std::vector<std::uint64_t> cursor(t.indptr.begin(), t.indptr.end() - 1);
    for (NodeId d = 0; d < g.node_counts[rel.dst]; ++d)
      for (std::uint64_t e = a.indptr[d]; e < a.indptr[d + 1]; ++e)
        t.src[cursor[a.src[e]]++] = d;
    out.relations.push_back({rel.dst, re, rel.src});
    out.is_reverse.push_back(true);
    out.adj.push_back(std::move(t));
  }
  return out;
}

HetGraph build_hetgraph(TypeRegistry reg, std::vector<std::uint64_t> node_counts,
                        std::vector<Relation> relations,
                        const std::vector<std::vector<std::pair<NodeId, NodeId>>>& edges,
                        NodeTypeId target, int num_classes) {
  HetGraph g;
  g.reg = std::move(reg);
  g.node_counts = std::move(node_counts);
  g.relations = std::move(relations);
  g.is_reverse.assign(g.relations.size(), false);
  g.features.resize(g.node_counts.size());
  g.target = target;
  g.num_classes = num_classes;
  g.adj.resize(g.relations.size());
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    const Relation& rel = g.relations[r];
    Csr a;
    a.indptr.assign(g.node_counts[rel.dst] + 1, 0);
    for (const auto& [src, dst] : edges[r]) {
      if (src >= g.node_counts[rel.src] || dst >= g.node_counts[rel.dst])
        throw std::invalid_argument("edge endpoint out of range in relation " + std::to_string(r));
      a.indptr[dst + 1]++;
    }
    for (std::size_t i = 1; i < a.indptr.size(); ++i) a.indptr[i] += a.indptr[i - 1];
    a.src.resize(edges[r].size());
    std::vector<std::uint64_t> cursor(a.indptr.begin(), a.indptr.end() - 1);
    for (const auto& [src, dst] : edges[r]) a.src[cursor[dst]++] = src;
    g.adj[r] = std::move(a);
  }
  g.labels.assign(g.node_counts[target], -1);
  return g;
}

}  // namespace hetsim
