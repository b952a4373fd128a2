#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetsim/matrix.hpp"

namespace hetsim {

using NodeTypeId = int;
using EdgeTypeId = int;
using NodeId = std::uint32_t;

// Registry mapping small dense type ids to names. Ids are contiguous from 0.
struct TypeRegistry {
  std::vector<std::string> node_type_names;
  std::vector<std::string> edge_type_names;

  NodeTypeId add_node_type(const std::string& name);
  EdgeTypeId add_edge_type(const std::string& name);
  std::optional<NodeTypeId> find_node_type(const std::string& name) const;
  std::optional<EdgeTypeId> find_edge_type(const std::string& name) const;
  int num_node_types() const { return static_cast<int>(node_type_names.size()); }
};

// (source node type, edge type, destination node type)
struct Relation {
  NodeTypeId src = -1;
  EdgeTypeId etype = -1;
  NodeTypeId dst = -1;

  bool operator==(const Relation& o) const {
    return src == o.src && etype == o.etype && dst == o.dst;
  }
};

// Destination-major compressed adjacency: for each dst node, the list of
// src neighbors. Aggregation reads neighbors of a destination.
struct Csr {
  std::vector<std::uint64_t> indptr;  // size n_dst + 1
  std::vector<NodeId> src;

  std::uint64_t degree(NodeId dst) const { return indptr[dst + 1] - indptr[dst]; }
  std::uint64_t num_edges() const { return src.size(); }
};

enum class StorageKind { Absent, Dense, Learnable };

struct TypeFeatures {
  int dim = 0;
  StorageKind kind = StorageKind::Absent;
  Matrix values;       // dense-readonly only; [num_nodes x dim]
  int elem_bytes = 4;  // element width used for byte accounting
};

struct HetGraph {
  TypeRegistry reg;
  std::vector<std::uint64_t> node_counts;  // per node type
  std::vector<Relation> relations;
  std::vector<bool> is_reverse;            // per relation
  std::vector<Csr> adj;                    // per relation, dst-major
  std::vector<TypeFeatures> features;      // per node type
  NodeTypeId target = 0;
  std::vector<std::int32_t> labels;        // per target node; -1 = unlabeled
  int num_classes = 0;

  std::uint64_t edge_count(int rel_index) const { return adj[rel_index].num_edges(); }
  std::uint64_t total_edges() const;
  // Relation indices with the given destination type, ascending.
  std::vector<int> relations_into(NodeTypeId dst_type) const;
  void validate() const;
};

struct MonoRelationSubgraph {
  int rel_index = -1;
  Relation rel;
  std::uint64_t n_src = 0;
  std::uint64_t n_dst = 0;
  Csr adj;
};

struct MetagraphVertex {
  NodeTypeId type = -1;
  std::uint64_t weight = 0;  // number of nodes of this type
};

struct MetagraphLink {
  int rel_index = -1;
  Relation rel;
  std::uint64_t weight = 0;  // number of edges of this relation
};

// Schema-level graph: vertices are node types, links are relations,
// both weighted by population counts.
struct Metagraph {
  TypeRegistry reg;
  std::vector<MetagraphVertex> vertices;
  std::vector<MetagraphLink> links;

  std::uint64_t vertex_weight(NodeTypeId t) const { return vertices[t].weight; }
  std::vector<int> links_into(NodeTypeId dst_type) const;
};

std::vector<MonoRelationSubgraph> decompose_relations(const HetGraph& g);
Metagraph build_metagraph(const HetGraph& g);

// Adds a transposed relation for every forward relation not listed in
// `self_paired` (relation indices whose reverse is the relation itself,
// e.g. a citation relation kept symmetric). Reverse edge type names get a
// "rev_" prefix; a clash with an existing edge type name is rejected.
HetGraph add_reverse_relations(const HetGraph& g, const std::vector<int>& self_paired = {});

// Builds a HetGraph from per-relation edge lists (src,dst pairs).
HetGraph build_hetgraph(TypeRegistry reg, std::vector<std::uint64_t> node_counts,
                        std::vector<Relation> relations,
                        const std::vector<std::vector<std::pair<NodeId, NodeId>>>& edges,
                        NodeTypeId target, int num_classes);

}  // namespace hetsim
