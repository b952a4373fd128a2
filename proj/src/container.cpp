#include "hetsim/container.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hetsim {

namespace {

const char kMagic[4] = {'H', 'G', 'C', '1'};

std::string storage_name(StorageKind k) {
  switch (k) {
    case StorageKind::Absent: return "absent";
    case StorageKind::Dense: return "dense";
    case StorageKind::Learnable: return "learnable";
  }
  return "absent";
}

StorageKind storage_from(const std::string& s) {
  if (s == "absent") return StorageKind::Absent;
  if (s == "dense") return StorageKind::Dense;
  if (s == "learnable") return StorageKind::Learnable;
  throw std::invalid_argument("unknown storage kind: " + s);
}

template <typename T>
void write_le(std::ostream& os, T v) {
  // host is little-endian on all supported platforms
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("container truncated");
  return v;
}

}  // namespace

void save_container(const HetGraph& g, const std::string& path) {
  nlohmann::json h;
  h["version"] = 1;
  h["target"] = g.target;
  h["num_classes"] = g.num_classes;
  h["labels"] = g.labels;
  auto& types = h["node_types"] = nlohmann::json::array();
  for (int t = 0; t < g.reg.num_node_types(); ++t) {
    types.push_back({{"name", g.reg.node_type_names[t]},
                     {"count", g.node_counts[t]},
                     {"dim", g.features[t].dim},
                     {"storage", storage_name(g.features[t].kind)},
                     {"elem_bytes", g.features[t].elem_bytes}});
  }
  auto& rels = h["relations"] = nlohmann::json::array();
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    rels.push_back({{"src", g.relations[r].src},
                    {"etype", g.reg.edge_type_names[g.relations[r].etype]},
                    {"dst", g.relations[r].dst},
                    {"reverse", static_cast<bool>(g.is_reverse[r])},
                    {"edges", g.edge_count(static_cast<int>(r))}});
  }
  const std::string header = h.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMagic, 4);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(header.size()));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    const Csr& a = g.adj[r];
    for (NodeId d = 0; d < g.node_counts[g.relations[r].dst]; ++d)
      for (std::uint64_t e = a.indptr[d]; e < a.indptr[d + 1]; ++e) {
        write_le<std::uint32_t>(os, a.src[e]);
        write_le<std::uint32_t>(os, d);
      }
  }
  for (int t = 0; t < g.reg.num_node_types(); ++t) {
    const TypeFeatures& f = g.features[t];
    if (f.kind != StorageKind::Dense) continue;
    for (double v : f.values.data) write_le<float>(os, static_cast<float>(v));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

HetGraph load_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad container magic: " + path);
  const auto hlen = read_le<std::uint32_t>(is);
  std::string header(hlen, '\0');
  is.read(header.data(), hlen);
  if (!is) throw std::runtime_error("container truncated: " + path);
  nlohmann::json h = nlohmann::json::parse(header);
  if (h.at("version").get<int>() != 1) throw std::runtime_error("unsupported container version");

  TypeRegistry reg;
  std::vector<std::uint64_t> counts;
  std::vector<TypeFeatures> feats;
  for (const auto& t : h.at("node_types")) {
    reg.add_node_type(t.at("name").get<std::string>());
    counts.push_back(t.at("count").get<std::uint64_t>());
    TypeFeatures f;
    f.dim = t.at("dim").get<int>();
    f.kind = storage_from(t.at("storage").get<std::string>());
    f.elem_bytes = t.at("elem_bytes").get<int>();
    feats.push_back(std::move(f));
  }
  std::vector<Relation> relations;
  std::vector<bool> is_reverse;
  std::vector<std::uint64_t> edge_counts;
  for (const auto& r : h.at("relations")) {
    Relation rel;
    rel.src = r.at("src").get<int>();
    rel.dst = r.at("dst").get<int>();
    const std::string ename = r.at("etype").get<std::string>();
    rel.etype = reg.find_edge_type(ename).value_or(-1);
    if (rel.etype < 0) rel.etype = reg.add_edge_type(ename);
    relations.push_back(rel);
    is_reverse.push_back(r.at("reverse").get<bool>());
    edge_counts.push_back(r.at("edges").get<std::uint64_t>());
  }

  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges(relations.size());
  for (std::size_t r = 0; r < relations.size(); ++r) {
    edges[r].resize(edge_counts[r]);
    for (auto& [s, d] : edges[r]) {
      s = read_le<std::uint32_t>(is);
      d = read_le<std::uint32_t>(is);
    }
  }

  HetGraph g = build_hetgraph(std::move(reg), std::move(counts), std::move(relations), edges,
                              h.at("target").get<int>(), h.at("num_classes").get<int>());
  g.is_reverse = std::move(is_reverse);
  g.features = std::move(feats);
  for (int t = 0; t < g.reg.num_node_types(); ++t) {
    TypeFeatures& f = g.features[t];
    if (f.kind != StorageKind::Dense) continue;
    f.values = Matrix(g.node_counts[t], static_cast<std::size_t>(f.dim));
    for (double& v : f.values.data) v = static_cast<double>(read_le<float>(is));
  }
  g.labels = h.at("labels").get<std::vector<std::int32_t>>();
  return g;
}

}  // namespace hetsim
