#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "hetsim/metapartition.hpp"
#include "test_util.hpp"

using namespace hetsim;
using testutil::citation_metagraph;

TEST_CASE("metatree unrolls the metagraph breadth-first") {
  Metagraph m = citation_metagraph();
  Metatree t = build_metatree(m, 0, 2);
  REQUIRE(!t.pos.empty());
  CHECK(t.pos[0].type == 0);
  CHECK(t.pos[0].depth == 0);
  // links into P: writes (from A), cites (from P), rev_has_topic (from F)
  REQUIRE(t.pos[0].children.size() == 3);
  CHECK(t.pos[t.pos[0].children[0]].type == 1);
  CHECK(t.pos[t.pos[0].children[1]].type == 0);
  CHECK(t.pos[t.pos[0].children[2]].type == 3);
  for (const auto& p : t.pos) CHECK(p.depth <= 2);
  // the A child expands to rev_writes (P) and rev_affiliated (I)
  const auto& a_pos = t.pos[t.pos[0].children[0]];
  REQUIRE(a_pos.children.size() == 2);
  CHECK(t.pos[a_pos.children[0]].rel_index == 4);
  CHECK(t.pos[a_pos.children[1]].rel_index == 5);
  // duplicate occurrences are expected before dedup: cites appears twice
  int cites_count = 0;
  for (const auto& p : t.pos) cites_count += p.rel_index == 2 ? 1 : 0;
  CHECK(cites_count == 2);
  CHECK(t.root_child_ancestor(a_pos.children[0]) == t.pos[0].children[0]);
}

TEST_CASE("metapath metatrees merge shared prefixes and reject broken paths") {
  Metagraph m = citation_metagraph();
  // P <- writes <- A <- rev_writes <- P, and P <- writes <- A <- rev_affiliated <- I
  Metatree t = build_metatree(m, 0, std::vector<std::vector<int>>{{0, 4}, {0, 5}, {2}});
  CHECK(t.k == 2);
  REQUIRE(t.pos[0].children.size() == 2);  // writes-subtree shared, cites separate
  CHECK(t.pos[t.pos[0].children[0]].children.size() == 2);
  CHECK_THROWS(build_metatree(m, 0, std::vector<std::vector<int>>{{1}}));  // affiliated ends at I
}

TEST_CASE("sub-metatree weights follow the duplicate policy") {
  Metagraph m = citation_metagraph();
  Metatree t = build_metatree(m, 0, 2);
  auto subs = split_metatree(t, m);
  REQUIRE(subs.size() == 3);
  CHECK(subs[0].weight == 16);  // P,A,I + writes,rev_writes,rev_affiliated
  CHECK(subs[1].weight == 27);  // P,A,F + cites,writes,rev_has_topic (cites counted once)
  CHECK(subs[2].weight == 17);  // P,F + rev_has_topic,has_topic
  CHECK(subs[1].relation_multiset == std::vector<int>{2, 0, 2, 6});
  CHECK(subs[1].relations_unique == std::vector<int>{0, 2, 6});

  auto multi = split_metatree(t, m, WeightDupPolicy::Multiset);
  // duplicate cites edge and vertex occurrences now all count
  CHECK(multi[1].weight > subs[1].weight);
}

TEST_CASE("lpt assigns by descending weight with deterministic ties") {
  CHECK(lpt_assign({16, 27, 17}, 2) == std::vector<int>{1, 0, 1});
  // ties by ascending item index, then smallest partition sum wins again
  CHECK(lpt_assign({5, 5, 5}, 2) == std::vector<int>{0, 1, 0});
  CHECK(lpt_assign({9}, 3) == std::vector<int>{0});
  CHECK_THROWS(lpt_assign({1}, 0));
}

TEST_CASE("citation-schema pipeline reproduces the {16,17,27} split end to end") {
  Metagraph m = citation_metagraph();
  PartitionPlan plan = meta_partition(m, 0, 2, 2);
  REQUIRE(plan.p == 2);
  REQUIRE(plan.deduplicated);

  std::multiset<std::uint64_t> weights;
  for (const auto& s : plan.subs) weights.insert(s.weight);
  CHECK(weights == std::multiset<std::uint64_t>{16, 17, 27});

  // one partition holds the two light subtrees (5 unique relations after
  // dedup), the other the heavy one (3 relations: duplicate cites removed)
  REQUIRE(plan.parts.size() == 2);
  const PlanPartition* light = nullptr;
  const PlanPartition* heavy = nullptr;
  for (const auto& part : plan.parts)
    (part.sub_ids.size() == 2 ? light : heavy) = &part;
  REQUIRE(light != nullptr);
  REQUIRE(heavy != nullptr);
  CHECK(light->weight == 33);
  CHECK(heavy->weight == 27);
  CHECK(light->relations.size() == 5);
  std::vector<int> lr = light->relations;
  std::sort(lr.begin(), lr.end());
  CHECK(lr == std::vector<int>{0, 3, 4, 5, 6});
  CHECK(heavy->relations.size() == 3);
  std::vector<int> hr = heavy->relations;
  std::sort(hr.begin(), hr.end());
  CHECK(hr == std::vector<int>{0, 2, 6});
}

TEST_CASE("p=1 keeps every relation exactly once after dedup") {
  Metagraph m = citation_metagraph();
  PartitionPlan plan = meta_partition(m, 0, 2, 1);
  REQUIRE(plan.parts.size() == 1);
  std::vector<int> r = plan.parts[0].relations;
  std::sort(r.begin(), r.end());
  CHECK(r == std::vector<int>{0, 2, 3, 4, 5, 6});  // affiliated (1) is unreachable from P
}

TEST_CASE("replication kicks in only when workers exceed sub-metatrees") {
  Metagraph m = citation_metagraph();
  PartitionPlan base = meta_partition(m, 0, 2, 3);
  for (const auto& part : base.parts) CHECK(!part.replica);

  PartitionPlan plan = meta_partition(m, 0, 2, 5);
  REQUIRE(plan.parts.size() == 5);
  int replicas = 0;
  for (const auto& part : plan.parts) {
    CHECK(part.sub_ids.size() == 1);
    replicas += part.replica ? 1 : 0;
  }
  CHECK(replicas >= 2);  // the two heaviest subs gained a copy
  for (int s = 0; s < 3; ++s) {
    auto owners = plan.owners_of_sub(s);
    CHECK(!owners.empty());
    if (owners.size() > 1)
      for (std::size_t i = 0; i < owners.size(); ++i) {
        CHECK(plan.parts[owners[i]].replica_index == static_cast<int>(i));
        CHECK(plan.parts[owners[i]].replica_count == static_cast<int>(owners.size()));
      }
  }
}

TEST_CASE("materialized partitions carry complete mono-relation subgraphs") {
  HetGraph g = testutil::random_hetgraph(17);
  Metagraph m = build_metagraph(g);
  PartitionPlan plan = meta_partition(m, g.target, 2, 2);
  auto parts = materialize_partitions(g, plan);
  REQUIRE(parts.size() == 2);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const HetPartition& hp = parts[i];
    CHECK(hp.id == static_cast<int>(i));
    CHECK(hp.owned_relations == plan.parts[i].relations);
    CHECK(hp.graph.labels == g.labels);  // all target nodes and labels
    REQUIRE(hp.graph.relations.size() == hp.owned_relations.size());
    for (std::size_t r = 0; r < hp.owned_relations.size(); ++r) {
      CHECK(hp.graph.adj[r].src == g.adj[hp.owned_relations[r]].src);
      CHECK(hp.graph.adj[r].indptr == g.adj[hp.owned_relations[r]].indptr);
    }
    for (NodeTypeId t : plan.parts[i].node_types)
      CHECK(hp.graph.features[t].kind == g.features[t].kind);
  }
  PartitionPlan raw = make_plan(plan.tree, plan.subs, 2, lpt_assign({1, 1, 1}, 2));
  CHECK_THROWS(materialize_partitions(g, raw));  // must deduplicate first
}

TEST_CASE("boundary nodes are active targets under foreign root relations") {
  HetGraph g = testutil::random_hetgraph(23);
  Metagraph m = build_metagraph(g);
  PartitionPlan plan = meta_partition(m, g.target, 2, 2);
  for (int part = 0; part < 2; ++part) {
    auto b = boundary_nodes(g, plan, part);
    CHECK(std::is_sorted(b.begin(), b.end()));
    std::set<NodeId> expect;
    for (const auto& s : plan.subs) {
      auto owners = plan.owners_of_sub(s.id);
      if (std::find(owners.begin(), owners.end(), part) != owners.end()) continue;
      const int rel = plan.tree.pos[s.child_pos].rel_index;
      for (NodeId v = 0; v < g.node_counts[g.target]; ++v)
        if (g.adj[rel].degree(v) > 0) expect.insert(v);
    }
    CHECK(b == std::vector<NodeId>(expect.begin(), expect.end()));
  }
  // p = 1: nothing is foreign
  PartitionPlan solo = meta_partition(m, g.target, 2, 1);
  CHECK(boundary_nodes(g, solo, 0).empty());
}

TEST_CASE("lpt respects the classic approximation bound on small instances") {
  std::mt19937_64 rng(404);
  for (int it = 0; it < 50; ++it) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const int p = 2 + static_cast<int>(rng() % 2);
    std::vector<std::uint64_t> w(n);
    for (auto& x : w) x = 1 + rng() % 100;
    auto assign = lpt_assign(w, p);
    std::vector<std::uint64_t> sums(p, 0);
    for (int i = 0; i < n; ++i) sums[assign[i]] += w[i];
    const std::uint64_t lpt = *std::max_element(sums.begin(), sums.end());

    // brute force optimum
    std::uint64_t best = ~0ULL;
    std::vector<int> a(n, 0);
    while (true) {
      std::vector<std::uint64_t> s(p, 0);
      for (int i = 0; i < n; ++i) s[a[i]] += w[i];
      best = std::min(best, *std::max_element(s.begin(), s.end()));
      int i = 0;
      while (i < n && ++a[i] == p) a[i++] = 0;
      if (i == n) break;
    }
    CHECK(static_cast<double>(lpt) <=
          (4.0 / 3.0 - 1.0 / (3.0 * p)) * static_cast<double>(best) + 1e-9);
  }
}
