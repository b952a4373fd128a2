#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hetsim/cache.hpp"
#include "test_util.hpp"

using namespace hetsim;

namespace {

// two-type graph with chosen dims and storage kinds for penalty tests
HetGraph dim_fixture(int dim_a, StorageKind kind_a, int dim_b, StorageKind kind_b) {
  TypeRegistry reg;
  reg.add_node_type("a");
  reg.add_node_type("b");
  Relation r{1, reg.add_edge_type("e"), 0};
  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges = {{{0, 0}, {1, 1}}};
  HetGraph g = build_hetgraph(std::move(reg), {4, 4}, {r}, edges, 0, 2);
  g.features[0].kind = kind_a;
  g.features[0].dim = dim_a;
  g.features[1].kind = kind_b;
  g.features[1].dim = dim_b;
  for (int t = 0; t < 2; ++t)
    if (g.features[t].kind == StorageKind::Dense) {
      g.features[t].values = Matrix(4, static_cast<std::size_t>(g.features[t].dim));
    }
  for (auto& l : g.labels) l = 0;
  return g;
}

}  // namespace

TEST_CASE("miss penalty: small dims and learnable types cost more per byte") {
  CostModel cm;  // overhead 1000ns, 1ns per byte each way
  HetGraph g = dim_fixture(8, StorageKind::Dense, 256, StorageKind::Dense);
  auto prof = profile_miss_penalty(g, cm);
  CHECK(prof.types[0].record_bytes == 8 * 4);
  CHECK(prof.types[1].record_bytes == 256 * 4);
  CHECK(prof.types[0].ratio > prof.types[1].ratio);  // overhead amortizes worse

  HetGraph g2 = dim_fixture(64, StorageKind::Learnable, 64, StorageKind::Dense);
  auto prof2 = profile_miss_penalty(g2, cm);
  CHECK(prof2.types[0].learnable);
  CHECK(prof2.types[0].record_bytes == 3 * 64 * 4);  // feature + Adam m + v
  // learnable: 3 reads + 3 write backs, each with overhead
  const double row = 64 * 4;
  CHECK(prof2.types[0].transfer_ns == doctest::Approx(3 * (1000 + row) + 3 * (1000 + row)));
  CHECK(prof2.types[1].transfer_ns == doctest::Approx(1000 + row));
  CHECK(prof2.types[0].ratio > prof2.types[1].ratio);

  // with zero overhead and free writes the per-byte ratios coincide
  CostModel flat;
  flat.fixed_overhead_ns = 0.0;
  flat.write_ns_per_byte = 0.0;
  auto prof3 = profile_miss_penalty(g2, flat);
  CHECK(prof3.types[0].ratio == doctest::Approx(prof3.types[1].ratio));
}

TEST_CASE("hotness counts every sampled appearance deterministically") {
  HetGraph g = testutil::random_hetgraph(7);
  Metatree tree = build_metatree(build_metagraph(g), g.target, 2);
  auto h1 = presample_hotness(g, tree, {3, 3}, 2, 99, 4);
  auto h2 = presample_hotness(g, tree, {3, 3}, 2, 99, 4);
  CHECK(h1.counts == h2.counts);
  // every target node is a seed once per epoch
  for (NodeId v = 0; v < g.node_counts[g.target]; ++v)
    CHECK(h1.counts[g.target][v] >= 2);
  CHECK(h1.total(g.target) > 0);
  // a different seed reshuffles the draws
  auto h3 = presample_hotness(g, tree, {3, 3}, 2, 100, 4);
  CHECK(h1.counts != h3.counts);
}

TEST_CASE("allocation splits the budget by count times penalty ratio") {
  HotnessTable hot;
  hot.counts = {{4, 4}, {6, 6}};  // totals 8 and 12
  MissPenaltyProfile prof;
  prof.types.resize(2);
  prof.types[0].record_bytes = 10;
  prof.types[0].transfer_ns = 10;   // o = 1
  prof.types[1].record_bytes = 10;
  prof.types[1].transfer_ns = 10;
  prof.types[0].ratio = 1.0;
  prof.types[1].ratio = 1.0;
  auto alloc = allocate_cache(100, hot, prof);
  // raw shares 40 and 60 both divide evenly into 10-byte records
  CHECK(alloc.bytes == std::vector<std::uint64_t>{40, 60});
  CHECK(alloc.capacity == std::vector<std::uint64_t>{4, 6});

  // flooring: shares 33.3/66.6 with 10-byte records floor to 30/60
  hot.counts = {{1}, {2}};
  auto alloc2 = allocate_cache(100, hot, prof);
  CHECK(alloc2.bytes == std::vector<std::uint64_t>{30, 60});
  CHECK(alloc2.bytes[0] + alloc2.bytes[1] <= 100);
  // each share is within one record of the unfloored value
  CHECK(100.0 / 3.0 - alloc2.bytes[0] < 10.0);
  CHECK(200.0 / 3.0 - alloc2.bytes[1] < 10.0);

  // raising a type's ratio moves budget toward it
  prof.types[0].ratio = 4.0;
  auto alloc3 = allocate_cache(100, hot, prof);
  CHECK(alloc3.bytes[0] > alloc2.bytes[0]);
  CHECK(alloc3.bytes[1] < alloc2.bytes[1]);

  MissPenaltyProfile dead;
  dead.types.resize(2);
  CHECK_THROWS(allocate_cache(100, hot, dead));
}

TEST_CASE("static fill takes the top-k by count with id tie-breaks") {
  HotnessTable hot;
  hot.counts = {{5, 9, 9, 1, 9}};
  MissPenaltyProfile prof;
  prof.types.resize(1);
  prof.types[0].record_bytes = 4;
  prof.types[0].transfer_ns = 8;
  prof.types[0].ratio = 2.0;
  CacheAllocation alloc;
  alloc.bytes = {12};
  alloc.capacity = {3};
  CacheState cs = fill_and_serve(alloc, hot, prof);
  CHECK(cs.types[0].cached == std::vector<NodeId>{1, 2, 4});  // three nines, ids ascending
  CHECK(cs.contains(0, 1));
  CHECK(!cs.contains(0, 0));

  // capacity >= population: everything cached, 100% hits
  alloc.capacity = {5};
  CacheState full = fill_and_serve(alloc, hot, prof);
  for (NodeId v = 0; v < 5; ++v) CHECK(full.lookup(0, v));
  CHECK(full.hit_rate(0) == doctest::Approx(1.0));
  CHECK(full.types[0].penalty_ns == 0.0);
}

TEST_CASE("lookups and updates accrue penalties on misses only") {
  HotnessTable hot;
  hot.counts = {{3, 1}};
  MissPenaltyProfile prof;
  prof.types.resize(1);
  prof.types[0].learnable = true;
  prof.types[0].record_bytes = 12;
  prof.types[0].transfer_ns = 100.0;
  prof.types[0].ratio = 100.0 / 12.0;
  CacheAllocation alloc;
  alloc.bytes = {12};
  alloc.capacity = {1};
  CacheState cs = fill_and_serve(alloc, hot, prof, 3);
  CHECK(cs.lookup(0, 0));
  CHECK(!cs.lookup(0, 1));
  CHECK(cs.types[0].hits == 1);
  CHECK(cs.types[0].misses == 1);
  CHECK(cs.types[0].penalty_ns == doctest::Approx(100.0));
  cs.update(0, 0);  // in place
  CHECK(cs.types[0].penalty_ns == doctest::Approx(100.0));
  cs.update(0, 1);  // miss: full transfer again
  CHECK(cs.types[0].penalty_ns == doctest::Approx(200.0));
  CHECK(cs.hit_rate(0) == doctest::Approx(0.5));
  CHECK(cs.placement_rank(7) == 1);

  MissPenaltyProfile ro = prof;
  ro.types[0].learnable = false;
  CacheState r = fill_and_serve(alloc, hot, ro);
  CHECK_THROWS(r.update(0, 0));
}

TEST_CASE("hit rate under a skewed access stream tracks the cached mass") {
  // zipf-ish counts; cache the top quarter and replay the distribution
  const int n = 200;
  HotnessTable hot;
  hot.counts.resize(1);
  hot.counts[0].resize(n);
  std::uint64_t total = 0;
  for (int i = 0; i < n; ++i) {
    hot.counts[0][i] = static_cast<std::uint64_t>(10000.0 / (i + 1));
    total += hot.counts[0][i];
  }
  MissPenaltyProfile prof;
  prof.types.resize(1);
  prof.types[0].record_bytes = 4;
  prof.types[0].transfer_ns = 4;
  prof.types[0].ratio = 1.0;
  CacheAllocation alloc;
  alloc.bytes = {4 * (n / 4)};
  alloc.capacity = {n / 4};
  CacheState cs = fill_and_serve(alloc, hot, prof);
  std::uint64_t cached_mass = 0;
  for (int i = 0; i < n / 4; ++i) cached_mass += hot.counts[0][i];
  for (int i = 0; i < n; ++i)
    for (std::uint64_t r = 0; r < hot.counts[0][i]; ++r) cs.lookup(0, i);
  const double expect = static_cast<double>(cached_mass) / static_cast<double>(total);
  CHECK(std::abs(cs.hit_rate(0) - expect) < 0.05);
}

TEST_CASE("cacheable types are the leaf types of the owned subtrees") {
  Metagraph m = testutil::citation_metagraph();
  PartitionPlan plan = meta_partition(m, 0, 2, 2);
  // heavy partition holds the cites subtree; its dedup leaves are P and F but
  // the duplicate depth-2 cites position is pruned, leaving {P, F}. The light
  // partition's leaves are {P, I} and {A, F} unions depending on assignment.
  int heavy = plan.parts[0].sub_ids.size() == 1 ? 0 : 1;
  int light = 1 - heavy;
  auto ch = cacheable_types(plan, heavy);
  auto cl = cacheable_types(plan, light);
  CHECK(cl == std::vector<NodeTypeId>{0, 2});  // P (via rev_writes) and I
  CHECK(ch == std::vector<NodeTypeId>{1, 3});  // A (writes kept at depth 2) and F
  // permission covers every type present in the partition; foreign rejected
  CHECK(partition_aware_space(plan, light, 0));
  CHECK(!partition_aware_space(plan, heavy, 2));  // no I anywhere in the heavy side
  CHECK(partition_aware_space(plan, heavy, 3));

  PartitionPlan solo = meta_partition(m, 0, 2, 1);
  for (NodeTypeId t = 0; t < 4; ++t) CHECK(partition_aware_space(solo, 0, t));
  // A is an inner type whose raw features never load, so it is not a cache
  // candidate even solo
  CHECK(cacheable_types(solo, 0) == std::vector<NodeTypeId>{0, 2, 3});
}
