#include "hetsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hetsim/container.hpp"
#include "hetsim/hgnn.hpp"

namespace hetsim {

using nlohmann::json;

SyntheticSpec parse_spec(const json& j) {
  SyntheticSpec s;
  s.name = j.value("name", "unnamed");
  s.target = j.at("target").get<std::string>();
  s.num_classes = j.at("num_classes").get<int>();
  s.label_noise = j.value("label_noise", 0.0);
  s.add_reverse = j.value("add_reverse", true);
  if (j.contains("self_paired")) s.self_paired = j.at("self_paired").get<std::vector<std::string>>();
  for (const auto& nt : j.at("node_types")) {
    SyntheticNodeType t;
    t.name = nt.at("name").get<std::string>();
    t.count = nt.at("count").get<std::uint64_t>();
    t.dim = nt.at("dim").get<int>();
    t.storage = nt.value("storage", "dense");
    if (t.storage != "dense" && t.storage != "learnable")
      throw std::invalid_argument("unknown storage kind: " + t.storage);
    s.node_types.push_back(std::move(t));
  }
  for (const auto& r : j.at("relations")) {
    SyntheticRelation rel;
    rel.src = r.at("src").get<std::string>();
    rel.edge = r.at("edge").get<std::string>();
    rel.dst = r.at("dst").get<std::string>();
    rel.edges = r.at("edges").get<std::uint64_t>();
    rel.degree = r.value("degree", "uniform");
    rel.alpha = r.value("alpha", 2.0);
    if (rel.degree != "uniform" && rel.degree != "powerlaw")
      throw std::invalid_argument("unknown degree distribution: " + rel.degree);
    s.relations.push_back(std::move(rel));
  }
  return s;
}

json spec_to_json(const SyntheticSpec& s) {
  json j;
  j["name"] = s.name;
  j["target"] = s.target;
  j["num_classes"] = s.num_classes;
  j["label_noise"] = s.label_noise;
  j["add_reverse"] = s.add_reverse;
  j["self_paired"] = s.self_paired;
  j["node_types"] = json::array();
  for (const auto& t : s.node_types)
    j["node_types"].push_back(
        {{"name", t.name}, {"count", t.count}, {"dim", t.dim}, {"storage", t.storage}});
  j["relations"] = json::array();
  for (const auto& r : s.relations)
    j["relations"].push_back({{"src", r.src},
                              {"edge", r.edge},
                              {"dst", r.dst},
                              {"edges", r.edges},
                              {"degree", r.degree},
                              {"alpha", r.alpha}});
  return j;
}

HetGraph gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  std::vector<std::string> problems;
  if (spec.node_types.empty()) problems.push_back("no node types");
  auto type_index = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < spec.node_types.size(); ++i)
      if (spec.node_types[i].name == name) return static_cast<int>(i);
    return -1;
  };
  if (type_index(spec.target) < 0) problems.push_back("target type not declared: " + spec.target);
  else if (spec.node_types[type_index(spec.target)].count < 1)
    problems.push_back("target type has no nodes");
  for (const auto& r : spec.relations) {
    if (type_index(r.src) < 0) problems.push_back("relation src not declared: " + r.src);
    if (type_index(r.dst) < 0) problems.push_back("relation dst not declared: " + r.dst);
    if (r.edges == 0) problems.push_back("relation has no edges: " + r.edge);
  }
  if (!problems.empty()) {
    std::string msg = "invalid synthetic spec:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }

  TypeRegistry reg;
  std::vector<std::uint64_t> counts;
  for (const auto& t : spec.node_types) {
    reg.add_node_type(t.name);
    counts.push_back(t.count);
  }
  std::vector<Relation> relations;
  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges;
  for (std::size_t ri = 0; ri < spec.relations.size(); ++ri) {
    const SyntheticRelation& r = spec.relations[ri];
    Relation rel;
    rel.src = type_index(r.src);
    rel.dst = type_index(r.dst);
    rel.etype = reg.add_edge_type(r.edge);
    relations.push_back(rel);

    const std::uint64_t n_src = counts[rel.src], n_dst = counts[rel.dst];
    std::mt19937_64 rng(mix_seed(seed, 0x9e0ULL + ri));
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(r.edges);
    std::uniform_int_distribution<std::uint64_t> pick_src(0, n_src - 1);
    if (r.degree == "uniform") {
      std::uniform_int_distribution<std::uint64_t> pick_dst(0, n_dst - 1);
      for (std::uint64_t e = 0; e < r.edges; ++e)
        pairs.push_back({static_cast<NodeId>(pick_src(rng)), static_cast<NodeId>(pick_dst(rng))});
    } else {
      // shape in-degrees over the destination index, trim to the exact count
      double total = 0.0;
      std::vector<double> w(n_dst);
      for (std::uint64_t i = 0; i < n_dst; ++i) {
        w[i] = std::pow(static_cast<double>(i + 1), -r.alpha);
        total += w[i];
      }
      std::vector<std::uint64_t> deg(n_dst);
      std::uint64_t assigned = 0;
      for (std::uint64_t i = 0; i < n_dst; ++i) {
        deg[i] = static_cast<std::uint64_t>(static_cast<double>(r.edges) * w[i] / total);
        assigned += deg[i];
      }
      for (std::uint64_t i = 0; assigned < r.edges; i = (i + 1) % n_dst) {
        deg[i] += 1;
        assigned += 1;
      }
      for (std::uint64_t d = 0; d < n_dst; ++d)
        for (std::uint64_t e = 0; e < deg[d]; ++e)
          pairs.push_back({static_cast<NodeId>(pick_src(rng)), static_cast<NodeId>(d)});
    }
    edges.push_back(std::move(pairs));
  }

  const NodeTypeId target = type_index(spec.target);
  HetGraph g = build_hetgraph(std::move(reg), counts, std::move(relations), edges, target,
                              spec.num_classes);

  for (std::size_t t = 0; t < spec.node_types.size(); ++t) {
    const SyntheticNodeType& nt = spec.node_types[t];
    TypeFeatures& f = g.features[t];
    f.dim = nt.dim;
    if (nt.storage == "dense") {
      f.kind = StorageKind::Dense;
      f.values = Matrix(nt.count, static_cast<std::size_t>(nt.dim));
      std::mt19937_64 rng(mix_seed(seed, 0xf0ULL + t));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (double& x : f.values.data) x = u(rng);
    } else {
      f.kind = StorageKind::Learnable;
    }
  }

  g.labels.resize(g.node_counts[target]);
  std::mt19937_64 lrng(mix_seed(seed, 0x1abe1ULL));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> any_class(0, spec.num_classes - 1);
  for (NodeId v = 0; v < g.node_counts[target]; ++v) {
    g.labels[v] = static_cast<std::int32_t>(v % spec.num_classes);
    if (u01(lrng) < spec.label_noise) g.labels[v] = any_class(lrng);
  }

  if (spec.add_reverse) {
    std::vector<int> self_paired;
    for (const auto& name : spec.self_paired) {
      auto et = g.reg.find_edge_type(name);
      if (!et) throw std::invalid_argument("self_paired edge type not found: " + name);
      for (std::size_t r = 0; r < g.relations.size(); ++r)
        if (g.relations[r].etype == *et) self_paired.push_back(static_cast<int>(r));
    }
    g = add_reverse_relations(g, self_paired);
  }
  g.validate();
  return g;
}

std::vector<std::string> bundled_spec_names() {
  return {"mag-mini", "freebase-mini", "donor-mini", "igb-mini"};
}

SyntheticSpec bundled_spec(const std::string& name) {
  SyntheticSpec s;
  s.name = name;
  if (name == "mag-mini") {
    s.target = "paper";
    s.num_classes = 8;
    s.label_noise = 0.1;
    s.node_types = {{"paper", 8000, 128, "dense"},
                    {"author", 6000, 64, "learnable"},
                    {"institution", 500, 64, "learnable"},
                    {"field", 1000, 64, "learnable"}};
    s.relations = {{"author", "writes", "paper", 30000, "powerlaw", 1.6},
                   {"author", "affiliated", "institution", 6000, "uniform", 2.0},
                   {"paper", "cites", "paper", 40000, "powerlaw", 1.8},
                   {"paper", "has_topic", "field", 24000, "uniform", 2.0}};
    s.self_paired = {"cites"};
  } else if (name == "freebase-mini") {
    s.target = "book";
    s.num_classes = 8;
    s.label_noise = 0.05;
    s.node_types = {{"book", 5000, 32, "learnable"},
                    {"film", 4000, 32, "learnable"},
                    {"music", 8000, 32, "learnable"},
                    {"people", 6000, 32, "learnable"}};
    s.relations = {{"people", "authored", "book", 20000, "powerlaw", 1.7},
                   {"film", "adapted", "book", 8000, "uniform", 2.0},
                   {"music", "scored", "film", 10000, "uniform", 2.0},
                   {"people", "liked", "music", 15000, "powerlaw", 2.0}};
  } else if (name == "donor-mini") {
    s.target = "project";
    s.num_classes = 2;
    s.label_noise = 0.05;
    s.node_types = {{"project", 2000, 789, "dense"},
                    {"donation", 3000, 17, "dense"},
                    {"donor", 3000, 7, "dense"}};
    s.relations = {{"donor", "gave", "project", 8000, "powerlaw", 2.0},
                   {"donor", "made", "donation", 6000, "uniform", 2.0},
                   {"donation", "to_project", "project", 6000, "uniform", 2.0}};
  } else if (name == "igb-mini") {
    s.target = "paper";
    s.num_classes = 16;
    s.label_noise = 0.1;
    s.node_types = {{"paper", 10000, 128, "dense"},
                    {"author", 8000, 128, "dense"},
                    {"institute", 400, 128, "dense"},
                    {"fos", 700, 128, "dense"}};
    s.relations = {{"author", "written", "paper", 30000, "powerlaw", 1.6},
                   {"author", "affiliated", "institute", 8000, "uniform", 2.0},
                   {"paper", "cites", "paper", 30000, "powerlaw", 1.8},
                   {"paper", "topic", "fos", 20000, "uniform", 2.0}};
    s.self_paired = {"cites"};
  } else {
    throw std::invalid_argument("unknown bundled spec: " + name);
  }
  return s;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("graph_file")) cfg.graph_file = j.at("graph_file").get<std::string>();
  if (j.contains("spec")) {
    const auto& sp = j.at("spec");
    cfg.spec = sp.is_string() ? bundled_spec(sp.get<std::string>()) : parse_spec(sp);
    cfg.has_spec = true;
  }
  cfg.partitioner = j.value("partitioner", cfg.partitioner);
  cfg.p = j.value("p", cfg.p);
  cfg.engine = j.value("engine", cfg.engine);
  if (j.contains("fanouts")) cfg.fanouts = j.at("fanouts").get<std::vector<int>>();
  cfg.hidden = j.value("hidden", cfg.hidden);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.max_batches_per_epoch = j.value("max_batches_per_epoch", cfg.max_batches_per_epoch);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.elem_bytes = j.value("elem_bytes", cfg.elem_bytes);
  cfg.random_designated = j.value("random_designated", cfg.random_designated);
  cfg.cache_budget = j.value("cache_budget", cfg.cache_budget);
  if (j.contains("cost_model")) {
    const auto& c = j.at("cost_model");
    cfg.cost.read_ns_per_byte = c.value("read_ns_per_byte", cfg.cost.read_ns_per_byte);
    cfg.cost.write_ns_per_byte = c.value("write_ns_per_byte", cfg.cost.write_ns_per_byte);
    cfg.cost.fixed_overhead_ns = c.value("fixed_overhead_ns", cfg.cost.fixed_overhead_ns);
    cfg.cost.elem_bytes = c.value("elem_bytes", cfg.cost.elem_bytes);
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["graph_file"] = cfg.graph_file;
  if (cfg.has_spec) j["spec"] = spec_to_json(cfg.spec);
  j["partitioner"] = cfg.partitioner;
  j["p"] = cfg.p;
  j["engine"] = cfg.engine;
  j["fanouts"] = cfg.fanouts;
  j["hidden"] = cfg.hidden;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["max_batches_per_epoch"] = cfg.max_batches_per_epoch;
  j["seed"] = cfg.seed;
  j["elem_bytes"] = cfg.elem_bytes;
  j["random_designated"] = cfg.random_designated;
  j["cache_budget"] = cfg.cache_budget;
  j["cost_model"] = {{"read_ns_per_byte", cfg.cost.read_ns_per_byte},
                     {"write_ns_per_byte", cfg.cost.write_ns_per_byte},
                     {"fixed_overhead_ns", cfg.cost.fixed_overhead_ns},
                     {"elem_bytes", cfg.cost.elem_bytes}};
  return j;
}

json comm_stats_to_json(const CommStats& stats) {
  static const char* kind_names[] = {"partial_agg", "partial_grad", "fetch_request",
                                     "fetch_reply"};
  json dirs = json::array();
  json kind_totals;
  for (const char* k : kind_names) kind_totals[k] = {{"count", 0}, {"bytes", 0}};
  for (const auto& [key, e] : stats.per_direction) {
    const char* kind = kind_names[std::get<2>(key)];
    dirs.push_back({{"from", std::get<0>(key)},
                    {"to", std::get<1>(key)},
                    {"kind", kind},
                    {"count", e.count},
                    {"bytes", e.bytes}});
    kind_totals[kind]["count"] = kind_totals[kind]["count"].get<std::uint64_t>() + e.count;
    kind_totals[kind]["bytes"] = kind_totals[kind]["bytes"].get<std::uint64_t>() + e.bytes;
  }
  return {{"directions", dirs}, {"by_kind", kind_totals}, {"total_bytes", stats.total_bytes()}};
}

static HetGraph build_graph(const ExperimentConfig& cfg) {
  if (!cfg.graph_file.empty()) return load_container(cfg.graph_file);
  if (!cfg.has_spec) throw std::invalid_argument("config needs a graph file or a synthetic spec");
  return gen_synthetic(cfg.spec, cfg.seed);
}

static std::vector<std::vector<NodeId>> make_batches(const HetGraph& g, int batch_size,
                                                     int max_batches, std::uint64_t seed) {
  std::vector<NodeId> order(g.node_counts[g.target]);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<NodeId>> batches;
  for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
    if (max_batches > 0 && static_cast<int>(batches.size()) >= max_batches) break;
    batches.emplace_back(order.begin() + lo,
                         order.begin() + std::min(lo + batch_size, order.size()));
  }
  return batches;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  HetGraph g = build_graph(cfg);
  const int k = static_cast<int>(cfg.fanouts.size());
  const Metagraph m = build_metagraph(g);
  const Metatree tree = build_metatree(m, g.target, k);
  const int n_rel = static_cast<int>(g.relations.size());
  const AccountingModel acct{32, 8, cfg.elem_bytes};

  PartitionPlan plan;
  RafPlanView view;
  bool have_plan = false;
  if (cfg.engine == "raf") {
    if (cfg.partitioner == "meta") {
      plan = meta_partition(m, g.target, k, cfg.p);
      view = raf_view_from_plan(plan);
      have_plan = true;
    } else {
      view = raf_view_random_relations(tree, n_rel, cfg.p, cfg.seed);
    }
  } else if (cfg.engine != "vanilla") {
    throw std::invalid_argument("unknown engine: " + cfg.engine);
  }

  HGNNModel model = init_model(g, tree, cfg.hidden, mix_seed(cfg.seed, 0xd0de1ULL));
  LearnableStore store = init_learnable(g, mix_seed(cfg.seed, 0x1ea4aULL));
  ModelAdamState mst;

  const bool cache_on = cfg.cache_budget > 0;
  MissPenaltyProfile profile;
  CacheState cache;
  json cache_json;
  if (cache_on) {
    profile = profile_miss_penalty(g, cfg.cost);
    const HotnessTable hot =
        presample_hotness(g, tree, cfg.fanouts, 2, mix_seed(cfg.seed, 0xca11eULL));
    const CacheAllocation alloc = allocate_cache(cfg.cache_budget, hot, profile);
    cache = fill_and_serve(alloc, hot, profile, cfg.p);
    json table = json::array();
    for (int t = 0; t < g.reg.num_node_types(); ++t)
      if (profile.types[t].record_bytes > 0)
        table.push_back({{"type", g.reg.node_type_names[t]},
                         {"ratio", profile.types[t].ratio},
                         {"record_bytes", profile.types[t].record_bytes},
                         {"bytes", alloc.bytes[t]},
                         {"capacity", alloc.capacity[t]}});
    cache_json["budget"] = cfg.cache_budget;
    cache_json["allocation"] = table;
  }

  json batches_json = json::array();
  CommStats cum;
  std::uint64_t sync_total = 0;
  double last_loss = 0.0;
  bool checks_ok = true;
  int counter = 0;
  std::mt19937_64 des_rng(mix_seed(cfg.seed, 0xde5ULL));
  const auto hop_rels = hop_relation_sets(tree, k);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(g, cfg.batch_size, cfg.max_batches_per_epoch,
                                      mix_seed(cfg.seed, 0xba7cULL + epoch));
    for (const auto& batch : batches) {
      const std::uint64_t rng_seed = mix_seed(cfg.seed, 0xb000ULL + counter);
      ExecutionReport rep;
      json entry;
      if (cfg.engine == "raf") {
        const int designated =
            cfg.random_designated ? static_cast<int>(des_rng() % cfg.p) : counter % cfg.p;
        rep = run_raf_batch(g, view, model, store, batch, cfg.fanouts, rng_seed, designated, acct);
        const CommBoundVerdict v = check_comm_bounds(rep, n_rel, view.meta);
        checks_ok = checks_ok && v.message_bound_ok && v.target_only_ok;
        entry["designated"] = designated;
        entry["message_bound_ok"] = v.message_bound_ok;
        entry["target_only_ok"] = v.target_only_ok;
        entry["boundary_counts"] = rep.boundary_counts;
      } else {
        rep = run_vanilla_batch(g, tree, model, store, batch, cfg.fanouts, rng_seed, cfg.p,
                                mix_seed(cfg.seed, 0x0fffeULL), acct);
      }
      adam_update_model(model, mst, rep.grads);
      for (const auto& [t, fg] : rep.grads.feature_grads)
        adam_update_rows(store.tables.at(t), fg.first, fg.second);

      if (cache_on) {
        std::vector<NodeId> ids(batch.begin(), batch.end());
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        const SampledBlocks blocks = sample_khop_restricted(g, ids, cfg.fanouts, rng_seed, hop_rels);
        for (int t = 0; t < g.reg.num_node_types(); ++t) {
          if (profile.types[t].record_bytes == 0) continue;
          for (NodeId v : blocks.frontier[k][t]) {
            cache.lookup(t, v);
            if (profile.types[t].learnable) cache.update(t, v);
          }
        }
      }

      entry["epoch"] = epoch;
      entry["batch"] = counter;
      entry["loss"] = rep.loss;
      entry["bytes"] = rep.stats.total_bytes();
      entry["sync_bytes"] = rep.sync_bytes;
      batches_json.push_back(std::move(entry));
      cum.merge(rep.stats);
      sync_total += rep.sync_bytes;
      last_loss = rep.loss;
      ++counter;
    }
  }

  if (cache_on) {
    json rates = json::array();
    for (int t = 0; t < g.reg.num_node_types(); ++t)
      if (profile.types[t].record_bytes > 0)
        rates.push_back({{"type", g.reg.node_type_names[t]},
                         {"hits", cache.types[t].hits},
                         {"misses", cache.types[t].misses},
                         {"hit_rate", cache.hit_rate(t)},
                         {"penalty_ns", cache.types[t].penalty_ns}});
    cache_json["per_type"] = rates;
  }

  ExperimentResult res;
  res.checks_ok = checks_ok;
  res.stats["version"] = 1;
  res.stats["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
  res.stats["config"] = config_to_json(cfg);
  res.stats["batches"] = std::move(batches_json);
  res.stats["comm"] = comm_stats_to_json(cum);
  res.stats["sync_bytes"] = sync_total;
  res.stats["final_loss"] = last_loss;
  res.stats["checks_ok"] = checks_ok;
  if (cache_on) res.stats["cache"] = cache_json;
  if (have_plan) {
    json parts = json::array();
    for (std::size_t i = 0; i < plan.parts.size(); ++i) {
      json part;
      part["sub_ids"] = plan.parts[i].sub_ids;
      part["relations"] = plan.parts[i].relations;
      json cts = json::array();
      for (NodeTypeId t : cacheable_types(plan, static_cast<int>(i)))
        cts.push_back(g.reg.node_type_names[t]);
      part["cacheable_types"] = cts;
      parts.push_back(std::move(part));
    }
    res.stats["plan"] = {{"p", plan.p}, {"parts", parts}};
  }
  return res;
}

json compare_engines(const ExperimentConfig& cfg) {
  HetGraph g = build_graph(cfg);
  const int k = static_cast<int>(cfg.fanouts.size());
  const Metagraph m = build_metagraph(g);
  const Metatree tree = build_metatree(m, g.target, k);
  const int n_rel = static_cast<int>(g.relations.size());
  const AccountingModel acct{32, 8, cfg.elem_bytes};

  const HGNNModel model = init_model(g, tree, cfg.hidden, mix_seed(cfg.seed, 0xd0de1ULL));
  const LearnableStore store = init_learnable(g, mix_seed(cfg.seed, 0x1ea4aULL));
  const PartitionPlan plan = meta_partition(m, g.target, k, cfg.p);
  const RafPlanView view_meta = raf_view_from_plan(plan);
  const RafPlanView view_rand = raf_view_random_relations(tree, n_rel, cfg.p, cfg.seed);

  const auto batches = make_batches(g, cfg.batch_size, cfg.max_batches_per_epoch,
                                    mix_seed(cfg.seed, 0xba7cULL));
  struct Tally {
    std::uint64_t bytes = 0;
    std::uint64_t sync = 0;
  };
  Tally vanilla, raf_rand, raf_meta;
  json per_batch = json::array();
  int counter = 0;
  for (const auto& batch : batches) {
    const std::uint64_t rng_seed = mix_seed(cfg.seed, 0xb000ULL + counter);
    ExecutionReport rv = run_vanilla_batch(g, tree, model, store, batch, cfg.fanouts, rng_seed,
                                           cfg.p, mix_seed(cfg.seed, 0x0fffeULL), acct);
    ExecutionReport rr = run_raf_batch(g, view_rand, model, store, batch, cfg.fanouts, rng_seed,
                                       counter % cfg.p, acct);
    ExecutionReport rm = run_raf_batch(g, view_meta, model, store, batch, cfg.fanouts, rng_seed,
                                       counter % cfg.p, acct);
    vanilla.bytes += rv.stats.total_bytes();
    vanilla.sync += rv.sync_bytes;
    raf_rand.bytes += rr.stats.total_bytes();
    raf_rand.sync += rr.sync_bytes;
    raf_meta.bytes += rm.stats.total_bytes();
    raf_meta.sync += rm.sync_bytes;
    per_batch.push_back({{"batch", counter},
                         {"vanilla_random", rv.stats.total_bytes()},
                         {"raf_random", rr.stats.total_bytes()},
                         {"raf_meta", rm.stats.total_bytes()}});
    ++counter;
  }

  json out;
  out["per_batch"] = std::move(per_batch);
  out["epoch_bytes"] = {{"vanilla_random", vanilla.bytes},
                        {"raf_random", raf_rand.bytes},
                        {"raf_meta", raf_meta.bytes}};
  out["epoch_sync_bytes"] = {{"vanilla_random", vanilla.sync},
                             {"raf_random", raf_rand.sync},
                             {"raf_meta", raf_meta.sync}};
  out["monotone"] = raf_meta.bytes <= raf_rand.bytes && raf_rand.bytes <= vanilla.bytes;
  return out;
}

std::string stats_hash(json stats) {
  stats.erase("timestamp");
  const std::string s = stats.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace hetsim
