#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetsim/container.hpp"
#include "hetsim/harness.hpp"
#include "hetsim/hgnn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hetsim;

namespace {

std::string out_dir() {
  const char* env = std::getenv("HETSIM_OUT_DIR");
  return env ? env : ".";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

SyntheticSpec resolve_spec(const std::string& spec_arg) {
  for (const auto& name : bundled_spec_names())
    if (name == spec_arg) return bundled_spec(name);
  return parse_spec(read_json(spec_arg));
}

std::vector<int> parse_fanouts(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  if (out.empty()) throw std::runtime_error("empty fanout list");
  return out;
}

struct CommonFlags {
  std::string spec_arg;
  std::string graph_file;
  std::string config_file;
  std::string fanouts_arg;
  ExperimentConfig cfg;

  void add(CLI::App* cmd) {
    cmd->add_option("--spec", spec_arg, "bundled spec name or spec JSON file");
    cmd->add_option("--graph", graph_file, "graph container file");
    cmd->add_option("--config", config_file, "experiment config JSON; flags override it");
    cmd->add_option("--p", cfg.p, "number of workers");
    cmd->add_option("--engine", cfg.engine, "raf | vanilla");
    cmd->add_option("--partitioner", cfg.partitioner, "meta | random-node");
    cmd->add_option("--fanouts", fanouts_arg, "comma-separated fanouts, e.g. 25,20");
    cmd->add_option("--hidden", cfg.hidden, "hidden dimension");
    cmd->add_option("--batch", cfg.batch_size, "batch size");
    cmd->add_option("--epochs", cfg.epochs, "epochs");
    cmd->add_option("--max-batches", cfg.max_batches_per_epoch, "cap batches per epoch (0 = all)");
    cmd->add_option("--seed", cfg.seed, "seed for every stochastic choice");
    cmd->add_option("--elem-bytes", cfg.elem_bytes, "payload element width: 2, 4 or 8");
    cmd->add_option("--cache-budget", cfg.cache_budget, "cache budget in bytes (0 = off)");
    cmd->add_flag("--random-designated", cfg.random_designated,
                  "pick the designated worker randomly instead of round-robin");
  }

  ExperimentConfig finish(CLI::App* cmd) {
    ExperimentConfig out = cfg;
    if (!config_file.empty()) {
      out = config_from_json(read_json(config_file));
      auto override_if = [&](const char* flag, auto& dst, const auto& src) {
        if (cmd->count(flag)) dst = src;
      };
      override_if("--p", out.p, cfg.p);
      override_if("--engine", out.engine, cfg.engine);
      override_if("--partitioner", out.partitioner, cfg.partitioner);
      override_if("--hidden", out.hidden, cfg.hidden);
      override_if("--batch", out.batch_size, cfg.batch_size);
      override_if("--epochs", out.epochs, cfg.epochs);
      override_if("--max-batches", out.max_batches_per_epoch, cfg.max_batches_per_epoch);
      override_if("--seed", out.seed, cfg.seed);
      override_if("--elem-bytes", out.elem_bytes, cfg.elem_bytes);
      override_if("--cache-budget", out.cache_budget, cfg.cache_budget);
      if (cmd->count("--random-designated")) out.random_designated = cfg.random_designated;
    }
    if (!fanouts_arg.empty()) out.fanouts = parse_fanouts(fanouts_arg);
    if (!spec_arg.empty()) {
      out.spec = resolve_spec(spec_arg);
      out.has_spec = true;
    }
    if (!graph_file.empty()) out.graph_file = graph_file;
    return out;
  }
};

void write_csv_row(const std::string& path, const json& stats) {
  const bool fresh = !fs::exists(path);
  std::ofstream out(path, std::ios::app);
  if (fresh)
    out << "engine,partitioner,p,epochs,batch_size,seed,final_loss,total_bytes,sync_bytes,"
           "checks_ok\n";
  const json& c = stats.at("config");
  out << c.at("engine").get<std::string>() << ',' << c.at("partitioner").get<std::string>() << ','
      << c.at("p") << ',' << c.at("epochs") << ',' << c.at("batch_size") << ',' << c.at("seed")
      << ',' << stats.at("final_loss") << ',' << stats.at("comm").at("total_bytes") << ','
      << stats.at("sync_bytes") << ',' << (stats.at("checks_ok").get<bool>() ? 1 : 0) << "\n";
}

int cmd_gen(const std::string& spec_arg, std::uint64_t seed, const std::string& out) {
  const SyntheticSpec spec = resolve_spec(spec_arg);
  const HetGraph g = gen_synthetic(spec, seed);
  save_container(g, out);
  std::cout << "wrote " << out << ": " << g.reg.num_node_types() << " node types, "
            << g.relations.size() << " relations, " << g.total_edges() << " edges\n";
  return 0;
}

int cmd_partition(const ExperimentConfig& cfg, const std::string& dir) {
  const HetGraph g = cfg.graph_file.empty() ? gen_synthetic(cfg.spec, cfg.seed)
                                            : load_container(cfg.graph_file);
  const int k = static_cast<int>(cfg.fanouts.size());
  const Metagraph m = build_metagraph(g);
  const PartitionPlan plan = meta_partition(m, g.target, k, cfg.p);
  const auto parts = materialize_partitions(g, plan);

  fs::create_directories(dir);
  const std::string graph_path = (fs::path(dir) / "graph.hgc").string();
  save_container(g, graph_path);

  std::vector<int> assignment(plan.subs.size(), -1);
  for (std::size_t i = 0; i < plan.parts.size(); ++i)
    for (int sid : plan.parts[i].sub_ids)
      if (assignment[sid] < 0) assignment[sid] = static_cast<int>(i);
  json manifest;
  manifest["graph"] = "graph.hgc";
  manifest["p"] = plan.p;
  manifest["k"] = k;
  manifest["assignment"] = assignment;
  json pj = json::array();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string f = "part" + std::to_string(i) + ".hgc";
    save_container(parts[i].graph, (fs::path(dir) / f).string());
    json rels = json::array();
    for (int r : parts[i].owned_relations) rels.push_back(g.reg.edge_type_names[g.relations[r].etype]);
    pj.push_back({{"file", f}, {"relations", rels}, {"weight", plan.parts[i].weight}});
  }
  manifest["partitions"] = pj;
  write_json((fs::path(dir) / "manifest.json").string(), manifest);
  std::cout << "wrote plan with " << plan.p << " partitions to " << dir << "\n";
  return 0;
}

ExperimentConfig apply_plan_dir(ExperimentConfig cfg, const std::string& plan_dir) {
  const json manifest = read_json((fs::path(plan_dir) / "manifest.json").string());
  cfg.graph_file = (fs::path(plan_dir) / manifest.at("graph").get<std::string>()).string();
  cfg.has_spec = false;
  cfg.p = manifest.at("p").get<int>();
  cfg.partitioner = "meta";
  return cfg;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& stats_path) {
  const ExperimentResult res = run_experiment(cfg);
  const std::string out = stats_path.empty()
                              ? (fs::path(out_dir()) / "stats.json").string()
                              : stats_path;
  write_json(out, res.stats);
  write_csv_row((fs::path(out).replace_extension(".csv")).string(), res.stats);
  std::cout << "final loss " << res.stats.at("final_loss") << ", total bytes "
            << res.stats.at("comm").at("total_bytes") << ", checks "
            << (res.checks_ok ? "ok" : "FAILED") << "\n";
  return res.checks_ok ? 0 : 1;
}

int cmd_compare(const ExperimentConfig& cfg, const std::string& out_path) {
  const json cmp = compare_engines(cfg);
  const std::string out = out_path.empty() ? (fs::path(out_dir()) / "compare.json").string()
                                           : out_path;
  write_json(out, cmp);
  const json& b = cmp.at("epoch_bytes");
  std::cout << "raf-meta " << b.at("raf_meta") << " <= raf-random " << b.at("raf_random")
            << " <= vanilla-random " << b.at("vanilla_random") << " : "
            << (cmp.at("monotone").get<bool>() ? "ok" : "VIOLATED") << "\n";
  return cmp.at("monotone").get<bool>() ? 0 : 1;
}

int cmd_cache_sim(const ExperimentConfig& base, const std::string& out_path) {
  ExperimentConfig cfg = base;
  if (cfg.cache_budget == 0) cfg.cache_budget = 1 << 20;
  cfg.engine = "raf";
  const ExperimentResult res = run_experiment(cfg);
  const std::string out = out_path.empty() ? (fs::path(out_dir()) / "cache.json").string()
                                           : out_path;
  write_json(out, res.stats.at("cache"));
  for (const auto& row : res.stats.at("cache").at("per_type"))
    std::cout << row.at("type").get<std::string>() << ": hit rate " << row.at("hit_rate")
              << ", penalty " << row.at("penalty_ns") << " ns\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous-graph partitioning and distributed HGNN training simulator"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a synthetic graph container");
  std::string gen_spec, gen_out = "graph.hgc";
  std::uint64_t gen_seed = 1;
  gen->add_option("--spec", gen_spec, "bundled spec name or spec JSON file")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output container path");

  auto* part = app.add_subcommand("partition", "meta-partition a graph and write the plan");
  CommonFlags part_flags;
  std::string part_dir = "plan";
  part_flags.add(part);
  part->add_option("--out-dir", part_dir, "plan output directory");

  auto* train = app.add_subcommand("train", "train with the chosen engine");
  CommonFlags train_flags;
  std::string train_plan, train_stats;
  train_flags.add(train);
  train->add_option("--plan", train_plan, "plan directory from the partition subcommand");
  train->add_option("--stats", train_stats, "stats JSON output path");

  auto* cmp = app.add_subcommand("compare", "compare vanilla-random, raf-random and raf-meta");
  CommonFlags cmp_flags;
  std::string cmp_out;
  cmp_flags.add(cmp);
  cmp->add_option("--out", cmp_out, "comparison JSON output path");

  auto* csim = app.add_subcommand("cache-sim", "run the feature-cache simulation");
  CommonFlags csim_flags;
  std::string csim_out;
  csim_flags.add(csim);
  csim->add_option("--out", csim_out, "cache stats JSON output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_spec, gen_seed, gen_out);
    if (part->parsed()) return cmd_partition(part_flags.finish(part), part_dir);
    if (train->parsed()) {
      ExperimentConfig cfg = train_flags.finish(train);
      if (!train_plan.empty()) cfg = apply_plan_dir(cfg, train_plan);
      return cmd_train(cfg, train_stats);
    }
    if (cmp->parsed()) return cmd_compare(cmp_flags.finish(cmp), cmp_out);
    if (csim->parsed()) return cmd_cache_sim(csim_flags.finish(csim), csim_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
