#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetsim/cache.hpp"
#include "hetsim/hetgraph.hpp"
#include "hetsim/raf.hpp"

namespace hetsim {

struct SyntheticNodeType {
  std::string name;
  std::uint64_t count = 0;
  int dim = 0;
  std::string storage = "dense";  // dense | learnable
};

struct SyntheticRelation {
  std::string src;
  std::string edge;
  std::string dst;
  std::uint64_t edges = 0;
  std::string degree = "uniform";  // uniform | powerlaw
  double alpha = 2.0;
};

struct SyntheticSpec {
  std::string name;
  std::string target;
  int num_classes = 2;
  double label_noise = 0.0;
  std::vector<SyntheticNodeType> node_types;
  std::vector<SyntheticRelation> relations;
  bool add_reverse = true;
  std::vector<std::string> self_paired;  // edge names whose reverse is themselves
};

SyntheticSpec parse_spec(const nlohmann::json& j);
nlohmann::json spec_to_json(const SyntheticSpec& s);

// Deterministic generator: exact node and edge counts; power-law in-degrees
// are shaped over the destination index then trimmed to the requested edge
// count; sources drawn uniformly.
HetGraph gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Bundled mini datasets: mag-mini, freebase-mini, donor-mini, igb-mini.
std::vector<std::string> bundled_spec_names();
SyntheticSpec bundled_spec(const std::string& name);

struct ExperimentConfig {
  std::string graph_file;  // container path; empty = generate from spec
  SyntheticSpec spec;
  bool has_spec = false;
  std::string partitioner = "meta";  // meta | random-node
  int p = 2;
  std::string engine = "raf";  // raf | vanilla
  std::vector<int> fanouts = {25, 20};
  int hidden = 64;
  int batch_size = 256;
  int epochs = 1;
  int max_batches_per_epoch = 0;  // 0 = unlimited
  std::uint64_t seed = 1;
  int elem_bytes = 4;
  bool random_designated = false;
  std::uint64_t cache_budget = 0;  // bytes; 0 disables the cache simulation
  CostModel cost;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct ExperimentResult {
  nlohmann::json stats;
  bool checks_ok = true;
};

// partition -> optional cache setup -> train; stats carry per-batch loss,
// communication totals, cache stats and bound-check verdicts.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Runs vanilla-random, raf-random and raf-meta over the same graph, model and
// batches; reports per-batch/per-epoch bytes and whether
// bytes(raf-meta) <= bytes(raf-random) <= bytes(vanilla-random).
nlohmann::json compare_engines(const ExperimentConfig& cfg);

nlohmann::json comm_stats_to_json(const CommStats& stats);

// FNV-1a over the serialized stats with the volatile "timestamp" field
// removed; two runs of the same config must agree.
std::string stats_hash(nlohmann::json stats);

}  // namespace hetsim
