#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hololink/dataset.hpp"
#include "hololink/hdc.hpp"
#include "hololink/rvfl.hpp"

namespace hololink {

enum class CodecKind : std::uint8_t { None = 0, Hdc, Svd, Deflate };

const char* to_string(CodecKind kind);

struct CodecSpec {
  CodecKind kind = CodecKind::None;
  int hdc_ratio = 1;       // reshape width R
  double svd_ratio = 2.0;  // requested compression ratio
  KeyMode key_mode = KeyMode::Unitary;

  static CodecSpec none() { return {}; }
  static CodecSpec hdc(int ratio, KeyMode mode = KeyMode::Unitary) {
    return {CodecKind::Hdc, ratio, 2.0, mode};
  }
  static CodecSpec svd(double ratio) { return {CodecKind::Svd, 1, ratio}; }
  static CodecSpec deflate() { return {CodecKind::Deflate}; }
};

// Everything one distributed round depends on. The encoder (feature keys, H,
// kappa) is shared by all agents; every random choice is derived from
// master_seed, so a round is a pure function of (dataset, config).
struct RoundConfig {
  int num_agents = 10;
  CodecSpec codec;
  ClassifierKind classifier = ClassifierKind::Rls;
  int hidden_size = 100;
  int kappa = 3;
  double lambda = 1.0;
  std::uint64_t master_seed = 1;
};

struct PayloadStats {
  double values_per_agent = 0.0;
  double bytes_per_agent = 0.0;
  double achieved_ratio = 1.0;  // serialized model bytes / payload bytes
};

struct AgentState {
  std::uint32_t agent_id = 0;
  AgentShard shard;
  ClassifierMatrix local_model;
  std::vector<ClassifierMatrix> received;  // N-1 decompressed peers after a round
  ClassifierMatrix aggregated;
};

struct RoundResult {
  std::vector<double> agent_accuracy;
  double mean_accuracy = 0.0;
  double min_accuracy = 0.0;
  double max_accuracy = 0.0;
  PayloadStats payload;
  bool empty_class_seen = false;
};

// Trains on the agent's own shard only; no other agent's data is touched.
ClassifierMatrix train_local(const AgentState& agent, const Dataset& ds,
                             const EncoderConfig& encoder, ClassifierKind kind,
                             double lambda);

// Each agent's classifier is encoded once, delivered to all N-1 peers and
// decoded at each receiver. Only codec payload bytes flow between agents;
// key sets are re-derived locally from the shared seed.
PayloadStats broadcast_round(std::vector<AgentState>& agents, const CodecSpec& codec,
                             ClassifierKind kind, std::uint64_t key_seed);

// Entrywise mean of the agent's own uncompressed classifier and everything it
// received.
ClassifierMatrix aggregate(const ClassifierMatrix& own,
                           const std::vector<ClassifierMatrix>& received);

// split -> local training -> broadcast -> aggregate -> evaluate on the full
// test split.
RoundResult run_round(const Dataset& ds, const RoundConfig& cfg);

// Same pipeline with caller-supplied shards (each a subset of the train split).
RoundResult run_round_with_shards(const Dataset& ds, const RoundConfig& cfg,
                                  const std::vector<AgentShard>& shards);

// Centralized reference: one model on the whole train split, same derivations.
struct CentralizedResult {
  ClassifierMatrix model;
  EncoderConfig encoder;
  double accuracy = 0.0;
  bool empty_class_seen = false;
};
CentralizedResult train_centralized(const Dataset& ds, const RoundConfig& cfg);

// H' = max(1, ceil(H / ratio)), so the small model's classifier matches the
// compressed payload size up to rounding.
int small_model_hidden_size(int hidden_size, int ratio);

// Reruns the pipeline uncompressed with the reduced hidden layer.
RoundResult small_model_baseline(const Dataset& ds, const RoundConfig& cfg, int ratio);

}  // namespace hololink
