#include "hololink/sim.hpp"

#include <algorithm>
#include <cmath>

#include "hololink/baselines.hpp"
#include "hololink/common.hpp"
#include "hololink/rng.hpp"

namespace hololink {

const char* to_string(CodecKind kind) {
  switch (kind) {
    case CodecKind::None: return "none";
    case CodecKind::Hdc: return "hdc";
    case CodecKind::Svd: return "svd";
    case CodecKind::Deflate: return "deflate";
  }
  return "?";
}

ClassifierMatrix train_local(const AgentState& agent, const Dataset& ds,
                             const EncoderConfig& encoder, ClassifierKind kind,
                             double lambda) {
  if (agent.shard.sample_indices.empty())
    throw EmptyShardError("agent " + std::to_string(agent.agent_id) + " has no samples");
  const HiddenBatch acts = encode_rows(ds, agent.shard.sample_indices, encoder);
  const std::vector<int> labels = gather_labels(ds, agent.shard.sample_indices);
  if (kind == ClassifierKind::Rls) return train_rls(acts, labels, ds.num_classes, lambda);
  return train_centroids(acts, labels, ds.num_classes);
}

PayloadStats broadcast_round(std::vector<AgentState>& agents, const CodecSpec& codec,
                             ClassifierKind kind, std::uint64_t key_seed) {
  PayloadStats stats;
  stats.achieved_ratio = 0.0;  // accumulated below, then averaged
  const auto n = agents.size();
  for (auto& agent : agents) agent.received.clear();

  for (std::size_t p = 0; p < n; ++p) {
    const ClassifierMatrix& model = agents[p].local_model;
    const std::int64_t model_values =
        static_cast<std::int64_t>(model.class_count()) * model.hidden_size();
    const std::size_t model_bytes = serialize_model(model).size();

    std::vector<std::uint8_t> wire;
    double values = 0.0;

    // Every receiver regenerates the sender's keys from the shared seed; the
    // result is identical everywhere, so they are derived once here.
    KeySet keys;
    try {
      if (codec.kind == CodecKind::Hdc) {
        const int dim =
            compute_dimension(model.hidden_size(), model.class_count(), codec.hdc_ratio);
        keys = derive_keys(key_seed, agents[p].agent_id, codec.hdc_ratio, dim,
                           codec.key_mode);
      }

      switch (codec.kind) {
        case CodecKind::None: {
          wire = serialize_model(model);
          values = static_cast<double>(model_values);
          break;
        }
        case CodecKind::Deflate: {
          const BytePayload payload = deflate_compress(model);
          wire = payload.data;
          values = static_cast<double>(model_values);
          break;
        }
        case CodecKind::Hdc: {
          wire = serialize_compressed(compress(model, keys));
          values = static_cast<double>(keys.dimension());
          break;
        }
        case CodecKind::Svd: {
          const SvdPayload payload = svd_compress(model, codec.svd_ratio);
          wire = serialize_svd(payload);
          values = static_cast<double>(payload.value_count());
          break;
        }
      }
    } catch (const Error& e) {
      throw Error("encoding agent " + std::to_string(agents[p].agent_id) +
                  "'s classifier failed: " + e.what());
    }

    stats.values_per_agent += values;
    stats.bytes_per_agent += static_cast<double>(wire.size());
    stats.achieved_ratio +=
        static_cast<double>(model_bytes) / static_cast<double>(wire.size());

    for (std::size_t q = 0; q < n; ++q) {
      if (q == p) continue;
      ClassifierMatrix decoded;
      try {
        switch (codec.kind) {
          case CodecKind::None:
            decoded = deserialize_model(wire);
            break;
          case CodecKind::Deflate: {
            BytePayload payload;
            payload.data = wire;
            payload.original_len = model_bytes;
            decoded = deflate_decompress(payload);
            break;
          }
          case CodecKind::Hdc:
            decoded = decompress(deserialize_compressed(wire), keys, kind);
            break;
          case CodecKind::Svd:
            decoded = svd_decompress(deserialize_svd(wire), kind);
            break;
        }
      } catch (const Error& e) {
        throw Error("agent " + std::to_string(agents[q].agent_id) +
                    " failed to decode agent " + std::to_string(agents[p].agent_id) +
                    "'s payload: " + e.what());
      }
      agents[q].received.push_back(std::move(decoded));
    }
  }

  const double dn = static_cast<double>(n);
  stats.values_per_agent /= dn;
  stats.bytes_per_agent /= dn;
  stats.achieved_ratio /= dn;
  return stats;
}

ClassifierMatrix aggregate(const ClassifierMatrix& own,
                           const std::vector<ClassifierMatrix>& received) {
  ClassifierMatrix out = own;
  for (const auto& m : received) {
    if (m.weights.rows() != own.weights.rows() || m.weights.cols() != own.weights.cols())
      throw ShapeMismatchError("received classifier shape differs from own");
    out.weights += m.weights;
  }
  out.weights /= static_cast<double>(received.size() + 1);
  return out;
}

namespace {

RoundResult finish_round(const Dataset& ds, const EncoderConfig& encoder,
                         std::vector<AgentState>& agents, PayloadStats stats,
                         bool empty_class_seen) {
  for (auto& agent : agents) agent.aggregated = aggregate(agent.local_model, agent.received);

  if (ds.test_indices.empty()) throw EmptyTestSetError("dataset has no test split");
  const HiddenBatch test_acts = encode_rows(ds, ds.test_indices, encoder);
  const std::vector<int> test_labels = gather_labels(ds, ds.test_indices);

  RoundResult result;
  result.empty_class_seen = empty_class_seen;
  result.payload = stats;
  result.agent_accuracy.reserve(agents.size());
  for (const auto& agent : agents)
    result.agent_accuracy.push_back(evaluate_batch(agent.aggregated, test_acts, test_labels));

  result.min_accuracy = *std::min_element(result.agent_accuracy.begin(),
                                          result.agent_accuracy.end());
  result.max_accuracy = *std::max_element(result.agent_accuracy.begin(),
                                          result.agent_accuracy.end());
  double sum = 0.0;
  for (double a : result.agent_accuracy) sum += a;
  result.mean_accuracy = sum / static_cast<double>(result.agent_accuracy.size());
  return result;
}

}  // namespace

RoundResult run_round_with_shards(const Dataset& ds, const RoundConfig& cfg,
                                  const std::vector<AgentShard>& shards) {
  const EncoderConfig encoder = make_encoder(ds.feature_count(), cfg.hidden_size,
                                             cfg.kappa, derive_seed(cfg.master_seed, "encoder"));

  // The whole train split is encoded once with the shared encoder; each
  // agent's batch is a row slice of it, identical to encoding the shard alone.
  const HiddenBatch train_acts = encode_rows(ds, ds.train_indices, encoder);
  std::vector<int> row_pos(static_cast<std::size_t>(ds.sample_count()), -1);
  for (std::size_t i = 0; i < ds.train_indices.size(); ++i)
    row_pos[static_cast<std::size_t>(ds.train_indices[i])] = static_cast<int>(i);

  bool empty_class_seen = false;
  std::vector<AgentState> agents(shards.size());
  for (std::size_t a = 0; a < shards.size(); ++a) {
    AgentState& agent = agents[a];
    agent.agent_id = shards[a].agent_id;
    agent.shard = shards[a];
    if (agent.shard.sample_indices.empty())
      throw EmptyShardError("agent " + std::to_string(agent.agent_id) + " has no samples");

    HiddenBatch acts(static_cast<Eigen::Index>(agent.shard.sample_indices.size()),
                     train_acts.cols());
    for (std::size_t i = 0; i < agent.shard.sample_indices.size(); ++i) {
      const int pos = row_pos[static_cast<std::size_t>(agent.shard.sample_indices[i])];
      if (pos < 0) throw Error("shard index outside the train split");
      acts.row(static_cast<Eigen::Index>(i)) = train_acts.row(pos);
    }
    const std::vector<int> labels = gather_labels(ds, agent.shard.sample_indices);
    if (cfg.classifier == ClassifierKind::Rls) {
      agent.local_model = train_rls(acts, labels, ds.num_classes, cfg.lambda);
    } else {
      bool empty = false;
      agent.local_model = train_centroids(acts, labels, ds.num_classes, &empty);
      empty_class_seen |= empty;
    }
  }

  PayloadStats stats = broadcast_round(agents, cfg.codec, cfg.classifier,
                                       derive_seed(cfg.master_seed, "hdc-keys"));
  return finish_round(ds, encoder, agents, stats, empty_class_seen);
}

RoundResult run_round(const Dataset& ds, const RoundConfig& cfg) {
  const auto shards =
      split_among_agents(ds, cfg.num_agents, derive_seed(cfg.master_seed, "agent-split"));
  return run_round_with_shards(ds, cfg, shards);
}

CentralizedResult train_centralized(const Dataset& ds, const RoundConfig& cfg) {
  CentralizedResult out;
  out.encoder = make_encoder(ds.feature_count(), cfg.hidden_size, cfg.kappa,
                             derive_seed(cfg.master_seed, "encoder"));
  const HiddenBatch acts = encode_rows(ds, ds.train_indices, out.encoder);
  const std::vector<int> labels = gather_labels(ds, ds.train_indices);
  if (cfg.classifier == ClassifierKind::Rls) {
    out.model = train_rls(acts, labels, ds.num_classes, cfg.lambda);
  } else {
    out.model = train_centroids(acts, labels, ds.num_classes, &out.empty_class_seen);
  }
  out.accuracy = evaluate(out.model, out.encoder, ds);
  return out;
}

int small_model_hidden_size(int hidden_size, int ratio) {
  if (ratio < 1) throw Error("ratio must be >= 1");
  return std::max(1, (hidden_size + ratio - 1) / ratio);
}

RoundResult small_model_baseline(const Dataset& ds, const RoundConfig& cfg, int ratio) {
  RoundConfig small = cfg;
  small.hidden_size = small_model_hidden_size(cfg.hidden_size, ratio);
  small.codec = CodecSpec::none();
  return run_round(ds, small);
}

}  // namespace hololink
