#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace hololink {

// Tabular classification dataset. Labels are contiguous class ids assigned in
// order of first appearance in the source file; the original label text is
// kept in class_names. train/test are disjoint row-index sets covering all rows.
struct Dataset {
  std::string name;
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // length n, values in [0, num_classes)
  int num_classes = 0;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  std::vector<std::string> class_names;

  int sample_count() const { return static_cast<int>(features.rows()); }
  int feature_count() const { return static_cast<int>(features.cols()); }
};

// One agent's slice of the training split. sample_indices are sorted dataset
// row ids; shards of distinct agents never overlap.
struct AgentShard {
  std::uint32_t agent_id = 0;
  std::vector<int> sample_indices;
};

// Parses an RFC 4180 CSV with a header row; the named column holds the label,
// all other columns must be numeric. No split is assigned yet.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Assigns a seeded random split, stratified per class so every class keeps at
// least one training sample.
void random_split(Dataset& ds, double train_fraction, std::uint64_t seed);

// Reads training row indices (one per line) from a file; remaining rows form
// the test split.
void load_split_file(Dataset& ds, const std::string& path);

// Rescales every feature column to [0, 1] using min/max over the training
// split; test values falling outside are clamped, constant columns map to 0.
Dataset normalize_features(Dataset raw);

// Cuts a random permutation of the training split into num_agents contiguous
// blocks (sizes differing by at most one). Deterministic per seed.
std::vector<AgentShard> split_among_agents(const Dataset& ds, int num_agents,
                                           std::uint64_t seed);

// Gaussian blob generator for experiments without real data. Each class owns
// clusters_per_class Gaussian clusters whose centers are drawn at scale
// `spread` relative to unit cluster noise; a stratified 50/50 split is
// assigned. More than one cluster per class makes the task genuinely harder
// for a nearest-centroid readout.
Dataset make_blobs(int n, int d, int num_classes, std::uint64_t seed,
                   double spread = 1.0, int clusters_per_class = 1);

// Loads a dataset described by a JSON manifest:
//   {"name": ..., "csv": ..., "label_column": ...,
//    "split_file": optional, "train_fraction": optional (default 0.5)}
// Relative paths are resolved against the manifest's directory. When no split
// file is given a seeded random split is used.
Dataset load_manifest(const std::string& path, std::uint64_t master_seed);

}  // namespace hololink
