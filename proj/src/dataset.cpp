#include "hololink/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "hololink/common.hpp"
#include "hololink/csv.hpp"
#include "hololink/rng.hpp"

namespace hololink {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last)
    throw NonNumericFeatureError(row, col, cell);
  return value;
}

void check_train_class_coverage(const Dataset& ds) {
  std::vector<char> seen(static_cast<std::size_t>(ds.num_classes), 0);
  for (int idx : ds.train_indices) seen[static_cast<std::size_t>(ds.labels[idx])] = 1;
  for (int c = 0; c < ds.num_classes; ++c)
    if (!seen[c])
      throw Error("class '" + ds.class_names[c] + "' has no samples in the training split");
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
  const auto records = parse_csv_text(read_file(path));
  if (records.empty()) throw EmptyDatasetError("no rows in " + path);

  const auto& header = records.front();
  std::size_t label_col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == label_column) {
      label_col = j;
      break;
    }
  if (label_col == header.size())
    throw MissingLabelColumnError("label column '" + label_column + "' not in header of " + path);
  if (records.size() == 1) throw EmptyDatasetError("no data rows in " + path);

  const std::size_t n = records.size() - 1;
  const std::size_t d = header.size() - 1;

  Dataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  ds.labels.resize(n);

  std::unordered_map<std::string, int> class_ids;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = records[r + 1];
    if (row.size() != header.size())
      throw Error("row " + std::to_string(r) + " of " + path + " has " +
                  std::to_string(row.size()) + " fields, expected " +
                  std::to_string(header.size()));
    std::size_t jj = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j == label_col) continue;
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(jj++)) =
          parse_number(row[j], r, j);
    }
    auto [it, inserted] = class_ids.emplace(row[label_col], static_cast<int>(class_ids.size()));
    if (inserted) ds.class_names.push_back(row[label_col]);
    ds.labels[r] = it->second;
  }
  ds.num_classes = static_cast<int>(class_ids.size());
  return ds;
}

void random_split(Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw Error("train_fraction must be in (0, 1)");
  Rng rng(seed);
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.num_classes));
  for (int i = 0; i < ds.sample_count(); ++i)
    by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);

  ds.train_indices.clear();
  ds.test_indices.clear();
  for (auto& rows : by_class) {
    rng.shuffle(rows);
    // ceil keeps at least one sample of every class in training
    std::size_t k = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(rows.size())));
    k = std::max<std::size_t>(k, 1);
    for (std::size_t i = 0; i < rows.size(); ++i)
      (i < k ? ds.train_indices : ds.test_indices).push_back(rows[i]);
  }
  std::sort(ds.train_indices.begin(), ds.train_indices.end());
  std::sort(ds.test_indices.begin(), ds.test_indices.end());
}

void load_split_file(Dataset& ds, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError("cannot open split file: " + path);
  std::vector<char> is_train(static_cast<std::size_t>(ds.sample_count()), 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int idx = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), idx);
    if (ec != std::errc{} || ptr != line.data() + line.size())
      throw Error("split file " + path + " line " + std::to_string(line_no) +
                  ": expected a row index, got '" + line + "'");
    if (idx < 0 || idx >= ds.sample_count())
      throw Error("split index " + std::to_string(idx) + " out of range");
    is_train[static_cast<std::size_t>(idx)] = 1;
  }
  ds.train_indices.clear();
  ds.test_indices.clear();
  for (int i = 0; i < ds.sample_count(); ++i)
    (is_train[static_cast<std::size_t>(i)] ? ds.train_indices : ds.test_indices).push_back(i);
  if (ds.train_indices.empty()) throw Error("split file assigns no training rows");
  check_train_class_coverage(ds);
}

Dataset normalize_features(Dataset raw) {
  if (raw.train_indices.empty())
    throw EmptyDatasetError("cannot normalize: training split is empty");
  const Eigen::Index d = raw.features.cols();
  for (Eigen::Index j = 0; j < d; ++j) {
    double lo = raw.features(raw.train_indices.front(), j);
    double hi = lo;
    for (int r : raw.train_indices) {
      lo = std::min(lo, raw.features(r, j));
      hi = std::max(hi, raw.features(r, j));
    }
    if (hi == lo) {
      raw.features.col(j).setZero();
      continue;
    }
    // direct division makes the train extremes map to exactly 0 and 1, which
    // keeps a second normalization pass a no-op
    const double range = hi - lo;
    for (Eigen::Index r = 0; r < raw.features.rows(); ++r) {
      double v = (raw.features(r, j) - lo) / range;
      raw.features(r, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return raw;
}

std::vector<AgentShard> split_among_agents(const Dataset& ds, int num_agents,
                                           std::uint64_t seed) {
  const int n_train = static_cast<int>(ds.train_indices.size());
  if (num_agents < 1 || num_agents > n_train)
    throw TooManyAgentsError("cannot split " + std::to_string(n_train) +
                             " training samples among " + std::to_string(num_agents) +
                             " agents");
  std::vector<int> perm = ds.train_indices;
  Rng rng(seed);
  rng.shuffle(perm);

  const int q = n_train / num_agents;
  const int r = n_train % num_agents;
  std::vector<AgentShard> shards(static_cast<std::size_t>(num_agents));
  int pos = 0;
  for (int a = 0; a < num_agents; ++a) {
    const int take = q + (a < r ? 1 : 0);
    auto& shard = shards[static_cast<std::size_t>(a)];
    shard.agent_id = static_cast<std::uint32_t>(a);
    shard.sample_indices.assign(perm.begin() + pos, perm.begin() + pos + take);
    std::sort(shard.sample_indices.begin(), shard.sample_indices.end());
    pos += take;
  }
  return shards;
}

Dataset make_blobs(int n, int d, int num_classes, std::uint64_t seed, double spread,
                   int clusters_per_class) {
  if (n < num_classes || num_classes < 2 || d < 1 || clusters_per_class < 1)
    throw Error("make_blobs: invalid shape");
  Rng rng(derive_seed(seed, "blobs"));

  const int n_clusters = num_classes * clusters_per_class;
  Eigen::MatrixXd centers(n_clusters, d);
  for (int c = 0; c < n_clusters; ++c)
    for (int j = 0; j < d; ++j) centers(c, j) = spread * rng.gaussian();

  Dataset ds;
  ds.name = "synthetic";
  ds.num_classes = num_classes;
  ds.features.resize(n, d);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < num_classes; ++c) ds.class_names.push_back("blob" + std::to_string(c));
  for (int i = 0; i < n; ++i) {
    const int c = i % num_classes;
    const int cluster =
        c * clusters_per_class + static_cast<int>(rng.below(clusters_per_class));
    ds.labels[static_cast<std::size_t>(i)] = c;
    for (int j = 0; j < d; ++j) ds.features(i, j) = centers(cluster, j) + rng.gaussian();
  }
  random_split(ds, 0.5, derive_seed(seed, "blobs-split"));
  return ds;
}

Dataset load_manifest(const std::string& path, std::uint64_t master_seed) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("manifest " + path + ": " + e.what());
  }
  if (!doc.contains("csv") || !doc.contains("label_column"))
    throw Error("manifest " + path + " needs 'csv' and 'label_column'");

  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  Dataset ds = load_csv(resolve(doc["csv"].get<std::string>()),
                        doc["label_column"].get<std::string>());
  if (doc.contains("name")) ds.name = doc["name"].get<std::string>();

  if (doc.contains("split_file")) {
    load_split_file(ds, resolve(doc["split_file"].get<std::string>()));
  } else {
    const double fraction = doc.value("train_fraction", 0.5);
    random_split(ds, fraction, derive_seed(master_seed, "train-test-split"));
  }
  return ds;
}

}  // namespace hololink
