#include "hololink/experiment.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hololink/baselines.hpp"
#include "hololink/common.hpp"
#include "hololink/csv.hpp"
#include "hololink/rng.hpp"

namespace hololink {

namespace {

// Runs fn(0..count-1) on a small worker pool; index-addressed outputs keep
// results independent of scheduling.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(std::string("results CSV: bad ") + what + " value '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(std::string("results CSV: bad ") + what + " value '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const char* what) {
  return static_cast<int>(parse_u64(s, what));
}

// argmax with ties to the lowest class, matching predict()
double rls_batch_accuracy(const Eigen::MatrixXd& scores, std::span<const int> labels) {
  int correct = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    int best = 0;
    double best_score = scores(i, 0);
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > best_score) {
        best_score = scores(i, c);
        best = static_cast<int>(c);
      }
    if (best == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.rows());
}

}  // namespace

GridSpec GridSpec::defaults() {
  GridSpec grid;
  for (int h = 50; h <= 1500; h += 50) grid.hidden_sizes.push_back(h);
  for (int k = -10; k <= 5; ++k) grid.lambdas.push_back(std::ldexp(1.0, k));
  grid.kappas = {1, 3, 7, 15};
  return grid;
}

TuneResult grid_search(const Dataset& ds, const GridSpec& grid, std::uint64_t seed,
                       int folds, int jobs) {
  if (grid.size() == 0) throw Error("empty hyperparameter grid");
  const int n_train = static_cast<int>(ds.train_indices.size());
  if (folds < 2 || n_train < folds) throw Error("need at least `folds` training samples");

  // stratified fold ids, rotated per class so folds stay balanced
  std::vector<int> fold_of(static_cast<std::size_t>(n_train));
  {
    Rng rng(derive_seed(seed, "cv-folds"));
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (int i = 0; i < n_train; ++i)
      by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(
                   ds.train_indices[static_cast<std::size_t>(i)])])]
          .push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      rng.shuffle(by_class[c]);
      for (std::size_t i = 0; i < by_class[c].size(); ++i)
        fold_of[static_cast<std::size_t>(by_class[c][i])] =
            static_cast<int>((i + c) % static_cast<std::size_t>(folds));
    }
  }
  const std::vector<int> train_labels = gather_labels(ds, ds.train_indices);

  struct Candidate {
    int hidden_size = 0;
    double lambda = 0.0;
    int kappa = 0;
    double accuracy = -1.0;
  };
  const std::size_t n_cells = grid.hidden_sizes.size() * grid.kappas.size();
  std::vector<std::vector<Candidate>> per_cell(n_cells);

  parallel_for(n_cells, jobs, [&](std::size_t cell) {
    const int hidden = grid.hidden_sizes[cell / grid.kappas.size()];
    const int kappa = grid.kappas[cell % grid.kappas.size()];
    const Eigen::MatrixXi keys = make_feature_keys(
        ds.feature_count(), hidden,
        derive_seed(seed, "tune-encoder", static_cast<std::uint64_t>(hidden)));
    const Eigen::MatrixXi raw = encode_rows_raw(ds, ds.train_indices, keys);
    const Eigen::MatrixXd acts = clip_activations(raw, kappa).cast<double>();

    // Gram/RHS of each training fold as (all - validation fold)
    Eigen::MatrixXd gram_all = acts.transpose() * acts;
    Eigen::MatrixXd rhs_all = Eigen::MatrixXd::Zero(hidden, ds.num_classes);
    for (Eigen::Index i = 0; i < acts.rows(); ++i)
      rhs_all.col(train_labels[static_cast<std::size_t>(i)]) += acts.row(i).transpose();

    std::vector<double> acc_sum(grid.lambdas.size(), 0.0);
    int used_folds = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> val_rows;
      for (int i = 0; i < static_cast<int>(acts.rows()); ++i)
        if (fold_of[static_cast<std::size_t>(i)] == f) val_rows.push_back(i);
      if (val_rows.empty() || val_rows.size() == static_cast<std::size_t>(acts.rows()))
        continue;
      ++used_folds;

      Eigen::MatrixXd acts_val(static_cast<Eigen::Index>(val_rows.size()), acts.cols());
      std::vector<int> labels_val(val_rows.size());
      Eigen::MatrixXd gram_val = Eigen::MatrixXd::Zero(hidden, hidden);
      Eigen::MatrixXd rhs_val = Eigen::MatrixXd::Zero(hidden, ds.num_classes);
      for (std::size_t i = 0; i < val_rows.size(); ++i) {
        const Eigen::Index r = val_rows[i];
        acts_val.row(static_cast<Eigen::Index>(i)) = acts.row(r);
        labels_val[i] = train_labels[static_cast<std::size_t>(r)];
        rhs_val.col(labels_val[i]) += acts.row(r).transpose();
      }
      gram_val.noalias() = acts_val.transpose() * acts_val;
      const Eigen::MatrixXd gram_train = gram_all - gram_val;
      const Eigen::MatrixXd rhs_train = rhs_all - rhs_val;

      for (std::size_t li = 0; li < grid.lambdas.size(); ++li) {
        Eigen::MatrixXd reg = gram_train;
        reg.diagonal().array() += grid.lambdas[li];
        Eigen::LLT<Eigen::MatrixXd> llt(reg);
        if (llt.info() != Eigen::Success)
          throw NumericalFailureError("grid search Cholesky failed");
        const Eigen::MatrixXd w = llt.solve(rhs_train);  // H x L
        acc_sum[li] += rls_batch_accuracy(acts_val * w, labels_val);
      }
    }
    if (used_folds == 0) throw Error("cross-validation produced no usable folds");

    auto& out = per_cell[cell];
    out.reserve(grid.lambdas.size());
    for (std::size_t li = 0; li < grid.lambdas.size(); ++li)
      out.push_back({hidden, grid.lambdas[li], kappa,
                     acc_sum[li] / static_cast<double>(used_folds)});
  });

  Candidate best;
  bool first = true;
  for (const auto& cell : per_cell)
    for (const auto& cand : cell) {
      const bool better =
          first || cand.accuracy > best.accuracy ||
          (cand.accuracy == best.accuracy &&
           (cand.hidden_size < best.hidden_size ||
            (cand.hidden_size == best.hidden_size &&
             (cand.lambda > best.lambda ||
              (cand.lambda == best.lambda && cand.kappa < best.kappa)))));
      if (better) {
        best = cand;
        first = false;
      }
    }
  return {{best.hidden_size, best.lambda, best.kappa}, best.accuracy};
}

namespace {

struct Cell {
  enum class Kind { RefNone, RefDeflate, Lossy, Small } kind = Kind::RefNone;
  CodecKind codec = CodecKind::None;
  int num_agents = 0;
  ClassifierKind classifier = ClassifierKind::Rls;
  int ratio = 1;
  std::uint64_t seed = 0;
};

RoundConfig base_config(const Cell& cell, const Hyperparams& params) {
  RoundConfig cfg;
  cfg.num_agents = cell.num_agents;
  cfg.classifier = cell.classifier;
  cfg.hidden_size = params.hidden_size;
  cfg.kappa = params.kappa;
  cfg.lambda = params.lambda;
  cfg.master_seed = cell.seed;
  return cfg;
}

ResultRow row_from_result(const Dataset& ds, const Cell& cell, const std::string& codec,
                          double ratio_param, const RoundResult& rr) {
  ResultRow row;
  row.dataset = ds.name;
  row.num_agents = cell.num_agents;
  row.classifier = to_string(cell.classifier);
  row.codec = codec;
  row.ratio_param = ratio_param;
  row.seed = cell.seed;
  row.mean_accuracy = rr.mean_accuracy;
  row.min_accuracy = rr.min_accuracy;
  row.max_accuracy = rr.max_accuracy;
  row.payload_values = rr.payload.values_per_agent;
  row.payload_bytes = rr.payload.bytes_per_agent;
  return row;
}

ResultRow run_cell(const Dataset& ds, const Cell& cell, const Hyperparams& params,
                   KeyMode key_mode) {
  RoundConfig cfg = base_config(cell, params);
  switch (cell.kind) {
    case Cell::Kind::RefNone: {
      cfg.codec = CodecSpec::none();
      return row_from_result(ds, cell, "none", 1.0, run_round(ds, cfg));
    }
    case Cell::Kind::RefDeflate: {
      cfg.codec = CodecSpec::deflate();
      const RoundResult rr = run_round(ds, cfg);
      return row_from_result(ds, cell, "deflate", rr.payload.achieved_ratio, rr);
    }
    case Cell::Kind::Lossy: {
      cfg.codec = cell.codec == CodecKind::Hdc
                      ? CodecSpec::hdc(cell.ratio, key_mode)
                      : CodecSpec::svd(static_cast<double>(cell.ratio));
      return row_from_result(ds, cell, to_string(cell.codec),
                             static_cast<double>(cell.ratio), run_round(ds, cfg));
    }
    case Cell::Kind::Small: {
      cfg.codec = CodecSpec::none();
      const RoundResult rr = small_model_baseline(ds, cfg, cell.ratio);
      return row_from_result(ds, cell, "small", static_cast<double>(cell.ratio), rr);
    }
  }
  throw Error("unreachable cell kind");
}

std::string describe(const Cell& cell) {
  std::ostringstream ss;
  ss << "N=" << cell.num_agents << " classifier=" << to_string(cell.classifier);
  switch (cell.kind) {
    case Cell::Kind::RefNone: ss << " codec=none"; break;
    case Cell::Kind::RefDeflate: ss << " codec=deflate"; break;
    case Cell::Kind::Lossy: ss << " codec=" << to_string(cell.codec) << " ratio=" << cell.ratio; break;
    case Cell::Kind::Small: ss << " codec=small ratio=" << cell.ratio; break;
  }
  ss << " seed=" << cell.seed;
  return ss.str();
}

}  // namespace

SweepOutcome sweep_compression(const Dataset& ds, const Hyperparams& params,
                               const SweepSpec& sweep, std::uint64_t master_seed,
                               int jobs) {
  if (sweep.repetitions < 1) throw Error("repetitions must be >= 1");

  std::vector<Cell> cells;
  for (int n : sweep.agent_counts)
    for (ClassifierKind kind : {ClassifierKind::Rls, ClassifierKind::Centroid})
      for (int rep = 0; rep < sweep.repetitions; ++rep) {
        Cell cell;
        cell.num_agents = n;
        cell.classifier = kind;
        cell.seed = derive_seed(master_seed, "rep", static_cast<std::uint64_t>(rep));

        cell.kind = Cell::Kind::RefNone;
        cells.push_back(cell);
        cell.kind = Cell::Kind::RefDeflate;
        cells.push_back(cell);
        for (CodecKind codec : sweep.codecs)
          for (int ratio : sweep.ratios) {
            cell.kind = Cell::Kind::Lossy;
            cell.codec = codec;
            cell.ratio = ratio;
            cells.push_back(cell);
          }
        for (int ratio : sweep.ratios) {
          cell.kind = Cell::Kind::Small;
          cell.ratio = ratio;
          cells.push_back(cell);
        }
      }

  std::vector<std::optional<ResultRow>> slots(cells.size());
  std::vector<std::optional<std::string>> failures(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    try {
      slots[i] = run_cell(ds, cells[i], params, sweep.key_mode);
    } catch (const std::exception& e) {
      failures[i] = describe(cells[i]) + ": " + e.what();
    }
  });

  SweepOutcome outcome;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (slots[i]) outcome.rows.push_back(std::move(*slots[i]));
    if (failures[i]) outcome.errors.push_back(std::move(*failures[i]));
  }
  return outcome;
}

SweepOutcome quantization_study(const Dataset& ds, const Hyperparams& params,
                                const std::vector<int>& levels, int repetitions,
                                std::uint64_t master_seed, int jobs) {
  for (int q : levels)
    if (q < 2) throw InvalidLevelsError("quantization level count must be >= 2");
  if (repetitions < 1) throw Error("repetitions must be >= 1");

  struct Unit {
    std::vector<ResultRow> rows;
    double baseline_accuracy = 0.0;
    std::optional<std::string> failure;
  };
  const std::size_t n_units = static_cast<std::size_t>(repetitions) * 2;
  std::vector<Unit> units(n_units);

  const std::int64_t model_values =
      static_cast<std::int64_t>(params.hidden_size) * ds.num_classes;
  auto implied_bytes = [&](int q) {
    const int bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(q))));
    return std::ceil(static_cast<double>(model_values) * bits / 8.0);
  };

  parallel_for(n_units, jobs, [&](std::size_t u) {
    const int rep = static_cast<int>(u) / 2;
    const ClassifierKind kind = (u % 2 == 0) ? ClassifierKind::Rls : ClassifierKind::Centroid;
    Unit& unit = units[u];
    try {
      RoundConfig cfg;
      cfg.num_agents = 1;
      cfg.classifier = kind;
      cfg.hidden_size = params.hidden_size;
      cfg.kappa = params.kappa;
      cfg.lambda = params.lambda;
      cfg.master_seed = derive_seed(master_seed, "rep", static_cast<std::uint64_t>(rep));

      const CentralizedResult cen = train_centralized(ds, cfg);
      unit.baseline_accuracy = cen.accuracy;
      const HiddenBatch test_acts = encode_rows(ds, ds.test_indices, cen.encoder);
      const std::vector<int> test_labels = gather_labels(ds, ds.test_indices);

      for (int q : levels) {
        const double acc = evaluate_batch(quantize(cen.model, q), test_acts, test_labels);
        ResultRow row;
        row.dataset = ds.name;
        row.num_agents = 1;
        row.classifier = to_string(kind);
        row.codec = "quant" + std::to_string(q);
        row.ratio_param = static_cast<double>(q);
        row.seed = cfg.master_seed;
        row.mean_accuracy = row.min_accuracy = row.max_accuracy = acc;
        row.payload_values = static_cast<double>(model_values);
        row.payload_bytes = implied_bytes(q);
        unit.rows.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      unit.failure = "rep=" + std::to_string(rep) + " classifier=" + to_string(kind) +
                     ": " + e.what();
    }
  });

  SweepOutcome outcome;
  for (const auto& unit : units) {
    for (const auto& row : unit.rows) outcome.rows.push_back(row);
    if (unit.failure) outcome.errors.push_back(*unit.failure);
  }

  // two unquantized baseline rows, averaged over repetitions
  for (ClassifierKind kind : {ClassifierKind::Rls, ClassifierKind::Centroid}) {
    std::vector<double> accs;
    for (std::size_t u = (kind == ClassifierKind::Rls ? 0u : 1u); u < n_units; u += 2)
      if (!units[u].failure) accs.push_back(units[u].baseline_accuracy);
    if (accs.empty()) continue;
    ResultRow row;
    row.dataset = ds.name;
    row.num_agents = 1;
    row.classifier = to_string(kind);
    row.codec = "none";
    row.ratio_param = 1.0;
    row.seed = master_seed;
    row.mean_accuracy = 0.0;
    for (double a : accs) row.mean_accuracy += a;
    row.mean_accuracy /= static_cast<double>(accs.size());
    row.min_accuracy = *std::min_element(accs.begin(), accs.end());
    row.max_accuracy = *std::max_element(accs.begin(), accs.end());
    row.payload_values = static_cast<double>(model_values);
    row.payload_bytes = static_cast<double>(model_values) * 8.0;
    outcome.rows.push_back(std::move(row));
  }
  return outcome;
}

ResultRow rerun_row(const Dataset& ds, const ResultRow& row, const Hyperparams& params,
                    KeyMode key_mode) {
  Cell cell;
  cell.num_agents = row.num_agents;
  cell.classifier =
      row.classifier == "rls" ? ClassifierKind::Rls : ClassifierKind::Centroid;
  cell.seed = row.seed;
  cell.ratio = static_cast<int>(std::lround(row.ratio_param));

  if (row.codec == "none") {
    cell.kind = Cell::Kind::RefNone;
  } else if (row.codec == "deflate") {
    cell.kind = Cell::Kind::RefDeflate;
  } else if (row.codec == "hdc") {
    cell.kind = Cell::Kind::Lossy;
    cell.codec = CodecKind::Hdc;
  } else if (row.codec == "svd") {
    cell.kind = Cell::Kind::Lossy;
    cell.codec = CodecKind::Svd;
  } else if (row.codec == "small") {
    cell.kind = Cell::Kind::Small;
  } else if (row.codec.rfind("quant", 0) == 0) {
    const int q = parse_int(row.codec.substr(5), "quantization level");
    RoundConfig cfg;
    cfg.num_agents = 1;
    cfg.classifier = cell.classifier;
    cfg.hidden_size = params.hidden_size;
    cfg.kappa = params.kappa;
    cfg.lambda = params.lambda;
    cfg.master_seed = row.seed;
    const CentralizedResult cen = train_centralized(ds, cfg);
    const double acc = evaluate(quantize(cen.model, q), cen.encoder, ds);
    ResultRow out = row;
    out.mean_accuracy = out.min_accuracy = out.max_accuracy = acc;
    return out;
  } else {
    throw Error("cannot rerun codec '" + row.codec + "'");
  }
  return run_cell(ds, cell, params, key_mode);
}

namespace {

constexpr const char* kCsvHeader =
    "dataset,N,classifier_kind,codec,ratio_param,seed,mean_accuracy,per_agent_min,"
    "per_agent_max,payload_values_per_agent,payload_bytes_per_agent";

}  // namespace

std::string results_csv_text(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    out << csv_escape(r.dataset) << ',' << r.num_agents << ',' << r.classifier << ','
        << r.codec << ',' << format_double(r.ratio_param) << ',' << r.seed << ','
        << format_double(r.mean_accuracy) << ',' << format_double(r.min_accuracy) << ','
        << format_double(r.max_accuracy) << ',' << format_double(r.payload_values) << ','
        << format_double(r.payload_bytes) << "\n";
  }
  return out.str();
}

std::vector<ResultRow> parse_results_csv_text(const std::string& text) {
  const auto records = parse_csv_text(text);
  if (records.empty()) throw Error("results CSV is empty");
  {
    std::ostringstream hdr;
    for (std::size_t i = 0; i < records[0].size(); ++i) {
      if (i) hdr << ',';
      hdr << records[0][i];
    }
    if (hdr.str() != kCsvHeader) throw Error("results CSV has an unexpected header");
  }
  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() == 1 && rec[0].empty()) continue;  // trailing blank line
    if (rec.size() != 11)
      throw Error("results CSV row " + std::to_string(i) + " has " +
                  std::to_string(rec.size()) + " fields");
    ResultRow row;
    row.dataset = rec[0];
    row.num_agents = parse_int(rec[1], "N");
    row.classifier = rec[2];
    row.codec = rec[3];
    row.ratio_param = parse_double(rec[4], "ratio_param");
    row.seed = parse_u64(rec[5], "seed");
    row.mean_accuracy = parse_double(rec[6], "mean_accuracy");
    row.min_accuracy = parse_double(rec[7], "per_agent_min");
    row.max_accuracy = parse_double(rec[8], "per_agent_max");
    row.payload_values = parse_double(rec[9], "payload_values_per_agent");
    row.payload_bytes = parse_double(rec[10], "payload_bytes_per_agent");
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << results_csv_text(rows);
  if (!out) throw IoError("failed writing " + path);
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_results_csv_text(ss.str());
}

}  // namespace hololink
