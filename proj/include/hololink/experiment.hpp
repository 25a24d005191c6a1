#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hololink/dataset.hpp"
#include "hololink/sim.hpp"

namespace hololink {

// Hyperparameter grid. Defaults: H in 50..1500 step 50, lambda = 2^k for
// k in -10..5, kappa in {1, 3, 7, 15}.
struct GridSpec {
  std::vector<int> hidden_sizes;
  std::vector<double> lambdas;
  std::vector<int> kappas;

  static GridSpec defaults();
  std::size_t size() const {
    return hidden_sizes.size() * lambdas.size() * kappas.size();
  }
};

struct Hyperparams {
  int hidden_size = 100;
  double lambda = 1.0;
  int kappa = 3;
};

struct TuneResult {
  Hyperparams best;
  double cv_accuracy = 0.0;
};

// Evaluates every grid point with stratified k-fold cross-validation on the
// train split (centralized ridge classifier) and picks the highest mean CV
// accuracy. Ties go to smaller H, then larger lambda, then smaller kappa, so
// the result does not depend on enumeration order.
TuneResult grid_search(const Dataset& ds, const GridSpec& grid, std::uint64_t seed,
                       int folds = 5, int jobs = 1);

struct SweepSpec {
  std::vector<int> agent_counts{10, 100};
  std::vector<int> ratios{2, 3, 4, 6, 8, 12, 16, 24, 32};
  std::vector<CodecKind> codecs{CodecKind::Hdc, CodecKind::Svd};
  int repetitions = 10;
  std::vector<int> quant_levels{3, 5, 9, 17, 33, 65, 129, 255};
  KeyMode key_mode = KeyMode::Unitary;
};

// One results CSV row. Codec strings: none, deflate, hdc, svd, small, quantQ.
struct ResultRow {
  std::string dataset;
  int num_agents = 0;
  std::string classifier;
  std::string codec;
  double ratio_param = 1.0;
  std::uint64_t seed = 0;
  double mean_accuracy = 0.0;
  double min_accuracy = 0.0;
  double max_accuracy = 0.0;
  double payload_values = 0.0;
  double payload_bytes = 0.0;
};

struct SweepOutcome {
  std::vector<ResultRow> rows;
  std::vector<std::string> errors;  // per-cell failures; the sweep continues
};

// For each (N, classifier, repetition): uncompressed and lossless reference
// rows, one row per lossy codec and ratio, and a small-model row per ratio.
// Repetitions of the same cell share their seed across codecs, so rows with
// equal (N, classifier, seed) are paired runs.
SweepOutcome sweep_compression(const Dataset& ds, const Hyperparams& params,
                               const SweepSpec& sweep, std::uint64_t master_seed,
                               int jobs = 1);

// Centralized (N=1) study: per level and repetition, train both classifiers,
// quantize the weights and evaluate; two unquantized baseline rows (one per
// classifier, averaged over repetitions) are appended.
SweepOutcome quantization_study(const Dataset& ds, const Hyperparams& params,
                                const std::vector<int>& levels, int repetitions,
                                std::uint64_t master_seed, int jobs = 1);

// Re-executes the single cell a results row came from (the caller supplies the
// dataset and hyperparameters that produced the CSV); the returned row equals
// the original exactly. The two aggregate baseline rows of the quantization
// study summarize several runs and are the one row kind this does not rebuild.
ResultRow rerun_row(const Dataset& ds, const ResultRow& row, const Hyperparams& params,
                    KeyMode key_mode = KeyMode::Unitary);

std::string results_csv_text(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv_text(const std::string& text);
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::string& path);

}  // namespace hololink
