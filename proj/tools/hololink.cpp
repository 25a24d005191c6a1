#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "hololink/common.hpp"
#include "hololink/dataset.hpp"
#include "hololink/experiment.hpp"
#include "hololink/report.hpp"
#include "hololink/rng.hpp"

namespace {

using namespace hololink;

std::uint64_t apply_seed_env(std::uint64_t seed) {
  if (const char* env = std::getenv("HOLOLINK_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return static_cast<std::uint64_t>(v);
    std::cerr << "warning: ignoring non-numeric HOLOLINK_SEED='" << env << "'\n";
  }
  return seed;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Dataset argument: "synthetic", a JSON manifest, or a CSV (needs --label).
Dataset resolve_dataset(const std::string& arg, const std::string& label_column,
                        std::uint64_t seed) {
  Dataset ds;
  if (arg == "synthetic") {
    ds = make_blobs(2000, 8, 3, seed);
  } else if (ends_with(arg, ".json")) {
    ds = load_manifest(arg, seed);
  } else {
    if (label_column.empty())
      throw Error("loading a bare CSV needs --label <column>");
    ds = load_csv(arg, label_column);
    random_split(ds, 0.5, derive_seed(seed, "train-test-split"));
  }
  return normalize_features(std::move(ds));
}

Hyperparams load_hyperparams(const std::string& hyper_path, const Hyperparams& flags,
                             bool flags_set) {
  if (!hyper_path.empty()) {
    std::ifstream in(hyper_path);
    if (!in) throw IoError("cannot read " + hyper_path);
    nlohmann::json doc = nlohmann::json::parse(in);
    Hyperparams params;
    params.hidden_size = doc.at("hidden_size").get<int>();
    params.lambda = doc.at("lambda").get<double>();
    params.kappa = doc.at("kappa").get<int>();
    return params;
  }
  if (!flags_set)
    std::cerr << "note: no --hyper file, using H=" << flags.hidden_size
              << " lambda=" << flags.lambda << " kappa=" << flags.kappa << "\n";
  return flags;
}

void apply_config_file(const std::string& path, GridSpec& grid, SweepSpec& sweep) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    if (g.contains("hidden")) grid.hidden_sizes = g["hidden"].get<std::vector<int>>();
    if (g.contains("lambda")) grid.lambdas = g["lambda"].get<std::vector<double>>();
    if (g.contains("kappa")) grid.kappas = g["kappa"].get<std::vector<int>>();
  }
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    if (s.contains("agents")) sweep.agent_counts = s["agents"].get<std::vector<int>>();
    if (s.contains("ratios")) sweep.ratios = s["ratios"].get<std::vector<int>>();
    if (s.contains("repetitions")) sweep.repetitions = s["repetitions"].get<int>();
    if (s.contains("quant_levels"))
      sweep.quant_levels = s["quant_levels"].get<std::vector<int>>();
  }
}

std::vector<CodecKind> parse_codecs(const std::vector<std::string>& names) {
  std::vector<CodecKind> lossy;
  for (const auto& name : names) {
    if (name == "hdc") {
      lossy.push_back(CodecKind::Hdc);
    } else if (name == "svd") {
      lossy.push_back(CodecKind::Svd);
    } else if (name == "none" || name == "deflate") {
      // reference rows are always emitted
    } else {
      throw Error("unknown codec '" + name + "' (hdc, svd, deflate, none)");
    }
  }
  return lossy;
}

void print_errors(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "cell failed: " << e << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed classifier compression experiments"};
  app.require_subcommand(1);

  std::string dataset_arg, label_column, config_path, hyper_path, out_path, out_dir;
  std::uint64_t seed = 1;
  int jobs = 1;
  Hyperparams flags;
  std::vector<std::string> codec_names{"hdc", "svd"};
  std::vector<int> agents, ratios, levels;
  int reps = 10;
  int folds = 5;
  bool gaussian_keys = false;

  auto add_dataset_opts = [&](CLI::App* cmd) {
    cmd->add_option("dataset", dataset_arg,
                    "'synthetic', a manifest .json, or a CSV file")
        ->required();
    cmd->add_option("--label", label_column, "label column (bare CSV input)");
    cmd->add_option("--seed", seed, "master seed (HOLOLINK_SEED overrides)");
    cmd->add_option("--jobs", jobs, "worker threads");
  };
  auto add_hyper_opts = [&](CLI::App* cmd) {
    cmd->add_option("--hyper", hyper_path, "tuned hyperparameter JSON from 'tune'");
    cmd->add_option("--hidden", flags.hidden_size, "hidden layer size");
    cmd->add_option("--lambda", flags.lambda, "ridge regularization");
    cmd->add_option("--kappa", flags.kappa, "activation clipping threshold");
  };

  auto* tune = app.add_subcommand("tune", "grid-search hyperparameters");
  add_dataset_opts(tune);
  tune->add_option("--config", config_path, "grid/sweep config JSON");
  tune->add_option("--folds", folds, "cross-validation folds");
  std::string tune_out;
  tune->add_option("--out", tune_out, "where to write the tuned parameters");

  auto* sweep_cmd = app.add_subcommand("sweep", "compression-ratio sweep");
  add_dataset_opts(sweep_cmd);
  add_hyper_opts(sweep_cmd);
  sweep_cmd->add_option("--config", config_path, "grid/sweep config JSON");
  sweep_cmd->add_option("--agents", agents, "agent counts")->delimiter(',');
  sweep_cmd->add_option("--ratios", ratios, "compression ratios")->delimiter(',');
  sweep_cmd->add_option("--codecs", codec_names, "hdc,svd,deflate,none")->delimiter(',');
  sweep_cmd->add_option("--reps", reps, "repetitions per cell");
  sweep_cmd->add_flag("--gaussian-keys", gaussian_keys,
                      "Gaussian keys instead of unitary ones");
  sweep_cmd->add_option("--out", out_path, "results CSV path");

  auto* quant = app.add_subcommand("quantize", "centralized quantization study");
  add_dataset_opts(quant);
  add_hyper_opts(quant);
  quant->add_option("--levels", levels, "quantization level counts")
      ->delimiter(',')
      ->required();
  quant->add_option("--reps", reps, "repetitions per level");
  quant->add_option("--out", out_path, "results CSV path");

  auto* report_cmd = app.add_subcommand("report", "render charts from a results CSV");
  std::string results_path;
  report_cmd->add_option("results", results_path, "results CSV")->required();
  report_cmd->add_option("--outdir", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    seed = apply_seed_env(seed);

    if (tune->parsed()) {
      GridSpec grid = GridSpec::defaults();
      SweepSpec unused;
      apply_config_file(config_path, grid, unused);
      const Dataset ds = resolve_dataset(dataset_arg, label_column, seed);
      const TuneResult result = grid_search(ds, grid, seed, folds, jobs);
      std::cout << "dataset=" << ds.name << " best: H=" << result.best.hidden_size
                << " lambda=" << result.best.lambda << " kappa=" << result.best.kappa
                << " cv_accuracy=" << result.cv_accuracy << "\n";
      const std::string path =
          tune_out.empty() ? ds.name + ".hyper.json" : tune_out;
      nlohmann::json doc{{"hidden_size", result.best.hidden_size},
                         {"lambda", result.best.lambda},
                         {"kappa", result.best.kappa},
                         {"cv_accuracy", result.cv_accuracy}};
      std::ofstream out(path);
      if (!out) throw IoError("cannot write " + path);
      out << doc.dump(2) << "\n";
      std::cout << "wrote " << path << "\n";
    }

    if (sweep_cmd->parsed()) {
      SweepSpec spec;
      GridSpec unused = GridSpec::defaults();
      apply_config_file(config_path, unused, spec);
      if (!agents.empty()) spec.agent_counts = agents;
      if (sweep_cmd->count("--ratios")) spec.ratios = ratios;
      spec.codecs = parse_codecs(codec_names);
      if (sweep_cmd->count("--reps")) spec.repetitions = reps;
      if (gaussian_keys) spec.key_mode = KeyMode::Gaussian;

      const bool flags_set = sweep_cmd->count("--hidden") || sweep_cmd->count("--lambda") ||
                             sweep_cmd->count("--kappa");
      const Hyperparams params = load_hyperparams(hyper_path, flags, flags_set);
      const Dataset ds = resolve_dataset(dataset_arg, label_column, seed);

      const SweepOutcome outcome = sweep_compression(ds, params, spec, seed, jobs);
      print_errors(outcome.errors);
      const std::string path = out_path.empty() ? "results.csv" : out_path;
      write_results_csv(path, outcome.rows);
      std::cout << "wrote " << outcome.rows.size() << " rows to " << path;
      if (!outcome.errors.empty())
        std::cout << " (" << outcome.errors.size() << " cells failed)";
      std::cout << "\n";
    }

    if (quant->parsed()) {
      const bool flags_set = quant->count("--hidden") || quant->count("--lambda") ||
                             quant->count("--kappa");
      const Hyperparams params = load_hyperparams(hyper_path, flags, flags_set);
      const Dataset ds = resolve_dataset(dataset_arg, label_column, seed);
      const SweepOutcome outcome =
          quantization_study(ds, params, levels, reps, seed, jobs);
      print_errors(outcome.errors);
      const std::string path = out_path.empty() ? "results.csv" : out_path;
      write_results_csv(path, outcome.rows);
      std::cout << "wrote " << outcome.rows.size() << " rows to " << path << "\n";
    }

    if (report_cmd->parsed()) {
      const auto rows = read_results_csv(results_path);
      const std::string dir = out_dir.empty() ? "report" : out_dir;
      const ReportFiles files = emit_report(rows, dir);
      std::cout << "wrote " << files.csv_path << "\n";
      for (const auto& p : files.chart_paths) std::cout << "wrote " << p << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
