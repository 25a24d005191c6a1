#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "hololink/common.hpp"
#include "hololink/experiment.hpp"
#include "hololink/report.hpp"

using namespace hololink;

namespace {

Dataset demo_dataset(std::uint64_t seed = 31) {
  return normalize_features(make_blobs(200, 4, 3, seed, 2.0));
}

Hyperparams demo_params() { return {30, 1.0, 3}; }

int count_rows(const std::vector<ResultRow>& rows, const std::string& codec) {
  return static_cast<int>(
      std::count_if(rows.begin(), rows.end(),
                    [&](const ResultRow& r) { return r.codec == codec; }));
}

}  // namespace

TEST_CASE("default grids are exactly the documented ones") {
  const GridSpec grid = GridSpec::defaults();
  REQUIRE(grid.hidden_sizes.size() == 30);
  CHECK(grid.hidden_sizes.front() == 50);
  CHECK(grid.hidden_sizes.back() == 1500);
  CHECK(grid.hidden_sizes[1] - grid.hidden_sizes[0] == 50);

  REQUIRE(grid.lambdas.size() == 16);
  CHECK(grid.lambdas.front() == doctest::Approx(std::ldexp(1.0, -10)));
  CHECK(grid.lambdas.back() == doctest::Approx(32.0));

  CHECK(grid.kappas == std::vector<int>{1, 3, 7, 15});
  CHECK(grid.size() == 1920);
}

TEST_CASE("grid search returns a single point unchanged") {
  const Dataset ds = demo_dataset();
  GridSpec grid;
  grid.hidden_sizes = {24};
  grid.lambdas = {0.5};
  grid.kappas = {3};
  const TuneResult result = grid_search(ds, grid, 7, 5);
  CHECK(result.best.hidden_size == 24);
  CHECK(result.best.lambda == 0.5);
  CHECK(result.best.kappa == 3);
  CHECK(result.cv_accuracy > 0.0);
}

TEST_CASE("grid search ties break toward smaller H, larger lambda, smaller kappa") {
  // a trivially separable dataset drives every configuration to accuracy 1.0
  const Dataset ds = normalize_features(make_blobs(200, 4, 2, 5, 25.0));
  GridSpec grid;
  grid.hidden_sizes = {100, 50};  // enumeration order must not matter
  grid.lambdas = {0.25, 0.5};
  grid.kappas = {3, 1};
  const TuneResult result = grid_search(ds, grid, 11, 5);
  REQUIRE(result.cv_accuracy == 1.0);
  CHECK(result.best.hidden_size == 50);
  CHECK(result.best.lambda == 0.5);
  CHECK(result.best.kappa == 1);
}

TEST_CASE("sweep produces the documented row counts") {
  const Dataset ds = demo_dataset();
  SweepSpec spec;
  spec.agent_counts = {10};
  spec.ratios = {2};
  spec.repetitions = 2;
  spec.codecs = {CodecKind::Hdc, CodecKind::Svd};

  const SweepOutcome outcome = sweep_compression(ds, demo_params(), spec, 99);
  CHECK(outcome.errors.empty());
  CHECK(count_rows(outcome.rows, "hdc") == 4);      // kinds x reps
  CHECK(count_rows(outcome.rows, "svd") == 4);
  CHECK(count_rows(outcome.rows, "small") == 4);    // kinds x reps x ratios
  CHECK(count_rows(outcome.rows, "none") == 4);     // reference rows
  CHECK(count_rows(outcome.rows, "deflate") == 4);
  CHECK(outcome.rows.size() == 20);
}

TEST_CASE("an empty ratio list leaves only reference rows") {
  const Dataset ds = demo_dataset();
  SweepSpec spec;
  spec.agent_counts = {4};
  spec.ratios = {};
  spec.repetitions = 1;
  const SweepOutcome outcome = sweep_compression(ds, demo_params(), spec, 3);
  CHECK(outcome.rows.size() == 4);  // none + deflate, two classifier kinds
  for (const auto& row : outcome.rows)
    CHECK((row.codec == "none" || row.codec == "deflate"));
}

TEST_CASE("invalid svd ratios are recorded as cell errors, not fatal") {
  const Dataset ds = demo_dataset();
  SweepSpec spec;
  spec.agent_counts = {3};
  spec.ratios = {1, 2};  // svd requires ratio > 1, hdc accepts 1
  spec.repetitions = 1;
  const SweepOutcome outcome = sweep_compression(ds, demo_params(), spec, 17);
  CHECK(outcome.errors.size() == 2);  // one bad svd cell per classifier kind
  CHECK(count_rows(outcome.rows, "hdc") == 4);
  CHECK(count_rows(outcome.rows, "svd") == 2);
}

TEST_CASE("paired rows share seeds across codecs") {
  const Dataset ds = demo_dataset();
  SweepSpec spec;
  spec.agent_counts = {4};
  spec.ratios = {4};
  spec.repetitions = 2;
  const SweepOutcome outcome = sweep_compression(ds, demo_params(), spec, 21);
  std::vector<std::uint64_t> none_seeds, hdc_seeds;
  for (const auto& row : outcome.rows) {
    if (row.classifier != "rls") continue;
    if (row.codec == "none") none_seeds.push_back(row.seed);
    if (row.codec == "hdc") hdc_seeds.push_back(row.seed);
  }
  std::sort(none_seeds.begin(), none_seeds.end());
  std::sort(hdc_seeds.begin(), hdc_seeds.end());
  CHECK(none_seeds == hdc_seeds);
  CHECK(none_seeds.size() == 2);
  CHECK(none_seeds[0] != none_seeds[1]);
}

TEST_CASE("every sweep row can be rerun in isolation bit-for-bit") {
  const Dataset ds = demo_dataset();
  SweepSpec spec;
  spec.agent_counts = {3};
  spec.ratios = {2, 8};
  spec.repetitions = 1;
  const Hyperparams params = demo_params();
  const SweepOutcome outcome = sweep_compression(ds, params, spec, 123);
  REQUIRE(!outcome.rows.empty());
  for (const auto& row : outcome.rows) {
    const ResultRow again = rerun_row(ds, row, params);
    CHECK(again.mean_accuracy == row.mean_accuracy);
    CHECK(again.min_accuracy == row.min_accuracy);
    CHECK(again.max_accuracy == row.max_accuracy);
    CHECK(again.ratio_param == row.ratio_param);
    CHECK(again.payload_bytes == row.payload_bytes);
  }
}

TEST_CASE("worker threads do not change sweep results") {
  const Dataset ds = demo_dataset();
  SweepSpec spec;
  spec.agent_counts = {3};
  spec.ratios = {2, 4};
  spec.repetitions = 2;
  const SweepOutcome serial = sweep_compression(ds, demo_params(), spec, 55, 1);
  const SweepOutcome threaded = sweep_compression(ds, demo_params(), spec, 55, 4);
  REQUIRE(serial.rows.size() == threaded.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].codec == threaded.rows[i].codec);
    CHECK(serial.rows[i].mean_accuracy == threaded.rows[i].mean_accuracy);
    CHECK(serial.rows[i].seed == threaded.rows[i].seed);
  }
}

TEST_CASE("grid search results are thread-count invariant") {
  const Dataset ds = demo_dataset();
  GridSpec grid;
  grid.hidden_sizes = {20, 40};
  grid.lambdas = {0.5, 2.0};
  grid.kappas = {1, 3};
  const TuneResult serial = grid_search(ds, grid, 13, 4, 1);
  const TuneResult threaded = grid_search(ds, grid, 13, 4, 3);
  CHECK(serial.best.hidden_size == threaded.best.hidden_size);
  CHECK(serial.best.lambda == threaded.best.lambda);
  CHECK(serial.best.kappa == threaded.best.kappa);
  CHECK(serial.cv_accuracy == threaded.cv_accuracy);
}

TEST_CASE("quantization study row counts and baseline closeness") {
  const Dataset ds = demo_dataset();
  const std::vector<int> levels{3, 255};
  const SweepOutcome outcome = quantization_study(ds, demo_params(), levels, 2, 7);
  CHECK(outcome.errors.empty());
  // |levels| * reps * 2 kinds + 2 baseline rows
  CHECK(outcome.rows.size() == 2 * 2 * 2 + 2);
  CHECK(count_rows(outcome.rows, "none") == 2);
  CHECK(count_rows(outcome.rows, "quant3") == 4);
  CHECK(count_rows(outcome.rows, "quant255") == 4);

  // a quantQ row reruns exactly
  for (const auto& row : outcome.rows)
    if (row.codec == "quant255" && row.classifier == "rls") {
      const ResultRow again = rerun_row(ds, row, demo_params());
      CHECK(again.mean_accuracy == row.mean_accuracy);
      break;
    }
}

TEST_CASE("an enormous level count is effectively lossless") {
  const Dataset ds = demo_dataset();
  const SweepOutcome outcome =
      quantization_study(ds, demo_params(), {1 << 30}, 1, 13);
  double base_rls = -1.0, quant_rls = -1.0;
  for (const auto& row : outcome.rows) {
    if (row.classifier != "rls") continue;
    if (row.codec == "none") base_rls = row.mean_accuracy;
    else quant_rls = row.mean_accuracy;
  }
  REQUIRE(base_rls >= 0.0);
  REQUIRE(quant_rls >= 0.0);
  CHECK(std::abs(base_rls - quant_rls) <= 1e-6);
}

TEST_CASE("results CSV round-trips exactly") {
  std::vector<ResultRow> rows;
  ResultRow row;
  row.dataset = "weird,name \"x\"";
  row.num_agents = 10;
  row.classifier = "rls";
  row.codec = "hdc";
  row.ratio_param = 7.0;
  row.seed = 18446744073709551557ULL;
  row.mean_accuracy = 0.123456789012345678;
  row.min_accuracy = 1.0 / 3.0;
  row.max_accuracy = 0.99999999999999989;
  row.payload_values = 2143;
  row.payload_bytes = 17170.25;
  rows.push_back(row);

  const std::string text = results_csv_text(rows);
  const auto parsed = parse_results_csv_text(text);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].dataset == row.dataset);
  CHECK(parsed[0].num_agents == row.num_agents);
  CHECK(parsed[0].seed == row.seed);
  CHECK(parsed[0].ratio_param == row.ratio_param);
  CHECK(parsed[0].mean_accuracy == row.mean_accuracy);
  CHECK(parsed[0].min_accuracy == row.min_accuracy);
  CHECK(parsed[0].max_accuracy == row.max_accuracy);
  CHECK(parsed[0].payload_values == row.payload_values);
  CHECK(parsed[0].payload_bytes == row.payload_bytes);
}

TEST_CASE("reports render one chart per dataset/N group") {
  const auto dir = std::filesystem::temp_directory_path() / "hololink_report_test";
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(emit_report({}, dir.string()), IoError);
  CHECK_FALSE(std::filesystem::exists(dir / "results.csv"));

  const Dataset ds = demo_dataset();
  SweepSpec spec;
  spec.agent_counts = {4};
  spec.ratios = {2, 4};
  spec.repetitions = 1;
  const SweepOutcome outcome = sweep_compression(ds, demo_params(), spec, 5);

  const ReportFiles files = emit_report(outcome.rows, dir.string());
  CHECK(files.chart_paths.size() == 1);
  CHECK(std::filesystem::exists(files.csv_path));
  CHECK(std::filesystem::exists(files.chart_paths[0]));

  // CSV re-read reproduces the table exactly
  const auto reread = read_results_csv(files.csv_path);
  REQUIRE(reread.size() == outcome.rows.size());
  for (std::size_t i = 0; i < reread.size(); ++i) {
    CHECK(reread[i].mean_accuracy == outcome.rows[i].mean_accuracy);
    CHECK(reread[i].payload_bytes == outcome.rows[i].payload_bytes);
  }

  // the chart is a plausible self-contained SVG with lines and a legend
  std::ifstream in(files.chart_paths[0]);
  std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("hdc-rls") != std::string::npos);
  CHECK(svg.find("uncompressed") != std::string::npos);
  CHECK(svg.find("lossless") != std::string::npos);

  std::filesystem::remove_all(dir);
}
