// Serial vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "scint/gbdt.hpp"
#include "scint/knn.hpp"
#include "scint/preprocess.hpp"
#include "scint/rng.hpp"

namespace {

using namespace scint;

Dataset random_dataset(std::size_t rows, std::size_t dims, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t d = 0; d < dims; ++d) names.push_back("x" + std::to_string(d));
  Dataset ds(names, 3);
  std::vector<double> row(dims);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto label = static_cast<ClassIndex>(rng.uniform_index(3));
    for (auto& v : row) v = label + rng.normal();
    ds.add_row(row, label);
  }
  return ds;
}

void set_threads(benchmark::State& state) { state.counters["threads"] = omp_get_max_threads(); }

// ---- KNN ---------------------------------------------------------------

void BM_KnnPredict(benchmark::State& state, KnnSearch search, bool parallel) {
  const auto train = random_dataset(static_cast<std::size_t>(state.range(0)), 15, 1);
  const auto test = random_dataset(1000, 15, 2);
  const auto model = KnnModel::fit(train, KnnConfig{12, 1.0, 8});
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(test.view(), search, parallel));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(test.rows()));
  set_threads(state);
}
BENCHMARK_CAPTURE(BM_KnnPredict, kdtree_serial, KnnSearch::KdTree, false)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_KnnPredict, kdtree_parallel, KnnSearch::KdTree, true)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_KnnPredict, brute_serial, KnnSearch::BruteForce, false)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_KnnPredict, brute_parallel, KnnSearch::BruteForce, true)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

// ---- GBDT histograms ---------------------------------------------------

struct HistogramInput {
  std::vector<std::vector<std::uint32_t>> bins;
  std::vector<std::size_t> offsets, rows;
  std::vector<double> g, h;
};

HistogramInput histogram_input(std::size_t n, std::size_t features, std::size_t n_bins) {
  Rng rng(3);
  HistogramInput in;
  in.bins.assign(features, std::vector<std::uint32_t>(n));
  for (auto& col : in.bins) {
    for (auto& b : col) b = static_cast<std::uint32_t>(rng.uniform_index(n_bins));
  }
  for (std::size_t f = 0; f <= features; ++f) in.offsets.push_back(f * n_bins);
  for (std::size_t i = 0; i < n; ++i) {
    in.rows.push_back(i);
    in.g.push_back(rng.normal());
    in.h.push_back(rng.uniform01());
  }
  return in;
}

void BM_HistogramsSerial(benchmark::State& state) {
  const auto in = histogram_input(static_cast<std::size_t>(state.range(0)), 15, 255);
  std::vector<HistogramBin> out(in.offsets.back());
  for (auto _ : state) {
    for (std::size_t f = 0; f < in.bins.size(); ++f) {
      std::fill(out.begin() + static_cast<std::ptrdiff_t>(in.offsets[f]),
                out.begin() + static_cast<std::ptrdiff_t>(in.offsets[f + 1]), HistogramBin{});
      build_histogram_serial(in.bins[f], in.rows, in.g, in.h,
                             std::span(out).subspan(in.offsets[f], in.offsets[f + 1] - in.offsets[f]));
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 15);
  set_threads(state);
}
BENCHMARK(BM_HistogramsSerial)->Arg(21600)->Arg(200000)->Unit(benchmark::kMicrosecond);

void BM_HistogramsParallel(benchmark::State& state) {
  const auto in = histogram_input(static_cast<std::size_t>(state.range(0)), 15, 255);
  std::vector<HistogramBin> out(in.offsets.back());
  for (auto _ : state) {
    build_histograms_parallel(in.bins, in.offsets, in.rows, in.g, in.h, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 15);
  set_threads(state);
}
BENCHMARK(BM_HistogramsParallel)->Arg(21600)->Arg(200000)->Unit(benchmark::kMicrosecond);

void BM_GbdtFit(benchmark::State& state, SplitMode mode, bool parallel) {
  const auto train = random_dataset(static_cast<std::size_t>(state.range(0)), 15, 4);
  GbdtConfig cfg;
  cfg.n_rounds = 10;
  cfg.max_depth = 6;
  cfg.split_mode = mode;
  for (auto _ : state) benchmark::DoNotOptimize(GbdtModel::fit(train, cfg, nullptr, parallel));
  set_threads(state);
}
BENCHMARK_CAPTURE(BM_GbdtFit, histogram_serial, SplitMode::Histogram, false)->Arg(21600)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GbdtFit, histogram_parallel, SplitMode::Histogram, true)->Arg(21600)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GbdtFit, exact_serial, SplitMode::Exact, false)->Arg(21600)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GbdtFit, exact_parallel, SplitMode::Exact, true)->Arg(21600)->Unit(benchmark::kMillisecond);

// ---- Smoothing -----------------------------------------------------------

std::vector<CorrectedObservation> observations(std::size_t per_satellite) {
  Rng rng(5);
  std::vector<CorrectedObservation> obs;
  const std::int64_t t0 = days_from_civil({2019, 1, 1}) * kSecondsPerDay;
  for (int sv = 1; sv <= 32; ++sv) {
    for (std::size_t i = 0; i < per_satellite; ++i) {
      obs.push_back({UtcTimestamp{t0 + static_cast<std::int64_t>(i)}, SvId{sv}, Constellation::GPS,
                     rng.uniform(0, 360), rng.uniform(20, 90), rng.uniform(0, 1)});
    }
  }
  return obs;
}

void BM_Smoothing(benchmark::State& state, bool parallel) {
  const auto obs = observations(static_cast<std::size_t>(state.range(0)));
  const SmoothingOptions opt{300, 180};
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel ? smooth_windows_parallel(obs, opt) : smooth_windows_serial(obs, opt));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(obs.size()));
  set_threads(state);
}
BENCHMARK_CAPTURE(BM_Smoothing, serial, false)->Arg(86400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Smoothing, parallel, true)->Arg(86400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
