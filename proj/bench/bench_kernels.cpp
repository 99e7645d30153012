// Serial reference vs OpenMP for each parallel kernel. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "cbmr/image_features.hpp"
#include "cbmr/kernels.hpp"
#include "cbmr/shape_features.hpp"
#include "synth.hpp"

using namespace cbmr;
using kernels::Exec;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

const TriangleMesh& bench_mesh() {
  static const TriangleMesh m = normalize_mesh(synth::shape(synth::ShapeClass::Torus, 1)).mesh;
  return m;
}

void BM_ScanDistances(benchmark::State& state) {
  constexpr std::size_t rows = 50000, dim = 128;
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(0, 1);
  std::vector<float> data(rows * dim), q(dim);
  for (auto& v : data) v = u(rng);
  for (auto& v : q) v = u(rng);
  std::vector<double> out(rows);
  for (auto _ : state) {
    kernels::scan_distances(Metric::L2, data, dim, q, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_Voxelize(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kernels::voxelize_surface(bench_mesh(), 64, exec_of(state)));
}

void BM_ShellEnergies(benchmark::State& state) {
  auto grid = kernels::voxelize_surface(bench_mesh(), 64, Exec::Serial);
  kernels::fill_enclosed(grid);
  const kernels::SphereSampling s;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::shell_energies(grid, s, exec_of(state)));
}

void BM_RenderViews(benchmark::State& state) {
  std::vector<kernels::ViewBasis> views;
  for (const auto& d : light_field_directions()) views.push_back(kernels::make_view_basis(d));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::render_views(bench_mesh(), views, 128, exec_of(state)));
}

void BM_Stft(benchmark::State& state) {
  const AudioBuffer audio = synth::random_track(5, 20);
  for (auto _ : state) {
    std::size_t frames = 0;
    benchmark::DoNotOptimize(kernels::stft_magnitudes(audio.samples, 4096, 1024, frames, exec_of(state)));
  }
}

void BM_Hog(benchmark::State& state) {
  const RasterImage image = synth::random_scene(9, 640, 480);
  for (auto _ : state) benchmark::DoNotOptimize(hog_cell_histograms(image, {}, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_ScanDistances)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Voxelize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShellEnergies)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderViews)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Stft)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Hog)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
