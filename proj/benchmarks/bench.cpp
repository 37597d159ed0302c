#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "mitmp/assembly.hpp"
#include "mitmp/eigensolver.hpp"
#include "mitmp/extraction.hpp"
#include "mitmp/grid.hpp"
#include "mitmp/imaging.hpp"

namespace
{

mitmp::PlateGrid Square(int n)
{
  return mitmp::PlateGrid(n, n, 1.0 / n, 0.01, Eigen::Vector2d::Zero(),
                          mitmp::UnitSystem::Normalized);
}

void BM_AssembleInductance(benchmark::State &state)
{
  const auto grid = Square(static_cast<int>(state.range(0)));
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(mitmp::AssembleInductance(grid));
  }
}
BENCHMARK(BM_AssembleInductance)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_SolveModes(benchmark::State &state)
{
  const auto grid = Square(static_cast<int>(state.range(0)));
  const auto pair = mitmp::AssemblePair(grid, mitmp::ResistivityMap::Uniform(grid, 1.0));
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(mitmp::SolveModes(pair));
  }
}
BENCHMARK(BM_SolveModes)->Arg(8)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ExtractTimeConstants(benchmark::State &state)
{
  const int n = static_cast<int>(state.range(0));
  mitmp::DecaySignal sig;
  sig.dt = 1e-3;
  for (int k = 0; k < n; k++)
  {
    const double t = k * sig.dt;
    sig.samples.push_back(2.0 * std::exp(-t / 0.2) + 1.0 * std::exp(-t / 0.05) +
                          0.5 * std::exp(-t / 0.01));
  }
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(mitmp::ExtractTimeConstants(sig, 6));
  }
}
BENCHMARK(BM_ExtractTimeConstants)->Arg(200)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond);

void BM_ReconstructBounds(benchmark::State &state)
{
  const auto grid = Square(static_cast<int>(state.range(0)));
  const auto truth = mitmp::InclusionMask::FromIndices(grid, {0, 1, grid.Nx(), grid.Nx() + 1});
  const Eigen::VectorXd measured = mitmp::PredictedTaus(grid, 1.0, 100.0, truth, 6);
  for (auto _ : state)
  {
    // a fresh predictor each time so the cache does not hide the solves
    const mitmp::TauPredictor predictor(grid, 1.0, 100.0, 6);
    benchmark::DoNotOptimize(mitmp::ReconstructBounds(
        predictor, measured, 1e-6 * measured[0], mitmp::CandidateFamily::SingleCell, 2, 6));
  }
}
BENCHMARK(BM_ReconstructBounds)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
