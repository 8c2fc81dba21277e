// Microbenchmarks along the pipeline: synthesis, atlas construction, the
// streaming transform, squeezing, and the full per-voxel analysis.
#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "xtalsst/analysis.hpp"
#include "xtalsst/spectrum.hpp"
#include "xtalsst/synchrosqueeze.hpp"
#include "xtalsst/synthetic.hpp"
#include "xtalsst/wavepacket.hpp"

namespace {

using namespace xtal;

// Bicrystal at four voxels per atomic period, the resolution the pipeline is
// normally run at.
PolycrystalSpec bench_bicrystal(int side) {
  PolycrystalSpec spec;
  spec.dims = {side, side, side};
  spec.lattice = LatticeType::Cubic;
  spec.N = side / 4.0;
  spec.grains.push_back({Vec3(0.25, 0.5, 0.5), EulerAngles{0.0, 0.0, 0.0}, std::nullopt});
  spec.grains.push_back({Vec3(0.75, 0.5, 0.5), EulerAngles{0.30, 0.20, 0.25}, std::nullopt});
  return spec;
}

Band first_shell_band(double n) { return Band{0.75 * n, 1.25 * n, n}; }

void BM_GeneratePolycrystal(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const PolycrystalSpec spec = bench_bicrystal(side);
  for (auto _ : state) {
    auto [vol, truth] = generate_polycrystal(spec);
    benchmark::DoNotOptimize(vol.data.data());
    benchmark::DoNotOptimize(truth.mask.data());
  }
}
BENCHMARK(BM_GeneratePolycrystal)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BuildAtlas(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Band band = first_shell_band(side / 4.0);
  for (auto _ : state) {
    const WavePacketAtlas atlas = build_atlas(side, band, 0.5, 2.0);
    benchmark::DoNotOptimize(atlas.atoms.size());
  }
}
BENCHMARK(BM_BuildAtlas)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_StreamingTransform(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto [vol, truth] = generate_polycrystal(bench_bicrystal(side));
  const SpectralVolume spec = forward_fourier(vol);
  const WavePacketAtlas atlas = build_atlas(side, first_shell_band(side / 4.0), 0.5, 2.0);
  std::vector<std::complex<double>> w(static_cast<std::size_t>(atlas.lb) * atlas.lb * atlas.lb);
  for (auto _ : state) {
    for (const auto& atom : atlas.atoms) transform_atom(spec, atlas, atom, w.data(), nullptr);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(atlas.atoms.size()));
}
BENCHMARK(BM_StreamingTransform)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SqueezeVolume(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto [vol, truth] = generate_polycrystal(bench_bicrystal(side));
  const SpectralVolume spec = forward_fourier(vol);
  const Band band = first_shell_band(side / 4.0);
  const WavePacketAtlas atlas = build_atlas(side, band, 0.5, 2.0);
  const SphericalGrid grid = make_spherical_grid(band.r1, band.r2, 1.0, 60, 60);
  for (auto _ : state) {
    const SqueezeSummary sum = squeeze_volume(spec, atlas, 0.1, grid, 1);
    benchmark::DoNotOptimize(sum.retained_count);
  }
}
BENCHMARK(BM_SqueezeVolume)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_AnalyzeVolume(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto [vol, truth] = generate_polycrystal(bench_bicrystal(side));
  const Band band = first_shell_band(side / 4.0);
  AnalysisConfig cfg;
  cfg.band = std::make_pair(band.r1, band.r2);
  cfg.lb_override = side;
  cfg.threads = 1;
  for (auto _ : state) {
    const DeformationField field = analyze_volume(vol, cfg);
    benchmark::DoNotOptimize(field.defect_fraction);
  }
}
BENCHMARK(BM_AnalyzeVolume)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
