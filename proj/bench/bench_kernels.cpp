// Serial vs OpenMP comparison for the data-parallel kernels: character-sum
// spectra, exhaustive density enumeration, the group DFT and Monte Carlo
// walk trials.

#include <benchmark/benchmark.h>

#include <memory>

#include "sieve/abelian.hpp"
#include "sieve/harness.hpp"
#include "sieve/instances.hpp"
#include "sieve/rng.hpp"
#include "sieve/spectral.hpp"
#include "sieve/walk.hpp"

using namespace sieve;

namespace {

std::vector<uint64_t> random_generators(const AbelianGroup& g, size_t count, uint64_t seed) {
    RngStream rng(seed);
    std::vector<uint64_t> gens(count);
    for (auto& e : gens) e = 1 + rng.next_below(g.order() - 1);
    return gens;
}

void bench_spectrum(benchmark::State& state, Exec exec) {
    AbelianGroup g = AbelianGroup::power(3, 9); // order 19683
    auto gens = random_generators(g, 64, 42);
    for (auto _ : state) {
        SpectrumReport rep = cayley_spectrum(g, gens, LoopConvention::half_weight, exec);
        benchmark::DoNotOptimize(rep.paper_gap);
    }
}

void bench_density(benchmark::State& state, Exec exec) {
    Instance inst = make_coloring_instance(3, 3, ColoringPartition::triangular,
                                           InstanceMode::permissive);
    // block 3 has 6 edges: 3^6 states; scale up by repeating
    for (auto _ : state) {
        double d = theta_density(*inst.system, inst.detector(3), DensityMode::exact, exec);
        benchmark::DoNotOptimize(d);
    }
}

void bench_dft(benchmark::State& state, Exec exec) {
    AbelianGroup g = AbelianGroup::power(2, 18);
    std::vector<std::complex<double>> data(g.order(), {1.0, 0.0});
    for (auto _ : state) {
        auto copy = data;
        abelian_dft(g, copy, false, exec);
        benchmark::DoNotOptimize(copy[1]);
    }
}

void bench_mc(benchmark::State& state, Exec exec) {
    Instance inst = make_coloring_instance(2, 3);
    auto gs = std::make_shared<const GeneratorSystem>(
        build_generator_system(inst.system, 0.5, {}, 1));
    WalkConfig cfg(gs, inst.theta_free_start(), 9);
    QuotientSpace q = make_quotient(inst.system, std::vector<uint32_t>{1, 2});
    std::vector<BlockDetector> dets{inst.block_detector(1), inst.block_detector(2)};
    std::vector<uint64_t> ks{25};
    for (auto _ : state) {
        SurvivalCounts counts = mc_survival(cfg, q, dets, ks, 20000, nullptr, exec);
        benchmark::DoNotOptimize(counts.surviving[0]);
    }
}

} // namespace

BENCHMARK_CAPTURE(bench_spectrum, serial, Exec::serial);
BENCHMARK_CAPTURE(bench_spectrum, parallel, Exec::parallel);
BENCHMARK_CAPTURE(bench_density, serial, Exec::serial);
BENCHMARK_CAPTURE(bench_density, parallel, Exec::parallel);
BENCHMARK_CAPTURE(bench_dft, serial, Exec::serial);
BENCHMARK_CAPTURE(bench_dft, parallel, Exec::parallel);
BENCHMARK_CAPTURE(bench_mc, serial, Exec::serial);
BENCHMARK_CAPTURE(bench_mc, parallel, Exec::parallel);

BENCHMARK_MAIN();
