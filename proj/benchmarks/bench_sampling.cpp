#include <benchmark/benchmark.h>

#include "pairpol/analysis.hpp"
#include "pairpol/apparatus.hpp"
#include "pairpol/compton.hpp"
#include "pairpol/pair_models.hpp"
#include "pairpol/random.hpp"

namespace {

using namespace pairpol;

void BM_compton_sampler(benchmark::State& state)
{
    ComptonSampler const sampler(annihilation_energy);
    PhotonState const photon(annihilation_energy, Vec3::UnitZ(), LinearPolarization{Vec3::UnitX()});
    Rng rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(sampler(photon, rng));
}
BENCHMARK(BM_compton_sampler);

void BM_pair_sampler(benchmark::State& state)
{
    PairSampler const sampler(PairModel::entangled(),
                              annihilation_energy,
                              ThetaWindow::from_degrees(80, 100));
    Rng rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(sampler(rng));
}
BENCHMARK(BM_pair_sampler);

void BM_event_generator(benchmark::State& state)
{
    ApparatusConfig config;
    config.gagg_enabled = state.range(0) != 0;
    EventGenerator const gen(ModelSet{}, config);
    Rng rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(gen(rng));
}
BENCHMARK(BM_event_generator)->Arg(0)->Arg(1);

void BM_fit_and_s_curve(benchmark::State& state)
{
    std::vector<double> counts(16);
    for (int j = 0; j < 16; ++j)
        counts[static_cast<std::size_t>(j)] = 1000 - 410 * std::cos(2 * j * pi / 8);
    auto const hist = AngleHistogram::from_counts(counts);
    for (auto _ : state)
    {
        auto fit = fit_cosine(hist);
        auto set = correlation_set(hist);
        benchmark::DoNotOptimize(fit);
        benchmark::DoNotOptimize(fit_s_curve(set));
    }
}
BENCHMARK(BM_fit_and_s_curve);

}  // namespace

BENCHMARK_MAIN();
