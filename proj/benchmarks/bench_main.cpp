#include <benchmark/benchmark.h>

#include "fusesim/profiler.hpp"
#include "fusesim/search.hpp"
#include "fusesim/sim.hpp"

using namespace fusesim;

namespace {

const Calibration& calib() {
    static Calibration c = default_calibration();
    return c;
}

void BM_SteadyState(benchmark::State& state) {
    const Calibration& c = calib();
    FreqConfig cfg{2188, 701, 3172.0};
    for (auto _ : state) benchmark::DoNotOptimize(steady_state(cfg, c.decode));
}
BENCHMARK(BM_SteadyState);

void BM_RunPhasePinned(benchmark::State& state) {
    const Calibration& c = calib();
    PhaseSpec phase = PhaseSpec::decode(static_cast<int>(state.range(0)));
    RunOptions opt;
    opt.record_trace = false;
    for (auto _ : state) {
        GovernorSet gov{make_pin(2850, Component::Cpu, c.table),
                        make_pin(848, Component::Gpu, c.table),
                        make_pin(3172, Component::Mem, c.table)};
        benchmark::DoNotOptimize(run_phase(c, phase, gov, opt));
    }
}
BENCHMARK(BM_RunPhasePinned)->Arg(8)->Arg(32);

void BM_RunPhaseGoverned(benchmark::State& state) {
    const Calibration& c = calib();
    PhaseSpec phase = PhaseSpec::decode(static_cast<int>(state.range(0)));
    RunOptions opt;
    opt.record_trace = false;
    for (auto _ : state) {
        GovernorSet gov = c.default_governors();
        benchmark::DoNotOptimize(run_phase(c, phase, gov, opt));
    }
}
BENCHMARK(BM_RunPhaseGoverned)->Arg(8)->Arg(32);

void BM_SweepGpuList(benchmark::State& state) {
    const Calibration& c = calib();
    GridSpec grid;
    grid.cpu = {2188};
    grid.gpu = c.table.gpu;
    grid.mem = {3172.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(sweep(calib(), PhaseSpec::decode(8), grid, 1));
}
BENCHMARK(BM_SweepGpuList);

void BM_SearchG1(benchmark::State& state) {
    const Calibration& c = calib();
    PhaseSpec phase = PhaseSpec::decode(32);
    double budget = 1.05 * measure_config(c, phase, 2850, 848, std::nullopt).energy_per_token;
    for (auto _ : state) benchmark::DoNotOptimize(search_g1(c, phase, budget));
}
BENCHMARK(BM_SearchG1);

}  // namespace

BENCHMARK_MAIN();
