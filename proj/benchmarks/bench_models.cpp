#include "fuelred/dyno_ingest.hpp"
#include "fuelred/map_extraction.hpp"
#include "fuelred/reference_powertrain.hpp"
#include "fuelred/semi_principled.hpp"
#include "fuelred/simplified.hpp"
#include "fuelred/synthetic.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace fuelred;

struct Fixture {
    Vehicle vehicle = synthetic::default_vehicle();
    std::vector<DriveCycle> cycles = synthetic::evaluation_cycles();
    SemiPrincipledModel semi = derive_semi_model(vehicle, cycles);
    SimplifiedModel simplified = fit_simplified(semi);
    std::vector<KinematicRow> rows = kinematics_from_cycle(synthetic::us06_like(), kDefaultDt);
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_reference_simulate(benchmark::State& state) {
    const ReferencePowertrain plant(fixture().vehicle);
    const auto cycle = synthetic::us06_like();
    for (auto _ : state) {
        benchmark::DoNotOptimize(plant.simulate(cycle));
    }
}
BENCHMARK(BM_reference_simulate)->Unit(benchmark::kMillisecond);

void BM_eval_semi_trace(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_semi_trace(f.semi, f.rows));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rows.size()));
}
BENCHMARK(BM_eval_semi_trace)->Unit(benchmark::kMillisecond);

void BM_eval_simplified_trace(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_simplified_trace(f.simplified, f.rows));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rows.size()));
}
BENCHMARK(BM_eval_simplified_trace)->Unit(benchmark::kMillisecond);

void BM_derive_semi_model(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(derive_semi_model(f.vehicle, f.cycles));
    }
}
BENCHMARK(BM_derive_semi_model)->Unit(benchmark::kMillisecond);

void BM_fit_simplified(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_simplified(f.semi));
    }
}
BENCHMARK(BM_fit_simplified)->Unit(benchmark::kMillisecond);

void BM_ingest_dyno_log(benchmark::State& state) {
    const auto log = synthetic::make_dyno_log(fixture().vehicle, synthetic::us06_like());
    for (auto _ : state) {
        benchmark::DoNotOptimize(ingest_dyno_log(log));
    }
}
BENCHMARK(BM_ingest_dyno_log)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
