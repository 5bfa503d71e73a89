// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to the
// desired thread count; on one core the pairs should time the same.

#include <benchmark/benchmark.h>

#include "vpinv/kinetic.hpp"
#include "vpinv/poisson.hpp"
#include "vpinv/tomography.hpp"

using namespace vpinv;

namespace {

const DopingProfile& phantom() {
    static const DopingProfile p = DopingProfile::default_phantom();
    return p;
}

SourceGrid source(int nx) {
    return make_source(field_layout(nx, 1.0), [](Vec2 x) { return phantom()(x); });
}

const FieldGrid& field64() {
    static const FieldGrid f = assemble_doping_field(phantom(), field_layout(64, 1.0));
    return f;
}

const BeamData& beam() {
    static const BeamData b = make_beam(chord_from(DiskDomain(), 0.9, 0.25), 50.0, 1.0, 4.0, 1.0);
    return b;
}

const Sinogram& sinogram() {
    static const Sinogram s = acquire(field64(), 90, 65).sinogram;
    return s;
}

void BM_assemble_field_serial(benchmark::State& st) {
    const SourceGrid s = source(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(assemble_field_serial(s));
}
void BM_assemble_field_omp(benchmark::State& st) {
    const SourceGrid s = source(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(assemble_field(s));
}

void BM_deposit_rho_serial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(deposit_rho_serial(beam(), field64()));
}
void BM_deposit_rho_omp(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(deposit_rho(beam(), field64()));
}

void BM_fbp_serial(benchmark::State& st) {
    const GridLayout L = reconstruction_layout(64, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(fbp_serial(sinogram(), 0, L));
}
void BM_fbp_omp(benchmark::State& st) {
    const GridLayout L = reconstruction_layout(64, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(fbp(sinogram(), 0, L));
}

void BM_acquire_oracle_serial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(acquire_serial(field64(), 90, 65));
}
void BM_acquire_oracle_omp(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(acquire(field64(), 90, 65));
}

}  // namespace

BENCHMARK(BM_assemble_field_serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_field_omp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_deposit_rho_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_deposit_rho_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fbp_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fbp_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_acquire_oracle_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_acquire_oracle_omp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
