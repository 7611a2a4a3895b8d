#include <benchmark/benchmark.h>

#include <random>

#include "mpc/backend.hpp"
#include "mpc/linear.hpp"

using namespace mpc;

namespace {

spdz::ShareVec random_share(size_t lanes, uint64_t seed) {
    std::mt19937_64 rng(seed);
    spdz::ShareVec s;
    s.vals.reserve(lanes);
    s.macs.reserve(lanes);
    for (size_t i = 0; i < lanes; ++i) {
        s.vals.push_back(uint32_t(rng() % kPrime));
        s.macs.push_back(uint32_t(rng() % kPrime));
    }
    return s;
}

void BM_FieldMul(benchmark::State& state) {
    uint32_t a = 123456789, b = 987654321;
    for (auto _ : state) {
        a = fp::mul(a, b);
        benchmark::DoNotOptimize(a);
    }
}
BENCHMARK(BM_FieldMul);

void BM_AddBatch(benchmark::State& state) {
    size_t lanes = size_t(state.range(0));
    auto be = backend::make_cpu_backend();
    auto x = random_share(lanes, 1), y = random_share(lanes, 2);
    for (auto _ : state) {
        auto z = be->add_batch(x, y);
        benchmark::DoNotOptimize(z);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(lanes));
}
BENCHMARK(BM_AddBatch)->Arg(1 << 10)->Arg(1 << 16)->Arg(1 << 20);

void BM_MulMaskCombine(benchmark::State& state) {
    size_t lanes = size_t(state.range(0));
    auto be = backend::make_cpu_backend();
    auto x = random_share(lanes, 1), y = random_share(lanes, 2);
    spdz::TripleShares t{random_share(lanes, 3), random_share(lanes, 4), random_share(lanes, 5)};
    std::vector<uint32_t> d, e;
    for (auto _ : state) {
        be->mul_mask(x, y, t, d, e);
        auto z = be->mul_combine(t, d, e, 0, 7);
        benchmark::DoNotOptimize(z);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(lanes));
}
BENCHMARK(BM_MulMaskCombine)->Arg(1 << 10)->Arg(1 << 16)->Arg(1 << 20);

void BM_MatrixCombine(benchmark::State& state) {
    uint32_t din = uint32_t(state.range(0)), rows = uint32_t(state.range(1));
    spdz::MatrixTripleShares mt;
    mt.din = din;
    mt.rows = rows;
    mt.a = random_share(size_t(rows) * din, 1);
    mt.b = random_share(din, 2);
    mt.c = random_share(rows, 3);
    auto D = random_share(size_t(rows) * din, 4).vals;
    auto E = random_share(din, 5).vals;
    for (auto _ : state) {
        auto z = spdz::matrix_combine(mt, D, E, 0, 7);
        benchmark::DoNotOptimize(z);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(rows) * din);
}
BENCHMARK(BM_MatrixCombine)->Args({64, 32})->Args({1024, 255});

void BM_PlanTiles(benchmark::State& state) {
    for (auto _ : state) {
        auto plan = linear::plan_tiles(8192, 8192, 262140);
        benchmark::DoNotOptimize(plan);
    }
}
BENCHMARK(BM_PlanTiles);

} // namespace

BENCHMARK_MAIN();
