// Serial vs OpenMP on the data-parallel kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "teesim/collective.hpp"
#include "teesim/crypto/gcm.hpp"
#include "teesim/kernels.hpp"

using namespace teesim;

namespace {

crypto::SymmetricKey key() {
    crypto::SymmetricKey k;
    for (std::size_t i = 0; i < k.bytes.size(); ++i) k.bytes[i] = std::uint8_t(i * 7 + 1);
    return k;
}

Bytes random_bytes(std::size_t n) {
    std::mt19937_64 rng(5);
    Bytes b(n);
    for (auto& x : b) x = std::uint8_t(rng());
    return b;
}

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_CtrKeystream(benchmark::State& s) {
    crypto::Gcm g(key());
    crypto::Nonce nonce{{1, 2, 3}, 9};
    const std::uint64_t blocks = std::uint64_t(s.range(1)) / 16;
    for (auto _ : s) benchmark::DoNotOptimize(g.ctr_keystream(nonce, 0, blocks, exec_of(s)));
    s.SetBytesProcessed(std::int64_t(s.iterations()) * s.range(1));
}

void BM_MultiChainSeal(benchmark::State& s) {
    crypto::Gcm g(key());
    crypto::Nonce nonce{{4, 5, 6}, 1};
    Bytes pt = random_bytes(std::size_t(s.range(1)));
    for (auto _ : s) benchmark::DoNotOptimize(g.seal(nonce, pt, crypto::kDefaultChunkSize, {}, exec_of(s)));
    s.SetBytesProcessed(std::int64_t(s.iterations()) * s.range(1));
}

void BM_MultiChainOpen(benchmark::State& s) {
    crypto::Gcm g(key());
    crypto::Nonce nonce{{4, 5, 6}, 1};
    auto msg = g.seal(nonce, random_bytes(std::size_t(s.range(1))));
    for (auto _ : s) benchmark::DoNotOptimize(g.open(msg, exec_of(s)));
    s.SetBytesProcessed(std::int64_t(s.iterations()) * s.range(1));
}

void BM_ReduceAdd(benchmark::State& s) {
    std::vector<float> a(std::size_t(s.range(1)), 1.0f), b(a.size(), 0.5f);
    for (auto _ : s) {
        reduce_add(a, b, exec_of(s));
        benchmark::ClobberMemory();
    }
    s.SetBytesProcessed(std::int64_t(s.iterations()) * s.range(1) * 4);
}

void BM_RingAllReduce(benchmark::State& s) {
    const int n = 4;
    std::vector<std::vector<float>> bufs(n, std::vector<float>(std::size_t(s.range(1)), 1.0f));
    for (auto _ : s) {
        World w(n, true);
        w.exec = exec_of(s);
        w.record_trace = false;
        ring_all_reduce(w, bufs);
    }
    s.SetBytesProcessed(std::int64_t(s.iterations()) * s.range(1) * 4 * n);
}

}  // namespace

BENCHMARK(BM_CtrKeystream)->ArgsProduct({{0, 1}, {1 << 16, 1 << 22}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MultiChainSeal)->ArgsProduct({{0, 1}, {1 << 16, 1 << 22}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MultiChainOpen)->ArgsProduct({{0, 1}, {1 << 22}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ReduceAdd)->ArgsProduct({{0, 1}, {1 << 20}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RingAllReduce)->ArgsProduct({{0, 1}, {1 << 18}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
