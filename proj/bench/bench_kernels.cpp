#include "cvilab/cvi.hpp"
#include "cvilab/kernels.hpp"
#include "cvilab/reference.hpp"
#include "cvilab/rng.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace cvilab;

namespace {

struct Instance {
    Matrix points;
    Labels labels;
    Matrix centroids;
    Matrix memberships;
};

Instance make_instance(int n, int d, int k) {
    Rng rng(static_cast<std::uint64_t>(n) * 31 + static_cast<std::uint64_t>(d));
    Instance in{Matrix(n, d), Labels(static_cast<std::size_t>(n)), Matrix(k, d), Matrix(n, k)};
    for (int j = 0; j < k; ++j)
        for (int q = 0; q < d; ++q) in.centroids(j, q) = 5.0 * rng.normal();
    for (int i = 0; i < n; ++i) {
        const int c = i % k;
        in.labels[static_cast<std::size_t>(i)] = c;
        for (int q = 0; q < d; ++q) in.points(i, q) = in.centroids(c, q) + rng.normal();
    }
    kernels::fcm_memberships(in.points, in.centroids, 2.0, in.memberships);
    return in;
}

const Instance& instance(int n) {
    static std::map<int, Instance> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_instance(n, 17, 9)).first;
    return it->second;
}

void BM_silhouette_parallel(benchmark::State& state) {
    const auto& in = instance(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(silhouette(in.points, in.labels));
}

void BM_silhouette_serial(benchmark::State& state) {
    const auto& in = instance(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::silhouette(in.points, in.labels));
}

void BM_dunn_parallel(benchmark::State& state) {
    const auto& in = instance(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(dunn(in.points, in.labels));
}

void BM_dunn_serial(benchmark::State& state) {
    const auto& in = instance(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::dunn(in.points, in.labels));
}

void BM_memberships_parallel(benchmark::State& state) {
    const auto& in = instance(static_cast<int>(state.range(0)));
    Matrix u(in.points.rows(), in.centroids.rows());
    for (auto _ : state) {
        kernels::fcm_memberships(in.points, in.centroids, 2.0, u);
        benchmark::DoNotOptimize(u.data());
    }
}

void BM_memberships_serial(benchmark::State& state) {
    const auto& in = instance(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::fcm_memberships(in.points, in.centroids, 2.0));
}

void BM_centroids_parallel(benchmark::State& state) {
    const auto& in = instance(static_cast<int>(state.range(0)));
    Matrix c = in.centroids;
    for (auto _ : state) {
        kernels::fcm_centroids(in.points, in.memberships, 2.0, c);
        benchmark::DoNotOptimize(c.data());
    }
}

void BM_centroids_serial(benchmark::State& state) {
    const auto& in = instance(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::fcm_centroids(in.points, in.memberships, 2.0));
}

}  // namespace

BENCHMARK(BM_silhouette_parallel)->Arg(500)->Arg(2000);
BENCHMARK(BM_silhouette_serial)->Arg(500)->Arg(2000);
BENCHMARK(BM_dunn_parallel)->Arg(500)->Arg(2000);
BENCHMARK(BM_dunn_serial)->Arg(500)->Arg(2000);
BENCHMARK(BM_memberships_parallel)->Arg(2000)->Arg(20000);
BENCHMARK(BM_memberships_serial)->Arg(2000)->Arg(20000);
BENCHMARK(BM_centroids_parallel)->Arg(2000)->Arg(20000);
BENCHMARK(BM_centroids_serial)->Arg(2000)->Arg(20000);

BENCHMARK_MAIN();
