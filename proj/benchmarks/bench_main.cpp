#include <vector>

#include <benchmark/benchmark.h>

#include "diffpos/bias.hpp"
#include "diffpos/diffraction.hpp"
#include "diffpos/estimators.hpp"
#include "diffpos/measurement.hpp"

using namespace diffpos;

namespace {

const BuildingModel kBuilding = BuildingModel::reference();
const AnchorConfig kAnchors = AnchorConfig::reference();
const NodePosition kNode{13.0, 6.5, 4};

std::vector<double> ranges() {
    const RangeVector r = generate_measurements(kNode, kAnchors, kBuilding, {NoiseKind::Gaussian, 0.1, 5}, 0.5);
    return {r.ranges().begin(), r.ranges().end()};
}

void BM_DiffractionPoint(benchmark::State& state) {
    const Point3 node = kBuilding.node_point(kNode);
    const Edge edge = kBuilding.edge(kNode.floor, EdgeKind::Upper);
    for (auto _ : state) benchmark::DoNotOptimize(try_solve_diffraction_point(kAnchors[1], node, edge));
}
BENCHMARK(BM_DiffractionPoint);

void BM_FermatOracle(benchmark::State& state) {
    const Point3 node = kBuilding.node_point(kNode);
    const Edge edge = kBuilding.edge(kNode.floor, EdgeKind::Upper);
    for (auto _ : state) benchmark::DoNotOptimize(fermat_oracle(kAnchors[1], node, edge, 1e-4));
}
BENCHMARK(BM_FermatOracle);

void BM_Jacobian(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(nls_jacobian({kNode.x, kNode.y}, kNode.floor, kAnchors, kBuilding));
}
BENCHMARK(BM_Jacobian);

void BM_LlsEstimate(benchmark::State& state) {
    const std::vector<double> r = ranges();
    for (auto _ : state) benchmark::DoNotOptimize(lls_estimate(r, kAnchors, kBuilding));
}
BENCHMARK(BM_LlsEstimate);

void BM_IppaEstimate(benchmark::State& state) {
    const std::vector<double> r = ranges();
    const BiasTable table = build_bias_table(kBuilding, kAnchors, BiasMode::Floorwise, 1000, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ippa_estimate(r, kAnchors, kBuilding, table, IppaVariant::IDMean));
}
BENCHMARK(BM_IppaEstimate);

void BM_NlsEstimate(benchmark::State& state) {
    const std::vector<double> r = ranges();
    for (auto _ : state) benchmark::DoNotOptimize(nls_estimate(r, kAnchors, kBuilding));
}
BENCHMARK(BM_NlsEstimate);

void BM_BiasSampling(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sample_bias(kAnchors[0], 3, kBuilding, n, 9));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_BiasSampling)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
