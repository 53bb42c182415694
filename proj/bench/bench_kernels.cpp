// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "rbp/metrics.hpp"
#include "rbp/parallel.hpp"
#include "rbp/pipeline.hpp"
#include "rbp/projection.hpp"

using namespace rbp;

namespace {

struct EncodeInput {
  Pose9D pose;
  Points points;
};

EncodeInput encode_input(int n) {
  Rng rng(17);
  std::uniform_real_distribution<double> u(-0.49, 0.49);
  EncodeInput in;
  in.pose.rotation = random_rotation(rng);
  in.pose.translation = Vec3(0.05, -0.1, 1.2);
  in.pose.size = Vec3(0.2, 0.3, 0.15);
  Points canonical(n, 3);
  for (int i = 0; i < n; ++i) canonical.row(i) = Vec3(u(rng), u(rng), u(rng)).cwiseProduct(in.pose.size).transpose();
  in.points = transform_points(canonical, in.pose.rotation, in.pose.translation);
  return in;
}

const SymmetryTag kBox{"box", SymmetryType::None};

void BM_EncodeSerial(benchmark::State& state) {
  const EncodeInput in = encode_input(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::encode_dvpb(in.points, in.pose, kBox));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EncodeOmp(benchmark::State& state) {
  const EncodeInput in = encode_input(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(encode_dvpb(in.points, in.pose, kBox));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::pair<OrientedBox, OrientedBox> iou_boxes() {
  const OrientedBox a{Vec3(0.0, 0.0, 1.0), rot_y(0.4) * rot_x(0.2), Vec3(0.3, 0.2, 0.25)};
  const OrientedBox b{Vec3(0.04, -0.02, 1.03), rot_y(0.55) * rot_z(0.1), Vec3(0.28, 0.22, 0.24)};
  return {a, b};
}

void BM_IouSerial(benchmark::State& state) {
  const auto [a, b] = iou_boxes();
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(serial::box_iou_3d_sampled(a, b, res));
  state.SetItemsProcessed(state.iterations() * res * res * res);
}

void BM_IouOmp(benchmark::State& state) {
  const auto [a, b] = iou_boxes();
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(box_iou_3d_sampled(a, b, res));
  state.SetItemsProcessed(state.iterations() * res * res * res);
}

// Whole pipeline with the thread count as the argument; 1 is the serial baseline.
void BM_Pipeline(benchmark::State& state) {
  Config c = default_config();
  c.seed = 3;
  c.count = 48;
  const Corpus corpus = generate_corpus(c);
  const int before = max_threads();
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(corpus, c).summary.mean_sprv_norm);
  set_threads(before);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.count));
}

}  // namespace

BENCHMARK(BM_EncodeSerial)->Arg(1024)->Arg(16384)->Arg(131072);
BENCHMARK(BM_EncodeOmp)->Arg(1024)->Arg(16384)->Arg(131072);
BENCHMARK(BM_IouSerial)->Arg(32)->Arg(50)->Arg(100);
BENCHMARK(BM_IouOmp)->Arg(32)->Arg(50)->Arg(100);
BENCHMARK(BM_Pipeline)->Arg(1)->Arg(max_threads())->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
