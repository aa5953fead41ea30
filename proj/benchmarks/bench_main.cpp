#include <benchmark/benchmark.h>

#include <string>

#include "bimodal/bilinear_head.hpp"
#include "bimodal/model.hpp"
#include "bimodal/rng.hpp"

namespace {

using namespace bimodal;

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& x : m.values()) x = rng.uniform(-1.0, 1.0);
  return m;
}

Vector random_vector(std::size_t n, Rng& rng) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random_matrix(n, n, rng);
  const Matrix b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

void BM_TowerForward(benchmark::State& state) {
  // 360 inputs and 200 outputs with three hidden layers of the given width.
  const auto width = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> dims{360, width, width, width, 200};
  const MlpTower tower = init_tower(dims, 1, 0.05);
  Rng rng(2);
  const Vector x = random_vector(360, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(tower, x));
}
BENCHMARK(BM_TowerForward)->Arg(128)->Arg(500)->Arg(1024);

BilinearHead large_head(HeadVariant variant, std::size_t classes, std::size_t groups) {
  std::vector<std::size_t> table(classes);
  for (std::size_t k = 0; k < classes; ++k) table[k] = k % groups;
  BilinearHead head = make_head(variant, 200, 200, 200, LabelTree(table, groups));
  Rng rng(3);
  init_head(head, rng, 0.05);
  return head;
}

void BM_HeadPosterior(benchmark::State& state) {
  const auto variant = static_cast<HeadVariant>(state.range(0));
  const BilinearHead head = large_head(variant, 1328, 42);
  Rng rng(4);
  const Vector v1 = random_vector(200, rng);
  const Vector v2 = random_vector(200, rng);
  for (auto _ : state) benchmark::DoNotOptimize(posterior(head, v1, v2));
  state.SetLabel(to_string(variant));
}
BENCHMARK(BM_HeadPosterior)
    ->Arg(static_cast<int>(HeadVariant::Factored))
    ->Arg(static_cast<int>(HeadVariant::FactoredShared));

void BM_HeadGradients(benchmark::State& state) {
  const auto variant = static_cast<HeadVariant>(state.range(0));
  const auto messages = state.range(1) ? Messages::Compute : Messages::Skip;
  const BilinearHead head = large_head(variant, 1328, 42);
  Rng rng(5);
  const Vector v1 = random_vector(200, rng);
  const Vector v2 = random_vector(200, rng);
  for (auto _ : state) benchmark::DoNotOptimize(head_gradients(head, v1, v2, 17, messages));
  state.SetLabel(std::string(to_string(variant)) +
                 (messages == Messages::Compute ? " +messages" : ""));
}
BENCHMARK(BM_HeadGradients)
    ->ArgsProduct({{static_cast<int>(HeadVariant::Factored),
                    static_cast<int>(HeadVariant::FactoredShared)},
                   {0, 1}});

void BM_SampleGradient(benchmark::State& state) {
  const std::vector<std::size_t> dims{20, 40};
  const Model model = make_bilinear(HeadVariant::FactoredShared, dims, dims, 8,
                                    LabelTree::balanced(8, 4), 2.0, 6, 0.3);
  Model grads = zeros_like(model);
  Rng rng(7);
  const Vector x1 = random_vector(20, rng);
  const Vector x2 = random_vector(20, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(accumulate_gradients(model, x1, x2, 3, grads));
  }
}
BENCHMARK(BM_SampleGradient);

}  // namespace

BENCHMARK_MAIN();
