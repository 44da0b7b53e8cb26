#include <benchmark/benchmark.h>

#include "hetfuse/autodiff.hpp"

using namespace hetfuse;

static void BM_MatmulTanhBackward(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix x = Matrix::Random(n, n);
  const Matrix w = Matrix::Random(n, n);
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Tensor wt = tape.leaf(w);
    const ad::Tensor loss = ad::sum(ad::tanh(ad::matmul(tape.constant(x), wt)));
    benchmark::DoNotOptimize(tape.backward(loss));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_MatmulTanhBackward)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_MaskedSoftmaxBackward(benchmark::State& state) {
  const Index n = state.range(0);
  auto mask = std::make_shared<const Matrix>((Matrix::Random(n, n).array() > 0.0).cast<double>().matrix());
  const Matrix logits = Matrix::Random(n, n);
  for (auto _ : state) {
    ad::Tape tape;
    const ad::Tensor l = tape.leaf(logits);
    benchmark::DoNotOptimize(tape.backward(ad::sum(ad::masked_row_softmax(l, mask))));
  }
}
BENCHMARK(BM_MaskedSoftmaxBackward)->Arg(90)->Arg(180);
