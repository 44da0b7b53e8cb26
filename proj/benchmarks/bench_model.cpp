#include <benchmark/benchmark.h>

#include "hetfuse/model.hpp"
#include "hetfuse/synthetic.hpp"
#include "hetfuse/train.hpp"

using namespace hetfuse;

namespace {

HeteroGraph graph(int rois) {
  SyntheticSpec spec;
  spec.n_control = 1;
  spec.n_patient = 0;
  spec.n_rois = rois;
  spec.series_length = 100;
  spec.n_communities = 6;
  return assemble(generate_synthetic(spec).front(), GraphConfig{});
}

ModelConfig desk_model(const HeteroGraph& g) {
  ModelConfig c;
  c.hidden = 8;
  c.heads = 2;
  c.semantic_dim = 8;
  c.mlp_hidden = 16;
  return ModelConfig::for_graph(g, c);
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const HeteroGraph g = graph(static_cast<int>(state.range(0)));
  const ModelParams p = ModelParams::initialize(desk_model(g), 1);
  for (auto _ : state) benchmark::DoNotOptimize(predict_proba(g, p));
}
BENCHMARK(BM_Forward)->Arg(18)->Arg(90)->Unit(benchmark::kMillisecond);

static void BM_ForwardBackward(benchmark::State& state) {
  const HeteroGraph g = graph(static_cast<int>(state.range(0)));
  const ModelParams p = ModelParams::initialize(desk_model(g), 1);
  for (auto _ : state) {
    ad::Tape tape;
    const BoundModel m = bind(tape, p, true);
    const ad::Tensor loss = cross_entropy(forward(tape, g, m, p.config()), 0);
    benchmark::DoNotOptimize(tape.backward(loss));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(18)->Arg(90)->Unit(benchmark::kMillisecond);
