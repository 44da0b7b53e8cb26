#include <benchmark/benchmark.h>

#include "hetfuse/augment.hpp"
#include "hetfuse/graphbuild.hpp"
#include "hetfuse/synthetic.hpp"

using namespace hetfuse;

namespace {

SubjectRaw subject(int rois, int length) {
  SyntheticSpec spec;
  spec.n_control = 1;
  spec.n_patient = 0;
  spec.n_rois = rois;
  spec.series_length = length;
  spec.n_communities = 6;
  return generate_synthetic(spec).front();
}

}  // namespace

static void BM_Assemble(benchmark::State& state) {
  const SubjectRaw s = subject(static_cast<int>(state.range(0)), 200);
  GraphConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(assemble(s, cfg));
}
BENCHMARK(BM_Assemble)->Arg(30)->Arg(90);

static void BM_CommunityLevelHetero(benchmark::State& state) {
  const SubjectRaw s = subject(static_cast<int>(state.range(0)), 200);
  const HeteroGraph g = assemble(s, GraphConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(community_level_hetero(g.a_f, g.a_d));
}
BENCHMARK(BM_CommunityLevelHetero)->Arg(30)->Arg(90);

static void BM_AugmentSubject(benchmark::State& state) {
  const SubjectRaw s = subject(90, static_cast<int>(state.range(0)));
  const GraphConfig gc;
  const HeteroGraph g = assemble(s, gc);
  const AugmentConfig ac;
  for (auto _ : state) benchmark::DoNotOptimize(augment_subject(s, g, gc, ac));
}
BENCHMARK(BM_AugmentSubject)->Arg(100)->Arg(200);
