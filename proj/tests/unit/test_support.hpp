#pragma once

#include <random>

#include "hetfuse/graphbuild.hpp"
#include "hetfuse/model.hpp"
#include "hetfuse/synthetic.hpp"
#include "hetfuse/train.hpp"

namespace hetfuse::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index k = 0; k < m.size(); ++k) m(k) = u(rng);
  return m;
}

// Symmetric weighted graph, zero diagonal; each edge present with `density`.
inline Matrix random_graph(std::mt19937_64& rng, Index n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (u(rng) < density) a(i, j) = a(j, i) = 0.05 + 0.95 * u(rng);
    }
  }
  return a;
}

inline SubjectRaw synthetic_subject(int n, std::uint64_t seed, int label = 0, int t = 48) {
  SyntheticSpec spec;
  spec.n_control = label == 0 ? 1 : 0;
  spec.n_patient = label == 1 ? 1 : 0;
  spec.n_rois = n;
  spec.n_communities = 2;
  spec.series_length = t;
  spec.feature_width = 4;
  spec.shifted_rois = 0;
  spec.seed = seed;
  return generate_synthetic(spec).front();
}

// Graphs plus raw data for every subject of a synthetic cohort.
inline std::vector<Sample> cohort(const SyntheticSpec& spec, const GraphConfig& graph) {
  std::vector<Sample> out;
  for (SubjectRaw& s : generate_synthetic(spec)) {
    HeteroGraph g = assemble(s, graph);
    out.push_back({std::move(g), std::move(s)});
  }
  return out;
}

inline SyntheticSpec small_spec(int n_control, int n_patient, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_control = n_control;
  spec.n_patient = n_patient;
  spec.n_rois = 8;
  spec.n_communities = 2;
  spec.series_length = 48;
  spec.feature_width = 4;
  spec.shifted_rois = 1;
  spec.seed = seed;
  return spec;
}

// Small network and schedule that train in well under a second per fold.
inline ExperimentConfig quick_config() {
  ExperimentConfig c;
  c.graph.top_k = 3;
  c.augment.window_width = 20;
  c.augment.window_stride = 4;
  c.model.hidden = 4;
  c.model.heads = 2;
  c.model.semantic_dim = 4;
  c.model.mlp_hidden = 8;
  c.model.dropout = 0.2;
  c.train.lr0 = 0.005;
  c.train.epochs = 10;
  c.train.batch_size = 4;
  return c;
}

inline ModelConfig tiny_model() {
  ModelConfig c;
  c.hidden = 4;
  c.heads = 2;
  c.semantic_dim = 4;
  c.mlp_hidden = 4;
  return c;
}

}  // namespace hetfuse::testing
