#pragma once

// Heterogeneous-graph augmentation: the functional homo-meta-path is rebuilt
// from sliding-window dynamic connectivity while the structural one is kept
// fixed, and the cross-modal meta-path is recomputed from the pair.

#include <array>
#include <vector>

#include "hetfuse/graphbuild.hpp"

namespace hetfuse {

struct WindowSet {
  std::vector<Matrix> windows;  // each N x width
  int width = 0;
  int stride = 0;
};

// f[n-1] counts third nodes k whose triple with (i, j) has n edges shared
// across all windows.
using TripleCensus = std::array<int, 3>;

struct AugmentConfig {
  int window_width = 30;
  int window_stride = 5;
  double window_threshold = 0.2;
  std::array<double, 3> alpha{0.01, 0.02, 0.1};
  double global_threshold = 0.4;
};

WindowSet sliding_windows(const Matrix& series, int width, int stride);

// Binary per-window FC: edge (i, j) iff i != j and Pearson r >= tau.
// A flat ROI inside a window has no edges in that window.
std::vector<BinaryMatrix> window_fcs(const WindowSet& ws, double tau);

// Edges present in every window.
BinaryMatrix shared_edges(const std::vector<BinaryMatrix>& fcs);

TripleCensus triple_census(const std::vector<BinaryMatrix>& fcs, Index i, Index j);

// alpha . f per shared edge, entries below tau_g dropped (exactly tau_g is
// kept), symmetric, zero diagonal. Not normalized.
Matrix raw_dynamic_fc(const std::vector<BinaryMatrix>& fcs, const std::array<double, 3>& alpha,
                      double tau_g);

// raw_dynamic_fc followed by global-max normalization.
Matrix global_dynamic_fc(const std::vector<BinaryMatrix>& fcs, const std::array<double, 3>& alpha,
                         double tau_g);

// Augmented copy of `hg`: a_f rebuilt from dynamic FC of the subject's
// series, a_d copied bit for bit, a_fd recomputed. Same id and label.
HeteroGraph augment_subject(const SubjectRaw& subject, const HeteroGraph& hg,
                            const GraphConfig& graph_config, const AugmentConfig& config);

}  // namespace hetfuse
