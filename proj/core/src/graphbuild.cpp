#include "hetfuse/graphbuild.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace hetfuse {

Matrix HeteroGraph::block_adjacency() const {
  const Index nf = a_f.rows();
  const Index nd = a_d.rows();
  Matrix out(nf + nd, nf + nd);
  out.topLeftCorner(nf, nf) = a_f;
  out.topRightCorner(nf, nd) = a_fd;
  out.bottomLeftCorner(nd, nf) = a_fd.transpose();
  out.bottomRightCorner(nd, nd) = a_d;
  return out;
}

Matrix pearson_fc(const Matrix& series) {
  const Index n = series.rows();
  const Index t = series.cols();
  if (t < 3) throw ValidationError("pearson_fc: need at least 3 time points, got " + std::to_string(t));

  Matrix centered(n, t);
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double mean = 0.0;
    for (Index k = 0; k < t; ++k) mean += series(i, k);
    mean /= static_cast<double>(t);
    double ss = 0.0;
    for (Index k = 0; k < t; ++k) {
      centered(i, k) = series(i, k) - mean;
      ss += centered(i, k) * centered(i, k);
    }
    if (!(ss > 0.0)) {
      throw ValidationError("pearson_fc: ROI " + std::to_string(i) + " has zero variance");
    }
    norms[static_cast<std::size_t>(i)] = std::sqrt(ss);
  }

  Matrix fc = Matrix::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      double dot = 0.0;
      for (Index k = 0; k < t; ++k) dot += centered(i, k) * centered(j, k);
      const double r = std::clamp(
          dot / (norms[static_cast<std::size_t>(i)] * norms[static_cast<std::size_t>(j)]), -1.0, 1.0);
      fc(i, j) = r;
      fc(j, i) = r;
    }
  }
  return fc;
}

Matrix global_max_normalize(const Matrix& m) {
  const double peak = m.size() == 0 ? 0.0 : m.maxCoeff();
  if (!(peak > 0.0)) return Matrix::Zero(m.rows(), m.cols());
  return m / peak;
}

Matrix threshold_normalize(const Matrix& raw, double tau) {
  if (raw.rows() != raw.cols()) {
    throw ShapeError("threshold_normalize: matrix must be square");
  }
  Matrix out = raw;
  for (Index k = 0; k < out.size(); ++k) {
    if (out(k) < tau) out(k) = 0.0;
  }
  out.diagonal().setZero();
  return global_max_normalize(out);
}

Matrix connection_similarity(const Matrix& a_f, const Matrix& a_d) {
  if (a_f.rows() != a_d.rows() || a_f.cols() != a_d.cols() || a_f.rows() != a_f.cols()) {
    throw ShapeError("connection_similarity: adjacencies must be square with equal size");
  }
  const Index n = a_f.rows();
  auto row_norm = [n](const Matrix& a, Index i) {
    double ss = 0.0;
    for (Index k = 0; k < n; ++k) ss += a(i, k) * a(i, k);
    return std::sqrt(ss);
  };
  std::vector<double> nf(static_cast<std::size_t>(n));
  std::vector<double> nd(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    nf[static_cast<std::size_t>(i)] = row_norm(a_f, i);
    nd[static_cast<std::size_t>(i)] = row_norm(a_d, i);
  }

  Matrix sim = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double ni = nf[static_cast<std::size_t>(i)];
    if (ni == 0.0) continue;
    for (Index j = 0; j < n; ++j) {
      const double nj = nd[static_cast<std::size_t>(j)];
      if (nj == 0.0) continue;
      double dot = 0.0;
      for (Index k = 0; k < n; ++k) dot += a_f(i, k) * a_d(j, k);
      sim(i, j) = std::max(0.0, dot / (ni * nj));
    }
  }
  return sim;
}

Matrix node_level_hetero(const Matrix& a_f, const Matrix& a_d, int k) {
  const Index n = a_f.rows();
  if (k < 1 || k > n) {
    throw ValidationError("node_level_hetero: k must lie in [1, " + std::to_string(n) + "], got " +
                          std::to_string(k));
  }
  const Matrix sim = connection_similarity(a_f, a_d);
  Matrix out = Matrix::Zero(n, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return sim(i, a) > sim(i, b); });
    for (int r = 0; r < k; ++r) {
      const Index j = order[static_cast<std::size_t>(r)];
      out(i, j) = sim(i, j);
    }
  }
  return out;
}

Matrix community_level_hetero(const Matrix& a_f, const Matrix& a_d) {
  if (a_f.rows() != a_d.rows() || a_f.cols() != a_d.cols() || a_f.rows() != a_f.cols()) {
    throw ShapeError("community_level_hetero: adjacencies must be square with equal size");
  }
  const Index n = a_f.rows();
  // An edge is usable only if it exists in both graphs; a triangle exists in
  // both graphs exactly when all three of its edges are usable.
  Matrix shared = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j && a_f(i, j) > 0.0 && a_d(i, j) > 0.0) shared(i, j) = 1.0;
    }
  }
  // (shared^2)_ij counts the common neighbours k of i and j.
  const Matrix paths2 = shared * shared;
  Matrix out = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (shared(i, j) != 0.0 && paths2(i, j) > 0.0) out(i, j) = 1.0;
    }
  }
  return out;
}

Matrix combine_hetero(const Matrix& node_part, const Matrix& community_part) {
  if (node_part.rows() != community_part.rows() || node_part.cols() != community_part.cols()) {
    throw ShapeError("combine_hetero: parts differ in shape");
  }
  Matrix total = node_part + community_part;
  for (Index k = 0; k < total.size(); ++k) {
    if (total(k) < 0.0) total(k) = 0.0;
  }
  // Not threshold_normalize: the diagonal here couples ROI i across the two
  // modalities and must survive.
  return global_max_normalize(total);
}

Matrix hetero_meta_path(const Matrix& a_f, const Matrix& a_d, const GraphConfig& config) {
  const Matrix node = node_level_hetero(a_f, a_d, config.top_k);
  if (!config.community_paths) return combine_hetero(node, Matrix::Zero(node.rows(), node.cols()));
  return combine_hetero(node, community_level_hetero(a_f, a_d));
}

void validate_subject(const SubjectRaw& s) {
  const Index n = s.fmri_series.rows();
  const std::string who = "subject '" + s.id + "': ";
  if (n == 0) throw ValidationError(who + "fmri-series has no rows");
  if (s.dti_features.rows() != n) {
    throw ShapeError(who + "dti-features has " + std::to_string(s.dti_features.rows()) +
                     " rows, expected " + std::to_string(n));
  }
  if (s.sc_counts.rows() != n || s.sc_counts.cols() != n) {
    throw ShapeError(who + "sc-counts must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  for (Index i = 0; i < n; ++i) {
    if (s.sc_counts(i, i) != 0.0) throw ValidationError(who + "sc-counts has a non-zero diagonal");
    for (Index j = 0; j < n; ++j) {
      if (s.sc_counts(i, j) < 0.0) throw ValidationError(who + "sc-counts has negative entries");
      if (s.sc_counts(i, j) != s.sc_counts(j, i)) {
        throw ValidationError(who + "sc-counts is not symmetric");
      }
    }
  }
  if (!s.fmri_series.allFinite() || !s.dti_features.allFinite()) {
    throw ValidationError(who + "non-finite values in features");
  }
}

std::pair<ModalityGraph, ModalityGraph> modality_graphs(const SubjectRaw& subject,
                                                        const GraphConfig& config) {
  validate_subject(subject);
  ModalityGraph f{subject.fmri_series,
                  threshold_normalize(pearson_fc(subject.fmri_series), config.fc_threshold),
                  Modality::Fmri};
  ModalityGraph d{subject.dti_features, threshold_normalize(subject.sc_counts, config.sc_threshold),
                  Modality::Dti};
  return {std::move(f), std::move(d)};
}

HeteroGraph assemble(const SubjectRaw& subject, const GraphConfig& config) {
  auto [gf, gd] = modality_graphs(subject, config);
  HeteroGraph hg;
  hg.subject_id = subject.id;
  hg.label = subject.label;
  hg.a_fd = hetero_meta_path(gf.adjacency, gd.adjacency, config);
  hg.x_f = std::move(gf.features);
  hg.x_d = std::move(gd.features);
  hg.a_f = std::move(gf.adjacency);
  hg.a_d = std::move(gd.adjacency);
  return hg;
}

}  // namespace hetfuse
