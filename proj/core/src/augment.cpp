#include "hetfuse/augment.hpp"

#include <cmath>

namespace hetfuse {

WindowSet sliding_windows(const Matrix& series, int width, int stride) {
  const Index t = series.cols();
  if (width < 3) throw ValidationError("sliding_windows: width must be >= 3");
  if (stride < 1) throw ValidationError("sliding_windows: stride must be >= 1");
  if (t < static_cast<Index>(width) + stride) {
    throw ValidationError("sliding_windows: series of length " + std::to_string(t) +
                          " is too short for two windows (width " + std::to_string(width) +
                          ", stride " + std::to_string(stride) + ")");
  }
  WindowSet ws;
  ws.width = width;
  ws.stride = stride;
  const Index count = (t - width) / stride + 1;
  ws.windows.reserve(static_cast<std::size_t>(count));
  for (Index w = 0; w < count; ++w) ws.windows.push_back(series.middleCols(w * stride, width));
  return ws;
}

std::vector<BinaryMatrix> window_fcs(const WindowSet& ws, double tau) {
  std::vector<BinaryMatrix> out;
  out.reserve(ws.windows.size());
  for (const Matrix& win : ws.windows) {
    const Index n = win.rows();
    const Index t = win.cols();
    Matrix centered(n, t);
    Eigen::VectorXd norms(n);
    for (Index i = 0; i < n; ++i) {
      const double mean = win.row(i).sum() / static_cast<double>(t);
      centered.row(i) = win.row(i).array() - mean;
      norms(i) = centered.row(i).norm();
    }
    BinaryMatrix fc = BinaryMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      if (!(norms(i) > 0.0)) continue;
      for (Index j = i + 1; j < n; ++j) {
        if (!(norms(j) > 0.0)) continue;
        const double r = centered.row(i).dot(centered.row(j)) / (norms(i) * norms(j));
        if (r >= tau) {
          fc(i, j) = 1;
          fc(j, i) = 1;
        }
      }
    }
    out.push_back(std::move(fc));
  }
  return out;
}

BinaryMatrix shared_edges(const std::vector<BinaryMatrix>& fcs) {
  if (fcs.empty()) throw ValidationError("shared_edges: no windows");
  BinaryMatrix shared = fcs.front();
  for (std::size_t w = 1; w < fcs.size(); ++w) {
    if (fcs[w].rows() != shared.rows() || fcs[w].cols() != shared.cols()) {
      throw ShapeError("shared_edges: windows differ in size");
    }
    shared = shared.cwiseMin(fcs[w]);
  }
  return shared;
}

namespace {

TripleCensus census_from_shared(const BinaryMatrix& shared, Index i, Index j) {
  TripleCensus f{0, 0, 0};
  if (i == j || shared(i, j) == 0) return f;
  for (Index k = 0; k < shared.rows(); ++k) {
    if (k == i || k == j) continue;
    const int edges = 1 + (shared(j, k) != 0 ? 1 : 0) + (shared(k, i) != 0 ? 1 : 0);
    ++f[static_cast<std::size_t>(edges - 1)];
  }
  return f;
}

}  // namespace

TripleCensus triple_census(const std::vector<BinaryMatrix>& fcs, Index i, Index j) {
  const BinaryMatrix shared = shared_edges(fcs);
  if (i < 0 || j < 0 || i >= shared.rows() || j >= shared.rows()) {
    throw ValidationError("triple_census: node index out of range");
  }
  return census_from_shared(shared, i, j);
}

Matrix raw_dynamic_fc(const std::vector<BinaryMatrix>& fcs, const std::array<double, 3>& alpha,
                      double tau_g) {
  for (double a : alpha) {
    if (a < 0.0) throw ValidationError("global_dynamic_fc: alpha must be nonnegative");
  }
  const BinaryMatrix shared = shared_edges(fcs);
  const Index n = shared.rows();
  Matrix out = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (shared(i, j) == 0) continue;
      const TripleCensus f = census_from_shared(shared, i, j);
      const double value = alpha[0] * f[0] + alpha[1] * f[1] + alpha[2] * f[2];
      if (value < tau_g) continue;
      out(i, j) = value;
      out(j, i) = value;
    }
  }
  return out;
}

Matrix global_dynamic_fc(const std::vector<BinaryMatrix>& fcs, const std::array<double, 3>& alpha,
                         double tau_g) {
  return global_max_normalize(raw_dynamic_fc(fcs, alpha, tau_g));
}

HeteroGraph augment_subject(const SubjectRaw& subject, const HeteroGraph& hg,
                            const GraphConfig& graph_config, const AugmentConfig& config) {
  if (subject.id != hg.subject_id) {
    throw ValidationError("augment_subject: subject '" + subject.id + "' does not match graph '" +
                          hg.subject_id + "'");
  }
  const WindowSet ws = sliding_windows(subject.fmri_series, config.window_width, config.window_stride);
  const auto fcs = window_fcs(ws, config.window_threshold);

  HeteroGraph out;
  out.subject_id = hg.subject_id;
  out.label = hg.label;
  out.augmented = true;
  out.x_f = hg.x_f;
  out.x_d = hg.x_d;
  out.a_d = hg.a_d;
  out.a_f = global_dynamic_fc(fcs, config.alpha, config.global_threshold);
  out.a_fd = hetero_meta_path(out.a_f, out.a_d, graph_config);
  return out;
}

}  // namespace hetfuse
