#pragma once

// Per-subject graph construction: functional and structural homo-meta-paths
// and the cross-modal hetero-meta-path, assembled into one heterogeneous
// graph with two node types (fMRI ROIs, DTI ROIs).

#include <string>
#include <utility>

#include "hetfuse/autodiff.hpp"

namespace hetfuse {

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct SubjectRaw {
  std::string id;
  Matrix fmri_series;   // N x T mean series per ROI
  Matrix dti_features;  // N x D radiomic features per ROI
  Matrix sc_counts;     // N x N fiber counts, symmetric, zero diagonal
  int label = 0;

  Index rois() const { return fmri_series.rows(); }
};

enum class Modality { Fmri, Dti };

struct ModalityGraph {
  Matrix features;
  Matrix adjacency;
  Modality modality = Modality::Fmri;
};

// Two typed node sets. a_fd holds the fMRI->DTI meta-path; the DTI->fMRI
// meta-path is its transpose and is never stored separately.
struct HeteroGraph {
  std::string subject_id;
  Matrix x_f;
  Matrix x_d;
  Matrix a_f;
  Matrix a_d;
  Matrix a_fd;
  int label = 0;
  bool augmented = false;

  Index n_fmri() const { return x_f.rows(); }
  Index n_dti() const { return x_d.rows(); }
  Matrix a_df() const { return a_fd.transpose(); }
  // [[a_f, a_fd], [a_fd^T, a_d]]
  Matrix block_adjacency() const;
};

struct GraphConfig {
  double fc_threshold = 0.2;
  double sc_threshold = 5.0;
  int top_k = 8;
  bool community_paths = true;
};

// Throws ValidationError naming the first ROI whose series has zero variance.
Matrix pearson_fc(const Matrix& series);

// Divides by the largest entry; an all-zero (or non-positive) matrix is
// returned as zeros.
Matrix global_max_normalize(const Matrix& m);

// Zeroes entries below tau and the diagonal, then global-max normalizes.
Matrix threshold_normalize(const Matrix& raw, double tau);

// Cosine similarity of connection patterns (rows), negatives clamped to 0.
// Rows with zero norm have similarity 0 to everything.
Matrix connection_similarity(const Matrix& a_f, const Matrix& a_d);

// Node-level cross-modal coupling: keeps the top-k similarities per fMRI row
// (ties go to the lower column index).
Matrix node_level_hetero(const Matrix& a_f, const Matrix& a_d, int k);

// 1 at (i,j) when i and j share a triangle present in both graphs.
Matrix community_level_hetero(const Matrix& a_f, const Matrix& a_d);

Matrix combine_hetero(const Matrix& node_part, const Matrix& community_part);

// Cross-modal meta-path from the two homo-meta-paths under `config`.
Matrix hetero_meta_path(const Matrix& a_f, const Matrix& a_d, const GraphConfig& config);

std::pair<ModalityGraph, ModalityGraph> modality_graphs(const SubjectRaw& subject,
                                                        const GraphConfig& config);

HeteroGraph assemble(const SubjectRaw& subject, const GraphConfig& config);

// Checks shapes and the SC invariants; throws ValidationError.
void validate_subject(const SubjectRaw& subject);

}  // namespace hetfuse
