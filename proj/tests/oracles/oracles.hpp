#pragma once

// Brute-force reference computations for tests. Nothing here calls into the
// library; inputs and outputs are plain Eigen matrices and std containers.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;

// Textbook correlation: sample covariance over product of sample standard
// deviations, accumulated in long double.
Mat pearson(const Mat& series);

// Zero entries below tau, zero the diagonal, divide by the largest survivor.
Mat mask_then_scale(const Mat& raw, double tau);

// Sum, clamp negatives, divide by the maximum.
Mat sum_then_scale(const Mat& a, const Mat& b);

// Cosine similarity of row i of a_f with row j of a_d, clamped at 0.
double cosine(const Mat& a_f, const Mat& a_d, int i, int j);

// Row-wise top-k by rank: entry (i,j) is kept when fewer than k entries of
// row i are strictly larger or equal with a lower column index.
Mat topk_similarity(const Mat& a_f, const Mat& a_d, int k);

// Enumerates every unordered triple and marks the three pairs of any
// triangle present (weights > 0) in both graphs.
Mat shared_triangles(const Mat& a_f, const Mat& a_d);

// Block matrix [[a_f, a_fd], [a_fd^T, a_d]] filled entry by entry.
Mat block_assemble(const Mat& a_f, const Mat& a_d, const Mat& a_fd);

Mat dense_product(const Mat& a, const Mat& b);

// Columns [k*stride, k*stride + width) for every full window.
std::vector<Mat> slice_windows(const Mat& series, int width, int stride);

// For edge (i,j): per third node k, count edges of {(i,j),(j,k),(k,i)} that
// are present in every window; tally when (i,j) itself is among them.
using Binary = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
std::array<int, 3> triple_census(const std::vector<Binary>& windows, int i, int j);

// Fraction of (positive, negative) pairs ranked correctly, ties counting 1/2.
double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct Confusion {
  int tp = 0, tn = 0, fp = 0, fn = 0;
};
Confusion confusion(const std::vector<double>& scores, const std::vector<int>& labels, double threshold);

// Central differences of a scalar function of one matrix.
Mat finite_difference(const std::function<double(const Mat&)>& f, const Mat& x, double step);

// Adjusted Rand index between two labelings of the same items.
double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b);

struct Deviation {
  double max_abs = 0.0;
  double max_rel = 0.0;
};
Deviation deviation(const Mat& main, const Mat& reference);

struct OracleReport {
  std::string name;
  double main_value = 0.0;
  double oracle_value = 0.0;
  Deviation dev;
  double tolerance = 0.0;
  bool passed = false;
};

}  // namespace oracle
