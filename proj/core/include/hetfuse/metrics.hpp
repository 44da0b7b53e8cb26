#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace hetfuse {

struct Confusion {
  int tp = 0, tn = 0, fp = 0, fn = 0;
};

struct BinaryMetrics {
  double acc = 0.0;
  double sen = 0.0;
  double spe = 0.0;
  std::optional<double> auc;  // absent when only one class is present
  Confusion confusion;
};

inline constexpr double kDecisionThreshold = 0.5;

// Scores are probabilities of the positive (patient) class, label 1.
// A score >= 0.5 predicts positive.
BinaryMetrics metrics(std::span<const double> scores, std::span<const int> labels);

// (false-positive rate, true-positive rate) from (0,0) to (1,1), one point
// per distinct score threshold. Empty when a class is missing.
std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores, std::span<const int> labels);

// Trapezoidal area under roc_curve.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace hetfuse
