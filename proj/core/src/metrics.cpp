#include "hetfuse/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hetfuse/errors.hpp"

namespace hetfuse {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("metrics: " + std::to_string(scores.size()) + " scores but " +
                          std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("metrics: labels must be 0 or 1");
  }
}

double ratio(int num, int den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

}  // namespace

BinaryMetrics metrics(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  BinaryMetrics m;
  Confusion& c = m.confusion;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= kDecisionThreshold;
    if (labels[i] == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  m.acc = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
  m.sen = ratio(c.tp, c.tp + c.fn);
  m.spe = ratio(c.tn, c.tn + c.fp);
  m.auc = roc_auc(scores, labels);
  return m;
}

std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) return {};

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<std::pair<double, double>> curve{{0.0, 0.0}};
  int tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    // tied scores move the curve diagonally in one step
    while (k < order.size() && scores[order[k]] == s) {
      labels[order[k]] == 1 ? ++tp : ++fp;
      ++k;
    }
    curve.emplace_back(fp / neg, tp / pos);
  }
  return curve;
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const auto curve = roc_curve(scores, labels);
  if (curve.empty()) return std::nullopt;
  double area = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    area += (curve[k].first - curve[k - 1].first) * (curve[k].second + curve[k - 1].second) / 2.0;
  }
  return area;
}

}  // namespace hetfuse
