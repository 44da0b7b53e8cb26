#pragma once

// Cross-validation driver and interpretability export.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetfuse/gradcheck.hpp"
#include "hetfuse/metrics.hpp"
#include "hetfuse/train.hpp"

namespace hetfuse {

// One fold: subject indices on each side of the split.
struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Stratified k-fold partition. Each class is shuffled with `seed` and dealt
// round-robin, so per-fold class counts differ by at most one. Throws
// ValidationError when a class has fewer than k subjects.
std::vector<FoldSplit> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

// Resolves explicit folds given as subject ids. An empty `train` list means
// "every subject not in val". Unknown ids raise ValidationError; a subject on
// both sides of a fold raises LeakageError.
struct NamedFold {
  std::vector<std::string> train;
  std::vector<std::string> val;
};
std::vector<FoldSplit> resolve_folds(std::span<const Sample> dataset, std::span<const NamedFold> folds);

// What a trainer hands back for one fold.
struct FoldOutcome {
  std::vector<double> val_scores;  // P(label 1), parallel to the validation split
  std::optional<ModelParams> params;
  int best_epoch = -1;
  std::vector<EpochRecord> curves;
  int train_graphs = 0;
  int augmented_graphs = 0;
};

using Trainer = std::function<FoldOutcome(std::span<const Sample> train, std::span<const Sample> val,
                                          const ExperimentConfig& config)>;

// The default trainer: train_fold, reporting the best-validation-accuracy
// epoch, or the final one when config.train.report_final_epoch is set.
Trainer model_trainer();

// Column-softmax assignment of the first pooling layer for one subject.
struct AssignmentRecord {
  std::string subject_id;
  int label = 0;
  std::array<Matrix, 2> assignment;           // indexed by NodeType: N_t x N_t'
  std::array<std::vector<int>, 2> dominant;  // argmax cluster per ROI
};

std::vector<AssignmentRecord> export_pool_assignments(const ModelParams& params, std::span<const Sample> samples,
                                                      bool identity_pool = false);

struct FoldResult {
  int fold = 0;
  std::vector<std::string> val_ids;
  std::vector<int> labels;
  std::vector<double> scores;
  BinaryMetrics metrics;
  std::vector<std::pair<double, double>> roc;
  int best_epoch = -1;
  int train_graphs = 0;
  int augmented_graphs = 0;
  std::vector<EpochRecord> curves;
  std::vector<AssignmentRecord> assignments;
  std::optional<ModelParams> params;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
  int count = 0;
};

struct FoldReport {
  std::vector<FoldResult> folds;
  Summary acc, sen, spe, auc;  // auc over folds where it is defined
  Confusion confusion;         // summed over folds
};

Summary summarize(std::span<const double> values);

struct CvOptions {
  int threads = 0;  // 0: one per hardware thread, capped at the fold count
  bool export_assignments = true;
};

// Stratified k-fold (k = config.folds, shuffled with config.train.seed).
// Fold f trains with seed mix(config.train.seed, f).
FoldReport kfold_cv(std::span<const Sample> dataset, const ExperimentConfig& config, const Trainer& trainer,
                    const CvOptions& options = {});

// Same, with an explicit partition.
FoldReport run_folds(std::span<const Sample> dataset, std::span<const FoldSplit> folds,
                     const ExperimentConfig& config, const Trainer& trainer, const CvOptions& options = {});

// ---- gradient verification ------------------------------------------------

// A graph with n ROIs per modality built from a two-community synthetic
// subject.
HeteroGraph small_graph(int n, std::uint64_t seed);

// Cross-entropy of the full forward pass (evaluation mode) against central
// finite differences, perturbing every parameter entry.
ad::GradCheckReport model_gradient_check(const HeteroGraph& graph, const ModelConfig& base, std::uint64_t seed,
                                         double tol);

// Every primitive (tolerance primitive_tol) followed by the full model on a
// 6+6-node graph (tolerance model_tol).
std::vector<ad::GradCheckReport> gradient_suite(std::uint64_t seed, double primitive_tol = 1e-4,
                                                double model_tol = 1e-3);

}  // namespace hetfuse
