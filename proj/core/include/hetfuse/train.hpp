#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetfuse/augment.hpp"
#include "hetfuse/autodiff.hpp"
#include "hetfuse/model.hpp"

namespace hetfuse {

struct TrainConfig {
  double lr0 = 1e-4;
  double weight_decay = 1e-4;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool augment_minority = false;
  double augmentation_ratio = 1.0;  // fraction of minority-class training subjects augmented
  // Report validation results of the last epoch instead of the epoch with
  // the best validation accuracy.
  bool report_final_epoch = false;
};

// Everything a cross-validated run needs. Model widths and node counts are
// filled in from the data; the remaining model fields are hyperparameters.
struct ExperimentConfig {
  GraphConfig graph;
  AugmentConfig augment;
  ModelConfig model;
  TrainConfig train;
  int folds = 5;

  void validate() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  long step = 0;

  static OptimizerState zeros_like(std::span<const Matrix> params);
};

// -log softmax(logits)[label] as a 1x1 tensor.
ad::Tensor cross_entropy(const ad::Tensor& logits, int label);

// Decoupled weight decay (p *= 1 - lr*wd) followed by a bias-corrected Adam
// update.
void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, OptimizerState& state, double lr,
               double weight_decay, const AdamConfig& adam = {});

// lr0 * (1 + cos(pi * step / total)) / 2
double cosine_lr(int step, int total, double lr0);

// A subject's graph plus, when available, its raw data (needed to build an
// augmented copy).
struct Sample {
  HeteroGraph graph;
  std::optional<SubjectRaw> raw;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  std::optional<double> val_auc;
};

struct FoldTraining {
  ModelParams final_params;
  ModelParams best_params;  // snapshot at best_epoch
  int best_epoch = -1;      // highest validation accuracy, earliest on ties
  std::vector<EpochRecord> curves;
  std::vector<double> best_val_scores;  // P(label 1) per validation sample at best_epoch
  std::vector<double> final_val_scores;
  int train_graphs = 0;       // including augmented copies
  int augmented_graphs = 0;
};

// Labels of the graphs the fold would train on after optional minority
// augmentation; exposed for bookkeeping checks.
std::vector<HeteroGraph> training_graphs(std::span<const Sample> train, const ExperimentConfig& config,
                                         std::uint64_t seed);

// Throws LeakageError when a subject id occurs in both splits.
void check_disjoint(std::span<const Sample> train, std::span<const Sample> val);

FoldTraining train_fold(std::span<const Sample> train, std::span<const Sample> val,
                        const ExperimentConfig& config);

// Class-1 probability for each sample.
std::vector<double> score_samples(std::span<const Sample> samples, const ModelParams& params);

}  // namespace hetfuse
