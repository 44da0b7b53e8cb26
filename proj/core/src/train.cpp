#include "hetfuse/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "hetfuse/metrics.hpp"
#include "hetfuse/seed.hpp"

namespace hetfuse {

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("config: " + what);
  };
  require(graph.top_k >= 1, "top-k must be >= 1");
  require(graph.fc_threshold >= 0.0 && graph.sc_threshold >= 0.0, "thresholds must be nonnegative");
  require(augment.window_width >= 3, "window-width must be >= 3");
  require(augment.window_stride >= 1, "window-stride must be >= 1");
  for (double a : augment.alpha) require(a >= 0.0, "alpha entries must be nonnegative");
  require(train.augmentation_ratio >= 0.0 && train.augmentation_ratio <= 1.0,
          "augmentation-ratio must lie in [0, 1]");
  require(train.lr0 >= 0.0, "lr0 must be nonnegative");
  require(train.weight_decay >= 0.0, "weight-decay must be nonnegative");
  require(train.epochs >= 1, "epochs must be >= 1");
  require(train.batch_size >= 1, "batch-size must be >= 1");
  require(folds >= 2, "folds must be >= 2");
  require(model.hidden > 0 && model.heads > 0 && model.semantic_dim > 0 && model.mlp_hidden > 0,
          "model widths must be positive");
  require(model.layers >= 1, "layers must be >= 1");
  require(model.pool_ratio > 0.0 && model.pool_ratio <= 1.0, "pool-ratio must lie in (0, 1]");
  require(model.dropout >= 0.0 && model.dropout < 1.0, "dropout must lie in [0, 1)");
}

OptimizerState OptimizerState::zeros_like(std::span<const Matrix> params) {
  OptimizerState s;
  for (const Matrix& p : params) {
    s.first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    s.second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  return s;
}

ad::Tensor cross_entropy(const ad::Tensor& logits, int label) {
  if (logits.rows() != 1) throw ShapeError("cross_entropy: logits must be a single row");
  if (label < 0 || label >= logits.cols()) {
    throw ValidationError("cross_entropy: label " + std::to_string(label) + " out of range");
  }
  return ad::scale(ad::slice_cols(ad::log_softmax_rows(logits), label, 1), -1.0);
}

void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, OptimizerState& state, double lr,
               double weight_decay, const AdamConfig& adam) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment counts differ");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - lr * weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = params[i];
    const Matrix& g = grads[i];
    if (g.rows() != p.rows() || g.cols() != p.cols()) {
      throw ShapeError("adam_step: gradient " + std::to_string(i) + " does not match its parameter");
    }
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = adam.beta1 * m + (1.0 - adam.beta1) * g;
    v = adam.beta2 * v + (1.0 - adam.beta2) * g.cwiseAbs2();
    if (decay != 1.0) p *= decay;
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + adam.eps);
  }
}

double cosine_lr(int step, int total, double lr0) {
  if (total <= 0 || step < 0 || step > total) {
    throw ValidationError("cosine_lr: step must lie in [0, total]");
  }
  return lr0 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total))) / 2.0;
}

void check_disjoint(std::span<const Sample> train, std::span<const Sample> val) {
  std::set<std::string> ids;
  for (const Sample& s : train) ids.insert(s.graph.subject_id);
  for (const Sample& s : val) {
    if (ids.contains(s.graph.subject_id)) {
      throw LeakageError("subject '" + s.graph.subject_id + "' appears in both training and validation splits");
    }
  }
}

namespace {

// Groups of graph indices that must land in the same batch: a subject and
// its augmented copy.
struct TrainingSet {
  std::vector<HeteroGraph> graphs;
  std::vector<std::vector<std::size_t>> units;
  int augmented = 0;
};

TrainingSet build_training_set(std::span<const Sample> train, const ExperimentConfig& config,
                               std::uint64_t seed) {
  TrainingSet ts;
  std::vector<char> augment(train.size(), 0);
  if (config.train.augment_minority) {
    int counts[2] = {0, 0};
    for (const Sample& s : train) {
      if (s.graph.label == 0 || s.graph.label == 1) ++counts[s.graph.label];
    }
    if (counts[0] != counts[1]) {
      const int minority = counts[0] < counts[1] ? 0 : 1;
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (train[i].graph.label == minority) candidates.push_back(i);
      }
      std::mt19937_64 rng(mix_seed(seed, 0xa11));
      std::shuffle(candidates.begin(), candidates.end(), rng);
      const auto take = static_cast<std::size_t>(
          std::llround(config.train.augmentation_ratio * static_cast<double>(candidates.size())));
      for (std::size_t k = 0; k < take && k < candidates.size(); ++k) augment[candidates[k]] = 1;
    }
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    std::vector<std::size_t> unit{ts.graphs.size()};
    ts.graphs.push_back(train[i].graph);
    if (augment[i]) {
      if (!train[i].raw) {
        throw ValidationError("subject '" + train[i].graph.subject_id +
                              "' has no raw series; cannot build an augmented graph");
      }
      unit.push_back(ts.graphs.size());
      ts.graphs.push_back(augment_subject(*train[i].raw, train[i].graph, config.graph, config.augment));
      ++ts.augmented;
    }
    ts.units.push_back(std::move(unit));
  }
  return ts;
}

struct Evaluation {
  std::vector<double> scores;
  double loss = 0.0;
};

Evaluation evaluate(std::span<const Sample> samples, const ModelParams& params) {
  Evaluation ev;
  for (const Sample& s : samples) {
    ad::Tape tape;
    const BoundModel model = bind(tape, params, false);
    const ad::Tensor logits = forward(tape, s.graph, model, params.config());
    ev.loss += cross_entropy(logits, s.graph.label).value()(0, 0);
    ev.scores.push_back(ad::row_softmax(logits).value()(0, 1));
  }
  if (!samples.empty()) ev.loss /= static_cast<double>(samples.size());
  return ev;
}

std::vector<int> labels_of(std::span<const Sample> samples) {
  std::vector<int> out;
  for (const Sample& s : samples) out.push_back(s.graph.label);
  return out;
}

}  // namespace

std::vector<HeteroGraph> training_graphs(std::span<const Sample> train, const ExperimentConfig& config,
                                         std::uint64_t seed) {
  return build_training_set(train, config, seed).graphs;
}

std::vector<double> score_samples(std::span<const Sample> samples, const ModelParams& params) {
  return evaluate(samples, params).scores;
}

FoldTraining train_fold(std::span<const Sample> train, std::span<const Sample> val,
                        const ExperimentConfig& config) {
  config.validate();
  if (train.empty()) throw ValidationError("train_fold: empty training split");
  check_disjoint(train, val);

  const std::uint64_t seed = config.train.seed;
  TrainingSet ts = build_training_set(train, config, seed);
  const ModelConfig model_config = ModelConfig::for_graph(ts.graphs.front(), config.model);
  ModelParams params = ModelParams::initialize(model_config, mix_seed(seed, 1));
  OptimizerState opt = OptimizerState::zeros_like(params.values());

  FoldTraining out;
  out.train_graphs = static_cast<int>(ts.graphs.size());
  out.augmented_graphs = ts.augmented;
  const std::vector<int> val_labels = labels_of(val);
  double best_acc = -1.0;

  std::vector<std::size_t> order(ts.units.size());
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, config.train.epochs, config.train.lr0);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 2, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t u = 0;
    std::uint64_t sample_counter = 0;
    while (u < order.size()) {
      std::vector<std::size_t> batch;
      while (u < order.size() && static_cast<int>(batch.size()) < config.train.batch_size) {
        for (std::size_t g : ts.units[order[u]]) batch.push_back(g);
        ++u;
      }
      std::vector<Matrix> grads;
      for (const Matrix& p : params.values()) grads.push_back(Matrix::Zero(p.rows(), p.cols()));
      for (std::size_t g : batch) {
        ad::Tape tape;
        const BoundModel model = bind(tape, params, true);
        ForwardOptions fo;
        fo.train = true;
        fo.dropout_seed = mix_seed(seed, 3, static_cast<std::uint64_t>(epoch), sample_counter++);
        const ad::Tensor logits = forward(tape, ts.graphs[g], model, model_config, fo);
        const ad::Tensor loss = cross_entropy(logits, ts.graphs[g].label);
        epoch_loss += loss.value()(0, 0);
        const ad::Gradients gr = tape.backward(loss);
        for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += gr[model.leaves[k]];
      }
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (Matrix& g : grads) g *= inv;
      adam_step(params.values(), grads, opt, lr, config.train.weight_decay);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = epoch_loss / static_cast<double>(ts.graphs.size());
    if (!val.empty()) {
      Evaluation ev = evaluate(val, params);
      const BinaryMetrics m = metrics(ev.scores, val_labels);
      rec.val_loss = ev.loss;
      rec.val_acc = m.acc;
      rec.val_auc = m.auc;
      if (m.acc > best_acc) {
        best_acc = m.acc;
        out.best_epoch = epoch;
        out.best_params = params;
        out.best_val_scores = std::move(ev.scores);
      }
    }
    out.curves.push_back(rec);
  }
  if (val.empty()) {
    out.best_epoch = config.train.epochs - 1;
    out.best_params = params;
  }
  out.final_val_scores = evaluate(val, params).scores;
  out.final_params = std::move(params);
  return out;
}

}  // namespace hetfuse
