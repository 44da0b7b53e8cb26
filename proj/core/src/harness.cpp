#include "hetfuse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <random>
#include <thread>

#include "hetfuse/seed.hpp"
#include "hetfuse/synthetic.hpp"

namespace hetfuse {

std::vector<FoldSplit> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("folds: k must be >= 2");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("folds: labels must be 0 or 1");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (static_cast<int>(by_class[c].size()) < k) {
      throw ValidationError("folds: class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                            " subjects, fewer than k = " + std::to_string(k));
    }
  }
  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  std::size_t dealt = 0;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members = by_class[c];
    std::mt19937_64 rng(mix_seed(seed, 0xf01d, c));
    std::shuffle(members.begin(), members.end(), rng);
    // continue dealing where the previous class stopped so fold sizes stay balanced
    for (std::size_t idx : members) folds[dealt++ % folds.size()].val.push_back(idx);
  }
  for (FoldSplit& f : folds) {
    std::sort(f.val.begin(), f.val.end());
    std::size_t v = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (v < f.val.size() && f.val[v] == i) {
        ++v;
      } else {
        f.train.push_back(i);
      }
    }
  }
  return folds;
}

std::vector<FoldSplit> resolve_folds(std::span<const Sample> dataset, std::span<const NamedFold> folds) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!index.emplace(dataset[i].graph.subject_id, i).second) {
      throw ValidationError("dataset: duplicate subject id '" + dataset[i].graph.subject_id + "'");
    }
  }
  auto lookup = [&](const std::string& id, std::size_t fold) {
    auto it = index.find(id);
    if (it == index.end()) {
      throw ValidationError("fold " + std::to_string(fold) + ": unknown subject id '" + id + "'");
    }
    return it->second;
  };
  std::vector<FoldSplit> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    FoldSplit split;
    std::vector<char> in_val(dataset.size(), 0);
    for (const std::string& id : folds[f].val) {
      const std::size_t i = lookup(id, f);
      in_val[i] = 1;
      split.val.push_back(i);
    }
    if (folds[f].train.empty()) {
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (!in_val[i]) split.train.push_back(i);
      }
    } else {
      for (const std::string& id : folds[f].train) {
        const std::size_t i = lookup(id, f);
        if (in_val[i]) {
          throw LeakageError("fold " + std::to_string(f) + ": subject '" + id +
                             "' is in both the training and validation lists");
        }
        split.train.push_back(i);
      }
    }
    if (split.val.empty() || split.train.empty()) {
      throw ValidationError("fold " + std::to_string(f) + ": both splits must be non-empty");
    }
    out.push_back(std::move(split));
  }
  return out;
}

Trainer model_trainer() {
  return [](std::span<const Sample> train, std::span<const Sample> val, const ExperimentConfig& config) {
    FoldTraining t = train_fold(train, val, config);
    FoldOutcome o;
    o.curves = std::move(t.curves);
    o.train_graphs = t.train_graphs;
    o.augmented_graphs = t.augmented_graphs;
    if (config.train.report_final_epoch) {
      o.val_scores = std::move(t.final_val_scores);
      o.best_epoch = config.train.epochs - 1;
      o.params = std::move(t.final_params);
    } else {
      o.val_scores = std::move(t.best_val_scores);
      o.best_epoch = t.best_epoch;
      o.params = std::move(t.best_params);
    }
    return o;
  };
}

std::vector<AssignmentRecord> export_pool_assignments(const ModelParams& params, std::span<const Sample> samples,
                                                      bool identity_pool) {
  std::vector<AssignmentRecord> out;
  for (const Sample& s : samples) {
    ad::Tape tape;
    const BoundModel model = bind(tape, params, false);
    ForwardOptions fo;
    fo.identity_pool = identity_pool;
    ForwardTrace trace;
    forward(tape, s.graph, model, params.config(), fo, &trace);
    AssignmentRecord rec;
    rec.subject_id = s.graph.subject_id;
    rec.label = s.graph.label;
    rec.assignment = trace.layers.front().pool.assignment;
    for (int t = 0; t < 2; ++t) {
      const Matrix& d = rec.assignment[t];
      for (Index r = 0; r < d.rows(); ++r) {
        Index best = 0;
        d.row(r).maxCoeff(&best);
        rec.dominant[t].push_back(static_cast<int>(best));
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

namespace {

std::vector<Sample> gather(std::span<const Sample> dataset, std::span<const std::size_t> idx) {
  std::vector<Sample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(dataset[i]);
  return out;
}

FoldResult run_one(std::span<const Sample> dataset, const FoldSplit& split, int fold, const ExperimentConfig& config,
                   const Trainer& trainer, const CvOptions& options) {
  const std::vector<Sample> train = gather(dataset, split.train);
  const std::vector<Sample> val = gather(dataset, split.val);
  check_disjoint(train, val);

  ExperimentConfig fold_config = config;
  fold_config.train.seed = mix_seed(config.train.seed, 0xf0, fold);
  FoldOutcome o = trainer(train, val, fold_config);
  if (o.val_scores.size() != val.size()) {
    throw RuntimeError("fold " + std::to_string(fold) + ": trainer returned " + std::to_string(o.val_scores.size()) +
                       " scores for " + std::to_string(val.size()) + " validation subjects");
  }

  FoldResult r;
  r.fold = fold;
  for (const Sample& s : val) {
    r.val_ids.push_back(s.graph.subject_id);
    r.labels.push_back(s.graph.label);
  }
  r.scores = std::move(o.val_scores);
  r.metrics = metrics(r.scores, r.labels);
  r.roc = roc_curve(r.scores, r.labels);
  r.best_epoch = o.best_epoch;
  r.train_graphs = o.train_graphs;
  r.augmented_graphs = o.augmented_graphs;
  r.curves = std::move(o.curves);
  if (o.params && options.export_assignments) r.assignments = export_pool_assignments(*o.params, val);
  r.params = std::move(o.params);
  return r;
}

}  // namespace

FoldReport run_folds(std::span<const Sample> dataset, std::span<const FoldSplit> folds, const ExperimentConfig& config,
                     const Trainer& trainer, const CvOptions& options) {
  if (folds.empty()) throw ValidationError("cross-validation: no folds");
  std::vector<FoldResult> results(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());

  unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(folds.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t f = next++; f < folds.size(); f = next++) {
      try {
        results[f] = run_one(dataset, folds[f], static_cast<int>(f), config, trainer, options);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  FoldReport report;
  std::vector<double> acc, sen, spe, auc;
  for (FoldResult& r : results) {
    acc.push_back(r.metrics.acc);
    sen.push_back(r.metrics.sen);
    spe.push_back(r.metrics.spe);
    if (r.metrics.auc) auc.push_back(*r.metrics.auc);
    report.confusion.tp += r.metrics.confusion.tp;
    report.confusion.tn += r.metrics.confusion.tn;
    report.confusion.fp += r.metrics.confusion.fp;
    report.confusion.fn += r.metrics.confusion.fn;
    report.folds.push_back(std::move(r));
  }
  report.acc = summarize(acc);
  report.sen = summarize(sen);
  report.spe = summarize(spe);
  report.auc = summarize(auc);
  return report;
}

FoldReport kfold_cv(std::span<const Sample> dataset, const ExperimentConfig& config, const Trainer& trainer,
                    const CvOptions& options) {
  config.validate();
  std::vector<int> labels;
  for (const Sample& s : dataset) labels.push_back(s.graph.label);
  const std::vector<FoldSplit> folds = stratified_folds(labels, config.folds, config.train.seed);
  return run_folds(dataset, folds, config, trainer, options);
}

HeteroGraph small_graph(int n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_control = 1;
  spec.n_patient = 0;
  spec.n_rois = n;
  spec.n_communities = 2;
  spec.series_length = 40;
  spec.feature_width = 3;
  spec.shifted_rois = 0;
  spec.seed = seed;
  GraphConfig gc;
  gc.top_k = std::min(2, n);
  return assemble(generate_synthetic(spec).front(), gc);
}

ad::GradCheckReport model_gradient_check(const HeteroGraph& graph, const ModelConfig& base, std::uint64_t seed,
                                         double tol) {
  const ModelConfig config = ModelConfig::for_graph(graph, base);
  const ModelParams params = ModelParams::initialize(config, seed);
  const ad::MultiScalarFn loss = [&](ad::Tape& tape, std::span<const ad::Tensor> xs) {
    const BoundModel model = bind_leaves(params, std::vector<ad::Tensor>(xs.begin(), xs.end()));
    return cross_entropy(forward(tape, graph, model, config), graph.label);
  };
  ad::GradCheckReport r = ad::grad_check(loss, params.values(), tol);
  r.label = "model";
  return r;
}

std::vector<ad::GradCheckReport> gradient_suite(std::uint64_t seed, double primitive_tol, double model_tol) {
  std::vector<ad::GradCheckReport> out = ad::primitive_gradient_suite(seed, primitive_tol);
  ModelConfig small;
  small.hidden = 4;
  small.heads = 2;
  small.semantic_dim = 4;
  small.mlp_hidden = 4;
  out.push_back(model_gradient_check(small_graph(6, seed), small, mix_seed(seed, 7), model_tol));
  return out;
}

}  // namespace hetfuse
