#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "hetfuse/harness.hpp"
#include "hetfuse/metrics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace hetfuse {
namespace {

Trainer constant_trainer(double score) {
  return [score](std::span<const Sample>, std::span<const Sample> val, const ExperimentConfig&) {
    FoldOutcome o;
    o.val_scores.assign(val.size(), score);
    return o;
  };
}

std::vector<Sample> label_only(int controls, int patients) {
  std::vector<Sample> out;
  for (int i = 0; i < controls + patients; ++i) {
    Sample s;
    s.graph.subject_id = "s" + std::to_string(i);
    s.graph.label = i < controls ? 0 : 1;
    out.push_back(std::move(s));
  }
  return out;
}

TEST(StratifiedFolds, PartitionAndBalance) {
  std::vector<int> labels(23, 0);
  std::fill(labels.begin() + 14, labels.end(), 1);
  const auto folds = stratified_folds(labels, 5, 3);
  ASSERT_EQ(folds.size(), 5U);
  std::vector<int> seen(labels.size(), 0);
  std::vector<int> per_class[2];
  for (const FoldSplit& f : folds) {
    EXPECT_EQ(f.train.size() + f.val.size(), labels.size());
    int counts[2] = {0, 0};
    for (std::size_t i : f.val) {
      ++seen[i];
      ++counts[labels[i]];
    }
    for (std::size_t i : f.train) EXPECT_EQ(std::count(f.val.begin(), f.val.end(), i), 0);
    per_class[0].push_back(counts[0]);
    per_class[1].push_back(counts[1]);
  }
  for (int v : seen) EXPECT_EQ(v, 1);
  for (const auto& c : per_class) {
    EXPECT_LE(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()), 1);
  }
  EXPECT_EQ(stratified_folds(labels, 5, 3)[2].val, folds[2].val);
  EXPECT_THROW(stratified_folds(std::vector<int>{0, 0, 0, 1}, 2, 0), ValidationError);
}

TEST(KfoldCv, ConstantClassifierBaseline) {
  const auto data = label_only(12, 8);
  ExperimentConfig cfg;
  cfg.folds = 4;
  const FoldReport r = kfold_cv(data, cfg, constant_trainer(0.7), {.threads = 2, .export_assignments = false});
  ASSERT_EQ(r.folds.size(), 4U);
  for (const FoldResult& f : r.folds) {
    const double prevalence = static_cast<double>(std::count(f.labels.begin(), f.labels.end(), 1)) /
                              static_cast<double>(f.labels.size());
    EXPECT_DOUBLE_EQ(f.metrics.acc, prevalence);
    EXPECT_EQ(f.metrics.sen, 1.0);
    EXPECT_EQ(f.metrics.spe, 0.0);
    ASSERT_TRUE(f.metrics.auc);
    EXPECT_EQ(*f.metrics.auc, 0.5);
  }
  EXPECT_DOUBLE_EQ(r.acc.mean, 0.4);
  EXPECT_EQ(r.confusion.tp + r.confusion.fp, 20);
}

TEST(KfoldCv, TrainerExceptionsSurface) {
  const auto data = label_only(6, 6);
  ExperimentConfig cfg;
  cfg.folds = 3;
  Trainer bad = [](std::span<const Sample>, std::span<const Sample>, const ExperimentConfig&) -> FoldOutcome {
    throw ValidationError("boom");
  };
  EXPECT_THROW(kfold_cv(data, cfg, bad, {.threads = 2}), ValidationError);
  Trainer truncated = [](std::span<const Sample>, std::span<const Sample>, const ExperimentConfig&) {
    return FoldOutcome{};
  };
  EXPECT_THROW(kfold_cv(data, cfg, truncated), RuntimeError);
}

TEST(Metrics, PerfectAndInverted) {
  const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  const BinaryMetrics good = metrics(scores, labels);
  EXPECT_EQ(good.acc, 1.0);
  EXPECT_EQ(good.sen, 1.0);
  EXPECT_EQ(good.spe, 1.0);
  EXPECT_EQ(*good.auc, 1.0);
  const BinaryMetrics bad = metrics(scores, std::vector<int>{0, 0, 1, 1});
  EXPECT_EQ(bad.acc, 0.0);
  EXPECT_EQ(*bad.auc, 0.0);
  EXPECT_EQ(metrics(std::vector<double>{0.5}, std::vector<int>{1}).confusion.tp, 1);
}

TEST(Metrics, AucMatchesPairwiseCount) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coarse(0, 4);
  std::bernoulli_distribution coin(0.5);
  int trials = 0;
  while (trials < 100) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
      scores.push_back(coarse(rng) / 4.0);  // coarse grid forces ties
      labels.push_back(coin(rng) ? 1 : 0);
    }
    const auto auc = roc_auc(scores, labels);
    const int pos = std::accumulate(labels.begin(), labels.end(), 0);
    if (pos == 0 || pos == 10) {
      EXPECT_FALSE(auc);
      continue;
    }
    ASSERT_TRUE(auc);
    EXPECT_NEAR(*auc, oracle::pairwise_auc(scores, labels), 1e-12);
    const BinaryMetrics m = metrics(scores, labels);
    const oracle::Confusion c = oracle::confusion(scores, labels, 0.5);
    EXPECT_EQ(m.confusion.tp, c.tp);
    EXPECT_EQ(m.confusion.fp, c.fp);
    EXPECT_EQ(m.confusion.tn, c.tn);
    EXPECT_EQ(m.confusion.fn, c.fn);
    ++trials;
  }
}

TEST(Metrics, SingleClassHasNoAuc) {
  const BinaryMetrics m = metrics(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 0});
  EXPECT_FALSE(m.auc);
  EXPECT_EQ(m.acc, 0.5);
  EXPECT_TRUE(roc_curve(std::vector<double>{0.1}, std::vector<int>{1}).empty());
}

TEST(Summarize, PopulationStd) {
  const std::vector<double> v{1.0, 3.0};
  const Summary s = summarize(v);
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.std, 1.0);
  EXPECT_EQ(s.count, 2);
}

TEST(ResolveFolds, LeakageAndUnknownIds) {
  const auto data = label_only(3, 3);
  std::vector<NamedFold> folds{{{}, {"s0", "s3"}}};
  const auto resolved = resolve_folds(data, folds);
  EXPECT_EQ(resolved[0].train.size(), 4U);
  folds = {{{"s0", "s1"}, {"s1", "s4"}}};
  EXPECT_THROW(resolve_folds(data, folds), LeakageError);
  folds = {{{}, {"nobody"}}};
  EXPECT_THROW(resolve_folds(data, folds), ValidationError);
}

TEST(Assignments, ColumnsSumToOneAndIdentityMapsToSelf) {
  ExperimentConfig cfg = testing::quick_config();
  const auto data = testing::cohort(testing::small_spec(2, 2, 5), cfg.graph);
  const ModelConfig mc = ModelConfig::for_graph(data.front().graph, cfg.model);
  const auto records = export_pool_assignments(ModelParams::initialize(mc, 1), data);
  ASSERT_EQ(records.size(), 4U);
  for (const AssignmentRecord& r : records) {
    for (const Matrix& d : r.assignment) {
      EXPECT_EQ(d.rows(), 8);
      EXPECT_EQ(d.cols(), 7);
      EXPECT_LT((d.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    }
  }

  ModelConfig ident = mc;
  ident.pool_ratio = 1.0;
  for (const AssignmentRecord& r : export_pool_assignments(ModelParams::initialize(ident, 1), data, true)) {
    for (const auto& dom : r.dominant) {
      for (std::size_t i = 0; i < dom.size(); ++i) EXPECT_EQ(dom[i], static_cast<int>(i));
    }
  }
}

TEST(Assignments, DominantClustersTrackPlantedCommunities) {
  // Communities of ROIs that share a latent course should tend to share a
  // dominant cluster after training; compare against shuffled communities.
  ExperimentConfig cfg = testing::quick_config();
  cfg.train.epochs = 20;
  SyntheticSpec spec = testing::small_spec(8, 8, 6);
  spec.n_rois = 12;
  spec.n_communities = 3;
  spec.shifted_rois = 0;
  const auto data = testing::cohort(spec, cfg.graph);
  const FoldTraining ft = train_fold(data, {}, cfg);
  const auto records = export_pool_assignments(ft.final_params, data);
  std::mt19937_64 rng(1);
  double ari = 0.0, shuffled = 0.0;
  for (const AssignmentRecord& r : records) {
    std::vector<int> planted = planted_communities(spec, r.label);
    ari += oracle::adjusted_rand(r.dominant[0], planted);
    for (int rep = 0; rep < 20; ++rep) {
      std::shuffle(planted.begin(), planted.end(), rng);
      shuffled += oracle::adjusted_rand(r.dominant[0], planted) / 20.0;
    }
  }
  ari /= static_cast<double>(records.size());
  shuffled /= static_cast<double>(records.size());
  EXPECT_GT(ari, 0.0);
  EXPECT_GT(ari, shuffled);
}

TEST(Synthetic, DeterministicAndSeedSensitive) {
  const SyntheticSpec spec = testing::small_spec(2, 2, 3);
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  ASSERT_EQ(a.size(), 4U);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].fmri_series, b[i].fmri_series);
    EXPECT_EQ(a[i].sc_counts, b[i].sc_counts);
    EXPECT_NO_THROW(validate_subject(a[i]));
  }
  EXPECT_EQ(a[0].id, "ctl000");
  EXPECT_EQ(a[3].id, "pat001");
  EXPECT_NE(generate_synthetic(testing::small_spec(2, 2, 4))[0].fmri_series, a[0].fmri_series);

  SyntheticSpec null = spec;
  null.contrast = 0.0;
  EXPECT_EQ(planted_communities(null, 0), planted_communities(null, 1));
  EXPECT_NE(planted_communities(spec, 0), planted_communities(spec, 1));
}

TEST(Synthetic, LinearBaselineSeparatesHighContrast) {
  SyntheticSpec spec;
  spec.seed = 2;
  const auto subjects = generate_synthetic(spec);
  const std::vector<int> community = planted_communities(spec, 0);
  std::vector<double> score;
  std::vector<int> labels;
  for (const SubjectRaw& s : subjects) {
    double v = 0.0;
    for (int r = 0; r < spec.n_rois; ++r) {
      if (community[static_cast<std::size_t>(r)] == 0) v += s.dti_features.row(r).mean();
    }
    score.push_back(v);
    labels.push_back(s.label);
  }
  EXPECT_GE(*roc_auc(score, labels), 0.95);
}

}  // namespace
}  // namespace hetfuse
