// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hetfuse/harness.hpp"
#include "hetfuse/io.hpp"
#include "hetfuse/seed.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace hetfuse;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string num(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

std::vector<Sample> samples_of(const SyntheticSpec& spec, const GraphConfig& graph) {
  return testing::cohort(spec, graph);
}

FoldReport cross_validate(const SyntheticSpec& spec, const ExperimentConfig& config) {
  CvOptions options;
  options.export_assignments = false;
  return kfold_cv(samples_of(spec, config.graph), config, model_trainer(), options);
}

// ---- 1: gradients ---------------------------------------------------------

Outcome gradients() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const ad::GradCheckReport& r : gradient_suite(1)) {
    out.require(r.passed, r.label + " rel error " + std::to_string(r.max_rel_error));
    worst = std::max(worst, r.max_rel_error);
  }

  // Independent finite differences for a few parameter blocks of the model.
  const HeteroGraph g = small_graph(6, 2);
  ModelConfig base = testing::tiny_model();
  const ModelParams params = ModelParams::initialize(ModelConfig::for_graph(g, base), 5);
  for (std::size_t slot : {std::size_t{0}, params.size() / 2, params.size() - 2}) {
    auto loss_at = [&](const Matrix& value) {
      ModelParams p = params;
      p.values()[slot] = value;
      ad::Tape tape;
      const BoundModel m = bind(tape, p, false);
      return cross_entropy(forward(tape, g, m, p.config()), g.label).value()(0, 0);
    };
    ad::Tape tape;
    const BoundModel m = bind(tape, params, true);
    const ad::Tensor loss = cross_entropy(forward(tape, g, m, params.config()), g.label);
    const Matrix analytic = tape.backward(loss)[m.leaves[slot]];
    const Matrix numeric = oracle::finite_difference(loss_at, params.values()[slot], 1e-5);
    const double scale = std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-6});
    const double rel = (analytic - numeric).cwiseAbs().maxCoeff() / scale;
    out.require(rel < 1e-4, params.name(slot) + " vs independent differences: " + std::to_string(rel));
    worst = std::max(worst, rel);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.require(secs < 60.0, "took " + num(secs, 1) + " s");
  if (out.pass) out.detail = "worst rel error " + std::to_string(worst) + ", " + num(secs, 1) + " s";
  return out;
}

// ---- 2: graph construction --------------------------------------------------

Outcome graph_construction() {
  Outcome out;
  std::mt19937_64 rng(mix_seed(2026, 2));
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> density(0.2, 0.9);
  const int instances = 200;
  for (int trial = 0; trial < instances && out.pass; ++trial) {
    const int n = size(rng);
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    const Matrix a_f = testing::random_graph(rng, n, density(rng));
    const Matrix a_d = testing::random_graph(rng, n, density(rng));
    const Matrix node = node_level_hetero(a_f, a_d, k);
    const Matrix comm = community_level_hetero(a_f, a_d);
    const Matrix fd = combine_hetero(node, comm);
    const std::string at = " (instance " + std::to_string(trial) + ", N=" + std::to_string(n) + ")";
    out.require(node == oracle::topk_similarity(a_f, a_d, k), "top-k differs" + at);
    out.require(comm == oracle::shared_triangles(a_f, a_d), "shared triangles differ" + at);
    out.require(fd == oracle::sum_then_scale(node, comm), "combination differs" + at);

    HeteroGraph hg;
    hg.a_f = a_f;
    hg.a_d = a_d;
    hg.a_fd = fd;
    const Matrix block = hg.block_adjacency();
    out.require(block == oracle::block_assemble(a_f, a_d, fd), "block assembly differs" + at);
    out.require(block == Matrix(block.transpose()), "assembled adjacency not symmetric" + at);
  }
  // Full assembly from raw data against the standalone oracles.
  for (std::uint64_t seed = 0; seed < 20 && out.pass; ++seed) {
    const SubjectRaw s = testing::synthetic_subject(10, seed);
    GraphConfig cfg;
    cfg.top_k = 3;
    const HeteroGraph g = assemble(s, cfg);
    const Matrix a_f = oracle::mask_then_scale(oracle::pearson(s.fmri_series), cfg.fc_threshold);
    out.require(oracle::deviation(g.a_f, a_f).max_abs < 1e-12, "functional path off for subject seed " + std::to_string(seed));
    out.require(g.a_d == oracle::mask_then_scale(s.sc_counts, cfg.sc_threshold), "structural path differs");
  }
  if (out.pass) out.detail = std::to_string(instances) + " random instances with N <= 12 match exactly";
  return out;
}

// ---- 3: augmentation --------------------------------------------------------

Outcome augmentation() {
  Outcome out;
  out.require(sliding_windows(Matrix::Random(3, 100), 30, 5).windows.size() == 15, "T=100 should give 15 windows");
  bool threw = false;
  try {
    sliding_windows(Matrix::Random(3, 30), 30, 5);
  } catch (const ValidationError&) {
    threw = true;
  }
  out.require(threw, "series no longer than one window was accepted");

  const BinaryMatrix k6 = BinaryMatrix::Ones(6, 6) - BinaryMatrix::Identity(6, 6);
  out.require(triple_census({k6, k6}, 0, 1) == TripleCensus{0, 0, 4}, "census of a complete graph");
  out.require(raw_dynamic_fc({k6, k6}, {0.01, 0.02, 0.1}, 0.4)(0, 1) == 0.4, "value at tau_g not kept");
  BinaryMatrix a = BinaryMatrix::Zero(4, 4), b = BinaryMatrix::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1;
  b(2, 3) = b(3, 2) = 1;
  out.require(raw_dynamic_fc({a, b}, {1, 1, 1}, 0.0).isZero(0.0), "no shared edges must give zeros");

  std::mt19937_64 rng(mix_seed(2026, 3));
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 100 && out.pass; ++trial) {
    std::vector<BinaryMatrix> fcs;
    for (int w = 0; w < 3; ++w) {
      BinaryMatrix m = BinaryMatrix::Zero(8, 8);
      for (Index i = 0; i < 8; ++i) {
        for (Index j = i + 1; j < 8; ++j) m(i, j) = m(j, i) = coin(rng) || coin(rng) ? 1 : 0;
      }
      fcs.push_back(m);
    }
    const std::vector<oracle::Binary> ref(fcs.begin(), fcs.end());
    for (Index i = 0; i < 8; ++i) {
      for (Index j = 0; j < 8; ++j) {
        out.require(triple_census(fcs, i, j) == oracle::triple_census(ref, static_cast<int>(i), static_cast<int>(j)),
                    "census differs from enumeration");
      }
    }
  }

  int recomposed = 0;
  for (std::uint64_t seed = 0; seed < 10 && out.pass; ++seed) {
    const SubjectRaw s = testing::synthetic_subject(12, seed, 1, 100);
    GraphConfig gc;
    gc.top_k = 4;
    AugmentConfig ac;
    ac.window_width = 20;
    ac.window_stride = 4;
    ac.global_threshold = 0.1;
    const HeteroGraph g = assemble(s, gc);
    const HeteroGraph aug = augment_subject(s, g, gc, ac);
    out.require(aug.a_d == g.a_d, "structural path changed by augmentation");
    const Matrix block = aug.block_adjacency();
    out.require(Matrix(block.bottomLeftCorner(12, 12)) == Matrix(aug.a_fd.transpose()), "reverse path is not the transpose");
    out.require(aug.label == g.label && aug.subject_id == g.subject_id, "identity not carried over");
    const auto fcs = window_fcs(sliding_windows(s.fmri_series, 20, 4), ac.window_threshold);
    const BinaryMatrix shared = shared_edges(fcs);
    for (Index e = 0; e < aug.a_f.size(); ++e) {
      if (aug.a_f(e) != 0.0) out.require(shared(e) == 1, "dynamic edge not present in every window");
    }
    // Every surviving entry is alpha . f of the brute-force census; every
    // dropped shared edge scored below the threshold.
    const std::vector<oracle::Binary> ref(fcs.begin(), fcs.end());
    const Matrix raw = raw_dynamic_fc(fcs, ac.alpha, ac.global_threshold);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        if (i == j || shared(i, j) == 0) continue;
        const auto f = oracle::triple_census(ref, i, j);
        const double value = ac.alpha[0] * f[0] + ac.alpha[1] * f[1] + ac.alpha[2] * f[2];
        if (value >= ac.global_threshold) {
          out.require(raw(i, j) == value, "surviving entry is not alpha . f");
          recomposed++;
        } else {
          out.require(raw(i, j) == 0.0, "entry below the threshold survived");
        }
      }
    }
  }
  out.require(recomposed > 0, "no dynamic edge survived the threshold");
  if (out.pass) out.detail = "census and thresholds exact; " + std::to_string(recomposed) + " entries recomposed";
  return out;
}

// ---- 4: pooling -------------------------------------------------------------

HeteroGraph random_hetero(std::mt19937_64& rng, Index nf, Index nd, Index width) {
  HeteroGraph g;
  g.subject_id = "r";
  g.x_f = testing::random_matrix(rng, nf, width);
  g.x_d = testing::random_matrix(rng, nd, width);
  g.a_f = testing::random_graph(rng, nf, 0.4);
  g.a_d = testing::random_graph(rng, nd, 0.4);
  g.a_fd = testing::random_matrix(rng, nf, nd, 0.0, 1.0);
  return g;
}

Outcome pooling() {
  Outcome out;
  ModelConfig c;
  c.n_fmri = 90;
  c.n_dti = 90;
  const auto ladder = node_ladder(c);
  std::string ladder_text;
  for (const auto& [f, d] : ladder) ladder_text += (ladder_text.empty() ? "" : "->") + std::to_string(f + d);
  out.require(ladder_text == "180->144->116->94", "ladder " + ladder_text);

  std::mt19937_64 rng(mix_seed(2026, 4));
  for (int trial = 0; trial < 20 && out.pass; ++trial) {
    const HeteroGraph g = random_hetero(rng, 9, 7, 3);
    const ModelParams p = ModelParams::initialize(ModelConfig::for_graph(g, testing::tiny_model()), trial);
    ForwardTrace trace;
    predict_proba(g, p, &trace);
    const PoolTrace& pt = trace.layers[0].pool;
    const Index pf = pt.assignment[0].cols(), pd = pt.assignment[1].cols();
    out.require(pt.pooling.topRightCorner(9, pd).isZero(0.0) && pt.pooling.bottomLeftCorner(7, pf).isZero(0.0),
                "off-type blocks of the pooling matrix are not zero");
    const Matrix dense = oracle::dense_product(oracle::dense_product(pt.pooling.transpose(), g.block_adjacency()), pt.pooling);
    out.require(oracle::deviation(pt.a_fd, dense.topRightCorner(pf, pd)).max_abs < 1e-12, "pooled blocks off");
    const auto steps = node_ladder(p.config());
    for (std::size_t l = 0; l < trace.layers.size(); ++l) {
      out.require(trace.layers[l].pool.a_f.rows() == steps[l + 1].first &&
                      trace.layers[l].pool.a_d.rows() == steps[l + 1].second,
                  "pooled size off the ladder");
    }
  }

  const HeteroGraph g = random_hetero(rng, 6, 6, 3);
  ModelConfig base = testing::tiny_model();
  base.pool_ratio = 1.0;
  const ModelParams p = ModelParams::initialize(ModelConfig::for_graph(g, base), 3);
  ad::Tape tape;
  ForwardOptions fo;
  fo.identity_pool = true;
  ForwardTrace trace;
  forward(tape, g, bind(tape, p, false), p.config(), fo, &trace);
  for (const LayerTrace& lt : trace.layers) {
    out.require(lt.pool.a_f == g.a_f && lt.pool.a_d == g.a_d && lt.pool.a_fd == g.a_fd,
                "identity pooling changed the graph");
  }
  if (out.pass) out.detail = "ladder " + ladder_text + ", zero off-type blocks, identity case exact";
  return out;
}

// ---- 5: attention -----------------------------------------------------------

Outcome attention() {
  Outcome out;
  std::mt19937_64 rng(mix_seed(2026, 5));
  std::uniform_int_distribution<int> size(2, 10);
  int isolated_rows = 0;
  for (int trial = 0; trial < 100 && out.pass; ++trial) {
    HeteroGraph g = random_hetero(rng, size(rng), size(rng), 3);
    // isolate a node of each type from the other modality
    g.a_fd.row(0).setZero();
    g.a_fd.col(g.a_fd.cols() - 1).setZero();
    g.a_f.row(0).setZero();
    g.a_f.col(0).setZero();
    const ModelParams p = ModelParams::initialize(ModelConfig::for_graph(g, testing::tiny_model()), trial);
    ForwardTrace trace;
    out.require(predict_proba(g, p, &trace).allFinite(), "non-finite output");
    for (const LayerTrace& lt : trace.layers) {
      const HanTrace* traces[] = {&lt.han, &lt.pool.score};
      for (const HanTrace* h : traces) {
        for (std::size_t mp = 0; mp < 4; ++mp) {
          for (const Matrix& a : h->attention[mp]) {
            out.require(a.allFinite(), "non-finite attention");
            for (Index i = 0; i < a.rows(); ++i) {
              const double s = a.row(i).sum();
              if (s == 0.0) {
                out.require(a.row(i).isZero(0.0), "empty neighbourhood with nonzero weights");
                ++isolated_rows;
                continue;
              }
              out.require(std::abs(s - 1.0) < 1e-9, "attention row sums to " + std::to_string(s));
            }
          }
        }
        for (const Matrix& beta : h->semantic) {
          if (beta.size() == 0) continue;
          out.require(std::abs(beta.sum() - 1.0) < 1e-9, "semantic weights do not sum to 1");
        }
      }
    }
  }
  out.require(isolated_rows > 0, "no isolated node was exercised");
  if (out.pass) out.detail = "100 graphs, " + std::to_string(isolated_rows) + " empty neighbourhoods handled";
  return out;
}

// ---- 6: synthetic recovery ----------------------------------------------------

Outcome recovery() {
  Outcome out;
  const ExperimentConfig desk = io::load_config(HETFUSE_CONFIG_DIR "/desk.json");
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    ExperimentConfig cfg = desk;
    cfg.train.seed = seed;
    const FoldReport r = cross_validate(spec, cfg);
    out.require(r.acc.mean >= 0.90 && r.auc.mean >= 0.95,
                "seed " + std::to_string(seed) + ": acc " + num(r.acc.mean) + " auc " + num(r.auc.mean));
    detail += "seed " + std::to_string(seed) + " acc " + num(r.acc.mean, 2) + " auc " + num(r.auc.mean, 2) + "; ";
  }
  double null_auc = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.contrast = 0.0;
    ExperimentConfig cfg = desk;
    cfg.train.seed = seed;
    null_auc += cross_validate(spec, cfg).auc.mean / 5.0;
  }
  out.require(std::abs(null_auc - 0.5) <= 0.1, "contrast 0 mean auc " + num(null_auc));
  if (out.pass) out.detail = detail + "null auc " + num(null_auc);
  return out;
}

// ---- 7: imbalance -------------------------------------------------------------

Outcome imbalance() {
  Outcome out;
  const ExperimentConfig base = io::load_config(HETFUSE_CONFIG_DIR "/desk-imbalance.json");
  int improved = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticSpec spec;
    spec.n_control = 36;
    spec.n_patient = 15;
    spec.contrast = 0.3;
    spec.seed = seed;
    ExperimentConfig plain = base;
    plain.train.seed = seed;
    plain.train.augment_minority = false;
    ExperimentConfig augmented = plain;
    augmented.train.augment_minority = true;
    augmented.train.augmentation_ratio = 1.0;
    const FoldReport a = cross_validate(spec, plain);
    const FoldReport b = cross_validate(spec, augmented);
    const double gap_plain = std::abs(a.sen.mean - a.spe.mean);
    const double gap_aug = std::abs(b.sen.mean - b.spe.mean);
    if (gap_aug < gap_plain) ++improved;
    detail += (detail.empty() ? "" : " ") + num(gap_plain, 2) + "->" + num(gap_aug, 2);
  }
  out.require(improved >= 4, "gap shrank in " + std::to_string(improved) + "/5 seeds: " + detail);
  if (out.pass) out.detail = "|SEN-SPE| shrank in " + std::to_string(improved) + "/5 seeds: " + detail;
  return out;
}

// ---- 8: determinism -------------------------------------------------------------

Outcome determinism() {
  Outcome out;
  ExperimentConfig cfg = io::load_config(HETFUSE_CONFIG_DIR "/desk.json");
  cfg.train.epochs = 8;
  cfg.train.seed = 11;
  cfg.train.augment_minority = true;
  SyntheticSpec spec;
  spec.n_control = 14;
  spec.n_patient = 10;
  spec.seed = 11;
  const std::vector<Sample> data = samples_of(spec, cfg.graph);
  auto run = [&](int threads) {
    CvOptions o;
    o.threads = threads;
    return io::report_to_text(kfold_cv(data, cfg, model_trainer(), o));
  };
  const std::string first = run(1);
  const std::string second = run(1);
  const std::string threaded = run(3);
  out.require(first == second, "two identical runs differ");
  out.require(first == threaded, "report depends on the number of threads");
  if (out.pass) out.detail = "reports identical (" + std::to_string(first.size()) + " bytes), 1 and 3 threads";
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradients", gradients},     {"graph-construction", graph_construction},
      {"augmentation", augmentation}, {"pooling", pooling},
      {"attention", attention},     {"synthetic-recovery", recovery},
      {"imbalance", imbalance},     {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
