// hetfuse: command-line front end.
//
// Exit status: 0 success, 1 invalid input (bad flag, bad config, malformed or
// leaking data, failed gradient check), 2 runtime failure.

#include <charconv>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetfuse/harness.hpp"
#include "hetfuse/io.hpp"
#include "hetfuse/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hetfuse;

namespace {

struct Common {
  std::string config;
  std::string manifest;
  std::string graphs;
  std::string checkpoint;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string folds;
  std::optional<double> augment_ratio;
  std::optional<int> window_width;
  std::optional<int> window_stride;
  std::optional<int> epochs;
  int threads = 0;
  bool final_epoch = false;
};

struct SynthFlags {
  std::string spec;
  std::optional<int> n_control, n_patient, n_rois, series_length;
  std::optional<double> contrast;
};

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : io::load_config(c.config);
  if (c.seed) cfg.train.seed = *c.seed;
  if (c.augment_ratio) {
    cfg.train.augmentation_ratio = *c.augment_ratio;
    cfg.train.augment_minority = *c.augment_ratio > 0.0;
  }
  if (c.window_width) cfg.augment.window_width = *c.window_width;
  if (c.window_stride) cfg.augment.window_stride = *c.window_stride;
  if (c.epochs) cfg.train.epochs = *c.epochs;
  if (c.final_epoch) cfg.train.report_final_epoch = true;
  cfg.validate();
  return cfg;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string("missing required flag ") + flag);
}

// Graphs from --graphs, else built from --manifest; raw series attached when
// a manifest is given.
std::vector<Sample> load_samples(const Common& c, const ExperimentConfig& cfg) {
  if (c.graphs.empty() && c.manifest.empty()) throw ValidationError("need --graphs or --manifest");
  std::vector<SubjectRaw> raw;
  if (!c.manifest.empty()) raw = io::load_dataset(c.manifest);
  std::vector<HeteroGraph> graphs;
  if (!c.graphs.empty()) {
    graphs = io::load_graphs(c.graphs);
  } else {
    for (const SubjectRaw& s : raw) graphs.push_back(assemble(s, cfg.graph));
  }
  std::map<std::string, const SubjectRaw*> by_id;
  for (const SubjectRaw& s : raw) by_id[s.id] = &s;
  std::vector<Sample> out;
  for (HeteroGraph& g : graphs) {
    Sample s{std::move(g), std::nullopt};
    if (auto it = by_id.find(s.graph.subject_id); it != by_id.end()) s.raw = *it->second;
    out.push_back(std::move(s));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); }

int cmd_synth(const Common& c, const SynthFlags& f) {
  require(c.out, "--out");
  SyntheticSpec spec = f.spec.empty() ? SyntheticSpec{} : io::synthetic_from_text(io::read_file(f.spec));
  if (c.seed) spec.seed = *c.seed;
  if (f.n_control) spec.n_control = *f.n_control;
  if (f.n_patient) spec.n_patient = *f.n_patient;
  if (f.n_rois) spec.n_rois = *f.n_rois;
  if (f.series_length) spec.series_length = *f.series_length;
  if (f.contrast) spec.contrast = *f.contrast;
  const std::vector<SubjectRaw> subjects = generate_synthetic(spec);
  const fs::path manifest = io::write_dataset(c.out, subjects);
  io::write_file(fs::path(c.out) / "synthetic.json", io::synthetic_to_text(spec));
  std::cout << "wrote " << subjects.size() << " subjects to " << manifest.string() << "\n";
  return 0;
}

int cmd_build(const Common& c) {
  require(c.manifest, "--manifest");
  require(c.out, "--out");
  const ExperimentConfig cfg = resolve_config(c);
  std::vector<HeteroGraph> graphs;
  for (const SubjectRaw& s : io::load_dataset(c.manifest)) graphs.push_back(assemble(s, cfg.graph));
  io::save_graphs(c.out, graphs);
  std::cout << "wrote " << graphs.size() << " graphs to " << c.out << "\n";
  return 0;
}

int cmd_augment(const Common& c) {
  require(c.manifest, "--manifest");
  require(c.out, "--out");
  const ExperimentConfig cfg = resolve_config(c);
  std::vector<HeteroGraph> out;
  for (const Sample& s : load_samples(c, cfg)) {
    if (!s.raw) throw ValidationError("graph '" + s.graph.subject_id + "' has no entry in the manifest");
    out.push_back(augment_subject(*s.raw, s.graph, cfg.graph, cfg.augment));
  }
  io::save_graphs(c.out, out);
  std::cout << "wrote " << out.size() << " augmented graphs to " << c.out << "\n";
  return 0;
}

std::optional<int> parse_int(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

int cmd_train(const Common& c) {
  require(c.out, "--out");
  ExperimentConfig cfg = resolve_config(c);
  const std::vector<Sample> samples = load_samples(c, cfg);
  CvOptions options;
  options.threads = c.threads;
  const Trainer trainer = model_trainer();

  FoldReport report;
  if (!c.folds.empty() && !parse_int(c.folds)) {
    const std::vector<NamedFold> named = io::load_folds(c.folds);
    const std::vector<FoldSplit> splits = resolve_folds(samples, named);
    cfg.folds = static_cast<int>(splits.size());
    report = run_folds(samples, splits, cfg, trainer, options);
  } else {
    if (!c.folds.empty()) cfg.folds = *parse_int(c.folds);
    report = kfold_cv(samples, cfg, trainer, options);
  }

  const fs::path out(c.out);
  io::write_file(out / "config.json", io::config_to_text(cfg));
  io::write_file(out / "report.json", io::report_to_text(report));
  io::write_file(out / "curves.tsv", io::curves_to_tsv(report));
  for (const FoldResult& f : report.folds) {
    if (!f.params) continue;
    io::Checkpoint ckpt{cfg, *f.params, std::nullopt};
    ckpt.config.model = f.params->config();
    io::save_checkpoint(out / ("fold" + std::to_string(f.fold) + ".ckpt.json"), ckpt);
  }
  for (const FoldResult& f : report.folds) {
    std::cout << "fold " << f.fold << ": acc " << fmt(f.metrics.acc) << " sen " << fmt(f.metrics.sen) << " spe "
              << fmt(f.metrics.spe) << " auc " << fmt(f.metrics.auc) << " (epoch " << f.best_epoch << ")\n";
  }
  std::cout << "mean: acc " << fmt(report.acc.mean) << " sen " << fmt(report.sen.mean) << " spe "
            << fmt(report.spe.mean) << " auc " << fmt(report.auc.mean) << "\n";
  return 0;
}

int cmd_eval(const Common& c) {
  require(c.checkpoint, "--checkpoint");
  const io::Checkpoint ckpt = io::load_checkpoint(c.checkpoint);
  const std::vector<Sample> samples = load_samples(c, ckpt.config);
  const std::vector<double> scores = score_samples(samples, ckpt.params);
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (const Sample& s : samples) {
    labels.push_back(s.graph.label);
    ids.push_back(s.graph.subject_id);
  }
  const BinaryMetrics m = metrics(scores, labels);
  if (!c.out.empty()) io::write_file(c.out, io::metrics_to_text(m, ids, scores));
  std::cout << "acc " << fmt(m.acc) << " sen " << fmt(m.sen) << " spe " << fmt(m.spe) << " auc " << fmt(m.auc)
            << "\n";
  return 0;
}

int cmd_explain(const Common& c) {
  require(c.checkpoint, "--checkpoint");
  require(c.out, "--out");
  const io::Checkpoint ckpt = io::load_checkpoint(c.checkpoint);
  const std::vector<Sample> samples = load_samples(c, ckpt.config);
  const std::vector<AssignmentRecord> records = export_pool_assignments(ckpt.params, samples);
  io::write_file(c.out, io::assignments_to_text(records));
  std::cout << "wrote pooling assignments for " << records.size() << " subjects to " << c.out << "\n";
  return 0;
}

int cmd_gradcheck(const Common& c) {
  const std::vector<ad::GradCheckReport> reports = gradient_suite(c.seed.value_or(0));
  int failed = 0;
  for (const ad::GradCheckReport& r : reports) {
    std::printf("%-5s %-22s entries %6zu  max rel %.3e  tol %.0e\n", r.passed ? "ok" : "FAIL", r.label.c_str(),
                r.checked, r.max_rel_error, r.tolerance);
    if (!r.passed) ++failed;
  }
  std::printf("%zu checks, %d failed\n", reports.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous-graph fusion of functional and structural brain connectivity"};
  app.require_subcommand(1);
  Common c;
  SynthFlags sf;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config, "Experiment config (JSON)");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--out", c.out, "Output path");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--manifest", c.manifest, "Dataset manifest");
    sub->add_option("--graphs", c.graphs, "Serialized graphs");
  };
  auto add_augment = [&](CLI::App* sub) {
    sub->add_option("--window-width", c.window_width, "Sliding-window width");
    sub->add_option("--window-stride", c.window_stride, "Sliding-window stride");
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  add_common(synth);
  synth->add_option("--spec", sf.spec, "Synthetic spec (JSON)");
  synth->add_option("--n-control", sf.n_control);
  synth->add_option("--n-patient", sf.n_patient);
  synth->add_option("--n-rois", sf.n_rois);
  synth->add_option("--series-length", sf.series_length);
  synth->add_option("--contrast", sf.contrast);

  CLI::App* build = app.add_subcommand("build", "Build heterogeneous graphs from a manifest");
  add_common(build);
  build->add_option("--manifest", c.manifest, "Dataset manifest");

  CLI::App* augment = app.add_subcommand("augment", "Build augmented graphs from raw series");
  add_common(augment);
  add_data(augment);
  add_augment(augment);

  CLI::App* train = app.add_subcommand("train", "Cross-validated training");
  add_common(train);
  add_data(train);
  add_augment(train);
  train->add_option("--folds", c.folds, "Number of folds, or a folds file (JSON)");
  train->add_option("--augment-ratio", c.augment_ratio, "Fraction of minority-class subjects to augment")
      ->check(CLI::Range(0.0, 1.0));
  train->add_option("--epochs", c.epochs, "Override the epoch count");
  train->add_option("--threads", c.threads, "Parallel folds (0: hardware threads)");
  train->add_flag("--final-epoch", c.final_epoch, "Report the last epoch instead of the best one");

  CLI::App* eval = app.add_subcommand("eval", "Score graphs with a checkpoint");
  add_common(eval);
  add_data(eval);
  eval->add_option("--checkpoint", c.checkpoint, "Checkpoint file");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Verify gradients against finite differences");
  gradcheck->add_option("--seed", c.seed, "Random seed");

  CLI::App* explain = app.add_subcommand("explain", "Export first-layer pooling assignments");
  add_common(explain);
  add_data(explain);
  explain->add_option("--checkpoint", c.checkpoint, "Checkpoint file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*synth) return cmd_synth(c, sf);
    if (*build) return cmd_build(c);
    if (*augment) return cmd_augment(c);
    if (*train) return cmd_train(c);
    if (*eval) return cmd_eval(c);
    if (*gradcheck) return cmd_gradcheck(c);
    if (*explain) return cmd_explain(c);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
