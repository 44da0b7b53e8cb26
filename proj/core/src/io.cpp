#include "hetfuse/io.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace hetfuse::io {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

void expect_format(const json& j, const std::string& format) {
  if (!j.is_object() || !j.contains("format") || j["format"] != format) {
    fail("expected a '" + format + "' document");
  }
  if (!j.contains("version") || j["version"] != kFormatVersion) {
    fail(format + ": unsupported version");
  }
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(what + ": " + e.what());
  }
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from(const json& j, const std::string& what) {
  try {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Index>(data.size()) != rows * cols) {
      fail(what + ": declared shape does not match the number of values");
    }
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
    }
    return m;
  } catch (const json::exception& e) {
    fail(what + ": " + e.what());
  }
}

// Reads `key` into `out` when present, rejecting keys not listed in `known`.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) fail("config: '" + name_ + "' must be an object");
  }
  template <typename T>
  Section& get(const char* key, T& out) {
    seen_.insert(key);
    if (j_.contains(key)) {
      try {
        out = j_[key].get<T>();
      } catch (const json::exception&) {
        fail("config: " + name_ + "." + key + " has the wrong type");
      }
    }
    return *this;
  }
  Section& allow(const char* key) {
    seen_.insert(key);
    return *this;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) fail("config: unknown key " + name_ + "." + it.key());
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["format"] = "hetfuse-config";
  j["version"] = kFormatVersion;
  j["graph"] = {{"fc-threshold", c.graph.fc_threshold},
                {"sc-threshold", c.graph.sc_threshold},
                {"top-k", c.graph.top_k},
                {"community-paths", c.graph.community_paths}};
  j["augment"] = {{"window-width", c.augment.window_width},
                  {"window-stride", c.augment.window_stride},
                  {"window-threshold", c.augment.window_threshold},
                  {"alpha", c.augment.alpha},
                  {"tau-g", c.augment.global_threshold},
                  {"augmentation-ratio", c.train.augmentation_ratio}};
  j["model"] = {{"fmri-width", c.model.fmri_width}, {"dti-width", c.model.dti_width},
                {"n-fmri", c.model.n_fmri},         {"n-dti", c.model.n_dti},
                {"hidden", c.model.hidden},         {"heads", c.model.heads},
                {"semantic-dim", c.model.semantic_dim}, {"mlp-hidden", c.model.mlp_hidden},
                {"layers", c.model.layers},         {"pool-ratio", c.model.pool_ratio},
                {"dropout", c.model.dropout},       {"attention-slope", c.model.attention_slope},
                {"classes", c.model.classes}};
  j["train"] = {{"lr0", c.train.lr0},
                {"weight-decay", c.train.weight_decay},
                {"epochs", c.train.epochs},
                {"batch-size", c.train.batch_size},
                {"seed", c.train.seed},
                {"augment-minority", c.train.augment_minority},
                {"report-epoch", c.train.report_final_epoch ? "final" : "best"}};
  j["folds"] = c.folds;
  return j;
}

ExperimentConfig config_from(const json& j) {
  expect_format(j, "hetfuse-config");
  ExperimentConfig c;
  Section top(j, "config");
  top.allow("format").allow("version").allow("graph").allow("augment").allow("model").allow("train");
  top.get("folds", c.folds);
  const json empty = json::object();
  auto part = [&](const char* key) -> const json& { return j.contains(key) ? j[key] : empty; };
  Section(part("graph"), "graph")
      .get("fc-threshold", c.graph.fc_threshold)
      .get("sc-threshold", c.graph.sc_threshold)
      .get("top-k", c.graph.top_k)
      .get("community-paths", c.graph.community_paths)
      .finish();
  Section(part("augment"), "augment")
      .get("window-width", c.augment.window_width)
      .get("window-stride", c.augment.window_stride)
      .get("window-threshold", c.augment.window_threshold)
      .get("alpha", c.augment.alpha)
      .get("tau-g", c.augment.global_threshold)
      .get("augmentation-ratio", c.train.augmentation_ratio)
      .finish();
  Section(part("model"), "model")
      .get("fmri-width", c.model.fmri_width)
      .get("dti-width", c.model.dti_width)
      .get("n-fmri", c.model.n_fmri)
      .get("n-dti", c.model.n_dti)
      .get("hidden", c.model.hidden)
      .get("heads", c.model.heads)
      .get("semantic-dim", c.model.semantic_dim)
      .get("mlp-hidden", c.model.mlp_hidden)
      .get("layers", c.model.layers)
      .get("pool-ratio", c.model.pool_ratio)
      .get("dropout", c.model.dropout)
      .get("attention-slope", c.model.attention_slope)
      .get("classes", c.model.classes)
      .finish();
  std::string report_epoch = "best";
  Section(part("train"), "train")
      .get("lr0", c.train.lr0)
      .get("weight-decay", c.train.weight_decay)
      .get("epochs", c.train.epochs)
      .get("batch-size", c.train.batch_size)
      .get("seed", c.train.seed)
      .get("augment-minority", c.train.augment_minority)
      .get("report-epoch", report_epoch)
      .finish();
  if (report_epoch != "best" && report_epoch != "final") fail("config: train.report-epoch must be 'best' or 'final'");
  c.train.report_final_epoch = report_epoch == "final";
  top.finish();
  c.validate();
  return c;
}

ordered_json graph_json(const HeteroGraph& g) {
  ordered_json j;
  j["subject-id"] = g.subject_id;
  j["label"] = g.label;
  j["augmented"] = g.augmented;
  j["x-f"] = matrix_json(g.x_f);
  j["x-d"] = matrix_json(g.x_d);
  j["a-f"] = matrix_json(g.a_f);
  j["a-d"] = matrix_json(g.a_d);
  j["a-fd"] = matrix_json(g.a_fd);
  return j;
}

HeteroGraph graph_from(const json& j) {
  HeteroGraph g;
  try {
    g.subject_id = j.at("subject-id").get<std::string>();
    g.label = j.at("label").get<int>();
    g.augmented = j.value("augmented", false);
  } catch (const json::exception& e) {
    fail(std::string("graphs: ") + e.what());
  }
  const std::string who = "graph '" + g.subject_id + "'";
  g.x_f = matrix_from(j.at("x-f"), who + " x-f");
  g.x_d = matrix_from(j.at("x-d"), who + " x-d");
  g.a_f = matrix_from(j.at("a-f"), who + " a-f");
  g.a_d = matrix_from(j.at("a-d"), who + " a-d");
  g.a_fd = matrix_from(j.at("a-fd"), who + " a-fd");
  const Index nf = g.x_f.rows(), nd = g.x_d.rows();
  if (g.a_f.rows() != nf || g.a_f.cols() != nf || g.a_d.rows() != nd || g.a_d.cols() != nd ||
      g.a_fd.rows() != nf || g.a_fd.cols() != nd) {
    throw ShapeError(who + ": block shapes do not match the node counts");
  }
  if (g.label != 0 && g.label != 1) fail(who + ": label must be 0 or 1");
  return g;
}

ordered_json nullable(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json metrics_json(const BinaryMetrics& m) {
  return {{"acc", m.acc},
          {"sen", m.sen},
          {"spe", m.spe},
          {"auc", nullable(m.auc)},
          {"confusion", {{"tp", m.confusion.tp}, {"tn", m.confusion.tn}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}}}};
}

ordered_json summary_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}, {"folds", s.count}}; }

ordered_json assignment_json(const AssignmentRecord& r) {
  return {{"subject-id", r.subject_id},
          {"label", r.label},
          {"fmri", {{"assignment", matrix_json(r.assignment[0])}, {"dominant", r.dominant[0]}}},
          {"dti", {{"assignment", matrix_json(r.assignment[1])}, {"dominant", r.dominant[1]}}}};
}

}  // namespace

// ---- tables ---------------------------------------------------------------

std::string format_table(const Matrix& m) {
  std::string out;
  char buf[32];
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      if (c) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Matrix parse_table(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',')) ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r' && *next != ',')) {
        fail("table line " + std::to_string(line_no) + ": not a number");
      }
      row.push_back(v);
      p = next;
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail("table line " + std::to_string(line_no) + ": expected " + std::to_string(rows.front().size()) +
           " values, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw RuntimeError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

Matrix read_table(const fs::path& path) {
  try {
    return parse_table(read_file(path));
  } catch (const ValidationError& e) {
    fail(path.string() + ": " + e.what());
  }
}

void write_table(const fs::path& path, const Matrix& m) { write_file(path, format_table(m)); }

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- datasets ---------------------------------------------------------------

fs::path write_dataset(const fs::path& dir, const std::vector<SubjectRaw>& subjects) {
  ordered_json manifest;
  manifest["format"] = "hetfuse-manifest";
  manifest["version"] = kFormatVersion;
  ordered_json list = ordered_json::array();
  for (const SubjectRaw& s : subjects) {
    ordered_json entry;
    entry["id"] = s.id;
    entry["label"] = s.label;
    const std::pair<const char*, const Matrix*> fields[] = {
        {"fmri", &s.fmri_series}, {"dti", &s.dti_features}, {"sc", &s.sc_counts}};
    for (const auto& [name, m] : fields) {
      const std::string rel = s.id + "/" + name + ".txt";
      const std::string text = format_table(*m);
      write_file(dir / rel, text);
      entry[name] = {{"file", rel}, {"rows", m->rows()}, {"cols", m->cols()}, {"fnv1a64", fnv1a64(text)}};
    }
    list.push_back(std::move(entry));
  }
  manifest["subjects"] = std::move(list);
  const fs::path path = dir / "manifest.json";
  write_file(path, manifest.dump(2) + "\n");
  return path;
}

std::vector<SubjectRaw> load_dataset(const fs::path& manifest_path) {
  const json manifest = parse_json(read_file(manifest_path), manifest_path.string());
  expect_format(manifest, "hetfuse-manifest");
  if (!manifest.contains("subjects") || !manifest["subjects"].is_array()) fail("manifest: missing 'subjects' list");
  const json& list = manifest["subjects"];
  const fs::path base = manifest_path.parent_path();

  std::vector<SubjectRaw> out(list.size());
  std::vector<std::vector<std::string>> problems(list.size());

  auto load_one = [&](std::size_t k) {
    const json& e = list[k];
    SubjectRaw& s = out[k];
    std::vector<std::string>& errs = problems[k];
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string()) {
      errs.push_back("subject #" + std::to_string(k) + ": missing id");
      return;
    }
    s.id = e["id"].get<std::string>();
    const std::string who = "subject '" + s.id + "'";
    if (!e.contains("label") || !e["label"].is_number_integer() || (e["label"] != 0 && e["label"] != 1)) {
      errs.push_back(who + " label: must be 0 or 1");
    } else {
      s.label = e["label"].get<int>();
    }
    const std::pair<const char*, Matrix*> fields[] = {
        {"fmri", &s.fmri_series}, {"dti", &s.dti_features}, {"sc", &s.sc_counts}};
    for (const auto& [name, target] : fields) {
      const std::string where = who + " " + name + ": ";
      if (!e.contains(name) || !e[name].is_object() || !e[name].contains("file")) {
        errs.push_back(where + "missing entry");
        continue;
      }
      const json& f = e[name];
      const fs::path file = base / f["file"].get<std::string>();
      std::string text;
      try {
        text = read_file(file);
      } catch (const ValidationError&) {
        errs.push_back(where + "missing file " + file.string());
        continue;
      }
      if (f.contains("fnv1a64") && f["fnv1a64"] != fnv1a64(text)) {
        errs.push_back(where + "checksum mismatch");
        continue;
      }
      try {
        *target = parse_table(text);
      } catch (const ValidationError& ex) {
        errs.push_back(where + ex.what());
        continue;
      }
      const Index rows = f.value("rows", target->rows());
      const Index cols = f.value("cols", target->cols());
      if (target->rows() != rows || target->cols() != cols) {
        errs.push_back(where + "shape mismatch: declared " + std::to_string(rows) + "x" + std::to_string(cols) +
                       ", found " + std::to_string(target->rows()) + "x" + std::to_string(target->cols()));
      }
    }
    if (errs.empty()) {
      try {
        validate_subject(s);
      } catch (const ValidationError& ex) {
        errs.push_back(ex.what());
      }
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < list.size(); k = next++) load_one(k);
  };
  const unsigned threads = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                              static_cast<unsigned>(std::max<std::size_t>(list.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::string report;
  std::set<std::string> ids;
  for (std::size_t k = 0; k < list.size(); ++k) {
    for (const std::string& p : problems[k]) report += p + "\n";
    if (problems[k].empty() && !ids.insert(out[k].id).second) report += "subject '" + out[k].id + "': duplicate id\n";
  }
  if (!report.empty()) {
    report.pop_back();
    fail(report);
  }
  return out;
}

// ---- graphs ---------------------------------------------------------------

std::string graphs_to_text(const std::vector<HeteroGraph>& graphs) {
  ordered_json j;
  j["format"] = "hetfuse-graphs";
  j["version"] = kFormatVersion;
  ordered_json list = ordered_json::array();
  for (const HeteroGraph& g : graphs) list.push_back(graph_json(g));
  j["graphs"] = std::move(list);
  return j.dump(1) + "\n";
}

std::vector<HeteroGraph> graphs_from_text(const std::string& text) {
  const json j = parse_json(text, "graphs");
  expect_format(j, "hetfuse-graphs");
  std::vector<HeteroGraph> out;
  try {
    for (const json& g : j.at("graphs")) out.push_back(graph_from(g));
  } catch (const json::exception& e) {
    fail(std::string("graphs: ") + e.what());
  }
  return out;
}

void save_graphs(const fs::path& path, const std::vector<HeteroGraph>& graphs) {
  write_file(path, graphs_to_text(graphs));
}

std::vector<HeteroGraph> load_graphs(const fs::path& path) { return graphs_from_text(read_file(path)); }

// ---- configuration ----------------------------------------------------------

std::string config_to_text(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

ExperimentConfig config_from_text(const std::string& text) { return config_from(parse_json(text, "config")); }

ExperimentConfig load_config(const fs::path& path) {
  try {
    return config_from_text(read_file(path));
  } catch (const ValidationError& e) {
    fail(path.string() + ": " + e.what());
  }
}

std::string synthetic_to_text(const SyntheticSpec& s) {
  ordered_json j;
  j["format"] = "hetfuse-synthetic";
  j["version"] = kFormatVersion;
  j["n-control"] = s.n_control;
  j["n-patient"] = s.n_patient;
  j["n-rois"] = s.n_rois;
  j["n-communities"] = s.n_communities;
  j["series-length"] = s.series_length;
  j["feature-width"] = s.feature_width;
  j["contrast"] = s.contrast;
  j["coupling-delta"] = s.coupling_delta;
  j["shifted-rois"] = s.shifted_rois;
  j["sc-boost"] = s.sc_boost;
  j["feature-shift"] = s.feature_shift;
  j["noise"] = s.noise;
  j["common-drive"] = s.common_drive;
  j["within-rate"] = s.within_rate;
  j["between-rate"] = s.between_rate;
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

SyntheticSpec synthetic_from_text(const std::string& text) {
  const json j = parse_json(text, "synthetic spec");
  expect_format(j, "hetfuse-synthetic");
  SyntheticSpec s;
  Section(j, "synthetic")
      .allow("format")
      .allow("version")
      .get("n-control", s.n_control)
      .get("n-patient", s.n_patient)
      .get("n-rois", s.n_rois)
      .get("n-communities", s.n_communities)
      .get("series-length", s.series_length)
      .get("feature-width", s.feature_width)
      .get("contrast", s.contrast)
      .get("coupling-delta", s.coupling_delta)
      .get("shifted-rois", s.shifted_rois)
      .get("sc-boost", s.sc_boost)
      .get("feature-shift", s.feature_shift)
      .get("noise", s.noise)
      .get("common-drive", s.common_drive)
      .get("within-rate", s.within_rate)
      .get("between-rate", s.between_rate)
      .get("seed", s.seed)
      .finish();
  s.validate();
  return s;
}

std::vector<NamedFold> load_folds(const fs::path& path) {
  const json j = parse_json(read_file(path), path.string());
  if (!j.is_object() || !j.contains("folds") || !j["folds"].is_array()) fail(path.string() + ": missing 'folds' list");
  std::vector<NamedFold> out;
  try {
    for (const json& f : j["folds"]) {
      NamedFold nf;
      nf.val = f.at("val").get<std::vector<std::string>>();
      if (f.contains("train")) nf.train = f["train"].get<std::vector<std::string>>();
      out.push_back(std::move(nf));
    }
  } catch (const json::exception& e) {
    fail(path.string() + ": " + e.what());
  }
  return out;
}

// ---- checkpoints -------------------------------------------------------------

std::string checkpoint_to_text(const Checkpoint& ckpt) {
  ordered_json j;
  j["format"] = "hetfuse-checkpoint";
  j["version"] = kFormatVersion;
  j["config"] = config_json(ckpt.config);
  ordered_json params = ordered_json::array();
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    ordered_json p = matrix_json(ckpt.params.values()[i]);
    p["name"] = ckpt.params.name(i);
    params.push_back(std::move(p));
  }
  j["parameters"] = std::move(params);
  if (ckpt.optimizer) {
    ordered_json opt;
    opt["step"] = ckpt.optimizer->step;
    ordered_json first = ordered_json::array(), second = ordered_json::array();
    for (const Matrix& m : ckpt.optimizer->first_moment) first.push_back(matrix_json(m));
    for (const Matrix& m : ckpt.optimizer->second_moment) second.push_back(matrix_json(m));
    opt["first-moment"] = std::move(first);
    opt["second-moment"] = std::move(second);
    j["optimizer"] = std::move(opt);
  }
  return j.dump(1) + "\n";
}

namespace {

Checkpoint checkpoint_from(const json& j) {
  expect_format(j, "hetfuse-checkpoint");
  Checkpoint ckpt;
  ckpt.config = config_from(j.at("config"));
  std::vector<std::pair<std::string, Matrix>> named;
  for (const json& p : j.at("parameters")) {
    const std::string name = p.at("name").get<std::string>();
    named.emplace_back(name, matrix_from(p, "parameter " + name));
  }
  ckpt.params = ModelParams::from_named(ckpt.config.model, std::move(named));
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    OptimizerState s;
    s.step = o.at("step").get<long>();
    for (const json& m : o.at("first-moment")) s.first_moment.push_back(matrix_from(m, "first moment"));
    for (const json& m : o.at("second-moment")) s.second_moment.push_back(matrix_from(m, "second moment"));
    if (s.first_moment.size() != ckpt.params.size() || s.second_moment.size() != ckpt.params.size()) {
      fail("checkpoint: optimizer moments do not match the parameter list");
    }
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
      const Matrix& p = ckpt.params.values()[i];
      if (s.first_moment[i].rows() != p.rows() || s.first_moment[i].cols() != p.cols() ||
          s.second_moment[i].rows() != p.rows() || s.second_moment[i].cols() != p.cols()) {
        throw ShapeError("checkpoint: optimizer moment " + std::to_string(i) + " has the wrong shape");
      }
    }
    ckpt.optimizer = std::move(s);
  }
  return ckpt;
}

}  // namespace

Checkpoint checkpoint_from_text(const std::string& text) {
  const json j = parse_json(text, "checkpoint");
  try {
    return checkpoint_from(j);
  } catch (const json::exception& e) {
    fail(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) { write_file(path, checkpoint_to_text(ckpt)); }

Checkpoint load_checkpoint(const fs::path& path) { return checkpoint_from_text(read_file(path)); }

// ---- reports ------------------------------------------------------------------

std::string report_to_text(const FoldReport& report) {
  ordered_json j;
  j["format"] = "hetfuse-report";
  j["version"] = kFormatVersion;
  j["summary"] = {{"acc", summary_json(report.acc)},
                  {"sen", summary_json(report.sen)},
                  {"spe", summary_json(report.spe)},
                  {"auc", summary_json(report.auc)},
                  {"confusion",
                   {{"tp", report.confusion.tp},
                    {"tn", report.confusion.tn},
                    {"fp", report.confusion.fp},
                    {"fn", report.confusion.fn}}}};
  ordered_json folds = ordered_json::array();
  for (const FoldResult& f : report.folds) {
    ordered_json fj;
    fj["fold"] = f.fold;
    fj["metrics"] = metrics_json(f.metrics);
    fj["best-epoch"] = f.best_epoch;
    fj["train-graphs"] = f.train_graphs;
    fj["augmented-graphs"] = f.augmented_graphs;
    fj["validation"] = ordered_json::array();
    for (std::size_t i = 0; i < f.val_ids.size(); ++i) {
      fj["validation"].push_back({{"subject-id", f.val_ids[i]}, {"label", f.labels[i]}, {"score", f.scores[i]}});
    }
    ordered_json roc = ordered_json::array();
    for (const auto& [fpr, tpr] : f.roc) roc.push_back({fpr, tpr});
    fj["roc"] = std::move(roc);
    ordered_json assign = ordered_json::array();
    for (const AssignmentRecord& r : f.assignments) assign.push_back(assignment_json(r));
    fj["pool-assignments"] = std::move(assign);
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  return j.dump(1) + "\n";
}

std::string metrics_to_text(const BinaryMetrics& m, const std::vector<std::string>& ids,
                            const std::vector<double>& scores) {
  ordered_json j;
  j["format"] = "hetfuse-metrics";
  j["version"] = kFormatVersion;
  j["metrics"] = metrics_json(m);
  ordered_json list = ordered_json::array();
  for (std::size_t i = 0; i < ids.size() && i < scores.size(); ++i) {
    list.push_back({{"subject-id", ids[i]}, {"score", scores[i]}});
  }
  j["scores"] = std::move(list);
  return j.dump(1) + "\n";
}

std::string assignments_to_text(const std::vector<AssignmentRecord>& records) {
  ordered_json j;
  j["format"] = "hetfuse-assignments";
  j["version"] = kFormatVersion;
  ordered_json list = ordered_json::array();
  for (const AssignmentRecord& r : records) list.push_back(assignment_json(r));
  j["subjects"] = std::move(list);
  return j.dump(1) + "\n";
}

std::string curves_to_tsv(const FoldReport& report) {
  std::string out = "fold\tepoch\tlr\ttrain_loss\tval_loss\tval_acc\tval_auc\n";
  char buf[256];
  for (const FoldResult& f : report.folds) {
    for (const EpochRecord& e : f.curves) {
      std::snprintf(buf, sizeof buf, "%d\t%d\t%.17g\t%.17g\t%.17g\t%.17g\t", f.fold, e.epoch, e.lr, e.train_loss,
                    e.val_loss, e.val_acc);
      out += buf;
      if (e.val_auc) {
        std::snprintf(buf, sizeof buf, "%.17g", *e.val_auc);
        out += buf;
      } else {
        out += "nan";
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace hetfuse::io
