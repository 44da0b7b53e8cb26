#pragma once

// File formats. Numeric tables are whitespace-separated text, one matrix row
// per line, written with 17 significant digits so doubles round-trip
// exactly. Everything else is JSON with a "format" tag and a version.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hetfuse/harness.hpp"
#include "hetfuse/synthetic.hpp"
#include "hetfuse/train.hpp"

namespace hetfuse::io {

namespace fs = std::filesystem;

// ---- tables -------------------------------------------------------------

std::string format_table(const Matrix& m);
// Throws ValidationError on ragged rows or unparsable tokens.
Matrix parse_table(const std::string& text);
Matrix read_table(const fs::path& path);
void write_table(const fs::path& path, const Matrix& m);

// FNV-1a 64-bit digest of the file bytes, as 16 lowercase hex digits.
std::string fnv1a64(const std::string& bytes);

std::string read_file(const fs::path& path);
// Writes via a temporary file in the same directory, then renames.
void write_file(const fs::path& path, const std::string& contents);

// ---- datasets -------------------------------------------------------------

// Writes <dir>/<id>/{fmri.txt,dti.txt,sc.txt} and <dir>/manifest.json, and
// returns the manifest path.
fs::path write_dataset(const fs::path& dir, const std::vector<SubjectRaw>& subjects);

// Loads and validates every subject listed in a manifest (paths relative to
// the manifest's directory). Problems across all subjects are collected and
// raised together as one ValidationError, one line per problem, each naming
// the subject id and field.
std::vector<SubjectRaw> load_dataset(const fs::path& manifest);

// ---- graphs ---------------------------------------------------------------

std::string graphs_to_text(const std::vector<HeteroGraph>& graphs);
std::vector<HeteroGraph> graphs_from_text(const std::string& text);
void save_graphs(const fs::path& path, const std::vector<HeteroGraph>& graphs);
std::vector<HeteroGraph> load_graphs(const fs::path& path);

// ---- configuration ------------------------------------------------------

// Every hyperparameter, named; missing keys keep their defaults and unknown
// keys are rejected.
std::string config_to_text(const ExperimentConfig& config);
ExperimentConfig config_from_text(const std::string& text);
ExperimentConfig load_config(const fs::path& path);

std::string synthetic_to_text(const SyntheticSpec& spec);
SyntheticSpec synthetic_from_text(const std::string& text);

// Explicit folds: {"folds": [{"train": [ids...], "val": [ids...]}, ...]};
// "train" may be omitted.
std::vector<NamedFold> load_folds(const fs::path& path);

// ---- checkpoints ---------------------------------------------------------

struct Checkpoint {
  ExperimentConfig config;  // model widths already resolved from the data
  ModelParams params;
  std::optional<OptimizerState> optimizer;
};

std::string checkpoint_to_text(const Checkpoint& ckpt);
Checkpoint checkpoint_from_text(const std::string& text);
void save_checkpoint(const fs::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const fs::path& path);

// ---- reports --------------------------------------------------------------

std::string report_to_text(const FoldReport& report);
std::string metrics_to_text(const BinaryMetrics& m, const std::vector<std::string>& ids,
                            const std::vector<double>& scores);
std::string assignments_to_text(const std::vector<AssignmentRecord>& records);
// Tab-separated: fold, epoch, lr, train_loss, val_loss, val_acc, val_auc.
std::string curves_to_tsv(const FoldReport& report);

}  // namespace hetfuse::io
