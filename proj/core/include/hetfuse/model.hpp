#pragma once

// Differentiable backbone: per-modality input projection, then three rounds
// of [HAN -> PairNorm -> HG pooling -> readout], concatenated readouts,
// dropout and a two-layer MLP head.
//
// Meta-paths, by target node type:
//   fMRI targets: FF (fMRI->fMRI, self loops added) and DF (DTI->fMRI, mask a_fd)
//   DTI targets:  DD (DTI->DTI, self loops added)   and FD (fMRI->DTI, mask a_fd^T)
// Adjacency values only select neighbours; attention supplies the weights.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetfuse/autodiff.hpp"
#include "hetfuse/graphbuild.hpp"

namespace hetfuse {

enum class NodeType : int { Fmri = 0, Dti = 1 };
enum class MetaPath : int { FF = 0, DD = 1, FD = 2, DF = 3 };

inline constexpr std::array<MetaPath, 2> kFmriTargetPaths{MetaPath::FF, MetaPath::DF};
inline constexpr std::array<MetaPath, 2> kDtiTargetPaths{MetaPath::DD, MetaPath::FD};

const std::array<MetaPath, 2>& paths_into(NodeType t);
NodeType source_type(MetaPath p);
NodeType target_type(MetaPath p);
std::string_view meta_path_name(MetaPath p);

struct ModelConfig {
  int fmri_width = 0;
  int dti_width = 0;
  int n_fmri = 90;
  int n_dti = 90;
  int hidden = 128;
  int heads = 8;
  int semantic_dim = 128;
  int mlp_hidden = 64;
  int layers = 3;
  double pool_ratio = 0.8;
  double dropout = 0.45;
  double attention_slope = 0.2;
  int classes = 2;

  // Copies `base` and fills in the widths and node counts of `g`.
  static ModelConfig for_graph(const HeteroGraph& g, const ModelConfig& base);
  void validate() const;
};

bool operator==(const ModelConfig& a, const ModelConfig& b);

// ceil(ratio * n); ratio must lie in (0, 1].
int pooled_count(int n, double ratio);

// (n_fmri, n_dti) before the first pooling layer and after each one.
std::vector<std::pair<int, int>> node_ladder(const ModelConfig& config);

// ---- parameter storage --------------------------------------------------

struct HeadSlot {
  int theta = -1;        // in x hidden
  int attn_target = -1;  // hidden x 1
  int attn_source = -1;  // hidden x 1
};
struct SemanticSlot {
  int weight = -1;  // (hidden*heads) x semantic_dim
  int bias = -1;    // 1 x semantic_dim
  int query = -1;   // semantic_dim x 1
};
struct HanSlot {
  std::array<std::vector<HeadSlot>, 4> paths;  // indexed by MetaPath
  SemanticSlot semantic;
};
struct ScoreSlot {
  std::array<std::vector<HeadSlot>, 2> paths;  // paths_into(type) order
  SemanticSlot semantic;
  int summarizer = -1;       // width x width
  int summarizer_bias = -1;  // 1 x width
};
struct PoolSlot {
  std::array<ScoreSlot, 2> by_type;  // indexed by NodeType
};
struct ModelLayout {
  int proj_f = -1, proj_f_bias = -1;
  int proj_d = -1, proj_d_bias = -1;
  std::vector<HanSlot> han;
  std::vector<PoolSlot> pool;
  int mlp_w1 = -1, mlp_b1 = -1, mlp_w2 = -1, mlp_b2 = -1;
};

class ModelParams {
 public:
  ModelParams() = default;

  // Glorot-uniform weights, zero biases.
  static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

  // Rebuilds parameters from (name, value) pairs, e.g. from a checkpoint.
  // Every expected name must be present exactly once with the right shape.
  static ModelParams from_named(const ModelConfig& config,
                                std::vector<std::pair<std::string, Matrix>> named);

  const ModelConfig& config() const { return config_; }
  const ModelLayout& layout() const { return layout_; }

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<Matrix>& values() { return values_; }
  const std::vector<Matrix>& values() const { return values_; }
  const Matrix& operator[](int slot) const { return values_.at(static_cast<std::size_t>(slot)); }
  Matrix& operator[](int slot) { return values_.at(static_cast<std::size_t>(slot)); }
  std::size_t scalar_count() const;

 private:
  ModelConfig config_;
  ModelLayout layout_;
  std::vector<std::string> names_;
  std::vector<Matrix> values_;

  friend struct LayoutBuilder;
};

// ---- tensor-level building blocks --------------------------------------

struct HeadParams {
  ad::Tensor theta, attn_target, attn_source;
};
struct SemanticParams {
  ad::Tensor weight, bias, query;
};
struct HanParams {
  std::array<std::vector<HeadParams>, 4> paths;
  SemanticParams semantic;
};
struct ScoreParams {
  std::array<std::vector<HeadParams>, 2> paths;
  SemanticParams semantic;
  ad::Tensor summarizer, summarizer_bias;
};
struct PoolParams {
  std::array<ScoreParams, 2> by_type;
};

struct BoundModel {
  ad::Tensor proj_f, proj_f_bias, proj_d, proj_d_bias;
  std::vector<HanParams> han;
  std::vector<PoolParams> pool;
  ad::Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;
  std::vector<ad::Tensor> leaves;  // parallel to ModelParams::values()
};

// Places every parameter on `tape` as a leaf.
BoundModel bind(ad::Tape& tape, const ModelParams& params, bool requires_grad = true);

// Wires caller-made tensors (one per parameter, same order and shapes) into
// the model structure; used when the parameters are inputs of a larger check.
BoundModel bind_leaves(const ModelParams& params, std::vector<ad::Tensor> leaves);

// Current heterogeneous graph as tensors (features + meta-path blocks).
struct HgState {
  ad::Tensor x_f, x_d;
  ad::Tensor a_f, a_d, a_fd;
};

struct HanTrace {
  std::array<std::vector<Matrix>, 4> attention;  // per path, per head: targets x sources
  std::array<Matrix, 2> semantic;                // per target type: 1 x 2 weights
};

struct PoolTrace {
  HanTrace score;
  std::array<Matrix, 2> assignment;  // D_f (N_f x N_f'), D_d (N_d x N_d')
  Matrix pooling;                    // [[D_f, 0], [0, D_d]]
  Matrix a_f, a_d, a_fd;             // pooled blocks
};

struct LayerTrace {
  HanTrace han;
  PoolTrace pool;
  Matrix readout;
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  Matrix embedding;  // concatenated readouts
};

// Neighbour mask for a meta-path: nonzero entries of the block (oriented
// targets x sources), plus self loops for the homo-meta-paths.
std::shared_ptr<const Matrix> meta_path_mask(const HgState& state, MetaPath p);

// Node- and semantic-level attention for the nodes of one type.
ad::Tensor han_target(const HgState& state, NodeType target,
                      const std::array<std::vector<HeadParams>, 2>& paths,
                      const SemanticParams& semantic, double slope, HanTrace* trace = nullptr);

// Returns the updated (x_f, x_d), each of width hidden * heads.
std::pair<ad::Tensor, ad::Tensor> han_layer(const HgState& state, const HanParams& params,
                                            double slope, HanTrace* trace = nullptr);

// Type-separated pooling. With `identity` set, D_f and D_d are identity
// matrices (requires ratio 1) and the graph passes through unchanged.
HgState hg_pool(const HgState& state, const PoolParams& params, double slope,
                PoolTrace* trace = nullptr, bool identity = false);

// Centre features over nodes, then scale each row to L2 norm `s`.
ad::Tensor pairnorm(const ad::Tensor& x, double s = 1.0);

// [column max || column mean] over the nodes of both types.
ad::Tensor readout(const ad::Tensor& x_f, const ad::Tensor& x_d);

struct ForwardOptions {
  bool train = false;
  std::uint64_t dropout_seed = 0;
  bool identity_pool = false;
};

// 1 x classes logits.
ad::Tensor forward(ad::Tape& tape, const HeteroGraph& graph, const BoundModel& model,
                   const ModelConfig& config, const ForwardOptions& options = {},
                   ForwardTrace* trace = nullptr);

// Convenience: evaluation-mode class probabilities.
Eigen::RowVectorXd predict_proba(const HeteroGraph& graph, const ModelParams& params,
                                 ForwardTrace* trace = nullptr);

}  // namespace hetfuse
