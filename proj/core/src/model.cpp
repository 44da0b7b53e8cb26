#include "hetfuse/model.hpp"

#include <cmath>
#include <map>
#include <random>

namespace hetfuse {

using ad::Tensor;

const std::array<MetaPath, 2>& paths_into(NodeType t) {
  return t == NodeType::Fmri ? kFmriTargetPaths : kDtiTargetPaths;
}

NodeType source_type(MetaPath p) {
  switch (p) {
    case MetaPath::FF:
    case MetaPath::FD: return NodeType::Fmri;
    case MetaPath::DD:
    case MetaPath::DF: return NodeType::Dti;
  }
  return NodeType::Fmri;
}

NodeType target_type(MetaPath p) {
  switch (p) {
    case MetaPath::FF:
    case MetaPath::DF: return NodeType::Fmri;
    case MetaPath::DD:
    case MetaPath::FD: return NodeType::Dti;
  }
  return NodeType::Fmri;
}

std::string_view meta_path_name(MetaPath p) {
  switch (p) {
    case MetaPath::FF: return "ff";
    case MetaPath::DD: return "dd";
    case MetaPath::FD: return "fd";
    case MetaPath::DF: return "df";
  }
  return "?";
}

// ---- config -------------------------------------------------------------

ModelConfig ModelConfig::for_graph(const HeteroGraph& g, const ModelConfig& base) {
  ModelConfig c = base;
  c.fmri_width = static_cast<int>(g.x_f.cols());
  c.dti_width = static_cast<int>(g.x_d.cols());
  c.n_fmri = static_cast<int>(g.x_f.rows());
  c.n_dti = static_cast<int>(g.x_d.rows());
  return c;
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("model config: " + what);
  };
  require(fmri_width > 0 && dti_width > 0, "input widths must be positive");
  require(n_fmri > 0 && n_dti > 0, "node counts must be positive");
  require(hidden > 0 && heads > 0 && semantic_dim > 0 && mlp_hidden > 0, "widths must be positive");
  require(layers >= 1, "need at least one layer");
  require(pool_ratio > 0.0 && pool_ratio <= 1.0, "pool ratio must lie in (0, 1]");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(classes >= 2, "need at least two classes");
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  return a.fmri_width == b.fmri_width && a.dti_width == b.dti_width && a.n_fmri == b.n_fmri &&
         a.n_dti == b.n_dti && a.hidden == b.hidden && a.heads == b.heads &&
         a.semantic_dim == b.semantic_dim && a.mlp_hidden == b.mlp_hidden && a.layers == b.layers &&
         a.pool_ratio == b.pool_ratio && a.dropout == b.dropout &&
         a.attention_slope == b.attention_slope && a.classes == b.classes;
}

int pooled_count(int n, double ratio) {
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw ValidationError("pooling ratio must lie in (0, 1], got " + std::to_string(ratio));
  }
  if (n < 1) throw ValidationError("cannot pool an empty node set");
  // The epsilon absorbs representation error such as 0.8 * 90 = 72.000...01.
  const int out = static_cast<int>(std::ceil(ratio * n - 1e-9));
  if (out < 1) throw ValidationError("pooling ratio leaves no nodes");
  return out;
}

std::vector<std::pair<int, int>> node_ladder(const ModelConfig& config) {
  std::vector<std::pair<int, int>> ladder{{config.n_fmri, config.n_dti}};
  for (int l = 0; l < config.layers; ++l) {
    const auto [f, d] = ladder.back();
    ladder.emplace_back(pooled_count(f, config.pool_ratio), pooled_count(d, config.pool_ratio));
  }
  return ladder;
}

// ---- parameters ---------------------------------------------------------

struct LayoutBuilder {
  ModelParams& params;
  std::vector<std::pair<Index, Index>> shapes;

  int add(std::string name, Index rows, Index cols) {
    params.names_.push_back(std::move(name));
    shapes.emplace_back(rows, cols);
    return static_cast<int>(shapes.size() - 1);
  }

  std::vector<HeadSlot> heads(const std::string& prefix, int count, Index in, Index width) {
    std::vector<HeadSlot> out;
    for (int h = 0; h < count; ++h) {
      const std::string p = prefix + ".head" + std::to_string(h);
      HeadSlot s;
      s.theta = add(p + ".theta", in, width);
      s.attn_target = add(p + ".attn_target", width, 1);
      s.attn_source = add(p + ".attn_source", width, 1);
      out.push_back(s);
    }
    return out;
  }

  SemanticSlot semantic(const std::string& prefix, Index width, Index dim) {
    SemanticSlot s;
    s.weight = add(prefix + ".semantic.weight", width, dim);
    s.bias = add(prefix + ".semantic.bias", 1, dim);
    s.query = add(prefix + ".semantic.query", dim, 1);
    return s;
  }

  void build() {
    const ModelConfig& c = params.config_;
    ModelLayout& lay = params.layout_;
    lay.proj_f = add("input.fmri.weight", c.fmri_width, c.hidden);
    lay.proj_f_bias = add("input.fmri.bias", 1, c.hidden);
    lay.proj_d = add("input.dti.weight", c.dti_width, c.hidden);
    lay.proj_d_bias = add("input.dti.bias", 1, c.hidden);

    const auto ladder = node_ladder(c);
    const Index width = static_cast<Index>(c.hidden) * c.heads;
    for (int l = 0; l < c.layers; ++l) {
      const Index in = l == 0 ? c.hidden : width;
      const std::string p = "han" + std::to_string(l);
      HanSlot han;
      for (int m = 0; m < 4; ++m) {
        han.paths[static_cast<std::size_t>(m)] =
            heads(p + "." + std::string(meta_path_name(static_cast<MetaPath>(m))), c.heads, in, c.hidden);
      }
      han.semantic = semantic(p, width, c.semantic_dim);
      lay.han.push_back(std::move(han));

      PoolSlot pool;
      for (int t = 0; t < 2; ++t) {
        const auto type = static_cast<NodeType>(t);
        const Index out = t == 0 ? ladder[static_cast<std::size_t>(l) + 1].first
                                 : ladder[static_cast<std::size_t>(l) + 1].second;
        const std::string q = "pool" + std::to_string(l) + (t == 0 ? ".fmri" : ".dti");
        ScoreSlot s;
        const auto& targets = paths_into(type);
        for (std::size_t k = 0; k < 2; ++k) {
          s.paths[k] = heads(q + ".score." + std::string(meta_path_name(targets[k])), 1, width, out);
        }
        s.semantic = semantic(q + ".score", out, c.semantic_dim);
        s.summarizer = add(q + ".summarizer.weight", out, out);
        s.summarizer_bias = add(q + ".summarizer.bias", 1, out);
        pool.by_type[static_cast<std::size_t>(t)] = std::move(s);
      }
      lay.pool.push_back(std::move(pool));
    }
    const Index embed = static_cast<Index>(c.layers) * 2 * width;
    lay.mlp_w1 = add("mlp.0.weight", embed, c.mlp_hidden);
    lay.mlp_b1 = add("mlp.0.bias", 1, c.mlp_hidden);
    lay.mlp_w2 = add("mlp.1.weight", c.mlp_hidden, c.classes);
    lay.mlp_b2 = add("mlp.1.bias", 1, c.classes);
  }
};

namespace {
bool is_bias(const std::string& name) {
  return name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
}
}  // namespace

ModelParams ModelParams::initialize(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams p;
  p.config_ = config;
  LayoutBuilder b{p, {}};
  b.build();
  std::mt19937_64 rng(seed);
  p.values_.reserve(b.shapes.size());
  for (std::size_t i = 0; i < b.shapes.size(); ++i) {
    const auto [r, c] = b.shapes[i];
    if (is_bias(p.names_[i])) {
      p.values_.push_back(Matrix::Zero(r, c));
      continue;
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(r + c));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(r, c);
    for (Index k = 0; k < m.size(); ++k) m(k) = dist(rng);
    p.values_.push_back(std::move(m));
  }
  return p;
}

ModelParams ModelParams::from_named(const ModelConfig& config,
                                    std::vector<std::pair<std::string, Matrix>> named) {
  config.validate();
  ModelParams p;
  p.config_ = config;
  LayoutBuilder b{p, {}};
  b.build();

  std::map<std::string, Matrix> by_name;
  for (auto& [name, value] : named) {
    if (!by_name.emplace(name, std::move(value)).second) {
      throw ValidationError("parameter '" + name + "' appears twice");
    }
  }
  if (by_name.size() != p.names_.size()) {
    throw ValidationError("expected " + std::to_string(p.names_.size()) + " parameters, got " +
                          std::to_string(by_name.size()));
  }
  p.values_.reserve(p.names_.size());
  for (std::size_t i = 0; i < p.names_.size(); ++i) {
    auto it = by_name.find(p.names_[i]);
    if (it == by_name.end()) throw ValidationError("missing parameter '" + p.names_[i] + "'");
    const auto [r, c] = b.shapes[i];
    if (it->second.rows() != r || it->second.cols() != c) {
      throw ShapeError("parameter '" + p.names_[i] + "' has shape " + std::to_string(it->second.rows()) +
                       "x" + std::to_string(it->second.cols()) + ", expected " + std::to_string(r) + "x" +
                       std::to_string(c));
    }
    p.values_.push_back(std::move(it->second));
  }
  return p;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const Matrix& m : values_) n += static_cast<std::size_t>(m.size());
  return n;
}

BoundModel bind(ad::Tape& tape, const ModelParams& params, bool requires_grad) {
  std::vector<ad::Tensor> leaves;
  leaves.reserve(params.size());
  for (const Matrix& v : params.values()) leaves.push_back(tape.leaf(v, requires_grad));
  return bind_leaves(params, std::move(leaves));
}

BoundModel bind_leaves(const ModelParams& params, std::vector<ad::Tensor> leaves) {
  if (leaves.size() != params.size()) {
    throw ShapeError("bind_leaves: " + std::to_string(leaves.size()) + " tensors for " +
                     std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (leaves[i].rows() != params.values()[i].rows() || leaves[i].cols() != params.values()[i].cols()) {
      throw ShapeError("bind_leaves: tensor for " + params.name(i) + " has the wrong shape");
    }
  }
  BoundModel b;
  b.leaves = std::move(leaves);
  auto at = [&](int slot) { return b.leaves.at(static_cast<std::size_t>(slot)); };
  auto heads = [&](const std::vector<HeadSlot>& slots) {
    std::vector<HeadParams> out;
    for (const HeadSlot& s : slots) out.push_back({at(s.theta), at(s.attn_target), at(s.attn_source)});
    return out;
  };
  auto semantic = [&](const SemanticSlot& s) {
    return SemanticParams{at(s.weight), at(s.bias), at(s.query)};
  };

  const ModelLayout& lay = params.layout();
  b.proj_f = at(lay.proj_f);
  b.proj_f_bias = at(lay.proj_f_bias);
  b.proj_d = at(lay.proj_d);
  b.proj_d_bias = at(lay.proj_d_bias);
  for (const HanSlot& h : lay.han) {
    HanParams hp;
    for (std::size_t m = 0; m < 4; ++m) hp.paths[m] = heads(h.paths[m]);
    hp.semantic = semantic(h.semantic);
    b.han.push_back(std::move(hp));
  }
  for (const PoolSlot& p : lay.pool) {
    PoolParams pp;
    for (std::size_t t = 0; t < 2; ++t) {
      const ScoreSlot& s = p.by_type[t];
      ScoreParams sp;
      for (std::size_t k = 0; k < 2; ++k) sp.paths[k] = heads(s.paths[k]);
      sp.semantic = semantic(s.semantic);
      sp.summarizer = at(s.summarizer);
      sp.summarizer_bias = at(s.summarizer_bias);
      pp.by_type[t] = std::move(sp);
    }
    b.pool.push_back(std::move(pp));
  }
  b.mlp_w1 = at(lay.mlp_w1);
  b.mlp_b1 = at(lay.mlp_b1);
  b.mlp_w2 = at(lay.mlp_w2);
  b.mlp_b2 = at(lay.mlp_b2);
  return b;
}

// ---- layers -------------------------------------------------------------

namespace {

const Tensor& features_of(const HgState& s, NodeType t) { return t == NodeType::Fmri ? s.x_f : s.x_d; }

Matrix nonzero_pattern(const Matrix& m) {
  return m.unaryExpr([](double v) { return v != 0.0 ? 1.0 : 0.0; });
}

Tensor ones_column(ad::Tape& tape, Index n) { return tape.constant(Matrix::Ones(n, 1)); }

}  // namespace

std::shared_ptr<const Matrix> meta_path_mask(const HgState& state, MetaPath p) {
  switch (p) {
    case MetaPath::FF: {
      Matrix m = nonzero_pattern(state.a_f.value());
      m.diagonal().setOnes();
      return std::make_shared<const Matrix>(std::move(m));
    }
    case MetaPath::DD: {
      Matrix m = nonzero_pattern(state.a_d.value());
      m.diagonal().setOnes();
      return std::make_shared<const Matrix>(std::move(m));
    }
    case MetaPath::FD:
      return std::make_shared<const Matrix>(nonzero_pattern(state.a_fd.value().transpose()));
    case MetaPath::DF:
      return std::make_shared<const Matrix>(nonzero_pattern(state.a_fd.value()));
  }
  throw ValidationError("unknown meta-path");
}

Tensor han_target(const HgState& state, NodeType target,
                  const std::array<std::vector<HeadParams>, 2>& paths,
                  const SemanticParams& semantic, double slope, HanTrace* trace) {
  ad::Tape& tape = state.x_f.tape();
  const Tensor& x_target = features_of(state, target);
  const Index n_target = x_target.rows();
  const auto& kinds = paths_into(target);

  std::array<Tensor, 2> per_path;
  for (std::size_t k = 0; k < 2; ++k) {
    const MetaPath mp = kinds[k];
    const Tensor& x_source = features_of(state, source_type(mp));
    const auto mask = meta_path_mask(state, mp);
    const Tensor zeros = tape.constant(Matrix::Zero(n_target, x_source.rows()));

    std::vector<Tensor> head_out;
    head_out.reserve(paths[k].size());
    for (const HeadParams& hp : paths[k]) {
      const Tensor h_src = ad::matmul(x_source, hp.theta);
      const Tensor h_tgt = ad::matmul(x_target, hp.theta);
      const Tensor s_tgt = ad::matmul(h_tgt, hp.attn_target);
      const Tensor s_src = ad::matmul(h_src, hp.attn_source);
      // e_ij = theta^T [h'_i || h'_j] = a_t.h'_i + a_s.h'_j
      const Tensor logits = ad::add_row_broadcast(ad::add_col_broadcast(zeros, s_tgt), ad::transpose(s_src));
      const Tensor alpha = ad::masked_row_softmax(ad::leaky_relu(logits, slope), mask);
      if (trace) trace->attention[static_cast<std::size_t>(mp)].push_back(alpha.value());
      head_out.push_back(ad::elu(ad::matmul(alpha, h_src)));
    }
    per_path[k] = head_out.size() == 1 ? head_out.front() : ad::concat_cols(head_out);
  }

  // Semantic attention: one score per meta-path, averaged over target nodes.
  std::array<Tensor, 2> scores;
  for (std::size_t k = 0; k < 2; ++k) {
    const Tensor proj = ad::tanh(ad::add_row_broadcast(ad::matmul(per_path[k], semantic.weight), semantic.bias));
    scores[k] = ad::col_mean(ad::matmul(proj, semantic.query));
  }
  const Tensor beta = ad::row_softmax(ad::concat_cols(scores[0], scores[1]));
  if (trace) trace->semantic[static_cast<std::size_t>(target)] = beta.value();

  const Tensor ones = ones_column(tape, n_target);
  Tensor out;
  for (std::size_t k = 0; k < 2; ++k) {
    const Tensor weight = ad::matmul(ones, ad::slice_cols(beta, static_cast<Index>(k), 1));
    const Tensor term = ad::mul_col_broadcast(per_path[k], weight);
    out = k == 0 ? term : ad::add(out, term);
  }
  return out;
}

std::pair<Tensor, Tensor> han_layer(const HgState& state, const HanParams& params, double slope,
                                    HanTrace* trace) {
  for (std::size_t m = 0; m < 4; ++m) {
    if (params.paths[m].empty()) throw ValidationError("han_layer: every meta-path needs at least one head");
    for (const HeadParams& hp : params.paths[m]) {
      const Index in = features_of(state, source_type(static_cast<MetaPath>(m))).cols();
      if (hp.theta.rows() != in) {
        throw ShapeError("han_layer: theta expects width " + std::to_string(hp.theta.rows()) +
                         ", features have width " + std::to_string(in));
      }
    }
  }
  if (state.x_f.cols() != state.x_d.cols()) {
    throw ShapeError("han_layer: fMRI and DTI features must share a width");
  }
  auto select = [&](NodeType t) {
    const auto& kinds = paths_into(t);
    return std::array<std::vector<HeadParams>, 2>{params.paths[static_cast<std::size_t>(kinds[0])],
                                                  params.paths[static_cast<std::size_t>(kinds[1])]};
  };
  Tensor f = han_target(state, NodeType::Fmri, select(NodeType::Fmri), params.semantic, slope, trace);
  Tensor d = han_target(state, NodeType::Dti, select(NodeType::Dti), params.semantic, slope, trace);
  return {f, d};
}

HgState hg_pool(const HgState& state, const PoolParams& params, double slope, PoolTrace* trace,
                bool identity) {
  ad::Tape& tape = state.x_f.tape();
  const Index nf = state.x_f.rows();
  const Index nd = state.x_d.rows();

  std::array<Tensor, 2> assign;
  for (std::size_t t = 0; t < 2; ++t) {
    const auto type = static_cast<NodeType>(t);
    const Index n = t == 0 ? nf : nd;
    if (identity) {
      assign[t] = tape.constant(Matrix::Identity(n, n));
      continue;
    }
    const ScoreParams& sp = params.by_type[t];
    const Tensor scores = han_target(state, type, sp.paths, sp.semantic, slope, trace ? &trace->score : nullptr);
    // Column softmax: each pooled node is a distribution over current nodes of this type.
    assign[t] = ad::col_softmax(ad::add_row_broadcast(ad::matmul(scores, sp.summarizer), sp.summarizer_bias));
  }
  const Index pf = assign[0].cols();
  const Index pd = assign[1].cols();

  // Zero padding on the other type's rows keeps pooled features type-pure.
  const Tensor pool = ad::concat_rows(ad::concat_cols(assign[0], tape.constant(Matrix::Zero(nf, pd))),
                                      ad::concat_cols(tape.constant(Matrix::Zero(nd, pf)), assign[1]));
  const Tensor adjacency = ad::concat_rows(ad::concat_cols(state.a_f, state.a_fd),
                                           ad::concat_cols(ad::transpose(state.a_fd), state.a_d));
  const Tensor features = ad::concat_rows(state.x_f, state.x_d);

  const Tensor pool_t = ad::transpose(pool);
  const Tensor pooled_adj = ad::matmul(ad::matmul(pool_t, adjacency), pool);
  const Tensor pooled_x = ad::matmul(pool_t, features);

  HgState out;
  out.x_f = ad::slice_rows(pooled_x, 0, pf);
  out.x_d = ad::slice_rows(pooled_x, pf, pd);
  out.a_f = ad::slice_cols(ad::slice_rows(pooled_adj, 0, pf), 0, pf);
  out.a_fd = ad::slice_cols(ad::slice_rows(pooled_adj, 0, pf), pf, pd);
  out.a_d = ad::slice_cols(ad::slice_rows(pooled_adj, pf, pd), pf, pd);

  if (trace) {
    trace->assignment = {assign[0].value(), assign[1].value()};
    trace->pooling = pool.value();
    trace->a_f = out.a_f.value();
    trace->a_d = out.a_d.value();
    trace->a_fd = out.a_fd.value();
  }
  return out;
}

Tensor pairnorm(const Tensor& x, double s) {
  const Tensor centered = ad::add_row_broadcast(x, ad::scale(ad::col_mean(x), -1.0));
  const Tensor unit = ad::row_l2_normalize(centered);
  return s == 1.0 ? unit : ad::scale(unit, s);
}

Tensor readout(const Tensor& x_f, const Tensor& x_d) {
  const Tensor all = ad::concat_rows(x_f, x_d);
  return ad::concat_cols(ad::col_max(all), ad::col_mean(all));
}

Tensor forward(ad::Tape& tape, const HeteroGraph& graph, const BoundModel& model,
               const ModelConfig& config, const ForwardOptions& options, ForwardTrace* trace) {
  if (graph.x_f.cols() != config.fmri_width || graph.x_d.cols() != config.dti_width ||
      graph.x_f.rows() != config.n_fmri || graph.x_d.rows() != config.n_dti) {
    throw ShapeError("forward: graph '" + graph.subject_id + "' has " + std::to_string(graph.x_f.rows()) +
                     "x" + std::to_string(graph.x_f.cols()) + " fMRI and " + std::to_string(graph.x_d.rows()) +
                     "x" + std::to_string(graph.x_d.cols()) + " DTI features; model expects " +
                     std::to_string(config.n_fmri) + "x" + std::to_string(config.fmri_width) + " and " +
                     std::to_string(config.n_dti) + "x" + std::to_string(config.dti_width));
  }
  if (graph.a_f.rows() != graph.x_f.rows() || graph.a_d.rows() != graph.x_d.rows() ||
      graph.a_fd.rows() != graph.x_f.rows() || graph.a_fd.cols() != graph.x_d.rows()) {
    throw ShapeError("forward: graph '" + graph.subject_id + "' has inconsistent adjacency blocks");
  }
  if (options.identity_pool && config.pool_ratio != 1.0) {
    throw ValidationError("forward: identity pooling requires pool ratio 1");
  }

  HgState state;
  state.x_f = ad::add_row_broadcast(ad::matmul(tape.constant(graph.x_f), model.proj_f), model.proj_f_bias);
  state.x_d = ad::add_row_broadcast(ad::matmul(tape.constant(graph.x_d), model.proj_d), model.proj_d_bias);
  state.a_f = tape.constant(graph.a_f);
  state.a_d = tape.constant(graph.a_d);
  state.a_fd = tape.constant(graph.a_fd);

  if (trace) trace->layers.assign(static_cast<std::size_t>(config.layers), {});
  std::vector<Tensor> readouts;
  for (int l = 0; l < config.layers; ++l) {
    LayerTrace* lt = trace ? &trace->layers[static_cast<std::size_t>(l)] : nullptr;
    auto [f, d] = han_layer(state, model.han.at(static_cast<std::size_t>(l)), config.attention_slope,
                            lt ? &lt->han : nullptr);
    const Tensor normed = pairnorm(ad::concat_rows(f, d));
    state.x_f = ad::slice_rows(normed, 0, f.rows());
    state.x_d = ad::slice_rows(normed, f.rows(), d.rows());
    state = hg_pool(state, model.pool.at(static_cast<std::size_t>(l)), config.attention_slope,
                    lt ? &lt->pool : nullptr, options.identity_pool);
    readouts.push_back(readout(state.x_f, state.x_d));
    if (lt) lt->readout = readouts.back().value();
  }
  Tensor embedding = readouts.size() == 1 ? readouts.front() : ad::concat_cols(readouts);
  if (trace) trace->embedding = embedding.value();

  if (options.train && config.dropout > 0.0) {
    std::mt19937_64 rng(options.dropout_seed);
    std::bernoulli_distribution keep(1.0 - config.dropout);
    const double inv = 1.0 / (1.0 - config.dropout);
    Matrix mask(embedding.rows(), embedding.cols());
    for (Index k = 0; k < mask.size(); ++k) mask(k) = keep(rng) ? inv : 0.0;
    embedding = ad::mul(embedding, tape.constant(std::move(mask)));
  }
  const Tensor hidden = ad::elu(ad::add_row_broadcast(ad::matmul(embedding, model.mlp_w1), model.mlp_b1));
  return ad::add_row_broadcast(ad::matmul(hidden, model.mlp_w2), model.mlp_b2);
}

Eigen::RowVectorXd predict_proba(const HeteroGraph& graph, const ModelParams& params, ForwardTrace* trace) {
  ad::Tape tape;
  const BoundModel model = bind(tape, params, false);
  const Tensor logits = forward(tape, graph, model, params.config(), {}, trace);
  const Tensor probs = ad::row_softmax(logits);
  return probs.value().row(0);
}

}  // namespace hetfuse
