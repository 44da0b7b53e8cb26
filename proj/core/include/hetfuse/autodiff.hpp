#pragma once

// Reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records every primitive applied to its Tensors in evaluation
// order. Tensors are light handles (tape pointer + node index) and are only
// valid while their Tape is alive. backward() walks the records in reverse
// and returns one gradient matrix per node.
//
//   ad::Tape tape;
//   auto w = tape.leaf(weights);
//   auto x = tape.constant(inputs);
//   auto loss = ad::sum(ad::tanh(ad::matmul(x, w)));
//   auto grads = tape.backward(loss);
//   const Matrix& dw = grads[w];

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hetfuse/errors.hpp"

namespace hetfuse {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace hetfuse

namespace hetfuse::ad {

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Transpose,
  Add,
  Sub,
  Mul,
  Scale,
  AddScalar,
  ConcatRows,
  ConcatCols,
  SliceRows,
  SliceCols,
  RowSoftmax,
  MaskedRowSoftmax,
  LogSoftmaxRows,
  LeakyRelu,
  Elu,
  Tanh,
  Exp,
  RowMean,
  ColMean,
  RowMax,
  ColMax,
  RowL2Normalize,
  AddRowBroadcast,
  AddColBroadcast,
  MulColBroadcast,
  Sum,
};

std::string_view op_name(Op op);

// Non-tensor arguments of a primitive. `mask` is shared so that one
// adjacency pattern can feed many attention heads without copies.
struct OpAttr {
  double scalar = 0.0;
  Index offset = 0;
  Index count = 0;
  std::shared_ptr<const Matrix> mask = nullptr;
};

class Tape;

class Tensor {
 public:
  Tensor() = default;

  Index rows() const;
  Index cols() const;
  const Matrix& value() const;
  std::size_t id() const { return id_; }
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::vector<Matrix> grads) : grads_(std::move(grads)) {}

  // Gradient for a node. Nodes that do not require grad report an empty
  // matrix; leaves that were never reached report zeros of their shape.
  const Matrix& operator[](const Tensor& t) const { return at(t.id()); }
  const Matrix& at(std::size_t id) const;
  std::size_t size() const { return grads_.size(); }

 private:
  std::vector<Matrix> grads_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = delete;
  Tape& operator=(Tape&&) = delete;

  Tensor leaf(Matrix value, bool requires_grad = true);
  Tensor constant(Matrix value) { return leaf(std::move(value), false); }

  // Records `op` applied to `inputs`. Throws ShapeError when the shapes do
  // not conform; the message names the primitive and the offending dims.
  Tensor apply(Op op, std::span<const Tensor> inputs, OpAttr attr = {});

  Gradients backward(const Tensor& loss) const;

  // Re-evaluates every recorded primitive from the stored leaf values and
  // reports whether each output is reproduced bit for bit.
  bool replay_matches() const;

  std::size_t size() const { return records_.size(); }
  Op op_at(std::size_t id) const { return records_.at(id).op; }
  std::span<const std::size_t> inputs_of(std::size_t id) const { return records_.at(id).inputs; }

  const Matrix& value(std::size_t id) const { return records_[id].value; }
  bool requires_grad(std::size_t id) const { return records_[id].requires_grad; }

 private:
  struct Record {
    Op op = Op::Leaf;
    std::vector<std::size_t> inputs;
    OpAttr attr;
    Matrix value;
    bool requires_grad = false;
  };

  Matrix evaluate(const Record& rec) const;

  std::vector<Record> records_;
};

// Primitive wrappers. All inputs must live on the same tape.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& a, Index offset, Index count);
Tensor slice_cols(const Tensor& a, Index offset, Index count);
Tensor row_softmax(const Tensor& a);
// Softmax over the entries where mask != 0; a row with no admissible entry
// yields a zero row.
Tensor masked_row_softmax(const Tensor& a, std::shared_ptr<const Matrix> mask);
Tensor log_softmax_rows(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor elu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor row_mean(const Tensor& a);
Tensor col_mean(const Tensor& a);
Tensor row_max(const Tensor& a);
Tensor col_max(const Tensor& a);
Tensor row_l2_normalize(const Tensor& a);
Tensor add_row_broadcast(const Tensor& a, const Tensor& row);
Tensor add_col_broadcast(const Tensor& a, const Tensor& col);
Tensor mul_col_broadcast(const Tensor& a, const Tensor& col);
Tensor sum(const Tensor& a);

// Composites built from the primitives above.
Tensor col_softmax(const Tensor& a);
Tensor concat_rows(const Tensor& top, const Tensor& bottom);
Tensor concat_cols(const Tensor& left, const Tensor& right);

}  // namespace hetfuse::ad
