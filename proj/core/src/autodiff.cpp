#include "hetfuse/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hetfuse::ad {
namespace {

std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

[[noreturn]] void shape_fail(Op op, const std::string& detail) {
  throw ShapeError(std::string(op_name(op)) + ": " + detail);
}

void expect_arity(Op op, std::size_t got, std::size_t want) {
  if (got != want) {
    shape_fail(op, "expected " + std::to_string(want) + " inputs, got " + std::to_string(got));
  }
}

void expect_same(Op op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    shape_fail(op, "operand shapes differ: " + dims(a) + " vs " + dims(b));
  }
}

Matrix softmax_rows(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const double m = a.row(i).maxCoeff();
    double z = 0.0;
    for (Index j = 0; j < a.cols(); ++j) {
      out(i, j) = std::exp(a(i, j) - m);
      z += out(i, j);
    }
    out.row(i) /= z;
  }
  return out;
}

Matrix masked_softmax_rows(const Matrix& a, const Matrix& mask) {
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < a.cols(); ++j) {
      if (mask(i, j) != 0.0) m = std::max(m, a(i, j));
    }
    if (!std::isfinite(m)) continue;  // fully masked row stays zero
    double z = 0.0;
    for (Index j = 0; j < a.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        out(i, j) = std::exp(a(i, j) - m);
        z += out(i, j);
      }
    }
    out.row(i) /= z;
  }
  return out;
}

Index first_argmax(const auto& v) {
  Index best = 0;
  for (Index k = 1; k < v.size(); ++k) {
    if (v(k) > v(best)) best = k;
  }
  return best;
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::AddScalar: return "add_scalar";
    case Op::ConcatRows: return "concat_rows";
    case Op::ConcatCols: return "concat_cols";
    case Op::SliceRows: return "slice_rows";
    case Op::SliceCols: return "slice_cols";
    case Op::RowSoftmax: return "row_softmax";
    case Op::MaskedRowSoftmax: return "masked_row_softmax";
    case Op::LogSoftmaxRows: return "log_softmax_rows";
    case Op::LeakyRelu: return "leaky_relu";
    case Op::Elu: return "elu";
    case Op::Tanh: return "tanh";
    case Op::Exp: return "exp";
    case Op::RowMean: return "row_mean";
    case Op::ColMean: return "col_mean";
    case Op::RowMax: return "row_max";
    case Op::ColMax: return "col_max";
    case Op::RowL2Normalize: return "row_l2_normalize";
    case Op::AddRowBroadcast: return "add_row_broadcast";
    case Op::AddColBroadcast: return "add_col_broadcast";
    case Op::MulColBroadcast: return "mul_col_broadcast";
    case Op::Sum: return "sum";
  }
  return "unknown";
}

// ---- Tensor / Gradients -------------------------------------------------

Tape& Tensor::tape() const {
  if (tape_ == nullptr) throw ValidationError("tensor is not attached to a tape");
  return *tape_;
}
Index Tensor::rows() const { return tape().value(id_).rows(); }
Index Tensor::cols() const { return tape().value(id_).cols(); }
const Matrix& Tensor::value() const { return tape().value(id_); }
bool Tensor::requires_grad() const { return tape().requires_grad(id_); }

const Matrix& Gradients::at(std::size_t id) const {
  if (id >= grads_.size()) throw ValidationError("gradient requested for unknown node");
  return grads_[id];
}

// ---- Tape ---------------------------------------------------------------

Tensor Tape::leaf(Matrix value, bool requires_grad) {
  Record rec;
  rec.op = Op::Leaf;
  rec.value = std::move(value);
  rec.requires_grad = requires_grad;
  records_.push_back(std::move(rec));
  return Tensor(this, records_.size() - 1);
}

Tensor Tape::apply(Op op, std::span<const Tensor> inputs, OpAttr attr) {
  if (op == Op::Leaf) throw ValidationError("apply: leaves are created with Tape::leaf");
  Record rec;
  rec.op = op;
  rec.attr = std::move(attr);
  rec.inputs.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    if (t.tape_ != this) shape_fail(op, "input belongs to a different tape");
    rec.inputs.push_back(t.id_);
    rec.requires_grad = rec.requires_grad || records_[t.id_].requires_grad;
  }
  rec.value = evaluate(rec);
  records_.push_back(std::move(rec));
  return Tensor(this, records_.size() - 1);
}

Matrix Tape::evaluate(const Record& rec) const {
  const Op op = rec.op;
  const auto in = [&](std::size_t k) -> const Matrix& { return records_[rec.inputs[k]].value; };
  const std::size_t n = rec.inputs.size();

  switch (op) {
    case Op::Leaf:
      return rec.value;
    case Op::MatMul: {
      expect_arity(op, n, 2);
      if (in(0).cols() != in(1).rows()) {
        shape_fail(op, "inner dimensions differ: " + dims(in(0)) + " * " + dims(in(1)));
      }
      return in(0) * in(1);
    }
    case Op::Transpose:
      expect_arity(op, n, 1);
      return in(0).transpose();
    case Op::Add:
      expect_arity(op, n, 2);
      expect_same(op, in(0), in(1));
      return in(0) + in(1);
    case Op::Sub:
      expect_arity(op, n, 2);
      expect_same(op, in(0), in(1));
      return in(0) - in(1);
    case Op::Mul:
      expect_arity(op, n, 2);
      expect_same(op, in(0), in(1));
      return in(0).cwiseProduct(in(1));
    case Op::Scale:
      expect_arity(op, n, 1);
      return in(0) * rec.attr.scalar;
    case Op::AddScalar:
      expect_arity(op, n, 1);
      return in(0).array() + rec.attr.scalar;
    case Op::ConcatRows: {
      if (n == 0) shape_fail(op, "no inputs");
      Index rows = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (in(k).cols() != in(0).cols()) {
          shape_fail(op, "column counts differ: " + dims(in(0)) + " vs " + dims(in(k)));
        }
        rows += in(k).rows();
      }
      Matrix out(rows, in(0).cols());
      Index r = 0;
      for (std::size_t k = 0; k < n; ++k) {
        out.middleRows(r, in(k).rows()) = in(k);
        r += in(k).rows();
      }
      return out;
    }
    case Op::ConcatCols: {
      if (n == 0) shape_fail(op, "no inputs");
      Index cols = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (in(k).rows() != in(0).rows()) {
          shape_fail(op, "row counts differ: " + dims(in(0)) + " vs " + dims(in(k)));
        }
        cols += in(k).cols();
      }
      Matrix out(in(0).rows(), cols);
      Index c = 0;
      for (std::size_t k = 0; k < n; ++k) {
        out.middleCols(c, in(k).cols()) = in(k);
        c += in(k).cols();
      }
      return out;
    }
    case Op::SliceRows: {
      expect_arity(op, n, 1);
      const auto& a = in(0);
      if (rec.attr.offset < 0 || rec.attr.count < 0 || rec.attr.offset + rec.attr.count > a.rows()) {
        shape_fail(op, "rows [" + std::to_string(rec.attr.offset) + ", +" +
                           std::to_string(rec.attr.count) + ") out of range for " + dims(a));
      }
      return a.middleRows(rec.attr.offset, rec.attr.count);
    }
    case Op::SliceCols: {
      expect_arity(op, n, 1);
      const auto& a = in(0);
      if (rec.attr.offset < 0 || rec.attr.count < 0 || rec.attr.offset + rec.attr.count > a.cols()) {
        shape_fail(op, "cols [" + std::to_string(rec.attr.offset) + ", +" +
                           std::to_string(rec.attr.count) + ") out of range for " + dims(a));
      }
      return a.middleCols(rec.attr.offset, rec.attr.count);
    }
    case Op::RowSoftmax:
      expect_arity(op, n, 1);
      if (in(0).cols() == 0) shape_fail(op, "softmax over zero columns");
      return softmax_rows(in(0));
    case Op::MaskedRowSoftmax:
      expect_arity(op, n, 1);
      if (!rec.attr.mask) shape_fail(op, "missing mask");
      expect_same(op, in(0), *rec.attr.mask);
      return masked_softmax_rows(in(0), *rec.attr.mask);
    case Op::LogSoftmaxRows: {
      expect_arity(op, n, 1);
      const auto& a = in(0);
      if (a.cols() == 0) shape_fail(op, "softmax over zero columns");
      Matrix out(a.rows(), a.cols());
      for (Index i = 0; i < a.rows(); ++i) {
        const double m = a.row(i).maxCoeff();
        double z = 0.0;
        for (Index j = 0; j < a.cols(); ++j) z += std::exp(a(i, j) - m);
        const double lse = m + std::log(z);
        out.row(i) = a.row(i).array() - lse;
      }
      return out;
    }
    case Op::LeakyRelu: {
      expect_arity(op, n, 1);
      const double slope = rec.attr.scalar;
      return in(0).unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
    }
    case Op::Elu:
      expect_arity(op, n, 1);
      return in(0).unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
    case Op::Tanh:
      expect_arity(op, n, 1);
      return in(0).array().tanh().matrix();
    case Op::Exp:
      expect_arity(op, n, 1);
      return in(0).array().exp().matrix();
    case Op::RowMean:
      expect_arity(op, n, 1);
      if (in(0).cols() == 0) shape_fail(op, "mean over zero columns");
      return in(0).rowwise().mean();
    case Op::ColMean:
      expect_arity(op, n, 1);
      if (in(0).rows() == 0) shape_fail(op, "mean over zero rows");
      return in(0).colwise().mean();
    case Op::RowMax: {
      expect_arity(op, n, 1);
      const auto& a = in(0);
      if (a.cols() == 0) shape_fail(op, "max over zero columns");
      Matrix out(a.rows(), 1);
      for (Index i = 0; i < a.rows(); ++i) out(i, 0) = a(i, first_argmax(a.row(i)));
      return out;
    }
    case Op::ColMax: {
      expect_arity(op, n, 1);
      const auto& a = in(0);
      if (a.rows() == 0) shape_fail(op, "max over zero rows");
      Matrix out(1, a.cols());
      for (Index j = 0; j < a.cols(); ++j) out(0, j) = a(first_argmax(a.col(j)), j);
      return out;
    }
    case Op::RowL2Normalize: {
      expect_arity(op, n, 1);
      Matrix out = in(0);
      for (Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm > 0.0) out.row(i) /= norm;
      }
      return out;
    }
    case Op::AddRowBroadcast: {
      expect_arity(op, n, 2);
      if (in(1).rows() != 1 || in(1).cols() != in(0).cols()) {
        shape_fail(op, "row vector " + dims(in(1)) + " does not match " + dims(in(0)));
      }
      return in(0).rowwise() + in(1).row(0);
    }
    case Op::AddColBroadcast: {
      expect_arity(op, n, 2);
      if (in(1).cols() != 1 || in(1).rows() != in(0).rows()) {
        shape_fail(op, "column vector " + dims(in(1)) + " does not match " + dims(in(0)));
      }
      return in(0).colwise() + in(1).col(0);
    }
    case Op::MulColBroadcast: {
      expect_arity(op, n, 2);
      if (in(1).cols() != 1 || in(1).rows() != in(0).rows()) {
        shape_fail(op, "column vector " + dims(in(1)) + " does not match " + dims(in(0)));
      }
      return in(1).col(0).asDiagonal() * in(0);
    }
    case Op::Sum:
      expect_arity(op, n, 1);
      return Matrix::Constant(1, 1, in(0).sum());
  }
  shape_fail(op, "unhandled primitive");
}

Gradients Tape::backward(const Tensor& loss) const {
  if (loss.tape_ != this) throw ValidationError("backward: loss belongs to a different tape");
  const Matrix& lv = records_.at(loss.id_).value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + dims(lv));
  }

  std::vector<Matrix> grads(records_.size());
  std::vector<char> touched(records_.size(), 0);
  for (std::size_t id = 0; id < records_.size(); ++id) {
    if (records_[id].op == Op::Leaf && records_[id].requires_grad) {
      grads[id] = Matrix::Zero(records_[id].value.rows(), records_[id].value.cols());
    }
  }
  if (!records_[loss.id_].requires_grad) return Gradients(std::move(grads));

  auto accumulate = [&](std::size_t id, const auto& g) {
    if (!records_[id].requires_grad) return;
    if (!touched[id]) {
      grads[id] = g;
      touched[id] = 1;
    } else {
      grads[id] += g;
    }
  };

  grads[loss.id_] = Matrix::Ones(1, 1);
  touched[loss.id_] = 1;

  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    if (!touched[id]) continue;
    const Record& rec = records_[id];
    if (rec.op == Op::Leaf) continue;
    const Matrix& g = grads[id];
    const Matrix& y = rec.value;
    const auto in = [&](std::size_t k) -> const Matrix& { return records_[rec.inputs[k]].value; };
    const auto input = [&](std::size_t k) { return rec.inputs[k]; };

    switch (rec.op) {
      case Op::Leaf:
        break;
      case Op::MatMul:
        accumulate(input(0), g * in(1).transpose());
        accumulate(input(1), in(0).transpose() * g);
        break;
      case Op::Transpose:
        accumulate(input(0), g.transpose());
        break;
      case Op::Add:
        accumulate(input(0), g);
        accumulate(input(1), g);
        break;
      case Op::Sub:
        accumulate(input(0), g);
        accumulate(input(1), -g);
        break;
      case Op::Mul:
        accumulate(input(0), g.cwiseProduct(in(1)));
        accumulate(input(1), g.cwiseProduct(in(0)));
        break;
      case Op::Scale:
        accumulate(input(0), g * rec.attr.scalar);
        break;
      case Op::AddScalar:
        accumulate(input(0), g);
        break;
      case Op::ConcatRows: {
        Index r = 0;
        for (std::size_t k = 0; k < rec.inputs.size(); ++k) {
          accumulate(input(k), g.middleRows(r, in(k).rows()));
          r += in(k).rows();
        }
        break;
      }
      case Op::ConcatCols: {
        Index c = 0;
        for (std::size_t k = 0; k < rec.inputs.size(); ++k) {
          accumulate(input(k), g.middleCols(c, in(k).cols()));
          c += in(k).cols();
        }
        break;
      }
      case Op::SliceRows: {
        Matrix d = Matrix::Zero(in(0).rows(), in(0).cols());
        d.middleRows(rec.attr.offset, rec.attr.count) = g;
        accumulate(input(0), d);
        break;
      }
      case Op::SliceCols: {
        Matrix d = Matrix::Zero(in(0).rows(), in(0).cols());
        d.middleCols(rec.attr.offset, rec.attr.count) = g;
        accumulate(input(0), d);
        break;
      }
      case Op::RowSoftmax:
      case Op::MaskedRowSoftmax: {
        // masked entries have y == 0 and therefore receive no gradient
        const Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
        accumulate(input(0), y.cwiseProduct(g.colwise() - dot));
        break;
      }
      case Op::LogSoftmaxRows: {
        const Matrix p = y.array().exp().matrix();
        const Eigen::VectorXd gs = g.rowwise().sum();
        accumulate(input(0), g - (p.array().colwise() * gs.array()).matrix());
        break;
      }
      case Op::LeakyRelu: {
        const double slope = rec.attr.scalar;
        const Matrix& x = in(0);
        Matrix d(x.rows(), x.cols());
        for (Index k = 0; k < x.size(); ++k) d(k) = x(k) > 0.0 ? g(k) : slope * g(k);
        accumulate(input(0), d);
        break;
      }
      case Op::Elu: {
        const Matrix& x = in(0);
        Matrix d(x.rows(), x.cols());
        for (Index k = 0; k < x.size(); ++k) d(k) = x(k) > 0.0 ? g(k) : g(k) * (y(k) + 1.0);
        accumulate(input(0), d);
        break;
      }
      case Op::Tanh:
        accumulate(input(0), g.cwiseProduct((1.0 - y.array().square()).matrix()));
        break;
      case Op::Exp:
        accumulate(input(0), g.cwiseProduct(y));
        break;
      case Op::RowMean: {
        const Index c = in(0).cols();
        accumulate(input(0), g.col(0).replicate(1, c) / static_cast<double>(c));
        break;
      }
      case Op::ColMean: {
        const Index r = in(0).rows();
        accumulate(input(0), g.row(0).replicate(r, 1) / static_cast<double>(r));
        break;
      }
      case Op::RowMax: {
        const Matrix& a = in(0);
        Matrix d = Matrix::Zero(a.rows(), a.cols());
        for (Index i = 0; i < a.rows(); ++i) d(i, first_argmax(a.row(i))) = g(i, 0);
        accumulate(input(0), d);
        break;
      }
      case Op::ColMax: {
        const Matrix& a = in(0);
        Matrix d = Matrix::Zero(a.rows(), a.cols());
        for (Index j = 0; j < a.cols(); ++j) d(first_argmax(a.col(j)), j) = g(0, j);
        accumulate(input(0), d);
        break;
      }
      case Op::RowL2Normalize: {
        const Matrix& x = in(0);
        Matrix d = Matrix::Zero(x.rows(), x.cols());
        for (Index i = 0; i < x.rows(); ++i) {
          const double norm = x.row(i).norm();
          if (norm == 0.0) continue;
          const double proj = y.row(i).dot(g.row(i));
          d.row(i) = (g.row(i) - proj * y.row(i)) / norm;
        }
        accumulate(input(0), d);
        break;
      }
      case Op::AddRowBroadcast:
        accumulate(input(0), g);
        accumulate(input(1), g.colwise().sum());
        break;
      case Op::AddColBroadcast:
        accumulate(input(0), g);
        accumulate(input(1), g.rowwise().sum());
        break;
      case Op::MulColBroadcast: {
        const Matrix& c = in(1);
        accumulate(input(0), c.col(0).asDiagonal() * g);
        accumulate(input(1), g.cwiseProduct(in(0)).rowwise().sum());
        break;
      }
      case Op::Sum:
        accumulate(input(0), Matrix::Constant(in(0).rows(), in(0).cols(), g(0, 0)));
        break;
    }
  }

  // Intermediate nodes keep their gradients; leaves that were never reached
  // keep the zero matrices allocated above.
  return Gradients(std::move(grads));
}

bool Tape::replay_matches() const {
  for (const Record& rec : records_) {
    if (rec.op == Op::Leaf) continue;
    const Matrix again = evaluate(rec);
    if (again.rows() != rec.value.rows() || again.cols() != rec.value.cols()) return false;
    for (Index k = 0; k < again.size(); ++k) {
      const double a = again(k);
      const double b = rec.value(k);
      if (!(a == b) && !(std::isnan(a) && std::isnan(b))) return false;
    }
  }
  return true;
}

// ---- wrappers -----------------------------------------------------------

namespace {
Tensor unary(Op op, const Tensor& a, OpAttr attr = {}) {
  const Tensor in[] = {a};
  return a.tape().apply(op, in, std::move(attr));
}
Tensor binary(Op op, const Tensor& a, const Tensor& b) {
  const Tensor in[] = {a, b};
  return a.tape().apply(op, in);
}
}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) { return binary(Op::MatMul, a, b); }
Tensor transpose(const Tensor& a) { return unary(Op::Transpose, a); }
Tensor add(const Tensor& a, const Tensor& b) { return binary(Op::Add, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(Op::Sub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(Op::Mul, a, b); }
Tensor scale(const Tensor& a, double s) { return unary(Op::Scale, a, {.scalar = s}); }
Tensor add_scalar(const Tensor& a, double s) { return unary(Op::AddScalar, a, {.scalar = s}); }

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  return parts.front().tape().apply(Op::ConcatRows, parts);
}
Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  return parts.front().tape().apply(Op::ConcatCols, parts);
}
Tensor concat_rows(const Tensor& top, const Tensor& bottom) {
  const Tensor in[] = {top, bottom};
  return concat_rows(std::span<const Tensor>(in));
}
Tensor concat_cols(const Tensor& left, const Tensor& right) {
  const Tensor in[] = {left, right};
  return concat_cols(std::span<const Tensor>(in));
}

Tensor slice_rows(const Tensor& a, Index offset, Index count) {
  return unary(Op::SliceRows, a, {.offset = offset, .count = count});
}
Tensor slice_cols(const Tensor& a, Index offset, Index count) {
  return unary(Op::SliceCols, a, {.offset = offset, .count = count});
}
Tensor row_softmax(const Tensor& a) { return unary(Op::RowSoftmax, a); }
Tensor masked_row_softmax(const Tensor& a, std::shared_ptr<const Matrix> mask) {
  return unary(Op::MaskedRowSoftmax, a, {.mask = std::move(mask)});
}
Tensor log_softmax_rows(const Tensor& a) { return unary(Op::LogSoftmaxRows, a); }
Tensor leaky_relu(const Tensor& a, double slope) { return unary(Op::LeakyRelu, a, {.scalar = slope}); }
Tensor elu(const Tensor& a) { return unary(Op::Elu, a); }
Tensor tanh(const Tensor& a) { return unary(Op::Tanh, a); }
Tensor exp(const Tensor& a) { return unary(Op::Exp, a); }
Tensor row_mean(const Tensor& a) { return unary(Op::RowMean, a); }
Tensor col_mean(const Tensor& a) { return unary(Op::ColMean, a); }
Tensor row_max(const Tensor& a) { return unary(Op::RowMax, a); }
Tensor col_max(const Tensor& a) { return unary(Op::ColMax, a); }
Tensor row_l2_normalize(const Tensor& a) { return unary(Op::RowL2Normalize, a); }
Tensor add_row_broadcast(const Tensor& a, const Tensor& row) { return binary(Op::AddRowBroadcast, a, row); }
Tensor add_col_broadcast(const Tensor& a, const Tensor& col) { return binary(Op::AddColBroadcast, a, col); }
Tensor mul_col_broadcast(const Tensor& a, const Tensor& col) { return binary(Op::MulColBroadcast, a, col); }
Tensor sum(const Tensor& a) { return unary(Op::Sum, a); }

Tensor col_softmax(const Tensor& a) { return transpose(row_softmax(transpose(a))); }

}  // namespace hetfuse::ad
