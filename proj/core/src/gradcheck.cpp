#include "hetfuse/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hetfuse::ad {
namespace {

double evaluate_scalar(const MultiScalarFn& f, std::span<const Matrix> xs) {
  Tape tape;
  std::vector<Tensor> leaves;
  leaves.reserve(xs.size());
  for (const Matrix& x : xs) leaves.push_back(tape.leaf(x, false));
  const Tensor out = f(tape, leaves);
  if (out.rows() != 1 || out.cols() != 1) throw ShapeError("grad_check: function must return 1x1");
  return out.value()(0, 0);
}

void record(GradCheckReport& rep, std::size_t input, Index entry, double analytic, double numeric) {
  const double abs_err = std::abs(analytic - numeric);
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  const double rel = abs_err / denom;
  ++rep.checked;
  rep.max_abs_error = std::max(rep.max_abs_error, abs_err);
  if (rel > rep.max_rel_error || !std::isfinite(rel)) {
    rep.max_rel_error = std::isfinite(rel) ? rel : std::numeric_limits<double>::infinity();
    rep.worst_input = input;
    rep.worst_entry = entry;
  }
}

}  // namespace

GradCheckReport grad_check(const MultiScalarFn& f, std::span<const Matrix> xs, double tol,
                           double step) {
  GradCheckReport rep;
  rep.tolerance = tol;

  Tape tape;
  std::vector<Tensor> leaves;
  leaves.reserve(xs.size());
  for (const Matrix& x : xs) leaves.push_back(tape.leaf(x, true));
  const Tensor out = f(tape, leaves);
  const Gradients grads = tape.backward(out);

  std::vector<Matrix> probe(xs.begin(), xs.end());
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const Matrix& analytic = grads[leaves[k]];
    for (Index e = 0; e < probe[k].size(); ++e) {
      const double orig = probe[k](e);
      probe[k](e) = orig + step;
      const double up = evaluate_scalar(f, probe);
      probe[k](e) = orig - step;
      const double down = evaluate_scalar(f, probe);
      probe[k](e) = orig;
      record(rep, k, e, analytic(e), (up - down) / (2.0 * step));
    }
  }
  rep.passed = rep.max_rel_error <= tol;
  return rep;
}

GradCheckReport grad_check(const ScalarFn& f, const Matrix& x, double tol, double step) {
  const MultiScalarFn wrapped = [&f](Tape& tape, std::span<const Tensor> in) { return f(tape, in[0]); };
  const Matrix xs[] = {x};
  return grad_check(wrapped, std::span<const Matrix>(xs), tol, step);
}

GradCheckReport grad_check(const ValueFn& value, const GradientFn& gradient, const Matrix& x,
                           double tol, double step) {
  GradCheckReport rep;
  rep.tolerance = tol;
  const Matrix analytic = gradient(x);
  if (analytic.rows() != x.rows() || analytic.cols() != x.cols()) {
    throw ShapeError("grad_check: gradient shape differs from input shape");
  }
  Matrix probe = x;
  for (Index e = 0; e < probe.size(); ++e) {
    const double orig = probe(e);
    probe(e) = orig + step;
    const double up = value(probe);
    probe(e) = orig - step;
    const double down = value(probe);
    probe(e) = orig;
    record(rep, 0, e, analytic(e), (up - down) / (2.0 * step));
  }
  rep.passed = rep.max_rel_error <= tol;
  return rep;
}

namespace {

class InputGen {
 public:
  explicit InputGen(std::uint64_t seed) : rng_(seed) {}

  Matrix uniform(Index r, Index c, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Matrix m(r, c);
    for (Index k = 0; k < m.size(); ++k) m(k) = d(rng_);
    return m;
  }

  // Entries bounded away from zero by `margin`.
  Matrix away_from_zero(Index r, Index c, double margin = 1e-3) {
    Matrix m = uniform(r, c);
    for (Index k = 0; k < m.size(); ++k) {
      const double mag = margin + 0.1 + std::abs(m(k));
      m(k) = m(k) < 0 ? -mag : mag;
    }
    return m;
  }

  // All entries pairwise separated by at least `margin`, so max has a
  // unique, stable argmax under the finite-difference step.
  Matrix distinct(Index r, Index c, double margin = 1e-3) {
    for (;;) {
      Matrix m = uniform(r, c);
      std::vector<double> v(m.data(), m.data() + m.size());
      std::sort(v.begin(), v.end());
      bool ok = true;
      for (std::size_t k = 1; k < v.size(); ++k) ok = ok && (v[k] - v[k - 1] >= margin);
      if (ok) return m;
    }
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

std::vector<GradCheckReport> primitive_gradient_suite(std::uint64_t seed, double tol) {
  InputGen gen(seed);
  std::vector<GradCheckReport> out;

  // Each unary case is contracted against a fixed random weight so that the
  // scalar output has a non-trivial gradient (plain sum(softmax) is constant).
  auto unary_case = [&](const std::string& label, const Matrix& x,
                        const std::function<Tensor(const Tensor&)>& op) {
    Tape shape_tape;
    const Matrix y = op(shape_tape.constant(x)).value();
    const Matrix w = gen.uniform(y.rows(), y.cols());
    const ScalarFn f = [&op, w](Tape& tape, const Tensor& in) {
      return sum(mul(op(in), tape.constant(w)));
    };
    GradCheckReport rep = grad_check(f, x, tol);
    rep.label = label;
    out.push_back(rep);
  };

  auto multi_case = [&](const std::string& label, std::vector<Matrix> xs,
                        const std::function<Tensor(std::span<const Tensor>)>& op) {
    Tape shape_tape;
    std::vector<Tensor> cs;
    for (const Matrix& x : xs) cs.push_back(shape_tape.constant(x));
    const Matrix y = op(cs).value();
    const Matrix w = gen.uniform(y.rows(), y.cols());
    const MultiScalarFn f = [&op, w](Tape& tape, std::span<const Tensor> in) {
      return sum(mul(op(in), tape.constant(w)));
    };
    GradCheckReport rep = grad_check(f, std::span<const Matrix>(xs), tol);
    rep.label = label;
    out.push_back(rep);
  };

  multi_case("matmul", {gen.uniform(3, 4), gen.uniform(4, 2)},
             [](std::span<const Tensor> in) { return matmul(in[0], in[1]); });
  unary_case("transpose", gen.uniform(3, 5), [](const Tensor& a) { return transpose(a); });
  multi_case("add", {gen.uniform(3, 3), gen.uniform(3, 3)},
             [](std::span<const Tensor> in) { return add(in[0], in[1]); });
  multi_case("sub", {gen.uniform(3, 3), gen.uniform(3, 3)},
             [](std::span<const Tensor> in) { return sub(in[0], in[1]); });
  multi_case("mul", {gen.uniform(3, 4), gen.uniform(3, 4)},
             [](std::span<const Tensor> in) { return mul(in[0], in[1]); });
  unary_case("scale", gen.uniform(2, 3), [](const Tensor& a) { return scale(a, -1.7); });
  unary_case("add_scalar", gen.uniform(2, 3), [](const Tensor& a) { return add_scalar(a, 0.3); });
  multi_case("concat_rows", {gen.uniform(2, 3), gen.uniform(4, 3), gen.uniform(1, 3)},
             [](std::span<const Tensor> in) { return concat_rows(in); });
  multi_case("concat_cols", {gen.uniform(3, 2), gen.uniform(3, 1)},
             [](std::span<const Tensor> in) { return concat_cols(in); });
  unary_case("slice_rows", gen.uniform(5, 3), [](const Tensor& a) { return slice_rows(a, 1, 3); });
  unary_case("slice_cols", gen.uniform(3, 5), [](const Tensor& a) { return slice_cols(a, 2, 2); });
  unary_case("row_softmax", gen.uniform(4, 5, -2.0, 2.0), [](const Tensor& a) { return row_softmax(a); });
  {
    auto mask = std::make_shared<Matrix>(Matrix::Zero(4, 5));
    *mask << 1, 0, 1, 1, 0,  //
        0, 0, 0, 0, 0,       // fully masked row
        1, 1, 1, 1, 1,       //
        0, 0, 1, 0, 0;
    unary_case("masked_row_softmax", gen.uniform(4, 5, -2.0, 2.0),
               [mask](const Tensor& a) { return masked_row_softmax(a, mask); });
  }
  unary_case("log_softmax_rows", gen.uniform(3, 4, -2.0, 2.0),
             [](const Tensor& a) { return log_softmax_rows(a); });
  unary_case("leaky_relu", gen.away_from_zero(4, 4), [](const Tensor& a) { return leaky_relu(a, 0.2); });
  unary_case("elu", gen.away_from_zero(4, 4), [](const Tensor& a) { return elu(a); });
  unary_case("tanh", gen.uniform(3, 4, -2.0, 2.0), [](const Tensor& a) { return tanh(a); });
  unary_case("exp", gen.uniform(3, 3), [](const Tensor& a) { return exp(a); });
  unary_case("row_mean", gen.uniform(4, 3), [](const Tensor& a) { return row_mean(a); });
  unary_case("col_mean", gen.uniform(4, 3), [](const Tensor& a) { return col_mean(a); });
  unary_case("row_max", gen.distinct(4, 5), [](const Tensor& a) { return row_max(a); });
  unary_case("col_max", gen.distinct(5, 4), [](const Tensor& a) { return col_max(a); });
  unary_case("row_l2_normalize", gen.away_from_zero(4, 3),
             [](const Tensor& a) { return row_l2_normalize(a); });
  multi_case("add_row_broadcast", {gen.uniform(4, 3), gen.uniform(1, 3)},
             [](std::span<const Tensor> in) { return add_row_broadcast(in[0], in[1]); });
  multi_case("add_col_broadcast", {gen.uniform(4, 3), gen.uniform(4, 1)},
             [](std::span<const Tensor> in) { return add_col_broadcast(in[0], in[1]); });
  multi_case("mul_col_broadcast", {gen.uniform(4, 3), gen.uniform(4, 1)},
             [](std::span<const Tensor> in) { return mul_col_broadcast(in[0], in[1]); });
  unary_case("sum", gen.uniform(3, 2), [](const Tensor& a) { return sum(a); });
  unary_case("col_softmax", gen.uniform(4, 3, -2.0, 2.0), [](const Tensor& a) { return col_softmax(a); });
  unary_case("shared_leaf_two_branches", gen.uniform(3, 3), [](const Tensor& a) {
    return add(tanh(a), matmul(a, transpose(a)));
  });
  return out;
}

}  // namespace hetfuse::ad
